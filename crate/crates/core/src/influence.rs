//! Influence-functional pair weights
//! `I_Δk(σ, σ') = exp(−Σ_{q,q'} s^q η^{qq'}_Δk s'^{q'})` with `σ` at the later time.

use crate::bathcorr::EtaTable;
use crate::error::Result;
use crate::scalar::{czero, Cplx, Real};
use crate::spinsys::{spin_value, split_super};

/// 4×4 weight table indexed `[σ_later][σ_earlier]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairWeight<R> {
    pub lag: usize,
    pub table: [[Cplx<R>; 4]; 4],
}

impl<R: Real> PairWeight<R> {
    #[inline]
    pub fn get(&self, later: usize, earlier: usize) -> Cplx<R> {
        self.table[later][earlier]
    }

    /// Same-time weight `I(σ, σ)`, the only entries used at lag 0.
    pub fn diagonal(&self) -> [Cplx<R>; 4] {
        std::array::from_fn(|s| self.table[s][s])
    }
}

/// Exchanges the forward and backward components of a super-index.
#[inline]
pub fn swap_branches(sigma: usize) -> usize {
    let (p, m) = split_super(sigma);
    2 * m + p
}

/// Weight table at `lag` from the coefficient table.
pub fn pair_weight<R: Real>(table: &EtaTable<R>, lag: usize) -> Result<PairWeight<R>> {
    let eta = table.branches(lag)?;
    let mut out = [[czero(); 4]; 4];
    for (later, row) in out.iter_mut().enumerate() {
        let (a, b) = split_super(later);
        let s = [spin_value::<R>(a), spin_value::<R>(b)];
        for (earlier, v) in row.iter_mut().enumerate() {
            let (c, d) = split_super(earlier);
            let sp = [spin_value::<R>(c), spin_value::<R>(d)];
            let mut exponent = czero();
            for q in 0..2 {
                for qp in 0..2 {
                    exponent += eta[q][qp] * (s[q] * sp[qp]);
                }
            }
            *v = (-exponent).exp();
        }
    }
    Ok(PairWeight { lag, table: out })
}

/// Weights for every lag `0..=depth` of the table.
pub fn all_pair_weights<R: Real>(table: &EtaTable<R>) -> Result<Vec<PairWeight<R>>> {
    (0..=table.depth()).map(|k| pair_weight(table, k)).collect()
}
