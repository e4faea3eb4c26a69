//! Dense path-sum propagation of the augmented density tensor. Exponential in
//! the memory depth; used as the reference engine for small `K`.

use crate::bathcorr::EtaTable;
use crate::error::{Error, Result};
use crate::influence::{all_pair_weights, PairWeight};
use crate::scalar::{cone, czero, Cplx, Real};
use crate::spinsys::{apply_super, free_propagator, modified_initial, FreePropagator, Mat2, SpinParams, SpinState};
use crate::tempo::CharSeries;

/// Largest memory depth accepted by the dense engine.
pub const MAX_DENSE_DEPTH: usize = 12;

/// `(1, 0, 0, 1)`: contracting a super-index with it takes the trace.
pub fn trace_vector<R: Real>() -> [Cplx<R>; 4] {
    [cone(), czero(), czero(), cone()]
}

/// Free propagator plus the influence weights for lags `0..=K`.
#[derive(Debug, Clone)]
pub struct StepPropagator<R> {
    pub weights: Vec<PairWeight<R>>,
    pub free: FreePropagator<R>,
}

impl<R: Real> StepPropagator<R> {
    pub fn new(params: &SpinParams<R>, table: &EtaTable<R>) -> Result<Self> {
        Ok(Self { weights: all_pair_weights(table)?, free: free_propagator(params, table.delta())? })
    }

    pub fn depth(&self) -> usize {
        self.weights.len() - 1
    }

    /// `I₀(σ₀)·ρ'(σ₀)`, the single-index tensor at the first step.
    pub fn initial_vector(&self, state: &SpinState<R>, params: &SpinParams<R>) -> [Cplx<R>; 4] {
        let rho = modified_initial(state, params, self.free.delta).rho().to_super();
        let i0 = self.weights[0].diagonal();
        std::array::from_fn(|s| i0[s] * rho[s])
    }

    /// `χ` and the density matrix from the newest-index marginal.
    pub fn readout(&self, marginal: &[Cplx<R>; 4]) -> (Cplx<R>, SpinState<R>) {
        let tr = trace_vector::<R>();
        let chi = marginal.iter().zip(&tr).fold(czero(), |acc, (a, b)| acc + *a * *b);
        let rho = apply_super(&self.free.step_half, marginal);
        (chi, SpinState::unchecked(Mat2::from_super(&rho)))
    }
}

/// Dense window over the most recent path indices, newest index slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDensityTensor<R> {
    window: Vec<Cplx<R>>,
    indices: usize,
    step_index: usize,
}

impl<R: Real> AugmentedDensityTensor<R> {
    pub fn window(&self) -> &[Cplx<R>] {
        &self.window
    }

    pub fn indices(&self) -> usize {
        self.indices
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Sum over all indices except the newest.
    pub fn marginal(&self) -> [Cplx<R>; 4] {
        let block = self.window.len() / 4;
        std::array::from_fn(|s| self.window[s * block..(s + 1) * block].iter().copied().sum())
    }

    fn advance(&mut self, prop: &StepPropagator<R>) {
        let m = self.indices;
        let block = self.window.len();
        let mut next = vec![czero(); 4 * block];
        let g = &prop.free.step_full;
        let i0 = prop.weights[0].diagonal();
        for (new, chunk) in next.chunks_mut(block).enumerate() {
            for (rest, out) in chunk.iter_mut().enumerate() {
                let a = self.window[rest];
                if a == czero() {
                    continue;
                }
                let prev = rest / 4usize.pow(m as u32 - 1);
                let mut w = a * g[new][prev] * i0[new];
                for lag in 1..=m {
                    let digit = (rest / 4usize.pow((m - lag) as u32)) % 4;
                    w *= prop.weights[lag].get(new, digit);
                }
                *out = w;
            }
        }
        if m + 1 > prop.depth() {
            next = next.chunks(4).map(|c| c.iter().copied().sum()).collect();
        } else {
            self.indices += 1;
        }
        self.window = next;
        self.step_index += 1;
    }
}

/// Propagates `n_steps` steps and returns `χ(u, t_n)` together with the
/// (counting-field-modified) reduced density matrix at every `t_n = nΔ`.
pub fn dense_propagate<R: Real>(
    state: &SpinState<R>,
    params: &SpinParams<R>,
    table: &EtaTable<R>,
    n_steps: usize,
) -> Result<(CharSeries<R>, Vec<SpinState<R>>)> {
    if table.depth() > MAX_DENSE_DEPTH {
        return Err(Error::Unsupported(format!(
            "dense propagation needs 4^(K+1) entries; K = {} exceeds {MAX_DENSE_DEPTH}",
            table.depth()
        )));
    }
    let prop = StepPropagator::new(params, table)?;
    let mut series = CharSeries::start(table.delta(), table.u(), n_steps);
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(*state);
    if n_steps == 0 {
        return Ok((series, states));
    }
    let mut adt = AugmentedDensityTensor { window: prop.initial_vector(state, params).to_vec(), indices: 1, step_index: 1 };
    for n in 1..=n_steps {
        if n > 1 {
            adt.advance(&prop);
        }
        let (chi, rho) = prop.readout(&adt.marginal());
        if !(chi.re.is_finite() && chi.im.is_finite()) {
            return Err(Error::NumericalBlowup { step: n });
        }
        series.push(chi, 4usize.pow(adt.indices as u32 - 1), R::zero());
        states.push(rho);
    }
    Ok((series, states))
}
