//! Heat cumulants from characteristic-function samples, the thermodynamic
//! ledger and the fluctuation-dissipation ratio.

use crate::bathcorr::BathParams;
use crate::error::{invalid, Error, Result};
use crate::scalar::{Cplx, Real};
use crate::spinsys::{SpinParams, SpinState};
use crate::tempo::CharSeries;

/// Largest counting field accepted for finite differences.
pub const MAX_U_EPS: f64 = 0.1;

/// Default counting field for a given coupling strength.
pub fn default_u_eps<R: Real>(alpha: R, omega_c: R) -> R {
    if omega_c >= R::lit(50.0) {
        R::lit(0.001)
    } else if alpha >= R::one() {
        R::lit(0.005)
    } else {
        R::lit(0.01)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatCumulants<R> {
    pub times: Vec<R>,
    pub mean_q: Vec<R>,
    /// Raw second moment `⟨Q²⟩`.
    pub second_moment: Vec<R>,
    pub var_q: Vec<R>,
    pub u_eps: R,
    /// Leading finite-difference error bound `u_eps·⟨Q²⟩`.
    pub fd_error_estimate: Vec<R>,
}

fn check_u<R: Real>(u_eps: R) -> Result<()> {
    if !(u_eps > R::zero() && u_eps <= R::lit(MAX_U_EPS)) {
        return Err(Error::Refused(format!("u_eps = {u_eps} outside (0, {MAX_U_EPS}]")));
    }
    Ok(())
}

/// Mean from `Im χ/u`, second moment from `−2(Re χ − 1)/u²`.
pub fn cumulants_from_chi<R: Real>(series: &CharSeries<R>, u_eps: R) -> Result<HeatCumulants<R>> {
    check_u(u_eps)?;
    if series.u != u_eps {
        return Err(invalid("u_eps", format!("series was produced at u = {}, not {u_eps}", series.u)));
    }
    Ok(cumulants_from_samples(&series.times, &series.chi, u_eps))
}

pub(crate) fn cumulants_from_samples<R: Real>(times: &[R], chi: &[Cplx<R>], u: R) -> HeatCumulants<R> {
    let two = R::lit(2.0);
    let mean_q: Vec<R> = chi.iter().map(|c| c.im / u).collect();
    let second_moment: Vec<R> = chi.iter().map(|c| -two * (c.re - R::one()) / (u * u)).collect();
    let var_q = mean_q.iter().zip(&second_moment).map(|(m, s)| *s - *m * *m).collect();
    let fd_error_estimate = second_moment.iter().map(|s| u * s.abs()).collect();
    HeatCumulants { times: times.to_vec(), mean_q, second_moment, var_q, u_eps: u, fd_error_estimate }
}

/// Symmetric three-point second moment `−(χ(u) + χ(−u) − 2)/u²` from two runs.
pub fn three_point_second_moment<R: Real>(plus: &CharSeries<R>, minus: &CharSeries<R>) -> Result<Vec<R>> {
    if plus.chi.len() != minus.chi.len() || plus.u != -minus.u {
        return Err(invalid("series", "need runs at +u and -u on the same grid"));
    }
    let u = plus.u;
    Ok(plus
        .chi
        .iter()
        .zip(&minus.chi)
        .map(|(a, b)| -((*a + *b).re - R::lit(2.0)) / (u * u))
        .collect())
}

/// First- and second-law bookkeeping on the cumulant grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoLedger<R> {
    pub times: Vec<R>,
    pub delta_u: Vec<R>,
    pub delta_s: Vec<R>,
    pub mean_w: Vec<R>,
    pub sigma: Vec<R>,
}

/// `ΔU` and `ΔS` from the `u = 0` states; `⟨W⟩ = ⟨Q⟩ + ΔU`, `⟨Σ⟩ = ΔS + β⟨Q⟩`.
pub fn thermo_ledger<R: Real>(
    states: &[SpinState<R>],
    cumulants: &HeatCumulants<R>,
    spin: &SpinParams<R>,
    bath: &BathParams<R>,
) -> Result<ThermoLedger<R>> {
    if states.len() != cumulants.times.len() || states.is_empty() {
        return Err(Error::Shape(format!(
            "{} states for {} cumulant times",
            states.len(),
            cumulants.times.len()
        )));
    }
    let e0 = states[0].energy(spin);
    let s0 = states[0].entropy();
    let delta_u: Vec<R> = states.iter().map(|s| s.energy(spin) - e0).collect();
    let delta_s: Vec<R> = states.iter().map(|s| s.entropy() - s0).collect();
    let mean_w = cumulants.mean_q.iter().zip(&delta_u).map(|(q, u)| *q + *u).collect();
    let beta = bath.beta();
    let sigma = cumulants.mean_q.iter().zip(&delta_s).map(|(q, s)| *s + beta * *q).collect();
    Ok(ThermoLedger { times: cumulants.times.clone(), delta_u, delta_s, mean_w, sigma })
}

/// `⟨⟨Q²⟩⟩/(T⟨Q⟩)` per time; `None` where `⟨Q⟩ < 10⁻⁹`.
pub fn fdr_ratio<R: Real>(cumulants: &HeatCumulants<R>, bath: &BathParams<R>) -> Vec<Option<R>> {
    let t = bath.temperature();
    cumulants
        .mean_q
        .iter()
        .zip(&cumulants.var_q)
        .map(|(q, v)| if *q < R::lit(1e-9) { None } else { Some(*v / (t * *q)) })
        .collect()
}
