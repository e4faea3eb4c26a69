//! Equilibrium heat predictions: the additive high-temperature ansatz and the
//! variational polaron (Silbey–Harris) theory.

use crate::bathcorr::BathParams;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadPolicy};
use crate::scalar::{Cplx, Real};
use crate::spinsys::{SpinParams, SpinState};

const MIXING: f64 = 0.5;
const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;
const SCAN_POINTS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionSource {
    Additive,
    Variational,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPrediction<R> {
    pub mean_heat: R,
    pub delta_u: R,
    pub source: PredictionSource,
}

fn require_unbiased<R: Real>(spin: &SpinParams<R>) -> Result<()> {
    if spin.omega0 != R::zero() {
        return Err(Error::Unsupported("equilibrium predictions assume omega0 = 0".into()));
    }
    Ok(())
}

/// `⟨Q⟩_∞ = E_r + (Ω/2)tanh(βΩ/2) + ⟨H_S⟩₀`.
pub fn additive_prediction<R: Real>(
    spin: &SpinParams<R>,
    bath: &BathParams<R>,
    state: &SpinState<R>,
) -> Result<EquilibriumPrediction<R>> {
    require_unbiased(spin)?;
    let om = spin.omega_tunnel;
    let delta_u = -R::lit(0.5) * om * (R::lit(0.5) * bath.beta() * om).tanh() - state.energy(spin);
    Ok(EquilibriumPrediction {
        mean_heat: bath.spectral().reorganisation_energy() - delta_u,
        delta_u,
        source: PredictionSource::Additive,
    })
}

/// Self-consistent variational parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalSolution<R> {
    pub omega_renorm: R,
    pub e_r_renorm: R,
    pub free_energy_bound: R,
    pub iterations: usize,
    pub converged: bool,
    /// `|Ω' − Ω·exp(−I(Ω'))|`.
    pub residual: R,
    pub spin: SpinParams<R>,
    pub bath: BathParams<R>,
}

impl<R: Real> VariationalSolution<R> {
    /// Displacement ratio `φ(ω)` at the solution.
    pub fn phi(&self, omega: R) -> R {
        phi(&self.bath, self.omega_renorm, omega)
    }
}

/// `φ(ω) = [1 + (Ω'/ω)tanh(βΩ'/2)coth(βω/2)]⁻¹`.
pub fn phi<R: Real>(bath: &BathParams<R>, omega_renorm: R, omega: R) -> R {
    let a = omega_renorm * (R::lit(0.5) * bath.beta() * omega_renorm).tanh();
    let w2 = omega * omega;
    if a == R::zero() {
        return R::one();
    }
    w2 / (w2 + a * bath.omega_coth(omega))
}

fn breaks<R: Real>(bath: &BathParams<R>, omega_renorm: R) -> Vec<R> {
    let wc = bath.spectral().omega_c();
    let mut lo = wc.min(bath.temperature());
    if omega_renorm > R::zero() {
        lo = lo.min(omega_renorm);
    }
    lo *= R::lit(1e-5);
    let mut b = vec![R::zero()];
    let mut x = lo;
    while x < wc {
        b.push(x);
        x *= R::lit(2.0);
    }
    let top = bath.spectral().upper_limit();
    let step = R::lit(0.5) * wc;
    let mut x = wc;
    while x < top {
        b.push(x);
        x += step;
    }
    b.push(top);
    b
}

/// `[I, E_r', ∫Jφ(φ−2)/(4ω)]` at trial `Ω'`, with
/// `I = ½∫J/ω²·φ²·coth(βω/2)`. `I` is infinite at `Ω' = 0`.
fn integrals<R: Real>(bath: &BathParams<R>, omega_renorm: R, policy: &QuadPolicy<R>) -> Result<[R; 3]> {
    let spec = *bath.spectral();
    let half = R::lit(0.5);
    let quarter = R::lit(0.25);
    let a = omega_renorm * (half * bath.beta() * omega_renorm).tanh();
    let f = |w: R| {
        let jw = spec.over_omega(w);
        let wc = bath.omega_coth(w);
        let den = w * w + a * wc;
        let p = if a == R::zero() { R::one() } else { w * w / den };
        let i_term = if a == R::zero() { R::zero() } else { half * jw * p * wc / den };
        let z = |x: R| Cplx::new(x, R::zero());
        [z(i_term), z(half * jw * p), z(quarter * jw * p * (p - R::lit(2.0)))]
    };
    let v = integrate(f, &breaks(bath, omega_renorm), policy)?.value;
    let i = if a == R::zero() { R::infinity() } else { v[0].re };
    Ok([i, v[1].re, v[2].re])
}

/// `Ω·exp(−I(Ω'))`.
pub fn renormalization_map<R: Real>(spin: &SpinParams<R>, bath: &BathParams<R>, omega_renorm: R) -> Result<R> {
    let [i, _, _] = integrals(bath, omega_renorm, &QuadPolicy::default())?;
    Ok(spin.omega_tunnel * (-i).exp())
}

/// Feynman–Bogoliubov bound `F_B = ∫Jφ(φ−2)/(4ω) − T ln(2cosh(βΩ'/2))`.
pub fn free_energy_bound<R: Real>(bath: &BathParams<R>, omega_renorm: R) -> Result<R> {
    let [_, _, c] = integrals(bath, omega_renorm, &QuadPolicy::default())?;
    let x = R::lit(0.5) * bath.beta() * omega_renorm;
    // ln(2cosh x) = |x| + ln(1 + e^{−2|x|})
    let lncosh2 = x.abs() + (-R::lit(2.0) * x.abs()).exp().ln_1p();
    Ok(c - bath.temperature() * lncosh2)
}

fn solution_at<R: Real>(
    spin: &SpinParams<R>,
    bath: &BathParams<R>,
    omega_renorm: R,
    iterations: usize,
    converged: bool,
) -> Result<VariationalSolution<R>> {
    let policy = QuadPolicy::default();
    let [i, e_r, _] = integrals(bath, omega_renorm, &policy)?;
    let residual = (omega_renorm - spin.omega_tunnel * (-i).exp()).abs();
    Ok(VariationalSolution {
        omega_renorm,
        e_r_renorm: e_r,
        free_energy_bound: free_energy_bound(bath, omega_renorm)?,
        iterations,
        converged,
        residual,
        spin: *spin,
        bath: *bath,
    })
}

/// Solves `Ω' = Ω·exp(−I(Ω'))`. Damped iteration from `Ω' = Ω` is combined
/// with a scan and bisection over `(0, Ω]`; among all fixed points found
/// (including `Ω' = 0`) the one with the lowest free-energy bound is returned.
pub fn solve_silbey_harris<R: Real>(spin: &SpinParams<R>, bath: &BathParams<R>) -> Result<VariationalSolution<R>> {
    require_unbiased(spin)?;
    let om = spin.omega_tunnel.abs();
    let spin = &SpinParams::unbiased(om);
    let tol = R::lit(TOLERANCE);
    if om == R::zero() {
        return solution_at(spin, bath, R::zero(), 0, true);
    }
    let map = |x: R| renormalization_map(spin, bath, x);

    // Damped fixed-point iteration.
    let mix = R::lit(MIXING);
    let mut x = om;
    let mut iterations = 0;
    let mut iter_converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let fx = map(x)?;
        if (fx - x).abs() < tol {
            x = fx;
            iter_converged = true;
            break;
        }
        x = mix * x + (R::one() - mix) * fx;
    }

    // Scan g(x) = x − map(x) on a log grid and bisect sign changes.
    let mut candidates = vec![R::zero()];
    if iter_converged {
        candidates.push(x);
    }
    let lo = om * R::lit(1e-8);
    let ratio = (om / lo).powf(R::one() / R::from_usize_lossy(SCAN_POINTS));
    let mut a = lo;
    let mut ga = a - map(a)?;
    for _ in 0..SCAN_POINTS {
        let b = (a * ratio).min(om);
        let gb = b - map(b)?;
        if ga == R::zero() {
            candidates.push(a);
        } else if ga.signum() != gb.signum() {
            let (mut l, mut r, mut gl) = (a, b, ga);
            for _ in 0..200 {
                let m = R::lit(0.5) * (l + r);
                let gm = m - map(m)?;
                if gm.signum() == gl.signum() {
                    l = m;
                    gl = gm;
                } else {
                    r = m;
                }
                if r - l < tol * R::lit(0.01) {
                    break;
                }
            }
            candidates.push(R::lit(0.5) * (l + r));
        }
        a = b;
        ga = gb;
    }

    let mut best: Option<VariationalSolution<R>> = None;
    for c in candidates {
        let converged = c == R::zero() || (c - map(c)?).abs() < tol;
        let sol = solution_at(spin, bath, c, iterations, converged)?;
        if !sol.converged {
            continue;
        }
        if best.is_none_or(|b| sol.free_energy_bound < b.free_energy_bound) {
            best = Some(sol);
        }
    }
    match best {
        Some(s) => Ok(s),
        // Unreachable in practice: Ω' = 0 is always a fixed point.
        None => solution_at(spin, bath, x, iterations, false),
    }
}

/// `⟨Q⟩_∞ = E_r' + (Ω'/2)tanh(βΩ'/2) + ⟨H_S⟩₀`.
pub fn variational_prediction<R: Real>(
    solution: &VariationalSolution<R>,
    state: &SpinState<R>,
) -> Result<EquilibriumPrediction<R>> {
    if !solution.converged {
        return Err(Error::Refused("variational solution did not converge".into()));
    }
    let om = solution.omega_renorm;
    let delta_u = -R::lit(0.5) * om * (R::lit(0.5) * solution.bath.beta() * om).tanh() - state.energy(&solution.spin);
    Ok(EquilibriumPrediction {
        mean_heat: solution.e_r_renorm - delta_u,
        delta_u,
        source: PredictionSource::Variational,
    })
}
