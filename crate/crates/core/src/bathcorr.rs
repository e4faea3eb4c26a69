//! Ohmic bath, counting-field-dressed correlation integrals and their
//! discretisation into influence-functional coefficients.
//!
//! Three kernels enter the modified influence functional: `C` (odd in the
//! counting field `u`), `A1` and `A2` (even in `u`). Every integrand is
//! written in terms of `J(ω)/ω`, `ω·coth(βω/2)` and sinc-like factors, so the
//! `ω → 0` end of the frequency integral is evaluated through its analytic
//! limit rather than by dividing small numbers.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quad::{breakpoints, integrate, QuadPolicy};
use crate::scalar::{
    cplx, one_minus_cos_over_sq, sin_minus_id_over, sinc, x_coth_x, Cplx, Real,
};

/// Ohmic spectral density `J(ω) = 2αω·exp(-ω/ω_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity<R> {
    alpha: R,
    omega_c: R,
}

impl<R: Real> SpectralDensity<R> {
    pub fn new(alpha: R, omega_c: R) -> Result<Self> {
        if !(alpha >= R::zero()) || !alpha.is_finite() {
            return Err(invalid("alpha", format!("must be finite and >= 0, got {alpha}")));
        }
        if !(omega_c > R::zero()) || !omega_c.is_finite() {
            return Err(invalid("omega_c", format!("must be finite and > 0, got {omega_c}")));
        }
        Ok(Self { alpha, omega_c })
    }

    pub fn alpha(&self) -> R {
        self.alpha
    }

    pub fn omega_c(&self) -> R {
        self.omega_c
    }

    /// `J(ω)`; negative frequencies are a domain error.
    pub fn value(&self, omega: R) -> Result<R> {
        if omega < R::zero() || omega.is_nan() {
            return Err(Error::Domain(format!("J(ω) needs ω >= 0, got {omega}")));
        }
        Ok(omega * self.over_omega(omega))
    }

    /// `J(ω)/ω`, finite at the origin.
    #[inline]
    pub fn over_omega(&self, omega: R) -> R {
        R::lit(2.0) * self.alpha * (-omega / self.omega_c).exp()
    }

    /// `E_r = ½∫ J(ω)/ω dω = α·ω_c`.
    pub fn reorganisation_energy(&self) -> R {
        self.alpha * self.omega_c
    }

    /// Upper frequency limit used by all quadratures (`60·ω_c`).
    pub fn upper_limit(&self) -> R {
        R::lit(60.0) * self.omega_c
    }
}

/// Bath temperature together with its spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams<R> {
    temperature: R,
    spectral: SpectralDensity<R>,
}

impl<R: Real> BathParams<R> {
    pub fn new(temperature: R, spectral: SpectralDensity<R>) -> Result<Self> {
        if !(temperature > R::zero()) || !temperature.is_finite() {
            return Err(invalid(
                "temperature",
                format!("must be finite and > 0 (zero temperature is not supported), got {temperature}"),
            ));
        }
        Ok(Self { temperature, spectral })
    }

    pub fn ohmic(alpha: R, omega_c: R, temperature: R) -> Result<Self> {
        Self::new(temperature, SpectralDensity::new(alpha, omega_c)?)
    }

    pub fn temperature(&self) -> R {
        self.temperature
    }

    pub fn beta(&self) -> R {
        R::one() / self.temperature
    }

    pub fn spectral(&self) -> &SpectralDensity<R> {
        &self.spectral
    }

    /// `ω·coth(βω/2)`, which tends to `2T` at the origin.
    #[inline]
    pub fn omega_coth(&self, omega: R) -> R {
        R::lit(2.0) * self.temperature * x_coth_x(R::lit(0.5) * omega / self.temperature)
    }

    /// `coth(βω/2)` for `ω > 0`.
    #[inline]
    pub fn coth(&self, omega: R) -> R {
        self.omega_coth(omega) / omega
    }
}

/// The three counting-field correlation kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EtaKind {
    C,
    A1,
    A2,
}

impl EtaKind {
    pub const ALL: [EtaKind; 3] = [EtaKind::C, EtaKind::A1, EtaKind::A2];

    fn slot(self) -> usize {
        match self {
            EtaKind::C => 0,
            EtaKind::A1 => 1,
            EtaKind::A2 => 2,
        }
    }
}

/// Forward (`+`) or backward (`-`) Keldysh branch of a path variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn slot(self) -> usize {
        match self {
            Branch::Plus => 0,
            Branch::Minus => 1,
        }
    }
}

/// How continuous correlations are turned into lag coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Discretization {
    /// Lag `k ≥ 1`: second difference `η((k+1)Δ) - 2η(kΔ) + η((k-1)Δ)`;
    /// lag 0: `η(Δ)`.
    #[default]
    CellIntegrated,
    /// `η_k = η(kΔ)` for every lag, including `η_0 = η(0) = 0`.
    PointEvaluated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaOptions<R> {
    pub scheme: Discretization,
    pub quad: QuadPolicy<R>,
    /// Declared bath memory time; a table shorter than this carries a warning.
    pub memory_time: Option<R>,
    pub parallel: bool,
}

impl<R: Real> Default for EtaOptions<R> {
    fn default() -> Self {
        Self { scheme: Discretization::default(), quad: QuadPolicy::default(), memory_time: None, parallel: true }
    }
}

pub(crate) fn panel_width<R: Real>(bath: &BathParams<R>, scales: &[R]) -> R {
    let fastest = scales.iter().fold(R::zero(), |m, s| m.max(s.abs()));
    let oscill = if fastest > R::zero() { R::PI() / (R::lit(4.0) * fastest) } else { R::infinity() };
    oscill.min(R::lit(0.5) * bath.spectral().omega_c())
}

/// All three continuous kernels `[η^C, η^A1, η^A2](t, u)` from one frequency pass.
pub fn eta_continuous_all<R: Real>(
    bath: &BathParams<R>,
    t: R,
    u: R,
    policy: &QuadPolicy<R>,
) -> Result<[Cplx<R>; 3]> {
    if t < R::zero() || !t.is_finite() {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    let half = R::lit(0.5);
    let spec = *bath.spectral();
    let integrand = |w: R| {
        let jw = spec.over_omega(w);
        let wc = bath.omega_coth(w);
        let x = w * t;
        let oc = t * t * one_minus_cos_over_sq(x);
        let sm = t * sin_minus_id_over(x);
        let (su, cu) = (half * u * w).sin_cos();
        // sin(uω)/2 = sin(uω/2)cos(uω/2)
        let s_half = su * cu;
        let c_part = cplx(
            jw * u * half * sinc(u * w) * wc * sm,
            -jw * s_half * w * oc,
        );
        let a_bracket = cplx(wc * oc, sm);
        [c_part, a_bracket * (jw * cu * cu), a_bracket * (jw * su * su)]
    };
    let br = breakpoints(R::zero(), spec.upper_limit(), panel_width(bath, &[t, u]));
    Ok(integrate(integrand, &br, policy)?.value)
}

/// Continuous correlation `η^kind(t, u)` by adaptive quadrature.
pub fn eta_continuous<R: Real>(kind: EtaKind, bath: &BathParams<R>, t: R, u: R) -> Result<Cplx<R>> {
    eta_continuous_with(kind, bath, t, u, &QuadPolicy::default())
}

pub fn eta_continuous_with<R: Real>(
    kind: EtaKind,
    bath: &BathParams<R>,
    t: R,
    u: R,
    policy: &QuadPolicy<R>,
) -> Result<Cplx<R>> {
    Ok(eta_continuous_all(bath, t, u, policy)?[kind.slot()])
}

/// Cell-integrated coefficient for lag `k ≥ 1`, integrating the closed-form
/// second difference of the time kernel (`4 sin²(ωΔ/2)` factor).
fn eta_lag_all<R: Real>(
    bath: &BathParams<R>,
    delta: R,
    lag: usize,
    u: R,
    policy: &QuadPolicy<R>,
) -> Result<[Cplx<R>; 3]> {
    debug_assert!(lag >= 1);
    let half = R::lit(0.5);
    let tk = delta * R::from_usize_lossy(lag);
    let spec = *bath.spectral();
    let integrand = |w: R| {
        let jw = spec.over_omega(w);
        let wc = bath.omega_coth(w);
        let sd = delta * sinc(half * w * delta);
        let cell = sd * sd;
        let (sk, ck) = (w * tk).sin_cos();
        let (su, cu) = (half * u * w).sin_cos();
        let s_half = su * cu;
        let c_part = cplx(-wc * sk, -w * ck) * (jw * s_half * cell);
        let a_bracket = cplx(wc * ck, -w * sk) * (jw * cell);
        [c_part, a_bracket * (cu * cu), a_bracket * (su * su)]
    };
    let br = breakpoints(R::zero(), spec.upper_limit(), panel_width(bath, &[tk + delta, u]));
    Ok(integrate(integrand, &br, policy)?.value)
}

/// Assembles the four branch combinations from `[η^C, η^A1, η^A2]`:
/// `η^{++} = A1 + A2 = (η^{--})*`, `η^{-+} = A2 - A1 + 2C`,
/// `η^{+-} = (A2 - A1 - 2C)*`. Indexed `[q][q']`, `+` first.
pub fn assemble_branches<R: Real>(kinds: &[Cplx<R>; 3]) -> [[Cplx<R>; 2]; 2] {
    let [c, a1, a2] = *kinds;
    let two = R::lit(2.0);
    let pp = a1 + a2;
    let mp = a2 - a1 + c * two;
    let pm = (a2 - a1 - c * two).conj();
    [[pp, pm], [mp, pp.conj()]]
}

/// Discretised, counting-field-dressed influence coefficients for lags
/// `0..=depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaTable<R> {
    delta: R,
    depth: usize,
    u: R,
    scheme: Discretization,
    kinds: Vec<[Cplx<R>; 3]>,
    coeffs: Vec<[[Cplx<R>; 2]; 2]>,
    warnings: Vec<String>,
}

impl<R: Real> EtaTable<R> {
    /// Builds a table directly from per-lag kernel values `[C, A1, A2]`.
    pub fn from_kinds(delta: R, u: R, scheme: Discretization, kinds: Vec<[Cplx<R>; 3]>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(invalid("kinds", "need at least the lag-0 entry"));
        }
        let coeffs = kinds.iter().map(assemble_branches).collect();
        Ok(Self { delta, depth: kinds.len() - 1, u, scheme, kinds, coeffs, warnings: Vec::new() })
    }

    pub fn delta(&self) -> R {
        self.delta
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn u(&self) -> R {
        self.u
    }

    pub fn scheme(&self) -> Discretization {
        self.scheme
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `η^{qq'}_{lag}(u)`.
    pub fn eta(&self, q: Branch, qp: Branch, lag: usize) -> Result<Cplx<R>> {
        self.coeffs
            .get(lag)
            .map(|c| c[q.slot()][qp.slot()])
            .ok_or(Error::LagOutOfRange { lag, depth: self.depth })
    }

    /// Branch matrix `[q][q']` at `lag`.
    pub fn branches(&self, lag: usize) -> Result<&[[Cplx<R>; 2]; 2]> {
        self.coeffs.get(lag).ok_or(Error::LagOutOfRange { lag, depth: self.depth })
    }

    /// Discretised kernel `η^kind_{lag}(u)`.
    pub fn kind(&self, kind: EtaKind, lag: usize) -> Result<Cplx<R>> {
        self.kinds
            .get(lag)
            .map(|k| k[kind.slot()])
            .ok_or(Error::LagOutOfRange { lag, depth: self.depth })
    }

    /// `max_{qq'} |η^{qq'}_K| / |η^{qq'}_0|`, the relative size of the last
    /// retained lag.
    pub fn tail_ratio(&self) -> R {
        let first = &self.coeffs[0];
        let last = &self.coeffs[self.depth];
        let mut worst = R::zero();
        for q in 0..2 {
            for qp in 0..2 {
                let head = first[q][qp].norm();
                if head > R::zero() {
                    worst = worst.max(last[q][qp].norm() / head);
                }
            }
        }
        worst
    }
}

/// Computes the coefficient table for lags `0..=depth` at counting field `u`.
pub fn build_eta_table<R: Real>(
    bath: &BathParams<R>,
    delta: R,
    depth: usize,
    u: R,
    opts: &EtaOptions<R>,
) -> Result<EtaTable<R>> {
    if !(delta > R::zero()) || !delta.is_finite() {
        return Err(invalid("delta", format!("must be > 0, got {delta}")));
    }
    if depth < 1 {
        return Err(invalid("depth", "must be >= 1"));
    }
    if !u.is_finite() {
        return Err(invalid("u", "must be finite"));
    }
    let policy = opts.quad;
    let one_lag = |lag: usize| -> Result<[Cplx<R>; 3]> {
        match opts.scheme {
            Discretization::CellIntegrated if lag == 0 => eta_continuous_all(bath, delta, u, &policy),
            Discretization::CellIntegrated => eta_lag_all(bath, delta, lag, u, &policy),
            Discretization::PointEvaluated => {
                eta_continuous_all(bath, delta * R::from_usize_lossy(lag), u, &policy)
            }
        }
    };
    let kinds: Vec<[Cplx<R>; 3]> = if opts.parallel {
        (0..=depth).into_par_iter().map(one_lag).collect::<Result<_>>()?
    } else {
        (0..=depth).map(one_lag).collect::<Result<_>>()?
    };
    let mut table = EtaTable::from_kinds(delta, u, opts.scheme, kinds)?;
    if let Some(tau) = opts.memory_time {
        let span = delta * R::from_usize_lossy(depth);
        if span < tau {
            table.warnings.push(format!(
                "memory span depth*delta = {span} is shorter than the declared memory time {tau}"
            ));
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bath() -> BathParams<f64> {
        BathParams::ohmic(0.1, 5.0, 5.0).unwrap()
    }

    #[test]
    fn spectral_values() {
        let j = SpectralDensity::new(0.1, 5.0).unwrap();
        assert_eq!(j.value(0.0).unwrap(), 0.0);
        assert!((j.value(1.0).unwrap() - 0.2 * (-0.2f64).exp()).abs() < 1e-15);
        assert!((j.value(1.0).unwrap() - 0.163_746).abs() < 1e-6);
        let j = SpectralDensity::<f64>::new(1.5, 5.0).unwrap();
        assert!((j.value(5.0).unwrap() - 5.518_192).abs() < 1e-6);
        assert!(matches!(j.value(-1.0), Err(Error::Domain(_))));
        assert!(j.value(1e4).unwrap() < 1e-300);
    }

    #[test]
    fn parameter_validation() {
        assert!(SpectralDensity::new(-0.1, 5.0).is_err());
        assert!(SpectralDensity::new(0.1, 0.0).is_err());
        let j = SpectralDensity::new(0.1, 5.0).unwrap();
        assert!(BathParams::new(0.0, j).is_err());
        assert!(BathParams::new(-1.0, j).is_err());
    }

    #[test]
    fn reorganisation_energy_by_quadrature() {
        let j = SpectralDensity::<f64>::new(0.3, 4.0).unwrap();
        let br = breakpoints(0.0, j.upper_limit(), 1.0);
        let (v, _) = crate::quad::integrate_real(|w| 0.5 * j.over_omega(w), &br, &QuadPolicy::default()).unwrap();
        assert!((v - j.reorganisation_energy()).abs() < 1e-12);
    }

    #[test]
    fn kernels_vanish_at_zero_counting_field() {
        let b = bath();
        assert_eq!(eta_continuous(EtaKind::C, &b, 2.0, 0.0).unwrap().norm(), 0.0);
        assert_eq!(eta_continuous(EtaKind::A2, &b, 2.0, 0.0).unwrap().norm(), 0.0);
        assert_eq!(eta_continuous(EtaKind::A1, &b, 0.0, 0.3).unwrap().norm(), 0.0);
    }

    #[test]
    fn negative_time_rejected() {
        assert!(eta_continuous(EtaKind::A1, &bath(), -1.0, 0.0).is_err());
    }

    #[test]
    fn second_difference_integrand_matches_differenced_kernel() {
        let b = bath();
        let p = QuadPolicy::default();
        let d = 0.05;
        for &lag in &[1usize, 3, 17] {
            for &u in &[0.0, 0.01, 0.4] {
                let direct = eta_lag_all(&b, d, lag, u, &p).unwrap();
                let at = |k: usize| eta_continuous_all(&b, d * k as f64, u, &p).unwrap();
                let (lo, mid, hi) = (at(lag - 1), at(lag), at(lag + 1));
                for c in 0..3 {
                    let diff = hi[c] - mid[c] * 2.0 + lo[c];
                    assert!((diff - direct[c]).norm() < 1e-10, "lag {lag} u {u} kind {c}");
                }
            }
        }
    }

    #[test]
    fn decoupled_bath_gives_zero_table() {
        let b = BathParams::ohmic(0.0, 5.0, 1.0).unwrap();
        let t = build_eta_table(&b, 0.1, 4, 0.2, &EtaOptions::default()).unwrap();
        for lag in 0..=4 {
            for q in [Branch::Plus, Branch::Minus] {
                for qp in [Branch::Plus, Branch::Minus] {
                    assert_eq!(t.eta(q, qp, lag).unwrap().norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn table_conjugation_and_range() {
        let t = build_eta_table(&bath(), 0.05, 6, 0.3, &EtaOptions::default()).unwrap();
        for lag in 0..=6 {
            let pp = t.eta(Branch::Plus, Branch::Plus, lag).unwrap();
            let mm = t.eta(Branch::Minus, Branch::Minus, lag).unwrap();
            assert!((pp - mm.conj()).norm() < 1e-15);
        }
        assert!(matches!(t.eta(Branch::Plus, Branch::Plus, 7), Err(Error::LagOutOfRange { .. })));
    }

    #[test]
    fn memory_warning_recorded() {
        let opts = EtaOptions { memory_time: Some(5.0), ..EtaOptions::default() };
        let t = build_eta_table(&bath(), 0.1, 5, 0.0, &opts).unwrap();
        assert_eq!(t.warnings().len(), 1);
        let t = build_eta_table(&bath(), 0.1, 50, 0.0, &opts).unwrap();
        assert!(t.warnings().is_empty());
    }

    #[test]
    fn point_scheme_has_zero_self_coefficient() {
        let opts = EtaOptions { scheme: Discretization::PointEvaluated, ..EtaOptions::default() };
        let t = build_eta_table(&bath(), 0.1, 3, 0.1, &opts).unwrap();
        assert_eq!(t.kind(EtaKind::A1, 0).unwrap().norm(), 0.0);
        let direct = eta_continuous(EtaKind::A1, &bath(), 0.2, 0.1).unwrap();
        assert!((t.kind(EtaKind::A1, 2).unwrap() - direct).norm() < 1e-14);
    }
}
