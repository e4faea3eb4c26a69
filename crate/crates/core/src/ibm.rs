//! Independent-boson model (`Ω = 0`): closed-form characteristic function and
//! heat cumulants, used as an analytic oracle.

use crate::bathcorr::{panel_width, BathParams, SpectralDensity};
use crate::error::{invalid, Result};
use crate::quad::{breakpoints, integrate, integrate_real, QuadPolicy};
use crate::scalar::{cplx, one_minus_cos_over_sq, Cplx, Real};

/// Observation time. `Asymptotic` drops the oscillating `cos ωt` term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IbmTime<R> {
    Finite(R),
    Asymptotic,
}

impl<R: Real> IbmTime<R> {
    /// Nominal time reported for the asymptotic limit: `10⁴/ω_C`.
    pub fn nominal(&self, spectral: &SpectralDensity<R>) -> R {
        match *self {
            IbmTime::Finite(t) => t,
            IbmTime::Asymptotic => R::lit(1e4) / spectral.omega_c(),
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            IbmTime::Finite(t) if !(t >= R::zero()) || !t.is_finite() => {
                Err(invalid("t", format!("must be >= 0, got {t}")))
            }
            _ => Ok(()),
        }
    }

    /// `(1 − cos ωt)` or 1 in the asymptotic limit.
    fn one_minus_cos(&self, w: R) -> R {
        match *self {
            IbmTime::Finite(t) => w * w * t * t * one_minus_cos_over_sq(w * t),
            IbmTime::Asymptotic => R::one(),
        }
    }

    fn scale(&self) -> R {
        match *self {
            IbmTime::Finite(t) => t,
            IbmTime::Asymptotic => R::zero(),
        }
    }
}

/// Order and time of a requested cumulant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbmCumulantRequest<R> {
    pub order: u32,
    pub bath: BathParams<R>,
    pub t: IbmTime<R>,
}

/// Largest supported cumulant order; the integrand peak `~ nω_C` must stay
/// well inside the integration range.
pub const MAX_ORDER: u32 = 20;

/// `χ(u, t)` from `ln χ = −½∫ J/ω² (1 − cos ωt)[(1 − cos ωu)coth(βω/2) − i sin ωu]`.
pub fn ibm_chi<R: Real>(bath: &BathParams<R>, t: IbmTime<R>, u: R) -> Result<Cplx<R>> {
    Ok(ibm_ln_chi(bath, t, u, &QuadPolicy::default())?.exp())
}

pub fn ibm_ln_chi<R: Real>(bath: &BathParams<R>, t: IbmTime<R>, u: R, policy: &QuadPolicy<R>) -> Result<Cplx<R>> {
    t.check()?;
    if !u.is_finite() {
        return Err(invalid("u", "must be finite"));
    }
    let spec = *bath.spectral();
    let half = R::lit(0.5);
    let integrand = |w: R| {
        // J/ω²·(1 − cos ωt) = (J/ω)·(1 − cos ωt)/ω
        let base = spec.over_omega(w) * t.one_minus_cos(w);
        let re = -base * bath.omega_coth(w) * u * u * one_minus_cos_over_sq(w * u);
        let im = base * u * crate::scalar::sinc(w * u);
        [cplx(half * re, half * im)]
    };
    let br = breakpoints(R::zero(), spec.upper_limit(), panel_width(bath, &[t.scale(), u]));
    Ok(integrate(integrand, &br, policy)?.value[0])
}

/// `n`-th heat cumulant by quadrature: `½∫J ω^{n−2}(1 − cos ωt)` for odd `n`,
/// with an extra `coth(βω/2)` for even `n`.
pub fn ibm_cumulant<R: Real>(req: &IbmCumulantRequest<R>) -> Result<R> {
    ibm_cumulant_with(req, &QuadPolicy::default())
}

pub fn ibm_cumulant_with<R: Real>(req: &IbmCumulantRequest<R>, policy: &QuadPolicy<R>) -> Result<R> {
    if req.order == 0 || req.order > MAX_ORDER {
        return Err(invalid("order", format!("must be in 1..={MAX_ORDER}, got {}", req.order)));
    }
    req.t.check()?;
    let bath = &req.bath;
    let spec = *bath.spectral();
    let n = req.order as i32;
    let even = n % 2 == 0;
    let half = R::lit(0.5);
    let integrand = |w: R| {
        // J·ω^{n−2} = (J/ω)·ω^{n−1}; for even n one ω goes into ω·coth.
        let mut v = half * spec.over_omega(w) * req.t.one_minus_cos(w);
        if even {
            v *= w.powi(n - 2) * bath.omega_coth(w);
        } else {
            v *= w.powi(n - 1);
        }
        v
    };
    let br = breakpoints(R::zero(), spec.upper_limit(), panel_width(bath, &[req.t.scale()]));
    Ok(integrate_real(integrand, &br, policy)?.0)
}

/// Odd cumulants in closed form: `α(n−1)!ω_Cⁿ[1 − Re (1 − iω_C t)^{−n}]`.
pub fn ibm_odd_cumulant_closed<R: Real>(spectral: &SpectralDensity<R>, order: u32, t: IbmTime<R>) -> Result<R> {
    if order.is_multiple_of(2) || order > MAX_ORDER {
        return Err(invalid("order", format!("closed form needs an odd order <= {MAX_ORDER}, got {order}")));
    }
    t.check()?;
    let wc = spectral.omega_c();
    let n = order as i32;
    let factorial: R = (1..order).map(|k| R::from_usize_lossy(k as usize)).fold(R::one(), |a, b| a * b);
    let osc = match t {
        IbmTime::Finite(t) => (Cplx::new(R::one(), -wc * t)).powi(-n).re,
        IbmTime::Asymptotic => R::zero(),
    };
    Ok(spectral.alpha() * factorial * wc.powi(n) * (R::one() - osc))
}

/// Mean heat `αω_C³t²/(1 + ω_C²t²)`.
pub fn ibm_mean_heat_closed<R: Real>(spectral: &SpectralDensity<R>, t: R) -> R {
    let wc = spectral.omega_c();
    let x = wc * t;
    spectral.alpha() * wc * x * x / (R::one() + x * x)
}
