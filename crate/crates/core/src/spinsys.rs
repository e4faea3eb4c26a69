//! Two-level system: Hamiltonian `H_S = ω₀S_z + ΩS_x`, free propagators for
//! the Trotterised path sum, initial states, observables and the secular
//! weak-coupling (Born–Markov) reference dynamics.
//!
//! Matrices are written in the `S_z` eigenbasis with `|↑⟩` first. A
//! super-index `σ = (s⁺, s⁻)` is linearised as `2·i(s⁺) + i(s⁻)` where
//! `i(+½) = 0` and `i(-½) = 1`.

use std::ops::{Add, Mul, Sub};

use crate::bathcorr::BathParams;
use crate::error::{invalid, Error, Result};
use crate::scalar::{bose, cone, cplx, coth, czero, Cplx, Real};

/// Eigenvalue of `S_z` for basis index 0 / 1.
pub fn spin_value<R: Real>(index: usize) -> R {
    if index == 0 {
        R::lit(0.5)
    } else {
        R::lit(-0.5)
    }
}

/// Splits a super-index into `(index of s⁺, index of s⁻)`.
#[inline]
pub fn split_super(sigma: usize) -> (usize, usize) {
    (sigma >> 1, sigma & 1)
}

/// Dense 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<R>(pub [[Cplx<R>; 2]; 2]);

impl<R: Real> Mat2<R> {
    pub fn zero() -> Self {
        Self([[czero(); 2]; 2])
    }

    pub fn identity() -> Self {
        Self([[cone(), czero()], [czero(), cone()]])
    }

    pub fn sx() -> Self {
        let h = cplx(R::lit(0.5), R::zero());
        Self([[czero(), h], [h, czero()]])
    }

    pub fn sy() -> Self {
        let h = cplx(R::zero(), R::lit(0.5));
        Self([[czero(), -h], [h, czero()]])
    }

    pub fn sz() -> Self {
        let h = cplx(R::lit(0.5), R::zero());
        Self([[h, czero()], [czero(), -h]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Cplx<R> {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: Cplx<R>) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> R {
        let mut m = R::zero();
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [R; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = (self.0[0][1] + self.0[1][0].conj()) * R::lit(0.5);
        let mean = R::lit(0.5) * (a + d);
        let rad = (R::lit(0.25) * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - rad, mean + rad]
    }

    /// Row-major flattening `[ρ₀₀, ρ₀₁, ρ₁₀, ρ₁₁]`, i.e. indexed by super-index.
    pub fn to_super(&self) -> [Cplx<R>; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn from_super(v: &[Cplx<R>; 4]) -> Self {
        Self([[v[0], v[1]], [v[2], v[3]]])
    }
}

impl<R: Real> Mul for Mat2<R> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[czero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }
}

impl<R: Real> Add for Mat2<R> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl<R: Real> Sub for Mat2<R> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(cplx(-R::one(), R::zero()))
    }
}

/// Bias `ω₀` (coefficient of `S_z`) and tunnelling `Ω` (coefficient of `S_x`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams<R> {
    pub omega0: R,
    pub omega_tunnel: R,
}

impl<R: Real> SpinParams<R> {
    pub fn new(omega0: R, omega_tunnel: R) -> Result<Self> {
        if !omega0.is_finite() || !omega_tunnel.is_finite() {
            return Err(invalid("spin", "omega0 and omega_tunnel must be finite"));
        }
        Ok(Self { omega0, omega_tunnel })
    }

    /// Independent-boson configuration (`Ω = 0`).
    pub fn independent_boson(omega0: R) -> Self {
        Self { omega0, omega_tunnel: R::zero() }
    }

    /// Unbiased spin-boson configuration (`ω₀ = 0`).
    pub fn unbiased(omega_tunnel: R) -> Self {
        Self { omega0: R::zero(), omega_tunnel }
    }

    pub fn hamiltonian(&self) -> Mat2<R> {
        let z = cplx(self.omega0, R::zero());
        let x = cplx(self.omega_tunnel, R::zero());
        Mat2::sz().scale(z) + Mat2::sx().scale(x)
    }

    /// `exp(-i H_S τ)` in closed form.
    pub fn evolution(&self, tau: R) -> Mat2<R> {
        let h = self.omega0.hypot(self.omega_tunnel);
        if h == R::zero() {
            return Mat2::identity();
        }
        let (s, c) = (R::lit(0.5) * h * tau).sin_cos();
        let (nz, nx) = (self.omega0 / h, self.omega_tunnel / h);
        let ci = cplx(c, R::zero());
        Mat2([
            [ci - cplx(R::zero(), s * nz), cplx(R::zero(), -s * nx)],
            [cplx(R::zero(), -s * nx), ci + cplx(R::zero(), s * nz)],
        ])
    }
}

/// A validated 2×2 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState<R> {
    rho: Mat2<R>,
}

impl<R: Real> SpinState<R> {
    /// Validates hermiticity, unit trace and positivity (eigenvalues ≥ -1e-12).
    pub fn new(rho: Mat2<R>) -> Result<Self> {
        let tol = R::lit(1e-12);
        if rho.max_abs_diff(&rho.adjoint()) > tol {
            return Err(invalid("rho", "not Hermitian"));
        }
        let tr = rho.trace();
        if (tr.re - R::one()).abs() > tol || tr.im.abs() > tol {
            return Err(invalid("rho", format!("trace {tr} is not 1")));
        }
        if rho.hermitian_eigenvalues()[0] < -tol {
            return Err(invalid("rho", "not positive semidefinite"));
        }
        Ok(Self { rho })
    }

    /// Wraps a matrix without validation (used for modified, non-physical
    /// density matrices at finite counting field).
    pub fn unchecked(rho: Mat2<R>) -> Self {
        Self { rho }
    }

    fn pure(a: Cplx<R>, b: Cplx<R>) -> Self {
        Self { rho: Mat2([[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]]) }
    }

    /// `S_z = +½` eigenstate.
    pub fn up() -> Self {
        Self::pure(cone(), czero())
    }

    pub fn down() -> Self {
        Self::pure(czero(), cone())
    }

    /// `S_x = +½` eigenstate.
    pub fn right() -> Self {
        let h = cplx(R::lit(0.5).sqrt(), R::zero());
        Self::pure(h, h)
    }

    /// `S_x = -½` eigenstate.
    pub fn left() -> Self {
        let h = cplx(R::lit(0.5).sqrt(), R::zero());
        Self::pure(h, -h)
    }

    /// Looks up `up`, `down`, `right` or `left`.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "up" => Some(Self::up()),
            "down" => Some(Self::down()),
            "right" => Some(Self::right()),
            "left" => Some(Self::left()),
            _ => None,
        }
    }

    pub fn rho(&self) -> &Mat2<R> {
        &self.rho
    }

    pub fn expect(&self, op: &Mat2<R>) -> Cplx<R> {
        (self.rho * *op).trace()
    }

    pub fn sx(&self) -> R {
        self.expect(&Mat2::sx()).re
    }

    pub fn sy(&self) -> R {
        self.expect(&Mat2::sy()).re
    }

    pub fn sz(&self) -> R {
        self.expect(&Mat2::sz()).re
    }

    pub fn energy(&self, params: &SpinParams<R>) -> R {
        self.expect(&params.hamiltonian()).re
    }

    /// Von Neumann entropy with eigenvalues floored at `1e-15` and `0·ln 0 = 0`.
    pub fn entropy(&self) -> R {
        let floor = R::lit(1e-15);
        self.rho
            .hermitian_eigenvalues()
            .iter()
            .map(|&p| if p <= floor { R::zero() } else { -p * p.ln() })
            .sum()
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &Mat2<R>) -> Self {
        Self { rho: *u * self.rho * u.adjoint() }
    }
}

/// Superoperator on a super-index vector, indexed `[σ_new][σ_old]`.
pub type Super4<R> = [[Cplx<R>; 4]; 4];

/// Pair superoperator `G(σ_k, σ_{k-1}) = ⟨s⁺_k|U|s⁺_{k-1}⟩⟨s⁻_{k-1}|U†|s⁻_k⟩`
/// for full (`Δ`) and half (`Δ/2`) steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreePropagator<R> {
    pub step_full: Super4<R>,
    pub step_half: Super4<R>,
    pub delta: R,
}

fn pair_superoperator<R: Real>(u: &Mat2<R>) -> Super4<R> {
    let mut g = [[czero(); 4]; 4];
    for (new, row) in g.iter_mut().enumerate() {
        let (ap, am) = split_super(new);
        for (old, v) in row.iter_mut().enumerate() {
            let (bp, bm) = split_super(old);
            *v = u.0[ap][bp] * u.0[am][bm].conj();
        }
    }
    g
}

/// Applies a pair superoperator to a super-index vector.
pub fn apply_super<R: Real>(g: &Super4<R>, v: &[Cplx<R>; 4]) -> [Cplx<R>; 4] {
    let mut out = [czero(); 4];
    for (o, row) in out.iter_mut().zip(g.iter()) {
        *o = row.iter().zip(v.iter()).fold(czero(), |acc, (a, b)| acc + *a * *b);
    }
    out
}

/// Free propagators of the symmetric Trotter splitting.
pub fn free_propagator<R: Real>(params: &SpinParams<R>, delta: R) -> Result<FreePropagator<R>> {
    if !(delta > R::zero()) || !delta.is_finite() {
        return Err(invalid("delta", format!("must be > 0, got {delta}")));
    }
    Ok(FreePropagator {
        step_full: pair_superoperator(&params.evolution(delta)),
        step_half: pair_superoperator(&params.evolution(R::lit(0.5) * delta)),
        delta,
    })
}

/// `ρ'(0) = e^{-iH_SΔ/2} ρ(0) e^{iH_SΔ/2}`.
pub fn modified_initial<R: Real>(state: &SpinState<R>, params: &SpinParams<R>, delta: R) -> SpinState<R> {
    state.conjugate_by(&params.evolution(R::lit(0.5) * delta))
}

/// Rates of the secular Born–Markov master equation in the `H_S` eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovRates<R> {
    /// `(π/4)J(Ω)coth(βΩ/2)`: decay rate of the transverse Bloch components.
    pub gamma: R,
    /// `(π/2)J(Ω)(n+1)`.
    pub gamma_down: R,
    /// `(π/2)J(Ω)n`.
    pub gamma_up: R,
    /// Stationary `⟨S_x⟩ = -½tanh(βΩ/2)`.
    pub sx_eq: R,
}

pub fn markov_rates<R: Real>(params: &SpinParams<R>, bath: &BathParams<R>) -> Result<MarkovRates<R>> {
    if params.omega0 != R::zero() {
        return Err(Error::Unsupported("Markovian reference requires an unbiased spin (omega0 = 0)".into()));
    }
    let gap = params.omega_tunnel.abs();
    if gap == R::zero() {
        return Err(Error::Unsupported("Markovian reference requires omega_tunnel != 0".into()));
    }
    let j = bath.spectral().value(gap)?;
    let bw = bath.beta() * gap;
    let n = bose(bw);
    let half_pi = R::FRAC_PI_2();
    Ok(MarkovRates {
        gamma: R::lit(0.5) * half_pi * j * coth(R::lit(0.5) * bw),
        gamma_down: half_pi * j * (n + R::one()),
        gamma_up: half_pi * j * n,
        sx_eq: -R::lit(0.5) * (R::lit(0.5) * bath.beta() * params.omega_tunnel).tanh(),
    })
}

/// One output row of [`markov_reference`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovPoint<R> {
    pub t: R,
    pub sx: R,
    pub sy: R,
    pub sz: R,
    pub delta_u: R,
}

fn dissipator<R: Real>(l: &Mat2<R>, rho: &Mat2<R>) -> Mat2<R> {
    let ld = l.adjoint();
    let ldl = ld * *l;
    let half = cplx(R::lit(0.5), R::zero());
    *l * *rho * ld - (ldl * *rho + *rho * ldl).scale(half)
}

/// Integrates the secular Lindblad equation (no Lamb shift) on `times` with
/// ten classical RK4 substeps per output interval.
pub fn markov_reference<R: Real>(
    params: &SpinParams<R>,
    bath: &BathParams<R>,
    state: &SpinState<R>,
    times: &[R],
) -> Result<Vec<MarkovPoint<R>>> {
    let rates = markov_rates(params, bath)?;
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times", "must be non-decreasing"));
    }
    let h = params.hamiltonian();
    let r = R::lit(0.5).sqrt();
    // |→⟩ is the upper level for Ω > 0.
    let (hi, lo) = if params.omega_tunnel > R::zero() { ([r, r], [r, -r]) } else { ([r, -r], [r, r]) };
    let ket_bra = |a: [R; 2], b: [R; 2], amp: R| {
        let mut m = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = cplx(amp * a[i] * b[j], R::zero());
            }
        }
        m
    };
    let l_down = ket_bra(lo, hi, rates.gamma_down.sqrt());
    let l_up = ket_bra(hi, lo, rates.gamma_up.sqrt());
    let minus_i = cplx(R::zero(), -R::one());
    let rhs = |rho: &Mat2<R>| -> Mat2<R> {
        (h * *rho - *rho * h).scale(minus_i) + dissipator(&l_down, rho) + dissipator(&l_up, rho)
    };

    let sx0 = state.sx();
    let mut rho = *state.rho();
    let mut out = Vec::with_capacity(times.len());
    let mut t_prev = times.first().copied().unwrap_or_else(R::zero);
    for &t in times {
        let substeps = 10;
        let dt = (t - t_prev) / R::from_usize_lossy(substeps);
        if dt > R::zero() {
            let half = cplx(R::lit(0.5) * dt, R::zero());
            let full = cplx(dt, R::zero());
            let sixth = cplx(dt / R::lit(6.0), R::zero());
            let two = cplx(R::lit(2.0), R::zero());
            for _ in 0..substeps {
                let k1 = rhs(&rho);
                let k2 = rhs(&(rho + k1.scale(half)));
                let k3 = rhs(&(rho + k2.scale(half)));
                let k4 = rhs(&(rho + k3.scale(full)));
                rho = rho + (k1 + k2.scale(two) + k3.scale(two) + k4).scale(sixth);
            }
        }
        t_prev = t;
        let s = SpinState::unchecked(rho);
        out.push(MarkovPoint {
            t,
            sx: s.sx(),
            sy: s.sy(),
            sz: s.sz(),
            delta_u: params.omega_tunnel * (s.sx() - sx0),
        });
    }
    Ok(out)
}
