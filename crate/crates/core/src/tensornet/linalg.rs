use nalgebra::DMatrix;

use super::dense::{CMatrix, DenseTensor};
use crate::error::{invalid, Error, Result};
use crate::scalar::{czero, Cplx, Real};

/// Thin singular value decomposition `M = U·diag(s)·Vᴴ`, values descending.
#[derive(Debug, Clone)]
pub struct SvdFactors<R> {
    pub u: CMatrix<R>,
    pub s: Vec<R>,
    pub vh: CMatrix<R>,
}

/// Dense factorization kernels, implemented per concrete float type.
pub trait Factorize: Sized {
    fn svd(m: &CMatrix<Self>) -> Result<SvdFactors<Self>>;
    /// Thin QR: `M = Q·R` with `Q` of shape `rows × min(rows, cols)`.
    fn qr(m: &CMatrix<Self>) -> (CMatrix<Self>, CMatrix<Self>);
}

macro_rules! impl_factorize {
    ($t:ty) => {
        impl Factorize for $t {
            fn svd(m: &CMatrix<$t>) -> Result<SvdFactors<$t>> {
                if !m.is_finite() {
                    return Err(Error::SvdNoConvergence { rows: m.rows, cols: m.cols, sweeps: 0, off: f64::NAN });
                }
                // Reduce to a square triangular core, then one-sided Jacobi.
                // nalgebra's SVD of the core supplies right vectors that warm
                // start the Jacobi iteration, which then converges in a few sweeps.
                fn warm(r: &CMatrix<$t>) -> Option<CMatrix<$t>> {
                    let a = DMatrix::from_row_slice(r.rows, r.cols, &r.data);
                    let vt = a.try_svd(false, true, <$t>::EPSILON, 0)?.v_t?;
                    Some(CMatrix::from_fn(vt.ncols(), vt.nrows(), |i, j| vt[(j, i)].conj()))
                }
                if m.rows >= m.cols {
                    let (q, r) = Self::qr(m);
                    let f = jacobi_svd(&r, warm(&r))?;
                    Ok(SvdFactors { u: q.matmul(&f.u), s: f.s, vh: f.vh })
                } else {
                    let (q, r) = Self::qr(&m.adjoint());
                    let ra = r.adjoint();
                    let f = jacobi_svd(&ra, warm(&ra))?;
                    Ok(SvdFactors { u: f.u, s: f.s, vh: f.vh.matmul(&q.adjoint()) })
                }
            }

            fn qr(m: &CMatrix<$t>) -> (CMatrix<$t>, CMatrix<$t>) {
                let qr = DMatrix::from_row_slice(m.rows, m.cols, &m.data).qr();
                let (q, r) = (qr.q(), qr.r());
                (
                    CMatrix::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)]),
                    CMatrix::from_fn(r.nrows(), r.ncols(), |i, j| r[(i, j)]),
                )
            }
        }
    };
}

const MAX_SWEEPS: usize = 60;

/// One-sided (Hestenes) Jacobi SVD of a square matrix. Column pairs are
/// rotated until mutually orthogonal to working precision. `start`, if
/// given, is a unitary that pre-rotates the columns.
pub(crate) fn jacobi_svd<R: Real>(m: &CMatrix<R>, start: Option<CMatrix<R>>) -> Result<SvdFactors<R>> {
    let n = m.cols;
    let rows = m.rows;
    let v0 = match start {
        Some(v) if v.rows == n && v.cols == n && v.is_finite() => v,
        _ => CMatrix::identity(n),
    };
    let a0 = m.matmul(&v0);
    // Column-major working copies.
    let mut a: Vec<Vec<Cplx<R>>> = (0..n).map(|j| (0..rows).map(|i| a0.at(i, j)).collect()).collect();
    let mut v: Vec<Vec<Cplx<R>>> = (0..n).map(|j| (0..n).map(|i| v0.at(i, j)).collect()).collect();
    let tol = R::epsilon();
    let mut converged = false;
    let mut sweeps = 0;
    let mut worst = R::zero();
    let norm2 = |col: &[Cplx<R>]| col.iter().map(|z| z.norm_sqr()).sum::<R>();
    // Columns below rounding level of the whole matrix carry no information;
    // flushing them keeps noise out of the rotations and the kept rank.
    let floor = tol * tol * a.iter().map(|c| norm2(c)).sum::<R>();
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        worst = R::zero();
        let mut nrm: Vec<R> = a.iter().map(|c| norm2(c)).collect();
        for (col, n) in a.iter_mut().zip(nrm.iter_mut()) {
            if *n <= floor && *n > R::zero() {
                col.iter_mut().for_each(|z| *z = czero());
                *n = R::zero();
            }
        }
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta) = (nrm[p], nrm[q]);
                if alpha == R::zero() || beta == R::zero() {
                    continue;
                }
                let gamma: Cplx<R> = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * *y).sum();
                let g = gamma.norm();
                if g == R::zero() {
                    continue;
                }
                // Separate square roots: `alpha * beta` underflows for nearly null columns.
                let off = g / (alpha.sqrt() * beta.sqrt());
                worst = worst.max(off);
                if off <= tol {
                    continue;
                }
                let phase = gamma / g;
                let zeta = (beta - alpha) / (R::lit(2.0) * g);
                let t = zeta.signum() / (zeta.abs() + (R::one() + zeta * zeta).sqrt());
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = c * t;
                let rot = |x: &mut Vec<Cplx<R>>, y: &mut Vec<Cplx<R>>| {
                    for (xp, yq) in x.iter_mut().zip(y.iter_mut()) {
                        let b = *yq * phase.conj();
                        let xn = *xp * c - b * s;
                        *yq = *xp * s + b * c;
                        *xp = xn;
                    }
                };
                let (lo, hi) = a.split_at_mut(q);
                rot(&mut lo[p], &mut hi[0]);
                let (lo, hi) = v.split_at_mut(q);
                rot(&mut lo[p], &mut hi[0]);
                nrm[p] = (alpha - t * g).max(R::zero());
                nrm[q] = beta + t * g;
            }
        }
        if worst <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence { rows, cols: n, sweeps, off: worst.to_f64_lossy() });
    }
    let norms: Vec<R> = a.iter().map(|col| norm2(col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let u = CMatrix::from_fn(rows, n, |i, j| {
        let k = order[j];
        if norms[k] > R::zero() {
            a[k][i] / norms[k]
        } else {
            czero()
        }
    });
    let vh = CMatrix::from_fn(n, n, |i, j| v[order[i]][j].conj());
    Ok(SvdFactors { u, s: order.iter().map(|&k| norms[k]).collect(), vh })
}

impl_factorize!(f32);
impl_factorize!(f64);

/// Relative singular-value cutoff `λ_C = λ_max·10^(−p/10)` with an optional
/// hard bond cap. `p_exponent = None` disables the cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy<R> {
    pub p_exponent: Option<R>,
    pub max_bond: Option<usize>,
}

impl<R: Real> TruncationPolicy<R> {
    pub fn new(p_exponent: Option<R>, max_bond: Option<usize>) -> Result<Self> {
        if let Some(p) = p_exponent {
            if !(p > R::zero()) || p.is_nan() {
                return Err(invalid("p_exponent", format!("must be > 0, got {p}")));
            }
        }
        if max_bond == Some(0) {
            return Err(invalid("max_bond", "must be at least 1"));
        }
        Ok(Self { p_exponent, max_bond })
    }

    /// No truncation at all.
    pub fn exact() -> Self {
        Self { p_exponent: None, max_bond: None }
    }

    pub fn with_p(p: R) -> Result<Self> {
        Self::new(Some(p), None)
    }

    /// Ratio `λ_C/λ_max`.
    pub fn relative_cutoff(&self) -> R {
        match self.p_exponent {
            Some(p) => R::lit(10.0).powf(-p / R::lit(10.0)),
            None => R::zero(),
        }
    }

    /// Number of values to keep from a descending list, and whether the cap
    /// cut below what the cutoff alone would keep.
    pub fn rank(&self, s: &[R]) -> (usize, bool) {
        let Some(&lmax) = s.first() else { return (0, false) };
        let keep = match self.p_exponent {
            Some(_) => {
                let cut = lmax * self.relative_cutoff();
                s.iter().take_while(|&&x| x >= cut).count().max(1)
            }
            None => s.iter().take_while(|&&x| x > R::zero()).count().max(1),
        };
        match self.max_bond {
            Some(cap) if keep > cap => (cap, true),
            _ => (keep, false),
        }
    }
}

/// Result of [`svd_truncate`].
#[derive(Debug, Clone)]
pub struct Truncated<R> {
    pub u: CMatrix<R>,
    pub s: Vec<R>,
    pub vh: CMatrix<R>,
    /// Σ dropped² / Σ all².
    pub discarded_weight: R,
    /// The bond cap forced more truncation than the cutoff.
    pub overflow: bool,
}

pub(crate) fn truncate_factors<R: Real>(f: SvdFactors<R>, policy: &TruncationPolicy<R>) -> Truncated<R> {
    let (k, overflow) = policy.rank(&f.s);
    let total: R = f.s.iter().map(|&x| x * x).sum();
    let dropped: R = f.s[k..].iter().map(|&x| x * x).sum();
    let discarded_weight = if total > R::zero() { dropped / total } else { R::zero() };
    let u = CMatrix::from_fn(f.u.rows, k, |i, j| f.u.at(i, j));
    let vh = CMatrix { rows: k, cols: f.vh.cols, data: f.vh.data[..k * f.vh.cols].to_vec() };
    let mut s = f.s;
    s.truncate(k);
    Truncated { u, s, vh, discarded_weight, overflow }
}

/// Truncated SVD of a rank-2 tensor.
pub fn svd_truncate<R: Real>(matrix: &DenseTensor<R>, policy: &TruncationPolicy<R>) -> Result<Truncated<R>> {
    let m = matrix.to_matrix()?;
    Ok(truncate_factors(R::svd(&m)?, policy))
}

/// Reassembles `U·diag(s)·Vᴴ`.
pub fn reconstruct<R: Real>(t: &Truncated<R>) -> CMatrix<R> {
    let us = CMatrix::from_fn(t.u.rows, t.u.cols, |i, j| t.u.at(i, j) * t.s[j]);
    us.matmul(&t.vh)
}
