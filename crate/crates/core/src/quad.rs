//! Adaptive Gauss–Kronrod quadrature for smooth, damped, oscillatory
//! integrands on a finite interval.
//!
//! Integrands return `N` complex components at once so that a single pass
//! over frequency can feed several correlation integrals that share the
//! expensive spectral factors.

use crate::error::{Error, Result};
use crate::scalar::{czero, Cplx, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
// Gauss weights attached to XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`]. The accepted error is
/// `max(abs_tol, rel_tol·|I|)` summed over all panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPolicy<R> {
    pub abs_tol: R,
    pub rel_tol: R,
    pub max_depth: usize,
}

impl<R: Real> Default for QuadPolicy<R> {
    fn default() -> Self {
        Self { abs_tol: R::lit(1e-12), rel_tol: R::lit(1e-12), max_depth: 30 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate<R, const N: usize> {
    pub value: [Cplx<R>; N],
    pub error: R,
    pub evaluations: usize,
}

struct Panel<R, const N: usize> {
    a: R,
    b: R,
    value: [Cplx<R>; N],
    error: R,
    depth: usize,
}

fn gauss_kronrod<R, F, const N: usize>(f: &F, a: R, b: R) -> ([Cplx<R>; N], R)
where
    R: Real,
    F: Fn(R) -> [Cplx<R>; N],
{
    let half = R::lit(0.5);
    let center = half * (a + b);
    let hw = half * (b - a);
    let mut kron = [czero::<R>(); N];
    let mut gauss = [czero::<R>(); N];

    let fc = f(center);
    for c in 0..N {
        kron[c] = fc[c] * R::lit(WGK[7]);
        gauss[c] = fc[c] * R::lit(WG[3]);
    }
    for j in 0..7 {
        let dx = hw * R::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let wk = R::lit(WGK[j]);
        for c in 0..N {
            let s = f1[c] + f2[c];
            kron[c] += s * wk;
            if j % 2 == 1 {
                gauss[c] += s * R::lit(WG[j / 2]);
            }
        }
    }
    let mut err = R::zero();
    for c in 0..N {
        kron[c] *= hw;
        gauss[c] *= hw;
        err = err.max((kron[c] - gauss[c]).norm());
    }
    (kron, err)
}

/// Evenly spaced breakpoints on `[a, b]` with spacing no wider than `max_width`.
pub fn breakpoints<R: Real>(a: R, b: R, max_width: R) -> Vec<R> {
    let span = b - a;
    let n = (span / max_width).ceil().to_usize().unwrap_or(1).max(1);
    let step = span / R::from_usize_lossy(n);
    (0..=n).map(|i| if i == n { b } else { a + step * R::from_usize_lossy(i) }).collect()
}

/// Integrates `f` over the panels delimited by `breaks`, bisecting panels
/// whose Gauss–Kronrod error exceeds their share of the tolerance.
pub fn integrate<R, F, const N: usize>(
    f: F,
    breaks: &[R],
    policy: &QuadPolicy<R>,
) -> Result<QuadEstimate<R, N>>
where
    R: Real,
    F: Fn(R) -> [Cplx<R>; N],
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let total = breaks[breaks.len() - 1] - breaks[0];
    let mut evaluations = 0usize;
    let mut pending: Vec<Panel<R, N>> = breaks
        .windows(2)
        .map(|w| {
            let (value, error) = gauss_kronrod(&f, w[0], w[1]);
            Panel { a: w[0], b: w[1], value, error, depth: 0 }
        })
        .collect();
    evaluations += 15 * pending.len();

    let mut rough = R::zero();
    for c in 0..N {
        let s: Cplx<R> = pending.iter().fold(czero(), |acc, p| acc + p.value[c]);
        rough = rough.max(s.norm());
    }
    let tol = policy.abs_tol.max(policy.rel_tol * rough);

    let mut value = [czero::<R>(); N];
    let mut error = R::zero();
    while let Some(p) = pending.pop() {
        let share = tol * (p.b - p.a) / total;
        if p.error <= share || p.depth >= policy.max_depth {
            for c in 0..N {
                value[c] += p.value[c];
            }
            error += p.error;
            continue;
        }
        let mid = R::lit(0.5) * (p.a + p.b);
        let (lv, le) = gauss_kronrod(&f, p.a, mid);
        let (rv, re) = gauss_kronrod(&f, mid, p.b);
        evaluations += 30;
        pending.push(Panel { a: p.a, b: mid, value: lv, error: le, depth: p.depth + 1 });
        pending.push(Panel { a: mid, b: p.b, value: rv, error: re, depth: p.depth + 1 });
    }

    let finite = value.iter().all(|v| v.re.is_finite() && v.im.is_finite());
    if !finite || error > tol {
        return Err(Error::Accuracy {
            requested: tol.to_f64_lossy(),
            achieved: error.to_f64_lossy(),
            value: value[0].norm().to_f64_lossy(),
        });
    }
    Ok(QuadEstimate { value, error, evaluations })
}

/// Scalar real convenience wrapper around [`integrate`].
pub fn integrate_real<R, F>(f: F, breaks: &[R], policy: &QuadPolicy<R>) -> Result<(R, R)>
where
    R: Real,
    F: Fn(R) -> R,
{
    let est = integrate(|x| [Cplx::new(f(x), R::zero())], breaks, policy)?;
    Ok((est.value[0].re, est.error))
}
