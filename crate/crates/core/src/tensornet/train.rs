use super::dense::{CMatrix, DenseTensor};
use super::linalg::{truncate_factors, TruncationPolicy};
use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Cplx, Real};

/// Physical extent of every site (a super-index of the two-level system).
pub const PHYS: usize = 4;

/// One 3-index core `[left][phys][right]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Core<R> {
    pub left: usize,
    pub right: usize,
    pub data: Vec<Cplx<R>>,
}

impl<R: Real> Core<R> {
    pub fn new(left: usize, right: usize, data: Vec<Cplx<R>>) -> Result<Self> {
        if data.len() != left * PHYS * right || left == 0 || right == 0 {
            return Err(Error::Shape(format!("core {left}x{PHYS}x{right} with {} values", data.len())));
        }
        Ok(Self { left, right, data })
    }

    #[inline]
    pub fn at(&self, l: usize, s: usize, r: usize) -> Cplx<R> {
        self.data[(l * PHYS + s) * self.right + r]
    }

    fn as_left_matrix(&self) -> CMatrix<R> {
        CMatrix { rows: self.left * PHYS, cols: self.right, data: self.data.clone() }
    }

    fn as_right_matrix(&self) -> CMatrix<R> {
        CMatrix { rows: self.left, cols: PHYS * self.right, data: self.data.clone() }
    }

    fn from_left_matrix(m: CMatrix<R>) -> Self {
        Self { left: m.rows / PHYS, right: m.cols, data: m.data }
    }

    fn from_right_matrix(m: CMatrix<R>) -> Self {
        Self { left: m.rows, right: m.cols / PHYS, data: m.data }
    }
}

/// Diagonal matrix-product operator applied to a train in one step.
///
/// Every site `j` is multiplied element-wise by `weights[j][b·4 + s]`, where
/// `b < bond` is a copy index shared by all sites. When `head` is set a new
/// site `δ(b, s)·head[s]` is appended on the right (requires `bond == 4`).
/// With `close_first` the oldest site is summed over its physical index
/// after weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep<R> {
    pub bond: usize,
    pub weights: Vec<Vec<Cplx<R>>>,
    pub head: Option<[Cplx<R>; PHYS]>,
    pub close_first: bool,
}

impl<R: Real> ChainStep<R> {
    /// The identity operator on `sites` sites.
    pub fn identity(sites: usize) -> Self {
        Self { bond: 1, weights: vec![vec![cone(); PHYS]; sites], head: None, close_first: false }
    }
}

/// Telemetry of one truncation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepReport<R> {
    pub max_bond: usize,
    /// Sum over bonds of the relative discarded weight.
    pub discarded_weight: R,
    /// The bond cap cut below the cutoff rank somewhere.
    pub overflow: bool,
}

/// Matrix-product representation of a tensor with physical extent 4 per site.
/// Site 0 is the leftmost (oldest) index.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorTrain<R> {
    cores: Vec<Core<R>>,
}

impl<R: Real> TensorTrain<R> {
    pub fn empty() -> Self {
        Self { cores: Vec::new() }
    }

    pub fn from_cores(cores: Vec<Core<R>>) -> Result<Self> {
        if let (Some(f), Some(l)) = (cores.first(), cores.last()) {
            if f.left != 1 || l.right != 1 {
                return Err(Error::Shape("boundary bonds must have extent 1".into()));
            }
        }
        for w in cores.windows(2) {
            if w[0].right != w[1].left {
                return Err(Error::Shape(format!("bond mismatch {} vs {}", w[0].right, w[1].left)));
            }
        }
        Ok(Self { cores })
    }

    /// Rank-1 train `v₀ ⊗ v₁ ⊗ …`.
    pub fn product(vectors: &[[Cplx<R>; PHYS]]) -> Self {
        let cores = vectors.iter().map(|v| Core { left: 1, right: 1, data: v.to_vec() }).collect();
        Self { cores }
    }

    /// Exact decomposition of a dense tensor with shape `[4, 4, …]`.
    pub fn from_dense(t: &DenseTensor<R>) -> Result<Self> {
        let n = t.shape().len();
        if n == 0 || t.shape().iter().any(|&d| d != PHYS) {
            return Err(Error::Shape(format!("expected shape [4; n], got {:?}", t.shape())));
        }
        let mut cores = Vec::with_capacity(n);
        let mut rest = CMatrix { rows: PHYS, cols: t.data().len() / PHYS, data: t.data().to_vec() };
        for _ in 0..n - 1 {
            let f = truncate_factors(R::svd(&rest)?, &TruncationPolicy::exact());
            let k = f.s.len();
            cores.push(Core::from_left_matrix(f.u));
            let sv = CMatrix::from_fn(k, f.vh.cols, |i, j| f.vh.at(i, j) * f.s[i]);
            rest = CMatrix { rows: k * PHYS, cols: sv.cols / PHYS, data: sv.data };
        }
        cores.push(Core::from_left_matrix(rest));
        Ok(Self { cores })
    }

    pub fn to_dense(&self) -> DenseTensor<R> {
        let mut acc = CMatrix { rows: 1, cols: 1, data: vec![cone()] };
        for c in &self.cores {
            let m = acc.matmul(&CMatrix { rows: c.left, cols: PHYS * c.right, data: c.data.clone() });
            acc = CMatrix { rows: m.rows * PHYS, cols: c.right, data: m.data };
        }
        DenseTensor::new(vec![PHYS; self.cores.len()], acc.data).expect("consistent extents")
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn cores(&self) -> &[Core<R>] {
        &self.cores
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.cores.iter().skip(1).map(|c| c.left).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.cores.iter().map(|c| c.right.max(c.left)).max().unwrap_or(0)
    }

    /// Contracts every site with the given vector.
    pub fn contract_vectors(&self, vectors: &[[Cplx<R>; PHYS]]) -> Result<Cplx<R>> {
        if vectors.len() != self.cores.len() {
            return Err(Error::Shape(format!("{} vectors for {} sites", vectors.len(), self.cores.len())));
        }
        let mut env = vec![cone::<R>()];
        for (c, v) in self.cores.iter().zip(vectors) {
            env = absorb(&env, c, v);
        }
        Ok(env[0])
    }

    /// Contracts all sites but the last with `v` and returns the open last index.
    pub fn reduce_to_last(&self, v: &[Cplx<R>; PHYS]) -> Result<[Cplx<R>; PHYS]> {
        let (last, rest) = self.cores.split_last().ok_or_else(|| Error::Shape("empty train".into()))?;
        let mut env = vec![cone::<R>()];
        for c in rest {
            env = absorb(&env, c, v);
        }
        let mut out = [czero(); PHYS];
        for (s, o) in out.iter_mut().enumerate() {
            for (l, e) in env.iter().enumerate() {
                *o += *e * last.at(l, s, 0);
            }
        }
        Ok(out)
    }

    /// `max |Mᴴ M − 1|` of the site reshaped as `(left·4) × right`.
    pub fn left_isometry_defect(&self, site: usize) -> R {
        self.cores[site].as_left_matrix().column_isometry_defect()
    }

    /// `max |M Mᴴ − 1|` of the site reshaped as `left × (4·right)`.
    pub fn right_isometry_defect(&self, site: usize) -> R {
        self.cores[site].as_right_matrix().adjoint().column_isometry_defect()
    }

    /// Right-to-left QR sweep without truncation; afterwards every site but
    /// the first is a right isometry.
    pub fn right_canonicalize(&mut self) {
        for j in (1..self.cores.len()).rev() {
            let m = self.cores[j].as_right_matrix();
            let (q, r) = R::qr(&m.adjoint());
            self.cores[j] = Core::from_right_matrix(q.adjoint());
            let prev = self.cores[j - 1].as_left_matrix().matmul(&r.adjoint());
            self.cores[j - 1] = Core::from_left_matrix(prev);
        }
    }

    /// Left-to-right truncating SVD sweep. Optimal only if the train is
    /// right-canonical on entry; the orthogonality centre ends on the last site.
    pub fn truncate_sweep(&mut self, policy: &TruncationPolicy<R>) -> Result<SweepReport<R>> {
        self.sweep(policy, None)
    }

    /// Like [`truncate_sweep`](Self::truncate_sweep), but the contraction of
    /// every site except the last with `v` survives exactly: wherever values
    /// are dropped, the left environment of `v` joins the kept basis.
    pub fn truncate_sweep_preserving(
        &mut self,
        policy: &TruncationPolicy<R>,
        v: &[Cplx<R>; PHYS],
    ) -> Result<SweepReport<R>> {
        self.sweep(policy, Some(v))
    }

    fn sweep(&mut self, policy: &TruncationPolicy<R>, keep: Option<&[Cplx<R>; PHYS]>) -> Result<SweepReport<R>> {
        let mut report = SweepReport { max_bond: 1, discarded_weight: R::zero(), overflow: false };
        let mut env = vec![cone::<R>()];
        for j in 0..self.cores.len().saturating_sub(1) {
            let m = self.cores[j].as_left_matrix();
            let f = truncate_factors(R::svd(&m)?, policy);
            report.discarded_weight += f.discarded_weight;
            report.overflow |= f.overflow;
            let mut u = f.u;
            let mut carry = CMatrix::from_fn(f.s.len(), f.vh.cols, |i, k| f.vh.at(i, k) * f.s[i]);
            if let Some(v) = keep.filter(|_| f.discarded_weight > R::zero()) {
                let target: Vec<Cplx<R>> = (0..m.rows).map(|r| (env[r / PHYS] * v[r % PHYS]).conj()).collect();
                if let Some(q) = orthogonal_residual(&u, &target) {
                    let row: Vec<Cplx<R>> =
                        (0..m.cols).map(|c| (0..m.rows).map(|r| q[r].conj() * m.at(r, c)).sum()).collect();
                    u = append_column(&u, &q);
                    carry.data.extend(row);
                    carry.rows += 1;
                }
            }
            report.max_bond = report.max_bond.max(u.cols);
            self.cores[j] = Core::from_left_matrix(u);
            if let Some(v) = keep {
                env = absorb(&env, &self.cores[j], v);
            }
            let next = carry.matmul(&self.cores[j + 1].as_right_matrix());
            self.cores[j + 1] = Core::from_right_matrix(next);
        }
        Ok(report)
    }

    /// Applies a diagonal step operator, then canonicalises and truncates.
    pub fn apply_step(&mut self, step: &ChainStep<R>, policy: &TruncationPolicy<R>) -> Result<SweepReport<R>> {
        self.apply_step_exact(step)?;
        self.right_canonicalize();
        self.truncate_sweep(policy)
    }

    /// [`apply_step`](Self::apply_step) with a
    /// [`preserving`](Self::truncate_sweep_preserving) truncation.
    pub fn apply_step_preserving(
        &mut self,
        step: &ChainStep<R>,
        policy: &TruncationPolicy<R>,
        v: &[Cplx<R>; PHYS],
    ) -> Result<SweepReport<R>> {
        self.apply_step_exact(step)?;
        self.right_canonicalize();
        self.truncate_sweep_preserving(policy, v)
    }

    /// Applies a step operator without any compression.
    pub fn apply_step_exact(&mut self, step: &ChainStep<R>) -> Result<()> {
        let b = step.bond;
        let n = self.cores.len();
        if step.weights.len() != n || step.weights.iter().any(|w| w.len() != b * PHYS) {
            return Err(Error::Shape(format!("step for {} sites applied to {n}", step.weights.len())));
        }
        if b == 0 || (step.head.is_some() && b != PHYS) || (step.head.is_none() && b != 1) {
            return Err(Error::Shape(format!("copy bond {b} inconsistent with head")));
        }
        let mut cores: Vec<Core<R>> = Vec::with_capacity(n + 1);
        for (j, (c, w)) in self.cores.iter().zip(&step.weights).enumerate() {
            let lb = if j == 0 { 1 } else { b };
            let (left, right) = (c.left * lb, c.right * b);
            let mut data = vec![czero(); left * PHYS * right];
            for l in 0..c.left {
                for s in 0..PHYS {
                    for r in 0..c.right {
                        let v = c.at(l, s, r);
                        if v == czero() {
                            continue;
                        }
                        for bb in 0..b {
                            let ll = if j == 0 { l } else { l * b + bb };
                            data[(ll * PHYS + s) * right + r * b + bb] = v * w[bb * PHYS + s];
                        }
                    }
                }
            }
            cores.push(Core { left, right, data });
        }
        if let Some(head) = step.head {
            let left = if n == 0 { 1 } else { PHYS };
            let mut data = vec![czero(); left * PHYS];
            for s in 0..PHYS {
                data[(if n == 0 { 0 } else { s }) * PHYS + s] = head[s];
            }
            cores.push(Core { left, right: 1, data });
        }
        if step.close_first {
            if cores.len() < 2 {
                return Err(Error::Shape("cannot close the only site".into()));
            }
            let first = cores.remove(0);
            let env = absorb(&[cone()], &first, &[cone(); PHYS]);
            let next = CMatrix { rows: 1, cols: env.len(), data: env }.matmul(&cores[0].as_right_matrix());
            cores[0] = Core::from_right_matrix(next);
        }
        if cores.iter().any(|c| !c.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NumericalBlowup { step: 0 });
        }
        self.cores = cores;
        Ok(())
    }
}

/// Unit vector along the part of `target` orthogonal to the columns of the
/// isometry `u`, or `None` when that part is at rounding level.
fn orthogonal_residual<R: Real>(u: &CMatrix<R>, target: &[Cplx<R>]) -> Option<Vec<Cplx<R>>> {
    let norm = |x: &[Cplx<R>]| x.iter().map(|z| z.norm_sqr()).sum::<R>().sqrt();
    let scale = norm(target);
    if scale == R::zero() {
        return None;
    }
    let mut res = target.to_vec();
    // Two passes of Gram-Schmidt keep the residual orthogonal to working precision.
    for _ in 0..2 {
        for c in 0..u.cols {
            let coef: Cplx<R> = (0..u.rows).map(|r| u.at(r, c).conj() * res[r]).sum();
            for (r, x) in res.iter_mut().enumerate() {
                *x -= coef * u.at(r, c);
            }
        }
    }
    let n = norm(&res);
    if n <= R::lit(64.0) * R::epsilon() * scale {
        return None;
    }
    Some(res.into_iter().map(|z| z / n).collect())
}

fn append_column<R: Real>(u: &CMatrix<R>, col: &[Cplx<R>]) -> CMatrix<R> {
    CMatrix::from_fn(u.rows, u.cols + 1, |i, j| if j < u.cols { u.at(i, j) } else { col[i] })
}

fn absorb<R: Real>(env: &[Cplx<R>], c: &Core<R>, v: &[Cplx<R>; PHYS]) -> Vec<Cplx<R>> {
    let mut out = vec![czero(); c.right];
    for (l, e) in env.iter().enumerate() {
        for (s, vs) in v.iter().enumerate() {
            let f = *e * *vs;
            if f == czero() {
                continue;
            }
            let row = &c.data[(l * PHYS + s) * c.right..(l * PHYS + s + 1) * c.right];
            for (o, x) in out.iter_mut().zip(row) {
                *o += f * *x;
            }
        }
    }
    out
}
