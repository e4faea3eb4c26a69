//! Counting-field TEMPO: the augmented density tensor stored as a compressed
//! tensor train over the last `K` path indices.

use crate::bathcorr::{build_eta_table, BathParams, EtaOptions, EtaTable};
use crate::error::{invalid, Error, Result};
use crate::quapi::StepPropagator;
use crate::scalar::{cone, Cplx, Real};
use crate::spinsys::{SpinParams, SpinState};
use crate::tensornet::{ChainStep, TensorTrain, TruncationPolicy, PHYS};

/// Everything needed for one propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<R> {
    pub spin: SpinParams<R>,
    pub bath: BathParams<R>,
    pub initial: SpinState<R>,
    pub delta: R,
    pub n_steps: usize,
    pub depth: usize,
    pub policy: TruncationPolicy<R>,
    pub u: R,
    /// Bath memory time; `depth·delta` below it is reported as a warning.
    pub memory_time: Option<R>,
    pub eta: EtaOptions<R>,
}

impl<R: Real> RunConfig<R> {
    pub fn new(
        spin: SpinParams<R>,
        bath: BathParams<R>,
        initial: SpinState<R>,
        delta: R,
        n_steps: usize,
        depth: usize,
    ) -> Self {
        Self {
            spin,
            bath,
            initial,
            delta,
            n_steps,
            depth,
            policy: TruncationPolicy::exact(),
            u: R::zero(),
            memory_time: None,
            eta: EtaOptions::default(),
        }
    }

    pub fn with_policy(mut self, policy: TruncationPolicy<R>) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_u(mut self, u: R) -> Self {
        self.u = u;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > R::zero()) || !self.delta.is_finite() {
            return Err(invalid("delta", format!("must be > 0, got {}", self.delta)));
        }
        if self.n_steps < 1 {
            return Err(invalid("n_steps", "must be >= 1"));
        }
        if self.depth < 1 {
            return Err(invalid("depth", "must be >= 1"));
        }
        if !self.u.is_finite() {
            return Err(invalid("u", "must be finite"));
        }
        Ok(())
    }

    pub fn final_time(&self) -> R {
        self.delta * R::from_usize_lossy(self.n_steps)
    }

    /// Builds the coefficient table this configuration needs.
    pub fn eta_table(&self) -> Result<EtaTable<R>> {
        let opts = EtaOptions { memory_time: self.memory_time.or(self.eta.memory_time), ..self.eta };
        build_eta_table(&self.bath, self.delta, self.depth, self.u, &opts)
    }
}

/// `χ(u, t_n)` on `t_n = nΔ`, `n = 0..=N`, with compression telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct CharSeries<R> {
    pub u: R,
    delta: R,
    pub times: Vec<R>,
    pub chi: Vec<Cplx<R>>,
    /// Largest bond extent after each step (0 at `t = 0`).
    pub max_bond: Vec<usize>,
    /// Running sum of relative discarded weights.
    pub discarded: Vec<R>,
    /// The bond cap cut below the cutoff rank at least once.
    pub overflow: bool,
    pub warnings: Vec<String>,
}

impl<R: Real> CharSeries<R> {
    pub(crate) fn start(delta: R, u: R, n_steps: usize) -> Self {
        let cap = n_steps + 1;
        let mut s = Self {
            u,
            delta,
            times: Vec::with_capacity(cap),
            chi: Vec::with_capacity(cap),
            max_bond: Vec::with_capacity(cap),
            discarded: Vec::with_capacity(cap),
            overflow: false,
            warnings: Vec::new(),
        };
        s.times.push(R::zero());
        s.chi.push(cone());
        s.max_bond.push(0);
        s.discarded.push(R::zero());
        s
    }

    pub(crate) fn push(&mut self, chi: Cplx<R>, bond: usize, discarded: R) {
        let n = self.times.len();
        self.times.push(self.delta * R::from_usize_lossy(n));
        self.chi.push(chi);
        self.max_bond.push(bond);
        let prev = self.total_discarded();
        self.discarded.push(prev + discarded);
    }

    pub fn delta(&self) -> R {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    pub fn total_discarded(&self) -> R {
        self.discarded.last().copied().unwrap_or_else(R::zero)
    }

    pub fn peak_bond(&self) -> usize {
        self.max_bond.iter().copied().max().unwrap_or(0)
    }
}

/// Output of [`tempo_propagate`].
#[derive(Debug, Clone, PartialEq)]
pub struct TempoOutput<R> {
    pub series: CharSeries<R>,
    /// Reduced density matrices on the same grid; present only at `u = 0`.
    pub states: Option<Vec<SpinState<R>>>,
}

/// Builds the coefficient table and propagates.
pub fn tempo_propagate<R: Real>(config: &RunConfig<R>) -> Result<TempoOutput<R>> {
    config.validate()?;
    let table = config.eta_table()?;
    tempo_propagate_with(config, &table)
}

/// Propagates with a precomputed coefficient table (matching `delta`, `depth`, `u`).
pub fn tempo_propagate_with<R: Real>(config: &RunConfig<R>, table: &EtaTable<R>) -> Result<TempoOutput<R>> {
    config.validate()?;
    if table.depth() != config.depth || table.delta() != config.delta || table.u() != config.u {
        return Err(invalid("table", "coefficient table does not match the run configuration"));
    }
    let mut out = TempoOutput { series: CharSeries::start(config.delta, config.u, config.n_steps), states: None };
    let mut states = vec![config.initial];
    out.series.warnings.extend(table.warnings().iter().cloned());
    for report in run_train(config, table) {
        let (chi, rho, bond, discarded, overflow) = report?;
        out.series.push(chi, bond, discarded);
        out.series.overflow |= overflow;
        states.push(rho);
    }
    if config.u == R::zero() {
        out.states = Some(states);
    }
    Ok(out)
}

type StepRow<R> = (Cplx<R>, SpinState<R>, usize, R, bool);

/// Lazily propagates the train, yielding one readout per step.
fn run_train<'a, R: Real>(
    config: &'a RunConfig<R>,
    table: &'a EtaTable<R>,
) -> impl Iterator<Item = Result<StepRow<R>>> + 'a {
    let prop = StepPropagator::new(&config.spin, table);
    let mut train = TensorTrain::<R>::empty();
    let mut failed = false;
    (1..=config.n_steps).map_while(move |n| {
        if failed {
            return None;
        }
        let result = (|| {
            let prop = prop.as_ref().map_err(Clone::clone)?;
            let (discarded, overflow) = if n == 1 {
                train = TensorTrain::product(&[prop.initial_vector(&config.initial, &config.spin)]);
                (R::zero(), false)
            } else {
                let step = chain_step(prop, train.len(), config.depth);
                let report = train.apply_step_preserving(&step, &config.policy, &[cone(); PHYS]).map_err(|e| match e {
                    Error::NumericalBlowup { .. } => Error::NumericalBlowup { step: n },
                    other => other,
                })?;
                (report.discarded_weight, report.overflow)
            };
            let marginal = train.reduce_to_last(&[cone(); PHYS])?;
            let (chi, rho) = prop.readout(&marginal);
            if !(chi.re.is_finite() && chi.im.is_finite()) {
                return Err(Error::NumericalBlowup { step: n });
            }
            Ok((chi, rho, train.max_bond(), discarded, overflow))
        })();
        failed = result.is_err();
        Some(result)
    })
}

/// Step operator appending `σ_new` to a train of `sites` path indices.
///
/// Site `j` (oldest first) sits at lag `sites − j` from the new index; the
/// newest existing site also carries the free propagator.
pub fn chain_step<R: Real>(prop: &StepPropagator<R>, sites: usize, depth: usize) -> ChainStep<R> {
    let g = &prop.free.step_full;
    let weights = (0..sites)
        .map(|j| {
            let lag = sites - j;
            let w = &prop.weights[lag];
            let mut v = Vec::with_capacity(PHYS * PHYS);
            for b in 0..PHYS {
                for s in 0..PHYS {
                    let mut x = w.get(b, s);
                    if j + 1 == sites {
                        x *= g[b][s];
                    }
                    v.push(x);
                }
            }
            v
        })
        .collect();
    ChainStep { bond: PHYS, weights, head: Some(prop.weights[0].diagonal()), close_first: sites + 1 > depth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quapi::dense_propagate;

    fn config(alpha: f64, t: f64, u: f64, k: usize, n: usize) -> RunConfig<f64> {
        let bath = BathParams::ohmic(alpha, 5.0, t).unwrap();
        RunConfig::new(SpinParams::unbiased(1.0), bath, SpinState::up(), 0.05, n, k).with_u(u)
    }

    #[test]
    fn matches_dense_engine_without_truncation() {
        for (alpha, temp, u) in [(0.1, 5.0, 0.0), (0.5, 1.0, 0.2), (1.0, 0.5, 0.05)] {
            let c = config(alpha, temp, u, 4, 9);
            let table = c.eta_table().unwrap();
            let tt = tempo_propagate_with(&c, &table).unwrap();
            let (dense, states) = dense_propagate(&c.initial, &c.spin, &table, c.n_steps).unwrap();
            for (a, b) in tt.series.chi.iter().zip(&dense.chi) {
                assert!((a - b).norm() < 1e-10, "{a} vs {b}");
            }
            if let Some(ts) = tt.states {
                for (a, b) in ts.iter().zip(&states) {
                    assert!(a.rho().max_abs_diff(b.rho()) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn decoupled_is_identity() {
        let out = tempo_propagate(&config(0.0, 1.0, 0.3, 3, 12).with_policy(TruncationPolicy::with_p(60.0).unwrap()))
            .unwrap();
        assert!(out.series.chi.iter().all(|c| (c - cone()).norm() < 1e-12));
        assert!(out.states.is_none());
    }

    #[test]
    fn times_grid_includes_origin() {
        let out = tempo_propagate(&config(0.1, 5.0, 0.0, 2, 4)).unwrap();
        assert_eq!(out.series.times.len(), 5);
        assert_eq!(out.series.chi[0], cone());
        assert!((out.series.times[4] - 0.2).abs() < 1e-15);
        assert_eq!(out.states.unwrap().len(), 5);
    }

    #[test]
    fn validation() {
        assert!(tempo_propagate(&config(0.1, 5.0, 0.0, 0, 4)).is_err());
        assert!(tempo_propagate(&config(0.1, 5.0, 0.0, 2, 0)).is_err());
        let mut c = config(0.1, 5.0, 0.0, 2, 4);
        c.delta = -1.0;
        assert!(tempo_propagate(&c).is_err());
        let c = config(0.1, 5.0, 0.0, 2, 4);
        let other = config(0.1, 5.0, 0.1, 2, 4).eta_table().unwrap();
        assert!(tempo_propagate_with(&c, &other).is_err());
    }
}
