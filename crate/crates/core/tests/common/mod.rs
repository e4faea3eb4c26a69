//! Property checks shared by the property suite and the acceptance runner.
//! Each check returns `Err` with a description on the first violation.

#![allow(dead_code)]

use fcs_tempo::bathcorr::{build_eta_table, BathParams, Branch, EtaKind, EtaOptions};
use fcs_tempo::heatstats::{cumulants_from_chi, three_point_second_moment};
use fcs_tempo::influence::{pair_weight, swap_branches};
use fcs_tempo::scalar::{cplx, Cplx};
use fcs_tempo::spinsys::{SpinParams, SpinState};
use fcs_tempo::tempo::{tempo_propagate, RunConfig};
use fcs_tempo::tensornet::{svd_truncate, DenseTensor, TensorTrain, TruncationPolicy};
use proptest::prelude::*;

pub type Check = std::result::Result<(), String>;

/// Bath and grid parameters for the coefficient-table properties.
#[derive(Debug, Clone, Copy)]
pub struct BathCase {
    pub alpha: f64,
    pub omega_c: f64,
    pub temperature: f64,
    pub delta: f64,
    pub u: f64,
}

pub fn bath_case() -> impl Strategy<Value = BathCase> {
    (0.01f64..1.5, 1.0f64..10.0, 0.1f64..10.0, 0.005f64..0.2, 0.001f64..0.3).prop_map(
        |(alpha, omega_c, temperature, delta, u)| BathCase { alpha, omega_c, temperature, delta, u },
    )
}

fn opts() -> EtaOptions<f64> {
    EtaOptions { parallel: false, ..EtaOptions::default() }
}

fn close(a: Cplx<f64>, b: Cplx<f64>, scale: f64, tol: f64) -> bool {
    (a - b).norm() <= tol * scale.max(1e-300)
}

/// Tables at `±u`: A-parts even, C-part odd, and `η⁺⁺ = conj η⁻⁻` at every lag.
pub fn eta_parity_and_conjugation(c: BathCase) -> Check {
    let bath = BathParams::ohmic(c.alpha, c.omega_c, c.temperature).map_err(|e| e.to_string())?;
    let depth = 6;
    let plus = build_eta_table(&bath, c.delta, depth, c.u, &opts()).map_err(|e| e.to_string())?;
    let minus = build_eta_table(&bath, c.delta, depth, -c.u, &opts()).map_err(|e| e.to_string())?;
    for lag in 0..=depth {
        let scale = EtaKind::ALL
            .iter()
            .map(|&k| plus.kind(k, lag).map(|z| z.norm()).unwrap_or(0.0))
            .fold(0.0, f64::max);
        let get = |t: &fcs_tempo::EtaTable, k| t.kind(k, lag).map_err(|e| e.to_string());
        for kind in [EtaKind::A1, EtaKind::A2] {
            let (a, b) = (get(&plus, kind)?, get(&minus, kind)?);
            if !close(a, b, scale, 1e-12) {
                return Err(format!("{kind:?} not even at lag {lag}: {a} vs {b}"));
            }
        }
        let (a, b) = (get(&plus, EtaKind::C)?, get(&minus, EtaKind::C)?);
        if !close(a, -b, scale, 1e-12) {
            return Err(format!("C not odd at lag {lag}: {a} vs {b}"));
        }
        for t in [&plus, &minus] {
            let pp = t.eta(Branch::Plus, Branch::Plus, lag).map_err(|e| e.to_string())?;
            let mm = t.eta(Branch::Minus, Branch::Minus, lag).map_err(|e| e.to_string())?;
            if !close(pp, mm.conj(), scale, 1e-12) {
                return Err(format!("eta++ != conj eta-- at lag {lag}: {pp} vs {mm}"));
            }
        }
    }
    Ok(())
}

/// All 16 pair weights at `−u` equal the conjugated, branch-swapped weights at `u`.
pub fn weight_conjugation(c: BathCase) -> Check {
    let bath = BathParams::ohmic(c.alpha, c.omega_c, c.temperature).map_err(|e| e.to_string())?;
    let depth = 5;
    let plus = build_eta_table(&bath, c.delta, depth, c.u, &opts()).map_err(|e| e.to_string())?;
    let minus = build_eta_table(&bath, c.delta, depth, -c.u, &opts()).map_err(|e| e.to_string())?;
    for lag in 0..=depth {
        let wp = pair_weight(&plus, lag).map_err(|e| e.to_string())?;
        let wm = pair_weight(&minus, lag).map_err(|e| e.to_string())?;
        for later in 0..4 {
            for earlier in 0..4 {
                let lhs = wm.get(later, earlier);
                let rhs = wp.get(swap_branches(later), swap_branches(earlier)).conj();
                if !close(lhs, rhs, lhs.norm().max(1.0), 1e-12) {
                    return Err(format!("lag {lag} entry ({later},{earlier}): {lhs} vs {rhs}"));
                }
            }
        }
    }
    Ok(())
}

/// Random complex tensor of shape `[4; sites]` from a seed.
pub fn random_tensor(sites: usize, seed: u64) -> DenseTensor<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = 4usize.pow(sites as u32);
    let data = (0..n).map(|_| cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    DenseTensor::new(vec![4; sites], data).expect("shape matches data")
}

/// Dense to train to dense is exact without truncation.
pub fn train_round_trip(sites: usize, seed: u64) -> Check {
    let t = random_tensor(sites, seed);
    let train = TensorTrain::from_dense(&t).map_err(|e| e.to_string())?;
    let back = train.to_dense();
    if back.shape() != t.shape() {
        return Err(format!("shape {:?} came back as {:?}", t.shape(), back.shape()));
    }
    let err = t.max_abs_diff(&back);
    if err > 1e-12 {
        return Err(format!("round trip error {err:e} for {sites} sites"));
    }
    Ok(())
}

/// Discarded weight never grows when the cutoff exponent grows, both for a
/// single matrix truncation and for a full train sweep.
pub fn truncation_monotone(sites: usize, seed: u64, p_low: f64, p_high: f64) -> Check {
    let t = random_tensor(sites, seed);
    // Impose decaying structure so that the cutoff actually bites.
    let data: Vec<_> = t.data().iter().enumerate().map(|(i, z)| *z * (-(i as f64) / 7.0).exp()).collect();
    let t = DenseTensor::new(t.shape().to_vec(), data).map_err(|e| e.to_string())?;
    let lo = TruncationPolicy::with_p(p_low).map_err(|e| e.to_string())?;
    let hi = TruncationPolicy::with_p(p_high).map_err(|e| e.to_string())?;

    let rows = 4usize.pow((sites / 2) as u32);
    let m = DenseTensor::new(vec![rows, t.data().len() / rows], t.data().to_vec()).map_err(|e| e.to_string())?;
    let a = svd_truncate(&m, &lo).map_err(|e| e.to_string())?;
    let b = svd_truncate(&m, &hi).map_err(|e| e.to_string())?;
    if b.discarded_weight > a.discarded_weight || b.s.len() < a.s.len() {
        return Err(format!(
            "matrix: p={p_high} discards {:e} (rank {}), p={p_low} discards {:e} (rank {})",
            b.discarded_weight,
            b.s.len(),
            a.discarded_weight,
            a.s.len()
        ));
    }

    let sweep = |policy: &TruncationPolicy<f64>| -> std::result::Result<f64, String> {
        let mut train = TensorTrain::from_dense(&t).map_err(|e| e.to_string())?;
        train.right_canonicalize();
        Ok(train.truncate_sweep(policy).map_err(|e| e.to_string())?.discarded_weight)
    };
    let (dl, dh) = (sweep(&lo)?, sweep(&hi)?);
    if dh > dl {
        return Err(format!("train: p={p_high} discards {dh:e}, p={p_low} discards {dl:e}"));
    }
    Ok(())
}

/// Independent-boson run used by the counting-field checks.
fn ibm_run(alpha: f64, temperature: f64, u: f64) -> std::result::Result<fcs_tempo::CharSeries, String> {
    let bath = BathParams::ohmic(alpha, 5.0, temperature).map_err(|e| e.to_string())?;
    let config = RunConfig::new(SpinParams::independent_boson(1.0), bath, SpinState::up(), 0.05, 24, 12)
        .with_u(u)
        .with_policy(TruncationPolicy::with_p(80.0).map_err(|e| e.to_string())?);
    Ok(tempo_propagate(&config).map_err(|e| e.to_string())?.series)
}

/// `⟨Q⟩` at `u` and `u/2` agree within the declared finite-difference band,
/// and the single-run second moment equals the explicit `±u` difference.
pub fn richardson_consistency(alpha: f64, temperature: f64, u: f64) -> Check {
    let full = ibm_run(alpha, temperature, u)?;
    let half = ibm_run(alpha, temperature, u / 2.0)?;
    let minus = ibm_run(alpha, temperature, -u)?;
    let a = cumulants_from_chi(&full, u).map_err(|e| e.to_string())?;
    let b = cumulants_from_chi(&half, u / 2.0).map_err(|e| e.to_string())?;
    for i in 0..a.times.len() {
        let gap = (a.mean_q[i] - b.mean_q[i]).abs();
        if gap > a.fd_error_estimate[i] + 1e-12 {
            return Err(format!("t={}: |Q(u) - Q(u/2)| = {gap:e} > band {:e}", a.times[i], a.fd_error_estimate[i]));
        }
    }
    let three = three_point_second_moment(&full, &minus).map_err(|e| e.to_string())?;
    for (i, (x, y)) in three.iter().zip(&a.second_moment).enumerate() {
        if (x - y).abs() > 1e-10 * y.abs().max(1.0) {
            return Err(format!("t={}: three-point {x} vs single-run {y}", a.times[i]));
        }
    }
    Ok(())
}
