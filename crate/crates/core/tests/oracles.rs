//! Independent closed-form and brute-force oracles for the propagation engines.

use fcs_tempo::bathcorr::{eta_continuous, BathParams, EtaKind};
use fcs_tempo::scalar::cplx;
use fcs_tempo::spinsys::{SpinParams, SpinState};
use fcs_tempo::tempo::{tempo_propagate, RunConfig};
use fcs_tempo::tensornet::TruncationPolicy;
use fcs_tempo::varpol::solve_silbey_harris;

const OMEGA_C: f64 = 5.0;

/// Midpoint rule on `(0, top)`.
fn midpoint(f: impl Fn(f64) -> f64, top: f64, points: usize) -> f64 {
    let h = top / points as f64;
    (0..points).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn ohmic(alpha: f64, w: f64) -> f64 {
    2.0 * alpha * w * (-w / OMEGA_C).exp()
}

#[test]
fn independent_boson_coherence_decay() {
    // ⟨S_x⟩(t) = ½cos(ω₀t)·exp(−∫J/ω²(1 − cos ωt)coth(ω/2T)dω)
    let (alpha, temp) = (0.1, 5.0);
    let bath = BathParams::ohmic(alpha, OMEGA_C, temp).unwrap();
    let n = 40;
    let c = RunConfig::new(SpinParams::independent_boson(1.0), bath, SpinState::right(), 0.05, n, n);
    let out = tempo_propagate(&c).unwrap();
    let states = out.states.unwrap();
    for i in (0..=n).step_by(5) {
        let t = out.series.times[i];
        let decay = midpoint(
            |w| ohmic(alpha, w) / (w * w) * (1.0 - (w * t).cos()) / (w / (2.0 * temp)).tanh(),
            300.0,
            400_000,
        );
        let want = 0.5 * t.cos() * (-decay).exp();
        let got = states[i].sx();
        assert!((got - want).abs() < 1e-5, "t = {t}: {got} vs {want}");
    }
}

#[test]
fn weak_coupling_heat_matches_second_order_theory() {
    // Q_σ(t) = ¼∫Jω[(n+1)K(ω − σΩ) − n·K(ω + σΩ)], K(x) = 2(1 − cos xt)/x²
    let (alpha, temp, u) = (1e-5, 5.0, 1e-3);
    let bath = BathParams::ohmic(alpha, OMEGA_C, temp).unwrap();
    let n = 60;
    for (state, sigma) in [(SpinState::right(), 1.0), (SpinState::left(), -1.0)] {
        let c = RunConfig::new(SpinParams::unbiased(1.0), bath, state, 0.025, n, n)
            .with_u(u)
            .with_policy(TruncationPolicy::with_p(120.0).unwrap());
        let out = tempo_propagate(&c).unwrap();
        let mut rows = Vec::new();
        for i in (0..=n).step_by(10) {
            let t = out.series.times[i];
            let k = |x: f64| if x.abs() < 1e-8 { t * t } else { 2.0 * (1.0 - (x * t).cos()) / (x * x) };
            let theory = midpoint(
                |w| {
                    let nb = 1.0 / ((w / temp).exp() - 1.0);
                    0.25 * ohmic(alpha, w) * w * ((nb + 1.0) * k(w - sigma) - nb * k(w + sigma))
                },
                300.0,
                400_000,
            );
            rows.push((t, out.series.chi[i].im / u, theory));
        }
        let scale = rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        for (t, got, want) in rows {
            assert!((got - want).abs() <= 3e-3 * scale, "sigma {sigma}, t = {t}: {got:e} vs {want:e}");
        }
    }
}

#[test]
fn a1_kernel_matches_brute_force() {
    // A1(t, 0) = ∫J/ω²[coth(ω/2T)(1 − cos ωt) + i(sin ωt − ωt)]dω
    let (alpha, temp, t) = (0.1, 5.0, 1.0);
    let bath = BathParams::ohmic(alpha, OMEGA_C, temp).unwrap();
    let got = eta_continuous(EtaKind::A1, &bath, t, 0.0).unwrap();
    let pts = 1_000_000;
    let re = midpoint(|w| ohmic(alpha, w) / (w * w) * (1.0 - (w * t).cos()) / (w / (2.0 * temp)).tanh(), 300.0, pts);
    let im = midpoint(|w| ohmic(alpha, w) / (w * w) * ((w * t).sin() - w * t), 300.0, pts);
    let want = cplx(re, im);
    assert!((got - want).norm() < 1e-8 * want.norm(), "{got} vs {want}");
}

#[test]
fn renormalised_tunnelling_by_bisection() {
    // Ω' = Ω·exp(−½∫J/ω²·φ²·coth(ω/2T)), φ = ω²/(ω² + Ω'tanh(Ω'/2T)·ω·coth(ω/2T))
    let (alpha, temp) = (0.1, 1.0);
    let bath = BathParams::ohmic(alpha, OMEGA_C, temp).unwrap();
    let map = |x: f64| {
        let a = x * (x / (2.0 * temp)).tanh();
        // Substituting ω = eˢ resolves the small-frequency region.
        let (lo, hi, m) = (-25.0f64, 300f64.ln(), 200_000);
        let h = (hi - lo) / m as f64;
        let integral: f64 = (0..m)
            .map(|i| {
                let w = (lo + (i as f64 + 0.5) * h).exp();
                let wcoth = w / (w / (2.0 * temp)).tanh();
                let phi = w * w / (w * w + a * wcoth);
                // J/ω²·φ²·coth times the Jacobian ω
                0.5 * ohmic(alpha, w) * phi * phi * wcoth / (w * w)
            })
            .sum::<f64>()
            * h;
        (-integral).exp()
    };
    let (mut l, mut r) = (1e-3, 1.0);
    for _ in 0..60 {
        let m = 0.5 * (l + r);
        if m - map(m) < 0.0 {
            l = m;
        } else {
            r = m;
        }
    }
    let want = 0.5 * (l + r);
    let got = solve_silbey_harris(&SpinParams::unbiased(1.0), &bath).unwrap().omega_renorm;
    assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
}
