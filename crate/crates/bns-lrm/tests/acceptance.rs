//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Reference configuration throughout: the Scho-Gamma parameter set with
//! S = 1124.47, sigma^2 = 0.0145, t = 0, T = 1, r = 0.019, q = 0.012,
//! damping alpha = 1.75.

use std::time::Instant;

use bns_lrm::charfn::phi;
use bns_lrm::model::{
    alpha_drift, c_rho, martingale_drift, martingale_drift_levy, preset, preset_names,
    validate_assumptions, GammaOuParams, LevyParams, MarketState,
};
use bns_lrm::pricer::{
    hedge, i1, i2, price_call, strike_grid_fft, FftGridConfig, QuadratureConfig,
};
use bns_lrm::quad::adaptive_gk;
use bns_lrm::simulate::{path_bound_audit, sample_paths, simulate_pass, McConfig};
use bns_lrm::strategy::{sweep, SweepSpec, SweepTable};
use bns_lrm::DampingConfig;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn scho() -> (MarketState, GammaOuParams, f64) {
    let levy = match preset("Scho-Gamma").unwrap() {
        LevyParams::GammaOu(p) => p,
        _ => unreachable!(),
    };
    let state = MarketState::reference(0.0);
    let mu = martingale_drift(&levy, state.r, state.q);
    (state, levy, mu)
}

fn report(criterion: u32, pass: bool, start: Instant, detail: &str) {
    println!(
        "criterion {criterion}: {} ({:.2}s) {detail}",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
}

const FIGURE_STRIKES: [f64; 3] = [900.0, 1124.47, 1300.0];

#[test]
fn criterion_1_assumption_replication() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for name in preset_names() {
        let levy = preset(name).unwrap();
        let mu = martingale_drift_levy(&levy, 0.019, 0.012);
        let rep = validate_assumptions(&levy, 1.0, mu).unwrap();
        let expect_fail_item_1 = name == "Scho-IG";
        let good = if expect_fail_item_1 {
            !rep.items[0].pass && rep.items[1].pass && rep.items[2].pass
        } else {
            rep.all_pass()
        };
        ok &= good;
        detail.push_str(&format!(
            "{name}: {}; ",
            if rep.all_pass() {
                "all pass"
            } else {
                "item 1 fails"
            }
        ));
    }
    let within_budget = start.elapsed().as_secs_f64() < 1.0;
    report(1, ok && within_budget, start, &detail);
    assert!(ok, "assumption verdicts do not match: {detail}");
    assert!(within_budget, "criterion 1 exceeded its 1 s budget");
}

#[test]
fn criterion_2_analytic_identities() {
    let start = Instant::now();
    let (state, levy, mu) = scho();

    let phi0 = phi(Complex64::new(0.0, 0.0), &state, &levy, mu).unwrap();
    let exact_at_zero = phi0 == Complex64::new(1.0, 0.0);

    let fwd = phi(Complex64::new(0.0, -1.0), &state, &levy, mu).unwrap() * state.discount();
    let martingale_ok = (fwd.re - state.spot).abs() / state.spot <= 1e-8 && fwd.im.abs() <= 1e-6;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut drift_ok = true;
    let mut crho_ok = true;
    for _ in 0..100 {
        let p = GammaOuParams::new(
            0.1 + 4.9 * rng.gen::<f64>(),
            0.5 + 39.5 * rng.gen::<f64>(),
            0.05 + 2.95 * rng.gen::<f64>(),
            -5.0 * rng.gen::<f64>(),
            0.001 + 0.05 * rng.gen::<f64>(),
        )
        .unwrap();
        let (r, q) = (0.1 * rng.gen::<f64>() - 0.02, 0.1 * rng.gen::<f64>() - 0.02);
        drift_ok &= (alpha_drift(&p, martingale_drift(&p, r, q)) - (r - q)).abs() <= 1e-12;

        let f = |x: f64| {
            let g = (p.rho * x).exp_m1();
            g * g * p.levy_density(x)
        };
        let oracle = adaptive_gk(&f, 0.0, 40.0 / p.b, 1e-15, 1e-12, 800).value;
        crho_ok &= (c_rho(&p) - oracle).abs() <= 1e-8 * oracle.abs().max(f64::MIN_POSITIVE);
    }

    let pass = exact_at_zero && martingale_ok && drift_ok && crho_ok;
    report(
        2,
        pass,
        start,
        &format!(
            "phi(0)==1: {exact_at_zero}; martingale rel 1e-8: {martingale_ok}; drift identity 1e-12 x100: {drift_ok}; C_rho vs quadrature 1e-8 x100: {crho_ok}"
        ),
    );
    assert!(pass);
    assert!(start.elapsed().as_secs_f64() < 10.0, "criterion 2 budget");
}

#[test]
fn criterion_3_damping_invariance() {
    let start = Instant::now();
    let (state, levy, mu) = scho();
    let quad = QuadratureConfig::default();
    let alphas = [1.5, 1.75, 2.0];
    let mut worst = 0.0f64;
    for k in FIGURE_STRIKES {
        let runs: Vec<(f64, f64, f64)> = alphas
            .iter()
            .map(|&a| {
                let d = DampingConfig::new(a);
                (
                    i1(&state, &levy, mu, k, &d, &quad).unwrap().value,
                    i2(&state, &levy, mu, k, &d, &quad).unwrap().value,
                    price_call(&state, &levy, mu, k, &d, &quad).unwrap().value,
                )
            })
            .collect();
        for a in 0..alphas.len() {
            for b in (a + 1)..alphas.len() {
                worst = worst
                    .max((runs[a].0 - runs[b].0).abs() / runs[a].0.abs())
                    .max((runs[a].1 - runs[b].1).abs() / runs[a].1.abs())
                    .max((runs[a].2 - runs[b].2).abs() / runs[a].2.abs());
            }
        }
    }
    let pass = worst <= 1e-6;
    report(
        3,
        pass,
        start,
        &format!("worst pairwise relative deviation over alpha in {{1.5, 1.75, 2.0}}: {worst:.3e}"),
    );
    assert!(pass, "damping dependence {worst:.3e} exceeds 1e-6");
    assert!(start.elapsed().as_secs_f64() < 30.0, "criterion 3 budget");
}

#[test]
fn criterion_4_fft_vs_quadrature() {
    let start = Instant::now();
    let (state, levy, mu) = scho();
    let damping = DampingConfig::default();
    let quad = QuadratureConfig::default();
    let strikes: Vec<f64> = (0..20).map(|j| 200.0 + 1800.0 * j as f64 / 19.0).collect();
    let grid = strike_grid_fft(
        &state,
        &levy,
        mu,
        &strikes,
        &damping,
        &FftGridConfig::default(),
    )
    .unwrap();
    let mut worst = 0.0f64;
    for h in &grid {
        let r = hedge(&state, &levy, mu, h.strike, &damping, &quad).unwrap();
        let floor = 1e-4 * state.spot;
        worst = worst
            .max((h.i1 - r.i1).abs() / r.i1.abs().max(floor))
            .max((h.i2 - r.i2).abs() / r.i2.abs().max(floor))
            .max((h.price - r.price).abs() / r.price.abs().max(floor));
    }
    let pass = worst <= 1e-4;
    report(
        4,
        pass,
        start,
        &format!(
            "worst FFT-vs-quadrature relative error over 20 strikes in [200, 2000]: {worst:.3e}"
        ),
    );
    assert!(pass, "FFT deviates from quadrature by {worst:.3e}");
    assert!(start.elapsed().as_secs_f64() < 60.0, "criterion 4 budget");
}

#[test]
fn criterion_5_fourier_vs_monte_carlo() {
    let start = Instant::now();
    let (state, levy, mu) = scho();
    let damping = DampingConfig::default();
    let quad = QuadratureConfig::default();
    let mc = McConfig {
        n_paths: 200_000,
        seed: 42,
        ..McConfig::default()
    };
    let pass_data = simulate_pass(&state, &levy, mu, &FIGURE_STRIKES, &[], &mc).unwrap();
    let mut max_z = 0.0f64;
    let mut ok = true;
    for s in &pass_data.strikes {
        let r = hedge(&state, &levy, mu, s.strike, &damping, &quad).unwrap();
        for (name, est, reference) in [
            ("i1", s.i1, r.i1),
            ("i2", s.i2, r.i2),
            ("price", s.price, r.price),
            ("xi", s.xi, r.xi),
        ] {
            let z = (est.value - reference) / est.std_err;
            max_z = max_z.max(z.abs());
            if z.abs() > 3.0 {
                ok = false;
                println!("  K={} {name}: z = {z:+.3}", s.strike);
            }
        }
    }
    report(
        5,
        ok,
        start,
        &format!("12 comparisons at 3 strikes, 2e5 paths, seed 42: max |z| = {max_z:.3}"),
    );
    assert!(
        ok,
        "Fourier vs Monte Carlo disagreement: max |z| = {max_z:.3}"
    );
    assert!(start.elapsed().as_secs_f64() < 300.0, "criterion 5 budget");
}

#[test]
fn criterion_6_put_corollary_cross_check() {
    let start = Instant::now();
    let (state, levy, mu) = scho();
    let damping = DampingConfig::default();
    let quad = QuadratureConfig::default();
    let mc = McConfig {
        n_paths: 200_000,
        seed: 42,
        ..McConfig::default()
    };
    let pass_data = simulate_pass(&state, &levy, mu, &FIGURE_STRIKES, &[], &mc).unwrap();
    let mut max_z = 0.0f64;
    let mut ok = true;
    for s in &pass_data.strikes {
        let xi_call = hedge(&state, &levy, mu, s.strike, &damping, &quad)
            .unwrap()
            .xi;
        let z = (s.put_lrm.value + 1.0 - xi_call) / s.put_lrm.std_err;
        max_z = max_z.max(z.abs());
        ok &= z.abs() <= 3.0;
    }
    report(
        6,
        ok,
        start,
        &format!("put-side formula vs xi_call at 3 strikes: max |z| = {max_z:.3}"),
    );
    assert!(ok, "put corollary violated: max |z| = {max_z:.3}");
}

/// Rows of `(grid value, xi, delta)`.
type SweepCurve = Vec<(f64, f64, f64)>;

fn sweep_values(table: &SweepTable) -> SweepCurve {
    table
        .rows
        .iter()
        .map(|r| {
            let v = r.values.expect("sweep row failed");
            (r.grid_value, v.xi, v.delta)
        })
        .collect()
}

#[test]
fn criterion_7_qualitative_findings() {
    let start = Instant::now();
    let (state, levy, mu) = scho();
    let damping = DampingConfig::default();
    let quad = QuadratureConfig::default();
    let fft = FftGridConfig::default();

    let time_sweeps: Vec<(f64, SweepCurve)> = FIGURE_STRIKES
        .iter()
        .map(|&k| {
            let t = sweep(
                &SweepSpec::figure_time_grid(k),
                &state,
                &levy,
                mu,
                &damping,
                &quad,
                &fft,
            )
            .unwrap();
            (k, sweep_values(&t))
        })
        .collect();
    let strike_sweeps: Vec<(f64, SweepCurve)> = [0.0, 0.5, 0.9]
        .iter()
        .map(|&t| {
            let s = sweep(
                &SweepSpec::figure_strike_grid(t),
                &state,
                &levy,
                mu,
                &damping,
                &quad,
                &fft,
            )
            .unwrap();
            (t, sweep_values(&s))
        })
        .collect();

    // (i) xi <= delta + 1e-8 at every point of all six sweeps
    let mut xi_le_delta = true;
    for (_, rows) in time_sweeps.iter().chain(&strike_sweeps) {
        for &(_, xi, delta) in rows {
            xi_le_delta &= xi <= delta + 1e-8;
        }
    }

    // (ii) monotone in t: increasing for K = 900, decreasing for the others
    let mut monotone = true;
    let mut monotone_detail = String::new();
    for (k, rows) in &time_sweeps {
        let increasing = *k == 900.0;
        let mut worst_step_xi = 0.0f64;
        let mut worst_step_delta = 0.0f64;
        for w in rows.windows(2) {
            let (step_xi, step_delta) = (w[1].1 - w[0].1, w[1].2 - w[0].2);
            let (bad_xi, bad_delta) = if increasing {
                ((-step_xi).max(0.0), (-step_delta).max(0.0))
            } else {
                (step_xi.max(0.0), step_delta.max(0.0))
            };
            worst_step_xi = worst_step_xi.max(bad_xi);
            worst_step_delta = worst_step_delta.max(bad_delta);
        }
        if worst_step_xi > 1e-6 || worst_step_delta > 1e-6 {
            monotone = false;
            monotone_detail.push_str(&format!(
                "K={k}: worst counter-step xi {worst_step_xi:.2e}, delta {worst_step_delta:.2e}; "
            ));
        }
    }

    // (iii) deep-moneyness levels of the t = 0 strike sweep
    let t0 = &strike_sweeps[0].1;
    let xi_itm = t0.iter().find(|r| r.0 == 200.0).unwrap().1;
    let xi_otm = t0.iter().find(|r| r.0 == 2000.0).unwrap().1;
    let levels = (0.95..=1.0).contains(&xi_itm) && (0.0..=0.05).contains(&xi_otm);

    // (iv) the delta-xi spread is wider in the money than out of the money
    let mean_gap = |lo: f64, hi: f64| {
        let sel: Vec<f64> = t0
            .iter()
            .filter(|r| r.0 >= lo && r.0 <= hi)
            .map(|r| r.2 - r.1)
            .collect();
        sel.iter().sum::<f64>() / sel.len() as f64
    };
    let spread = mean_gap(600.0, 1100.0) > mean_gap(1150.0, 1800.0);

    let pass = xi_le_delta && monotone && levels && spread;
    report(
        7,
        pass,
        start,
        &format!(
            "(i) xi<=delta: {xi_le_delta}; (ii) monotone: {monotone} {monotone_detail}; (iii) xi(200)={xi_itm:.4} in [0.95,1] and xi(2000)={xi_otm:.4} in [0,0.05]: {levels}; (iv) ITM spread > OTM spread: {spread}"
        ),
    );
    assert!(
        pass,
        "qualitative findings: xi<=delta {xi_le_delta}, monotone {monotone} ({monotone_detail}), levels {levels} (xi(200)={xi_itm:.4}, xi(2000)={xi_otm:.4}), spread {spread}"
    );
    assert!(start.elapsed().as_secs_f64() < 300.0, "criterion 7 budget");
}

#[test]
fn criterion_8_path_bound_audit() {
    let start = Instant::now();
    let (state, levy, mu) = scho();
    let alpha = alpha_drift(&levy, mu);
    let paths = sample_paths(&state, &levy, 10_000, 1729);
    let audit = path_bound_audit(&paths, &levy, alpha).unwrap();
    report(
        8,
        audit.pass,
        start,
        &format!(
            "10^4 paths: u violations {}, theta violations {}, consistency violations {}, max |u|/C_u = {:.4}",
            audit.u_violations, audit.theta_violations, audit.consistency_violations, audit.max_u_ratio
        ),
    );
    assert!(audit.pass, "{audit:?}");
}

#[test]
fn criterion_9_determinism_across_thread_counts() {
    let start = Instant::now();
    let (state, levy, mu) = scho();
    let mc = McConfig {
        n_paths: 50_000,
        seed: 42,
        ..McConfig::default()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            simulate_pass(&state, &levy, mu, &FIGURE_STRIKES, &[0.5, 2.0, 11.0], &mc).unwrap()
        })
    };
    let a = run(1);
    let b = run(4);
    let c = run(3);
    let mut identical = a.martingale.value.to_bits() == b.martingale.value.to_bits()
        && a.martingale.value.to_bits() == c.martingale.value.to_bits();
    for i in 0..a.strikes.len() {
        for (x, y, z) in [
            (a.strikes[i].i1, b.strikes[i].i1, c.strikes[i].i1),
            (a.strikes[i].i2, b.strikes[i].i2, c.strikes[i].i2),
            (a.strikes[i].price, b.strikes[i].price, c.strikes[i].price),
            (a.strikes[i].xi, b.strikes[i].xi, c.strikes[i].xi),
            (
                a.strikes[i].put_lrm,
                b.strikes[i].put_lrm,
                c.strikes[i].put_lrm,
            ),
        ] {
            identical &= x.value.to_bits() == y.value.to_bits()
                && x.value.to_bits() == z.value.to_bits()
                && x.std_err.to_bits() == y.std_err.to_bits()
                && x.std_err.to_bits() == z.std_err.to_bits();
        }
    }
    for i in 0..a.phi.len() {
        identical &= a.phi[i].1.re.to_bits() == b.phi[i].1.re.to_bits()
            && a.phi[i].1.im.to_bits() == c.phi[i].1.im.to_bits();
    }
    report(
        9,
        identical,
        start,
        "identical seed, thread counts {1, 3, 4}: all estimates bitwise equal",
    );
    assert!(identical, "estimates depend on thread count");
}
