//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line with the measured numbers.  Run with
//! `cargo test -p dskg-core --test acceptance -- --nocapture` to see every
//! line (cargo always shows the lines of failing tests).
//!
//! Several of the quantitative targets are structurally unattainable in
//! this discretization (see the failing assertions below for the measured
//! values): the energy-growth bound in the small-mass range, the dispersive
//! log-log slope band on the stated window, and the two mixed-norm constant
//! comparisons.  Those tests assert the stated targets anyway and stay red;
//! the printed lines carry the measurements.

use dskg_core::error::SemilinearError;
use dskg_core::fields::{mixed_norm, CauchyData, SpectralField};
use dskg_core::geometry::{verify_commutator, AlphaChoice, ModelParams};
use dskg_core::harness::experiments::{
    dispersive_decay_report, energy_growth_report, obstruction_scan, oracle_suite_report,
    strichartz_ratio_homog, strichartz_ratio_inhomog, DispersiveConfig, EnsembleConfig,
    ObstructionConfig,
};
use dskg_core::harness::{random_cauchy_data, random_forcing_profile, Exponent, ExponentTriple};
use dskg_core::modes::{mode_oracle, mode_propagator};
use dskg_core::propagators::{residual_check, solve_homogeneous, solve_inhomogeneous};
use dskg_core::semilinear::{
    critical_power, evolve_semilinear, nonlinear_energy, picard_iterate, scalar_oracle,
    scale_to_combined_size, EvolveOptions, Nonlinearity,
};
use num_complex::Complex64;
use num_rational::Ratio;
use std::time::Instant;

fn verdict(name: &str, pass: bool, detail: &str) {
    println!(
        "[acceptance] {name}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn uniform_grid(t0: f64, horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| t0 + horizon * k as f64 / steps as f64)
        .collect()
}

#[test]
fn c01_solver_oracle_equivalence() {
    let start = Instant::now();
    let n = 3usize;
    let crit = (n * n) as f64 / 4.0;
    let mut worst = 0.0f64;
    for lambda in [crit - 1.0, crit, crit + 1.0] {
        let params = ModelParams::new(n, lambda, 0.0, 8, 1.0).unwrap();
        for mu in [1.0, 5.0, 20.0] {
            for lag in [0.25, 0.5, 1.0, 2.0, 3.0, 4.0] {
                let (s, t) = (1.0, 1.0 + lag);
                let m = mode_propagator(s, t, mu * mu, &params, 1e-12).unwrap();
                let o = mode_oracle(s, t, mu, &params).unwrap();
                let scale = o.m11.abs() + o.m12.abs() + o.m21.abs() + o.m22.abs();
                let dev = ((m.m11 - o.m11).abs()
                    + (m.m12 - o.m12).abs()
                    + (m.m21 - o.m21).abs()
                    + (m.m22 - o.m22).abs())
                    / scale;
                worst = worst.max(dev);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-8 && elapsed < 10.0;
    verdict(
        "01 solver/oracle equivalence",
        pass,
        &format!("worst relative deviation {worst:.3e} (limit 1e-8), runtime {elapsed:.2}s (limit 10s)"),
    );
    assert!(pass, "worst {worst:e}, elapsed {elapsed}");
}

#[test]
fn c02_abel_wronskian() {
    // 100 seeded random (s, t, mu2, a) samples
    let mut state = 0x1d2c_3b4a_5968_7786u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut worst = 0.0f64;
    for i in 0..100 {
        let a = if i % 2 == 0 { 0.0 } else { 2.0 * next() };
        let lambda = 0.5 + 4.0 * next();
        let params = ModelParams::new(3, lambda, a, 8, 1.0).unwrap();
        let s = 1.0 + 3.0 * next();
        let t = s + 0.2 + 3.0 * next();
        let mu2 = 400.0 * next();
        let m = mode_propagator(s, t, mu2, &params, 1e-11).unwrap();
        worst = worst.max((m.det() - m.abel_determinant(&params)).abs());
    }
    let pass = worst < 1e-8;
    verdict(
        "02 Abel/Wronskian identity",
        pass,
        &format!("worst |det - predicted| = {worst:.3e} over 100 samples (limit 1e-8)"),
    );
    assert!(pass);
}

#[test]
fn c03_commutator_identity() {
    let p0 = ModelParams::new(3, 3.25, 0.0, 8, 1.0).unwrap();
    let p1 = ModelParams::new(3, 3.25, 1.0, 8, 1.0).unwrap();
    let mut worst_res = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for t in [2.0, 3.0, 4.0, 5.0, 6.0] {
        for xi in [[0i64, 0, 0], [1, 0, 0], [1, 1, 0], [2, 1, 1]] {
            let (q0, r0) = verify_commutator(&xi, t, &p0);
            assert_eq!(q0, 0.0, "q must vanish in the unperturbed model");
            worst_res = worst_res.max(r0);
            let (q1, r1) = verify_commutator(&xi, t, &p1);
            worst_res = worst_res.max(r1);
            let mu2 = p1.mu2_of(&xi);
            if mu2 > 0.0 {
                worst_ratio = worst_ratio.max(q1.abs() / mu2);
            }
        }
    }
    // uniform bound over a long time ladder
    for k in 0..200 {
        let t = 1.0 + 0.1 * k as f64;
        let (q, _) = verify_commutator(&[3, -2, 1], t, &p1);
        worst_ratio = worst_ratio.max(q.abs() / p1.mu2_of(&[3, -2, 1]));
    }
    let pass = worst_res < 1e-8 && worst_ratio <= 2.0 * p1.a + 1e-12;
    verdict(
        "03 commutator identity",
        pass,
        &format!(
            "worst finite-difference residual {worst_res:.3e} (limit 1e-8), sup |q|/|xi|^2 = {worst_ratio:.3} (bound {})",
            2.0 * p1.a
        ),
    );
    assert!(pass);
}

#[test]
fn c04i_energy_growth_large_mass() {
    let start = Instant::now();
    let params = ModelParams::new(3, 13.0 / 4.0, 0.0, 32, 1.0).unwrap();
    let alpha = AlphaChoice::new(1.5, params.lambda, 3).unwrap();
    let ens = EnsembleConfig::new(2024, 20);
    let (rep, _) = energy_growth_report(&alpha, &params, &ens, 10.0, 0.05).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = rep.pass && elapsed < 60.0;
    verdict(
        "04i energy growth, large mass",
        pass,
        &format!(
            "fitted rate {:.4} (target {} + 0.05), ensemble 20, runtime {elapsed:.1}s (limit 60s)",
            rep.fitted_rate, rep.target_rate
        ),
    );
    assert!(pass, "rate {}", rep.fitted_rate);
}

#[test]
fn c04ii_energy_growth_small_mass() {
    let params = ModelParams::new(3, 1.0, 0.0, 32, 1.0).unwrap();
    let alpha = AlphaChoice::new(0.9, params.lambda, 3).unwrap();
    let ens = EnsembleConfig::new(2024, 20);
    let (rep, _) = energy_growth_report(&alpha, &params, &ens, 10.0, 0.05).unwrap();

    // companion measurement at the sharp weight: alpha* = n/2 - sqrt(n^2/4 - lambda)
    let sharp = 1.5 - (2.25f64 - 1.0).sqrt();
    let alpha_sharp = AlphaChoice::new(sharp, params.lambda, 3).unwrap();
    let (rep_sharp, _) = energy_growth_report(&alpha_sharp, &params, &ens, 10.0, 0.05).unwrap();
    println!(
        "[acceptance] 04ii companion: at alpha* = {sharp:.4} the same ensemble fits rate {:.4} against target {:.4} + 0.05 -> {}",
        rep_sharp.fitted_rate,
        rep_sharp.target_rate,
        if rep_sharp.pass { "PASS" } else { "FAIL" }
    );
    verdict(
        "04ii energy growth, small mass (alpha = 0.9)",
        rep.pass,
        &format!(
            "fitted rate {:.4} vs stated bound {:.2} + 0.05; the generic slow mode decays like e^{{-a* t}} with a* = {sharp:.4}, so the sharp rate is n/2 - a* = {:.4}",
            rep.fitted_rate,
            rep.target_rate,
            1.5 - sharp
        ),
    );
    assert!(
        rep.pass,
        "measured rate {:.4} exceeds the stated bound {:.2}; sharp rate is {:.4} (companion at alpha* passes: {})",
        rep.fitted_rate,
        rep.target_rate + 0.05,
        1.5 - sharp,
        rep_sharp.pass
    );
}

fn dispersive_at(n: usize, grid: usize) -> (f64, f64, bool) {
    let crit = (n * n) as f64 / 4.0;
    let params = ModelParams::new(n, crit + 1.0, 0.0, grid, 1.0).unwrap();
    let cfg = DispersiveConfig {
        r: (n as f64 + 1.0) / 2.0 + 0.1,
        ..Default::default()
    };
    let (rep, _) = dispersive_decay_report(&params, &cfg).unwrap();
    let r2: f64 = rep.metadata.get("r2").unwrap().parse().unwrap();
    (rep.fitted_rate, r2, rep.pass)
}

#[test]
fn c05_dispersive_slope() {
    let start = Instant::now();
    let (slope3, r2_3, pass3) = dispersive_at(3, 64);
    let (slope2, r2_2, pass2) = dispersive_at(2, 64);
    let ordering = slope3 < slope2;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = pass3 && pass2 && ordering && elapsed < 120.0;
    verdict(
        "05 dispersive kernel slope",
        pass,
        &format!(
            "n=3 slope {slope3:.3} (target -1.0 +/- 0.15, r2 {r2_3:.3}); n=2 slope {slope2:.3} (target -0.5 +/- 0.15, r2 {r2_2:.3}); ordering n3 < n2: {ordering}; runtime {elapsed:.1}s"
        ),
    );
    assert!(
        pass,
        "measured slopes n3 = {slope3:.3} (r2 {r2_3:.3}), n2 = {slope2:.3} (r2 {r2_2:.3}): the stated window [0.05, 0.8] sits below the regularizer time scale ~1, where the kernel sup is saturated rather than power-law"
    );
}

#[test]
fn c06_strichartz_uniformity() {
    let alpha = AlphaChoice::new(1.5, 13.0 / 4.0, 3).unwrap();
    let triple = ExponentTriple::derive(
        Exponent::from_int(4),
        Exponent::from_int(4),
        Ratio::from_integer(0),
        3,
    );
    assert!(triple.admissible && triple.s == Ratio::new(1, 2));
    let t0_list = [4.0, 8.0, 16.0];
    let ens = EnsembleConfig::new(99, 10);

    let params32 = ModelParams::new(3, 13.0 / 4.0, 0.0, 32, 1.0).unwrap();
    let (rep32, _) =
        strichartz_ratio_homog(&triple, &alpha, &params32, &t0_list, 4.0, &ens).unwrap();

    // refinement stability of the t0 = 4 constant under N: 32 -> 48
    let params48 = ModelParams::new(3, 13.0 / 4.0, 0.0, 48, 1.0).unwrap();
    let (rep48, _) =
        strichartz_ratio_homog(&triple, &alpha, &params48, &[4.0], 4.0, &ens).unwrap();
    let c32: f64 = rep32
        .metadata
        .get("per_t0_constants")
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .split(':')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let c48 = rep48.measured_constant;
    let refinement_dev = (c48 - c32).abs() / c32;
    let spread = rep32.fitted_rate;
    let pass = rep32.pass && refinement_dev <= 0.2;
    verdict(
        "06 mixed-norm constant uniformity in t0",
        pass,
        &format!(
            "spread {spread:.1} (target <= 2), per-t0 constants [{}], N 32->48 deviation {:.1}% (limit 20%)",
            rep32.metadata.get("per_t0_constants").unwrap(),
            100.0 * refinement_dev
        ),
    );
    assert!(
        pass,
        "spread {spread:.1}: the attained ratio scales like e^{{-3 t0/4}} because a fixed grid only resolves physical frequencies below (N/2) e^{{-t0}}, so no representable datum saturates the estimate uniformly; refinement deviation {:.3}",
        refinement_dev
    );
}

#[test]
fn c07_inhomogeneous_scaling() {
    let alpha = AlphaChoice::new(1.5, 13.0 / 4.0, 3).unwrap();
    let triple = ExponentTriple::derive(
        Exponent::from_int(4),
        Exponent::from_int(4),
        Ratio::from_integer(0),
        3,
    );
    let params = ModelParams::new(3, 13.0 / 4.0, 0.0, 16, 1.0).unwrap();
    let ens = EnsembleConfig::new(7, 6);
    let (rep, _) =
        strichartz_ratio_inhomog(&triple, &alpha, &params, 4.0, &[1.0, 2.0, 4.0], &ens).unwrap();
    verdict(
        "07 inhomogeneous constant growth vs sqrt(T)",
        rep.pass,
        &format!(
            "measured growth {} (stated sqrt(T) within factor 2); log-log slope {:.3} vs 0.5",
            rep.metadata.get("growth").unwrap(),
            rep.fitted_rate
        ),
    );
    assert!(
        rep.pass,
        "growth {}: the measured ratio decays with T because the window extends to larger slices where fixed-grid data sit deeper in the infrared",
        rep.metadata.get("growth").unwrap()
    );
}

#[test]
fn c08_duhamel_residuals() {
    let params = ModelParams::new(3, 13.0 / 4.0, 0.0, 16, 1.0).unwrap();
    let grid = uniform_grid(1.0, 1.0, 200);

    // homogeneous trace
    let data = random_cauchy_data(31, 0, 3, 16, 1.0);
    let tr = solve_homogeneous(&data, &grid, &params, 1e-11).unwrap();
    let res_h = residual_check(&tr, None, &params).unwrap();

    // inhomogeneous trace from a smooth forcing
    let profile = random_forcing_profile(32, 0, 3, 16, 1.0);
    let forcing: Vec<SpectralField> = grid.iter().map(|&t| profile.at(t)).collect();
    let tr_i = solve_inhomogeneous(&forcing, &params, 1e-11).unwrap();
    let res_i = residual_check(&tr_i, Some(&forcing), &params).unwrap();

    // perturbed-model homogeneous trace
    let params_a = ModelParams::new(3, 13.0 / 4.0, 0.7, 16, 1.0).unwrap();
    let tr_a = solve_homogeneous(&data, &grid, &params_a, 1e-11).unwrap();
    let res_a = residual_check(&tr_a, None, &params_a).unwrap();

    // corrupted-trace negative control
    let mut bad = tr.clone();
    let mid = grid.len() / 2;
    let bump = bad.slices[mid].phi.coeffs()[3] + Complex64::new(0.03, 0.0);
    bad.slices[mid].phi.coeffs_mut()[3] = bump;
    let res_bad = residual_check(&bad, None, &params).unwrap();

    let pass = res_h < 1e-5 && res_i < 1e-5 && res_a < 1e-5 && res_bad > 1e-2;
    verdict(
        "08 trace residuals",
        pass,
        &format!(
            "homogeneous {res_h:.2e}, inhomogeneous {res_i:.2e}, perturbed {res_a:.2e} (limits 1e-5); corrupted control {res_bad:.2e} (> 1e-2)"
        ),
    );
    assert!(pass);
}

#[test]
fn c09_obstruction_scan() {
    // local window: the criterion-05 measurement at n = 3
    let (slope_local, r2_local, local_ok) = dispersive_at(3, 64);
    // tail: volume-normalized kernel sup over lags in [5, 15]
    let params = ModelParams::new(3, 13.0 / 4.0, 0.0, 64, 1.0).unwrap();
    let cfg = ObstructionConfig::default();
    let (rep, _) = obstruction_scan(&params, &cfg).unwrap();
    let tail_ok = rep.pass;
    let pass = local_ok && tail_ok;
    verdict(
        "09 global-decay obstruction",
        pass,
        &format!(
            "local slope {slope_local:.3} (band -1 +/- 0.15, r2 {r2_local:.3}), tail slope {:.4} (>= -0.1 confirms non-decay), crossover lag {}",
            rep.fitted_rate,
            rep.metadata.get("crossover_lag").unwrap()
        ),
    );
    assert!(
        pass,
        "tail slope {:.4} (pass: {tail_ok}); local window slope {slope_local:.3} inherits the criterion-05 saturation",
        rep.fitted_rate
    );
}

#[test]
fn c10_semilinear_global_existence() {
    let n = 3usize;
    let k = critical_power(n).unwrap();
    assert_eq!(k, 3.0);
    let nl = Nonlinearity::power(k);
    let params = ModelParams::new(n, 13.0 / 4.0, 0.0, 16, 1.0).unwrap();

    // scale seeded data to combined size 1e-3 and evolve for 20 units
    let base = random_cauchy_data(11, 0, n, 16, 1.0);
    let data = scale_to_combined_size(&base, &nl, &params, 1e-3);
    let steps_per_unit = 20usize;
    let grid = uniform_grid(1.0, 20.0, 20 * steps_per_unit);
    let opts = EvolveOptions::default();
    let trace = evolve_semilinear(&data, &nl, &grid, &params, &opts).unwrap();
    let half = grid.len() / 2;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (j, s) in trace.slices.iter().enumerate() {
        if j >= half {
            let e = nonlinear_energy(s, &nl, &params);
            xs.push(grid[j]);
            ys.push(0.5 * e.total.ln());
        }
    }
    let rate = dskg_core::harness::linear_fit_slope(&xs, &ys);

    // Picard on every unit window: contraction and agreement with the evolver
    let mut all_contract = true;
    let mut worst_gap = 0.0f64;
    for w in 0..20usize {
        let idx = w * steps_per_unit;
        let window_data = trace.slices[idx].clone();
        let (picard, diag) =
            picard_iterate(&window_data, &nl, 1.0, 8, &params, 0.05, 1e-11).unwrap();
        if !diag.converged || diag.ratios.iter().any(|r| *r >= 1.0) {
            all_contract = false;
        }
        let ev = evolve_semilinear(&window_data, &nl, &picard.times, &params, &opts).unwrap();
        let diff: Vec<SpectralField> = picard
            .slices
            .iter()
            .zip(&ev.slices)
            .map(|(a, b)| {
                let mut d = a.phi.clone();
                for (x, y) in d.coeffs_mut().iter_mut().zip(b.phi.coeffs()) {
                    *x -= y;
                }
                d
            })
            .collect();
        let dn = mixed_norm(&diff, k + 1.0, k + 1.0, 0.0, 0.0, window_data.t(), &params).unwrap();
        let un = mixed_norm(&ev.phi_slices(), k + 1.0, k + 1.0, 0.0, 0.0, window_data.t(), &params)
            .unwrap();
        worst_gap = worst_gap.max(dn / un.max(1e-300));
    }

    // spatially constant data against the independent scalar integrator
    let mut phi_c = SpectralField::zero(n, 4, 1.0);
    phi_c.coeffs_mut()[0] = Complex64::new(0.3, 0.0);
    let mut psi_c = SpectralField::zero(n, 4, 1.0);
    psi_c.coeffs_mut()[0] = Complex64::new(-0.05, 0.0);
    let const_data = CauchyData::new(phi_c, psi_c).unwrap();
    let cparams = ModelParams::new(n, 13.0 / 4.0, 0.0, 4, 1.0).unwrap();
    let cgrid = uniform_grid(1.0, 8.0, 400);
    let copts = EvolveOptions {
        step_tol: 1e-10,
        ..Default::default()
    };
    let ctr = evolve_semilinear(&const_data, &nl, &cgrid, &cparams, &copts).unwrap();
    let oracle = scalar_oracle(0.3, -0.05, &nl, &cgrid, &cparams);
    let mut scalar_dev = 0.0f64;
    for (j, s) in ctr.slices.iter().enumerate() {
        scalar_dev = scalar_dev.max((s.phi.coeffs()[0].re - oracle[j]).abs());
    }

    // large-data negative control
    let big = scale_to_combined_size(&base, &nl, &params, 1e5);
    let control = picard_iterate(&big, &nl, 4.0, 12, &params, 0.05, 1e-11);
    let diverged = matches!(control, Err(SemilinearError::Diverged { .. }));

    let pass = rate <= 0.05 && all_contract && worst_gap <= 1e-4 && scalar_dev < 1e-6 && diverged;
    verdict(
        "10 semilinear small-data global existence",
        pass,
        &format!(
            "energy rate {rate:.4} (<= 0.05), Picard contracts on 20/20 unit windows: {all_contract}, worst Picard/evolver gap {worst_gap:.2e} (<= 1e-4), scalar-oracle deviation {scalar_dev:.2e} (< 1e-6), large-data control diverged: {diverged}"
        ),
    );
    assert!(pass);
}

#[test]
fn c11_determinism() {
    let params = ModelParams::new(2, 2.0, 0.0, 8, 1.0).unwrap();
    let alpha = AlphaChoice::new(1.0, params.lambda, 2).unwrap();
    let ens = EnsembleConfig::new(5, 3);
    let (rep_a, series_a) = energy_growth_report(&alpha, &params, &ens, 2.0, 0.05).unwrap();
    let (rep_b, series_b) = energy_growth_report(&alpha, &params, &ens, 2.0, 0.05).unwrap();
    let json_a = serde_json::to_string(&rep_a).unwrap();
    let json_b = serde_json::to_string(&rep_b).unwrap();
    let same_series = series_a == series_b;
    let pass = json_a == json_b && same_series;
    verdict(
        "11 determinism",
        pass,
        &format!(
            "identical seeds reproduce the report byte-for-byte: {}, series identical: {same_series}",
            json_a == json_b
        ),
    );
    assert!(pass);
}
