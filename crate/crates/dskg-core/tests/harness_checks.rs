//! Cross-checks of the harness pipelines against closed forms and the
//! stated edge behaviors.

use dskg_core::error::HarnessError;
use dskg_core::fields::{mixed_norm, CauchyData, SpectralField};
use dskg_core::geometry::volume_scale;
use dskg_core::geometry::{AlphaChoice, ModelParams};
use dskg_core::harness::experiments::{
    dispersive_decay_report, obstruction_scan, DispersiveConfig, ObstructionConfig,
};
use dskg_core::propagators::solve_homogeneous;
use num_complex::Complex64;

// the homogeneous mixed norm of a pure constant-mode datum has a closed
// form up to time quadrature: u(t) = c e^{-n dt/2} (cos(w dt) + (n/2w) sin(w dt)),
// w = sqrt(lambda - n^2/4), and its W^{s,4}(dk_t) norm is
// |u(t)| (vol(t) P^n)^{1/4} (the Sobolev multiplier is 1 on the zero mode)
#[test]
fn constant_mode_mixed_norm_closed_form() {
    let n = 3usize;
    let lambda = 13.0 / 4.0;
    let p = ModelParams::new(n, lambda, 0.0, 8, 1.0).unwrap();
    let t0 = 2.0;
    let horizon = 3.0;
    let c0 = 0.8;
    let mut phi = SpectralField::zero(n, 8, t0);
    phi.coeffs_mut()[0] = Complex64::new(c0, 0.0);
    let data = CauchyData::new(phi, SpectralField::zero(n, 8, t0)).unwrap();
    let m = 240usize;
    let grid: Vec<f64> = (0..=m).map(|k| t0 + horizon * k as f64 / m as f64).collect();
    let tr = solve_homogeneous(&data, &grid, &p, 1e-11).unwrap();
    let got = mixed_norm(&tr.phi_slices(), 4.0, 4.0, 0.5, 0.0, t0, &p).unwrap();

    // independent quadrature of the closed form
    let w = (lambda - 2.25f64).sqrt();
    let nf = n as f64;
    let exact_u = |t: f64| {
        let dt = t - t0;
        c0 * (-nf * dt / 2.0).exp() * ((w * dt).cos() + nf / (2.0 * w) * (w * dt).sin())
    };
    let mut acc = 0.0;
    let steps = 4000usize;
    let h = horizon / steps as f64;
    for k in 0..=steps {
        let t = t0 + k as f64 * h;
        let weight = if k == 0 || k == steps { 0.5 } else { 1.0 };
        let slice_norm = exact_u(t).abs() * (volume_scale(t, &p) * p.period.powi(3)).powf(0.25);
        acc += weight * slice_norm.powi(4);
    }
    let want = (acc * h).powf(0.25);
    assert!(
        (got - want).abs() < 1e-4 * want,
        "mixed norm {got} vs closed form {want}"
    );
}

#[test]
fn dispersive_target_degenerates_in_one_dimension() {
    let p = ModelParams::new(1, 1.25, 0.0, 64, 1.0).unwrap();
    let cfg = DispersiveConfig {
        r: 1.1,
        ..Default::default()
    };
    let (rep, _) = dispersive_decay_report(&p, &cfg).unwrap();
    assert_eq!(rep.target_rate, 0.0);
}

#[test]
fn wraparound_detection_fires_on_small_torus() {
    // with a tiny period the cone reaches the antipode inside the window
    let p = ModelParams::with_period(1, 1.25, 0.0, 64, 1.0, 0.35).unwrap();
    let cfg = DispersiveConfig {
        r: 0.4,
        window: (0.2, 3.0),
        ..Default::default()
    };
    match dispersive_decay_report(&p, &cfg) {
        Err(HarnessError::WindowTooWide { frac }) => assert!(frac > 0.1),
        other => panic!("expected WindowTooWide, got {other:?}"),
    }
}

#[test]
fn obstruction_scan_flags_degenerate_regularization() {
    let p = ModelParams::new(2, 2.0, 0.0, 16, 1.0).unwrap();
    // by t0 + 5 every nonzero mode has redshifted to lambda_xi ~ e^{-12}, so
    // "very large" r means r >> e^{12} for the multiplier to bite
    let cfg = ObstructionConfig {
        r: 5e6,
        t_range: (5.0, 8.0),
        ladder: 8,
        ..Default::default()
    };
    let (rep, _) = obstruction_scan(&p, &cfg).unwrap();
    assert_eq!(rep.metadata.get("degenerate").map(String::as_str), Some("true"));
}

#[test]
fn alpha_weight_is_flat_in_large_mass_regime() {
    let a = AlphaChoice::new(1.5, 13.0 / 4.0, 3).unwrap();
    assert_eq!(a.weight_exponent(3), 0.0);
}
