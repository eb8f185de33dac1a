//! Model metric family on `R_t x T^n` and the coefficient functions of
//! `P(lambda) = Box_g + lambda` in `(t, y)` coordinates.
//!
//! The spatial metric is `h_t = c(t)^2 h_flat` with conformal factor
//! `c(t) = 1 + a e^{-t}`, so Fourier modes stay decoupled while the model
//! still exercises an `O(e^{-t})` damping term and an `e^{-3t} Q` commutator
//! correction.  The slice metric is `k_t = e^{2t} h_t` and its volume form is
//! `dk_t = e^{nt} c(t)^n dy`.

use crate::error::ModelError;
use serde::{Deserialize, Serialize};

/// Spacetime and discretization configuration.
///
/// `n` spatial dimensions, Klein-Gordon mass `lambda > 0`, conformal
/// perturbation amplitude `a >= 0` (`a = 0` gives the unperturbed model with
/// `h` independent of `t`), `grid` modes per axis, initial slice `t0 >= 1`,
/// and torus period (side length of the flat torus).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub lambda: f64,
    pub a: f64,
    pub grid: usize,
    pub t0: f64,
    pub period: f64,
}

impl ModelParams {
    pub fn new(n: usize, lambda: f64, a: f64, grid: usize, t0: f64) -> Result<Self, ModelError> {
        Self::with_period(n, lambda, a, grid, t0, std::f64::consts::TAU)
    }

    pub fn with_period(
        n: usize,
        lambda: f64,
        a: f64,
        grid: usize,
        t0: f64,
        period: f64,
    ) -> Result<Self, ModelError> {
        if !(lambda > 0.0) {
            return Err(ModelError::NonPositiveMass(lambda));
        }
        if n < 1 {
            return Err(ModelError::BadDimension(n));
        }
        if grid < 4 || !grid.is_multiple_of(2) {
            return Err(ModelError::BadGrid(grid));
        }
        if !(a >= 0.0) {
            return Err(ModelError::BadPerturbation(a));
        }
        if !(t0 >= 1.0) {
            return Err(ModelError::BadInitialSlice(t0));
        }
        if !(period > 0.0) {
            return Err(ModelError::BadPeriod(period));
        }
        Ok(Self {
            n,
            lambda,
            a,
            grid,
            t0,
            period,
        })
    }

    /// Physical wavenumber of integer mode index `xi` along one axis.
    #[inline]
    pub fn wavenumber(&self, xi: i64) -> f64 {
        std::f64::consts::TAU / self.period * xi as f64
    }

    /// `|xi_phys|^2` for an integer mode vector.
    pub fn mu2_of(&self, xi: &[i64]) -> f64 {
        let s = std::f64::consts::TAU / self.period;
        xi.iter().map(|&k| (s * k as f64).powi(2)).sum()
    }
}

/// Exponential weight choice for the conjugated energy estimates.
///
/// Valid range: `0 <= alpha < sqrt(lambda)` when `lambda <= n^2/4`, and
/// `alpha = n/2` when `lambda > n^2/4`.  The associated weight exponent is
/// `n - 2 alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaChoice {
    pub alpha: f64,
}

impl AlphaChoice {
    pub fn new(alpha: f64, lambda: f64, n: usize) -> Result<Self, ModelError> {
        let half_n = n as f64 / 2.0;
        if lambda <= half_n * half_n {
            if !(alpha >= 0.0 && alpha < lambda.sqrt()) {
                return Err(ModelError::BadAlpha {
                    alpha,
                    lambda,
                    n,
                    rule: "small mass requires 0 <= alpha < sqrt(lambda)",
                });
            }
        } else if (alpha - half_n).abs() > 1e-12 {
            return Err(ModelError::BadAlpha {
                alpha,
                lambda,
                n,
                rule: "large mass requires alpha = n/2",
            });
        }
        Ok(Self { alpha })
    }

    /// Weight exponent `n - 2 alpha` appearing in the energy estimates.
    pub fn weight_exponent(&self, n: usize) -> f64 {
        n as f64 - 2.0 * self.alpha
    }
}

/// Conformal factor `c(t) = 1 + a e^{-t}` of the spatial metric family.
pub fn conformal_factor(t: f64, params: &ModelParams) -> f64 {
    1.0 + params.a * (-t).exp()
}

/// First-order damping coefficient `d(t) = d/dt log sqrt(det h_t)`.
///
/// For the conformal family this is `-n a e^{-t} / (1 + a e^{-t})`, which is
/// `O(e^{-t})` and vanishes identically when `a = 0`.
pub fn damping_coefficient(t: f64, params: &ModelParams) -> f64 {
    let x = (-t).exp();
    -(params.n as f64) * params.a * x / (1.0 + params.a * x)
}

/// Eigenvalue `lambda_xi(t) = e^{-2t} c(t)^{-2} |xi_phys|^2` of the slice
/// Laplacian (positive spectrum convention) on Fourier mode `xi`.
pub fn laplacian_multiplier(xi: &[i64], t: f64, params: &ModelParams) -> f64 {
    laplacian_multiplier_mu2(params.mu2_of(xi), t, params)
}

/// Same as [`laplacian_multiplier`] but from a precomputed `|xi_phys|^2`.
#[inline]
pub fn laplacian_multiplier_mu2(mu2: f64, t: f64, params: &ModelParams) -> f64 {
    let c = conformal_factor(t, params);
    (-2.0 * t).exp() / (c * c) * mu2
}

/// Density of `dk_t` against flat Lebesgue measure on the torus:
/// `e^{nt} c(t)^n`.
pub fn volume_scale(t: f64, params: &ModelParams) -> f64 {
    ((params.n as f64) * t).exp() * conformal_factor(t, params).powi(params.n as i32)
}

/// Commutator data for the identity
/// `d/dt lambda_xi(t) = -2 lambda_xi(t) + e^{-3t} q(t, xi)`.
///
/// Returns `q` (from the closed-form derivative of the multiplier) together
/// with the residual of the identity when `d/dt` is replaced by a central
/// finite difference at step `1e-4`.  `q = 2 a |xi_phys|^2 / c(t)^3`, so
/// `|q| <= 2 a |xi_phys|^2` uniformly in `t`, and `q = 0` when `a = 0`.
pub fn verify_commutator(xi: &[i64], t: f64, params: &ModelParams) -> (f64, f64) {
    let mu2 = params.mu2_of(xi);
    let c = conformal_factor(t, params);
    let q = 2.0 * params.a * mu2 / (c * c * c);

    let h = 1e-4;
    let fd = (laplacian_multiplier_mu2(mu2, t + h, params)
        - laplacian_multiplier_mu2(mu2, t - h, params))
        / (2.0 * h);
    let residual =
        (fd + 2.0 * laplacian_multiplier_mu2(mu2, t, params) - (-3.0 * t).exp() * q).abs();
    (q, residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, lambda: f64, a: f64) -> ModelParams {
        ModelParams::new(n, lambda, a, 8, 1.0).unwrap()
    }

    #[test]
    fn conformal_factor_values() {
        let p = params(3, 1.0, 0.0);
        assert_eq!(conformal_factor(0.3, &p), 1.0);
        assert_eq!(conformal_factor(57.0, &p), 1.0);

        let p1 = params(3, 1.0, 1.0);
        assert_eq!(conformal_factor(0.0, &p1), 2.0);
        assert!((conformal_factor(40.0, &p1) - 1.0).abs() < 1e-15);
        assert!(conformal_factor(1.0, &p1) >= 1.0);
    }

    #[test]
    fn damping_values() {
        let p0 = params(3, 1.0, 0.0);
        for t in [0.0, 1.0, 7.5] {
            assert_eq!(damping_coefficient(t, &p0), 0.0);
        }
        // d(0) = -n a / (1 + a), hand-differentiated from n log(1 + a e^{-t})
        let p1 = params(3, 1.0, 1.0);
        assert!((damping_coefficient(0.0, &p1) - (-1.5)).abs() < 1e-15);
        // leading-order series: d(t) ~ -3 e^{-10} at t = 10
        let d10 = damping_coefficient(10.0, &p1);
        // next correction is 3 e^{-20} / (1 + e^{-10}) ~ 6e-9
        assert!((d10 + 3.0 * (-10.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn damping_is_exponentially_small() {
        let p = params(3, 1.0, 1.0);
        let sup = (0..200)
            .map(|k| {
                let t = 0.5 + k as f64 * 0.1;
                (damping_coefficient(t, &p) * t.exp()).abs()
            })
            .fold(0.0, f64::max);
        assert!(sup <= p.n as f64 * p.a + 1e-12);
    }

    #[test]
    fn laplacian_multiplier_values() {
        let p = params(3, 1.0, 0.0);
        assert_eq!(laplacian_multiplier(&[0, 0, 0], 3.7, &p), 0.0);
        let e1 = [1, 0, 0];
        assert!((laplacian_multiplier(&e1, 0.0, &p) - 1.0).abs() < 1e-15);
        let t = 2.0f64.ln();
        assert!((laplacian_multiplier(&e1, t, &p) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn laplacian_multiplier_decreasing_unperturbed() {
        let p = params(2, 1.0, 0.0);
        let xi = [3, -1];
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let v = laplacian_multiplier(&xi, 1.0 + 0.25 * k as f64, &p);
            assert!(v >= 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn volume_scale_values() {
        let p = params(3, 1.0, 0.0);
        assert_eq!(volume_scale(0.0, &p), 1.0);
        assert!((volume_scale(1.0, &p) - 3.0f64.exp()).abs() < 1e-12);
        let p2 = params(2, 1.0, 1.0);
        assert!((volume_scale(0.0, &p2) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn commutator_identity_unperturbed() {
        let p = params(3, 1.0, 0.0);
        for t in [2.0, 4.0, 6.0] {
            let (q, res) = verify_commutator(&[1, 0, 0], t, &p);
            assert_eq!(q, 0.0);
            assert!(res < 1e-8, "residual {res} too large");
        }
        let (q0, r0) = verify_commutator(&[0, 0, 0], 2.0, &p);
        assert_eq!(q0, 0.0);
        assert_eq!(r0, 0.0);
    }

    #[test]
    fn commutator_identity_perturbed() {
        let p = params(3, 1.0, 1.0);
        // independent route: central finite difference must match
        // -2 lambda_xi + e^{-3t} q to O(h^2)
        let (q, res) = verify_commutator(&[1, 0, 0], 2.0, &p);
        assert!(q > 0.0);
        assert!(res < 1e-8, "residual {res}");
        // |q| <= 2 a |xi_phys|^2 uniformly
        for k in 0..60 {
            let t = 1.0 + 0.2 * k as f64;
            for xi in [[1, 0, 0], [3, 2, -1], [8, 8, 8]] {
                let (q, _) = verify_commutator(&xi, t, &p);
                assert!(q.abs() <= 2.0 * p.a * p.mu2_of(&xi) + 1e-12);
            }
        }
    }

    #[test]
    fn alpha_choice_rules() {
        assert!(AlphaChoice::new(0.9, 1.0, 3).is_ok());
        assert!(AlphaChoice::new(1.0, 1.0, 3).is_err());
        assert!(AlphaChoice::new(1.5, 3.25, 3).is_ok());
        assert!(AlphaChoice::new(1.0, 3.25, 3).is_err());
        assert!(AlphaChoice::new(-0.1, 1.0, 3).is_err());
        let a = AlphaChoice::new(1.5, 3.25, 3).unwrap();
        assert_eq!(a.weight_exponent(3), 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(3, 0.0, 0.0, 8, 1.0).is_err());
        assert!(ModelParams::new(3, -1.0, 0.0, 8, 1.0).is_err());
        assert!(ModelParams::new(0, 1.0, 0.0, 8, 1.0).is_err());
        assert!(ModelParams::new(3, 1.0, 0.0, 7, 1.0).is_err());
        assert!(ModelParams::new(3, 1.0, 0.0, 2, 1.0).is_err());
        assert!(ModelParams::new(3, 1.0, -0.5, 8, 1.0).is_err());
        assert!(ModelParams::new(3, 1.0, 0.0, 8, 0.5).is_err());
        assert!(ModelParams::new(3, 1.0, 0.0, 8, 1.0).is_ok());
    }
}
