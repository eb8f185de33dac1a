//! Per-mode second-order ODEs and their fundamental (propagator) matrices.
//!
//! Restricting `P(lambda) u = 0` to a Fourier mode with `|xi_phys|^2 = mu2`
//! gives `u'' + (n + d(t)) u' + (lambda + lambda_xi(t)) u = 0`.  The
//! fundamental matrix between two times is built by adaptive integration of
//! the matrix ODE; an independent Bessel-series oracle covers the
//! unperturbed case.

pub mod bessel;
pub mod rk;

use crate::error::ModeError;
use crate::geometry::{
    self, conformal_factor, damping_coefficient, laplacian_multiplier_mu2, AlphaChoice,
    ModelParams,
};
use rk::Dopri5;
use serde::{Deserialize, Serialize};

/// Default integrator tolerance for mode solves.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Mode amplitude state `(u, du/dt)` at a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub u: f64,
    pub du: f64,
    pub t: f64,
}

/// 2x2 fundamental solution matrix of one mode between times `s` and `t`:
/// `(u, u')(t) = M (u, u')(s)`.
///
/// The first column is the "even" solution (data `(1, 0)`), the second the
/// "odd" one (data `(0, 1)`).  Abel's identity fixes
/// `det M = exp(-n (t - s)) (c(s)/c(t))^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
    pub s: f64,
    pub t: f64,
    pub mu2: f64,
}

impl PropagatorMatrix {
    pub fn identity(s: f64, mu2: f64) -> Self {
        Self {
            m11: 1.0,
            m12: 0.0,
            m21: 0.0,
            m22: 1.0,
            s,
            t: s,
            mu2,
        }
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Apply to mode data `(u, du)`.
    pub fn apply(&self, u: f64, du: f64) -> (f64, f64) {
        (
            self.m11 * u + self.m12 * du,
            self.m21 * u + self.m22 * du,
        )
    }

    /// Composition `self * rhs` (as linear maps, i.e. `M(t, r) M(r, s)`).
    pub fn compose(&self, rhs: &Self) -> Self {
        Self {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
            s: rhs.s,
            t: self.t,
            mu2: self.mu2,
        }
    }

    /// Value Abel's identity predicts for `det M`.
    pub fn abel_determinant(&self, params: &ModelParams) -> f64 {
        let n = params.n as f64;
        (-n * (self.t - self.s)).exp()
            * (conformal_factor(self.s, params) / conformal_factor(self.t, params)).powi(params.n as i32)
    }
}

/// Coefficients `(n + d(t), lambda + lambda_xi(t))` of the first- and
/// zeroth-order terms of the mode ODE.
pub fn mode_ode_coefficients(t: f64, mu2: f64, params: &ModelParams) -> (f64, f64) {
    (
        params.n as f64 + damping_coefficient(t, params),
        params.lambda + laplacian_multiplier_mu2(mu2, t, params),
    )
}

fn check_tol(tol: f64) -> Result<f64, ModeError> {
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(ModeError::OracleUnavailable(format!(
            "integrator tolerance {tol:e} outside [1e-14, 1e-6]"
        )));
    }
    Ok(tol)
}

/// Fundamental matrix of one mode from `s` to `t` by adaptive integration of
/// both basis columns simultaneously.
pub fn mode_propagator(
    s: f64,
    t: f64,
    mu2: f64,
    params: &ModelParams,
    tol: f64,
) -> Result<PropagatorMatrix, ModeError> {
    check_tol(tol)?;
    if s == t {
        return Ok(PropagatorMatrix::identity(s, mu2));
    }
    let solver = Dopri5::new(tol);
    // y = [m11, m21, m12, m22]: two (u, u') columns
    let p = *params;
    let y = solver.integrate(
        move |tau, y: &[f64; 4]| {
            let (damp, rest) = mode_ode_coefficients(tau, mu2, &p);
            [
                y[1],
                -(damp * y[1] + rest * y[0]),
                y[3],
                -(damp * y[3] + rest * y[2]),
            ]
        },
        s,
        [1.0, 0.0, 0.0, 1.0],
        t,
    )?;
    Ok(PropagatorMatrix {
        m11: y[0],
        m21: y[1],
        m12: y[2],
        m22: y[3],
        s,
        t,
        mu2,
    })
}

/// Series-oracle fundamental matrix for the unperturbed model (`a = 0`).
///
/// Entirely independent of the adaptive integrator: the two basis solutions
/// come from Frobenius series around `z = 0` in `z = mu e^{-t}`.
pub fn mode_oracle(
    s: f64,
    t: f64,
    mu: f64,
    params: &ModelParams,
) -> Result<PropagatorMatrix, ModeError> {
    if params.a != 0.0 {
        return Err(ModeError::OracleUnavailable(
            "series oracle requires the unperturbed model (a = 0)".into(),
        ));
    }
    if !(mu > 0.0) {
        return Err(ModeError::OracleUnavailable(format!(
            "series oracle requires mu > 0, got {mu}"
        )));
    }
    let mu2 = mu * mu;
    if s == t {
        return Ok(PropagatorMatrix::identity(s, mu2));
    }
    let n = params.n as f64;
    let nu2 = n * n / 4.0 - params.lambda;

    // u = e^{-nt/2} g(z), z = mu e^{-t};  u' = e^{-nt/2} (-(n/2) g - z g')
    let column = |tau: f64| -> Result<[[f64; 2]; 2], ModeError> {
        let z = mu * (-tau).exp();
        let pair = bessel::solution_pair(z, nu2)?;
        let w = (-n * tau / 2.0).exp();
        let col = |v: bessel::SeriesVal| [w * v.g, w * (-(n / 2.0) * v.g - z * v.dg)];
        Ok([col(pair.first), col(pair.second)])
    };
    let phi_s = column(s)?;
    let phi_t = column(t)?;
    // M = Phi(t) Phi(s)^{-1}
    let det = phi_s[0][0] * phi_s[1][1] - phi_s[1][0] * phi_s[0][1];
    if det == 0.0 || !det.is_finite() {
        return Err(ModeError::OracleUnavailable(
            "degenerate series solution pair".into(),
        ));
    }
    let inv = [
        [phi_s[1][1] / det, -phi_s[1][0] / det],
        [-phi_s[0][1] / det, phi_s[0][0] / det],
    ];
    Ok(PropagatorMatrix {
        m11: phi_t[0][0] * inv[0][0] + phi_t[1][0] * inv[1][0],
        m12: phi_t[0][0] * inv[0][1] + phi_t[1][0] * inv[1][1],
        m21: phi_t[0][1] * inv[0][0] + phi_t[1][1] * inv[1][0],
        m22: phi_t[0][1] * inv[0][1] + phi_t[1][1] * inv[1][1],
        s,
        t,
        mu2,
    })
}

/// Mass constant of the operator obtained by conjugating `P(lambda)` with
/// `e^{alpha t}`: `lambda - alpha (n - alpha)`.
///
/// At `alpha = n/2` this is `lambda - n^2/4 = lambda - alpha^2`; for other
/// `alpha` the cross term with the volume damping shifts it away from the
/// often-quoted `lambda - alpha^2`.
pub fn conjugated_mass(lambda: f64, alpha: f64, n: usize) -> f64 {
    lambda - alpha * (n as f64 - alpha)
}

/// Propagates `u` under the mode ODE of `P(lambda)` and `v` under the
/// conjugated equation (damping `n - 2 alpha + d`, mass
/// [`conjugated_mass`] with the `-alpha d(t)` correction) from matched data,
/// and returns the max of `|e^{alpha (t - s)} u - v|` over a time grid.
pub fn conjugation_check(
    s: f64,
    t: f64,
    mu2: f64,
    alpha: &AlphaChoice,
    params: &ModelParams,
    tol: f64,
) -> Result<f64, ModeError> {
    check_tol(tol)?;
    let al = alpha.alpha;
    let n = params.n as f64;
    let p = *params;
    let mass = conjugated_mass(params.lambda, al, params.n);

    let grid: Vec<f64> = (0..=32).map(|k| s + (t - s) * k as f64 / 32.0).collect();
    // both paths run two orders tighter than requested so accumulated global
    // error stays inside the 10 * tol contract
    let solver = Dopri5::new((tol * 1e-2).max(1e-14));
    let (u0, du0) = (1.0, -0.7);
    let mut us = vec![[0.0; 2]; grid.len()];
    solver.integrate_through(
        move |tau, y: &[f64; 2]| {
            let (damp, rest) = mode_ode_coefficients(tau, mu2, &p);
            [y[1], -(damp * y[1] + rest * y[0])]
        },
        s,
        [u0, du0],
        &grid,
        |i, y| us[i] = *y,
    )?;
    let mut vs = vec![[0.0; 2]; grid.len()];
    solver.integrate_through(
        move |tau, y: &[f64; 2]| {
            let d = damping_coefficient(tau, &p);
            let damp = n - 2.0 * al + d;
            let rest = laplacian_multiplier_mu2(mu2, tau, &p) + mass - d * al;
            [y[1], -(damp * y[1] + rest * y[0])]
        },
        s,
        [u0, du0 + al * u0],
        &grid,
        |i, y| vs[i] = *y,
    )?;
    let mut worst = 0.0f64;
    for (i, tau) in grid.iter().enumerate() {
        let diff = ((al * (tau - s)).exp() * us[i][0] - vs[i][0]).abs();
        worst = worst.max(diff);
    }
    Ok(worst)
}

/// Conjugated-energy of a mode in the `v = e^{n t / 2} u` variable:
/// `(v'^2 + (lambda - n^2/4 + mu2 e^{-2t}) v^2) / 2`.
pub fn conjugated_mode_energy(u: f64, du: f64, t: f64, mu2: f64, params: &ModelParams) -> f64 {
    let n = params.n as f64;
    let w = (n * t / 2.0).exp();
    let v = w * u;
    let dv = w * (du + n / 2.0 * u);
    let omega2 = params.lambda - n * n / 4.0 + geometry::laplacian_multiplier_mu2(mu2, t, params);
    0.5 * (dv * dv + omega2 * v * v)
}
