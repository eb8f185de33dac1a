//! Embedded Dormand-Prince 5(4) pair with PI step-size control.
//!
//! The mode ODEs are nonstiff but oscillatory, so a high-order explicit pair
//! with a proportional-integral controller is the right tool.  Steps are
//! clamped to land exactly on requested output times.

use crate::error::ModeError;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive integrator configuration; `tol` is used for both the relative
/// and absolute error targets.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub tol: f64,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Self { tol }
    }

    /// Integrate from `t0` to `t_end` (either direction), calling `sink` at
    /// every time in `outputs` (which must be ordered in the direction of
    /// integration, all between `t0` and `t_end` inclusive).
    pub fn integrate_through<const D: usize, F>(
        &self,
        rhs: F,
        t0: f64,
        y0: [f64; D],
        outputs: &[f64],
        mut sink: impl FnMut(usize, &[f64; D]),
    ) -> Result<(), ModeError>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y);
        let mut next_out = 0;
        while next_out < outputs.len() && outputs[next_out] == t {
            sink(next_out, &y);
            next_out += 1;
        }
        if next_out >= outputs.len() {
            return Ok(());
        }
        let t_end = outputs[outputs.len() - 1];
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let span = (t_end - t0).abs().max(1e-300);
        let h_min = span * 1e-14 + 1e-300;
        let mut h = dir * (0.01 * span).min(0.1).max(h_min);
        let mut err_prev: f64 = 1.0;

        let mut ks = [[0.0; D]; 7];
        let safety = 0.9;

        while next_out < outputs.len() {
            let target = outputs[next_out];
            if (target - t) * dir <= h.abs() {
                h = target - t;
            }
            if h.abs() < h_min {
                return Err(ModeError::StepSizeUnderflow { t, h });
            }

            ks[0] = k1;
            for i in 1..7 {
                let mut yi = y;
                for (j, yj) in yi.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (l, k) in ks.iter().enumerate().take(i) {
                        acc += A[i][l] * k[j];
                    }
                    *yj += h * acc;
                }
                ks[i] = rhs(t + C[i] * h, &yi);
            }
            let mut y5 = y;
            let mut err2 = 0.0;
            for j in 0..D {
                let mut s5 = 0.0;
                let mut s4 = 0.0;
                for (l, k) in ks.iter().enumerate() {
                    s5 += B5[l] * k[j];
                    s4 += B4[l] * k[j];
                }
                y5[j] += h * s5;
                let sc = self.tol + self.tol * y[j].abs().max(y5[j].abs());
                let e = h * (s5 - s4) / sc;
                err2 += e * e;
            }
            let err = (err2 / D as f64).sqrt().max(1e-16);

            if err <= 1.0 {
                t += h;
                y = y5;
                k1 = ks[6]; // FSAL
                while next_out < outputs.len() && (outputs[next_out] - t) * dir <= 1e-14 * span {
                    sink(next_out, &y);
                    next_out += 1;
                }
                let fac = (safety * err.powf(-0.17) * err_prev.powf(0.04)).clamp(0.2, 5.0);
                err_prev = err;
                h *= fac;
            } else {
                let fac = (safety * err.powf(-0.2)).clamp(0.2, 1.0);
                h *= fac;
            }
        }
        Ok(())
    }

    /// Integrate to a single endpoint and return the final state.
    pub fn integrate<const D: usize, F>(
        &self,
        rhs: F,
        t0: f64,
        y0: [f64; D],
        t_end: f64,
    ) -> Result<[f64; D], ModeError>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        if t_end == t0 {
            return Ok(y0);
        }
        let mut out = y0;
        self.integrate_through(rhs, t0, y0, &[t_end], |_, y| out = *y)?;
        Ok(out)
    }
}
