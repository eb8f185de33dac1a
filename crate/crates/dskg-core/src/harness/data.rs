//! Seeded ensemble data.
//!
//! Every coefficient is drawn from a generator keyed by
//! `(seed, member, field, xi)`, so draws are independent of mode iteration
//! order, of the worker count, and of the grid size: refining `N` keeps all
//! shared modes identical, which makes refinement studies meaningful.
//! Fields are real (Hermitian-symmetric coefficients) with the spectral
//! envelope `(1 + |xi|^2)^{-(n+1)/2}`.

use crate::fields::{CauchyData, ModeGrid, SpectralField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn mode_key(seed: u64, member: u64, field: u64, xi: &[i64]) -> u64 {
    let mut h = splitmix(seed ^ 0xd6e8feb86659fd93);
    h = splitmix(h ^ member);
    h = splitmix(h ^ field.wrapping_mul(0x2545f4914f6cdd1d));
    for &x in xi {
        h = splitmix(h ^ (x as u64).wrapping_mul(0x9e3779b97f4a7c15));
    }
    h
}

/// Gaussian pair for the canonical representative of `{xi, -xi}`.
fn draw(seed: u64, member: u64, field: u64, xi: &[i64]) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(mode_key(seed, member, field, xi));
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    (a, b)
}

fn envelope(int_mu2: u64, n: usize) -> f64 {
    (1.0 + int_mu2 as f64).powf(-((n + 1) as f64) / 2.0)
}

/// Lexicographically compare `xi` against `-xi`.
fn is_canonical(xi: &[i64]) -> bool {
    for &x in xi {
        if x > 0 {
            return true;
        }
        if x < 0 {
            return false;
        }
    }
    true // self-conjugate (all components 0 or Nyquist rows handled below)
}

fn random_field(seed: u64, member: u64, field_id: u64, dim: usize, grid: usize, t: f64, n: usize) -> SpectralField {
    let mg = ModeGrid::new(dim, grid);
    let nmodes = mg.len();
    let mut coeffs = vec![Complex64::default(); nmodes];
    let table = mg.int_mu2_table();
    for lin in 0..nmodes {
        let xi = mg.xi_of(lin);
        // mirror linear index of -xi (Nyquist components map to themselves)
        let mut mlin = 0usize;
        let mut self_conjugate = true;
        for &x in &xi {
            let k = ((-x).rem_euclid(grid as i64)) as usize;
            mlin = mlin * grid + k;
            if x != 0 && x != -(grid as i64) / 2 {
                self_conjugate = false;
            }
        }
        let env = envelope(table[lin], n);
        if self_conjugate {
            // real coefficient
            let (a, _) = draw(seed, member, field_id, &xi);
            coeffs[lin] = Complex64::new(a * env, 0.0);
        } else if is_canonical(&xi) {
            let (a, b) = draw(seed, member, field_id, &xi);
            let c = Complex64::new(a, b) * (env / std::f64::consts::SQRT_2);
            coeffs[lin] = c;
            coeffs[mlin] = c.conj();
        }
    }
    SpectralField::from_coeffs(coeffs, mg.dims, t).unwrap()
}

/// Seeded random Cauchy data at slice time `t`.
pub fn random_cauchy_data(
    seed: u64,
    member: usize,
    dim: usize,
    grid: usize,
    t: f64,
) -> CauchyData {
    let phi = random_field(seed, member as u64, 1, dim, grid, t, dim);
    let psi = random_field(seed, member as u64, 2, dim, grid, t, dim);
    CauchyData::new(phi, psi).unwrap()
}

/// Seeded smooth-in-time forcing profile: an enveloped random field
/// modulated by `cos(w (t - t0) + theta)` with per-member `(w, theta)`.
pub struct ForcingProfile {
    base: SpectralField,
    w: f64,
    theta: f64,
    t0: f64,
}

impl ForcingProfile {
    pub fn at(&self, t: f64) -> SpectralField {
        let mut f = self.base.clone();
        f.t = t;
        let m = (self.w * (t - self.t0) + self.theta).cos();
        for c in f.coeffs_mut() {
            *c *= m;
        }
        f
    }
}

pub fn random_forcing_profile(
    seed: u64,
    member: usize,
    dim: usize,
    grid: usize,
    t0: f64,
) -> ForcingProfile {
    let base = random_field(seed, member as u64, 3, dim, grid, t0, dim);
    let mut rng = ChaCha8Rng::seed_from_u64(mode_key(seed, member as u64, 4, &[]));
    let w: f64 = rng.gen_range(0.5..2.0);
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    ForcingProfile {
        base,
        w,
        theta,
        t0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_is_real_and_deterministic() {
        let d1 = random_cauchy_data(42, 3, 2, 16, 4.0);
        let d2 = random_cauchy_data(42, 3, 2, 16, 4.0);
        assert_eq!(d1.phi.coeffs(), d2.phi.coeffs());
        assert!(d1.phi.hermitian_defect() < 1e-15);
        assert!(d1.psi.hermitian_defect() < 1e-15);
        let d3 = random_cauchy_data(43, 3, 2, 16, 4.0);
        assert_ne!(d1.phi.coeffs(), d3.phi.coeffs());
    }

    #[test]
    fn refinement_keeps_shared_modes() {
        let small = random_cauchy_data(7, 0, 2, 16, 4.0);
        let large = random_cauchy_data(7, 0, 2, 24, 4.0);
        let gs = small.phi.grid();
        let gl = large.phi.grid();
        for lin in 0..gs.len() {
            let xi = gs.xi_of(lin);
            // skip Nyquist rows of the small grid; they are self-conjugate
            // there but paired on the large grid
            if xi.iter().any(|&x| x == -8) {
                continue;
            }
            let mut lin_l = 0usize;
            for &x in &xi {
                lin_l = lin_l * 24 + (x.rem_euclid(24)) as usize;
            }
            let a = small.phi.coeffs()[lin];
            let b = large.phi.coeffs()[lin_l];
            assert!((a - b).norm() < 1e-15, "xi {xi:?}: {a} vs {b}");
            let _ = gl;
        }
    }

    #[test]
    fn forcing_profile_is_smooth_and_seeded() {
        let f1 = random_forcing_profile(11, 2, 2, 8, 4.0);
        let f2 = random_forcing_profile(11, 2, 2, 8, 4.0);
        let a = f1.at(4.5);
        let b = f2.at(4.5);
        assert_eq!(a.coeffs(), b.coeffs());
    }
}
