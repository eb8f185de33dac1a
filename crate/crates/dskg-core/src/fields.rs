//! Spectral representation of spatial fields on the torus and every norm the
//! estimates need: `L^q(dk_t)`, Sobolev `W^{s,q}(dk_t)`, slice energy, and
//! weighted mixed norms in time.
//!
//! Conventions, fixed once for every oracle in the crate:
//! - coefficients are standard Fourier coefficients, `f(y) = sum_xi
//!   fhat_xi e^{i xi_phys . y}` with `xi in [-N/2, N/2)^dim`;
//! - Plancherel: `int |f|^2 dy = period^dim * sum |fhat|^2`;
//! - `L^q` quadrature is the uniform grid sum (trapezoidal on a periodic
//!   grid, exact for trigonometric polynomials at even `q`), weighted by
//!   `volume_scale(t)`.

use crate::error::FieldError;
use crate::fft::fft_nd;
use crate::geometry::{laplacian_multiplier_mu2, volume_scale, ModelParams};
use num_complex::Complex64;
use rayon::prelude::*;

/// Spatial field as Fourier coefficients on `[-N/2, N/2)^dim` at slice time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
    dims: Vec<usize>,
    pub t: f64,
}

/// Integer mode bookkeeping for a `[N; dim]` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    pub dims: Vec<usize>,
}

impl ModeGrid {
    pub fn new(dim: usize, n_per_axis: usize) -> Self {
        Self {
            dims: vec![n_per_axis; dim],
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Signed mode index along one axis from the storage index.
    #[inline]
    pub fn signed(k: usize, n: usize) -> i64 {
        if k < n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    /// Integer `|xi|^2` for every linear storage index.
    pub fn int_mu2_table(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.len()];
        for (lin, v) in out.iter_mut().enumerate() {
            let mut rem = lin;
            let mut acc = 0i64;
            for &n in self.dims.iter().rev() {
                let k = rem % n;
                rem /= n;
                let s = Self::signed(k, n);
                acc += s * s;
            }
            *v = acc as u64;
        }
        out
    }

    /// Distinct integer `|xi|^2` values (sorted) and the group index of every
    /// linear storage index.  Mode ODEs only depend on `|xi|^2`, so per-mode
    /// solves are shared across each group.
    pub fn grouped_mu2(&self) -> (Vec<u64>, Vec<u32>) {
        let table = self.int_mu2_table();
        let mut distinct: Vec<u64> = table.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let groups = table
            .iter()
            .map(|v| distinct.binary_search(v).unwrap() as u32)
            .collect();
        (distinct, groups)
    }

    /// Mode vector for a linear index.
    pub fn xi_of(&self, lin: usize) -> Vec<i64> {
        let mut rem = lin;
        let mut xi = vec![0i64; self.dims.len()];
        for (axis, &n) in self.dims.iter().enumerate().rev() {
            xi[axis] = Self::signed(rem % n, n);
            rem /= n;
        }
        xi
    }
}

impl SpectralField {
    pub fn zero(dim: usize, n_per_axis: usize, t: f64) -> Self {
        let len: usize = vec![n_per_axis; dim].iter().product();
        Self {
            coeffs: vec![Complex64::default(); len],
            dims: vec![n_per_axis; dim],
            t,
        }
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>, dims: Vec<usize>, t: f64) -> Result<Self, FieldError> {
        let expect: usize = dims.iter().product();
        if coeffs.len() != expect {
            return Err(FieldError::ShapeMismatch(
                format!("{} coefficients", coeffs.len()),
                format!("{dims:?} grid"),
            ));
        }
        Ok(Self { coeffs, dims, t })
    }

    /// Field from real grid samples (row-major, `[N; dim]`).
    pub fn from_physical(samples: &[f64], dims: &[usize], t: f64) -> Result<Self, FieldError> {
        let expect: usize = dims.iter().product();
        if samples.len() != expect {
            return Err(FieldError::ShapeMismatch(
                format!("{} samples", samples.len()),
                format!("{dims:?} grid"),
            ));
        }
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut data, dims, false);
        let scale = 1.0 / expect as f64;
        for v in &mut data {
            *v *= scale;
        }
        Ok(Self {
            coeffs: data,
            dims: dims.to_vec(),
            t,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn grid(&self) -> ModeGrid {
        ModeGrid {
            dims: self.dims.clone(),
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn same_shape(&self, other: &Self) -> Result<(), FieldError> {
        if self.dims != other.dims {
            return Err(FieldError::ShapeMismatch(
                format!("{:?}", self.dims),
                format!("{:?}", other.dims),
            ));
        }
        Ok(())
    }

    /// Physical samples on the uniform grid (real part; fields are assumed
    /// Hermitian-symmetric).
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        fft_nd(&mut data, &self.dims, true);
        data.iter().map(|v| v.re).collect()
    }

    /// Max Hermitian-symmetry defect `|conj(fhat(-xi)) - fhat(xi)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let grid = self.grid();
        let mut worst = 0.0f64;
        for lin in 0..self.coeffs.len() {
            let xi = grid.xi_of(lin);
            // mirror index of -xi; Nyquist rows map to themselves
            let mut mlin = 0usize;
            let mut ok = true;
            for (axis, &n) in self.dims.iter().enumerate() {
                let k = ((-xi[axis]).rem_euclid(n as i64)) as usize;
                if ModeGrid::signed(k, n) != -xi[axis] {
                    ok = false;
                    break;
                }
                mlin = mlin * n + k;
            }
            if !ok {
                continue;
            }
            let d = (self.coeffs[mlin].conj() - self.coeffs[lin]).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Multiply each coefficient by `f(mu2_phys)` where `mu2_phys` is the
    /// physical `|xi_phys|^2` of the mode.
    pub fn apply_radial_multiplier(&mut self, params: &ModelParams, f: impl Fn(f64) -> f64) {
        let scale = (std::f64::consts::TAU / params.period).powi(2);
        let table = self.grid().int_mu2_table();
        for (c, &m2) in self.coeffs.iter_mut().zip(&table) {
            *c *= f(m2 as f64 * scale);
        }
    }

    /// Scale all coefficients.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= factor;
        }
        out
    }

    /// `L^q(dk_t)` norm at the field's slice time; `q = inf` gives the grid max.
    pub fn lq_norm(&self, q: f64, params: &ModelParams) -> f64 {
        let phys = self.to_physical();
        let vol = volume_scale(self.t, params);
        if q.is_infinite() {
            return phys.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        assert!(q >= 1.0, "L^q norm needs q >= 1, got {q}");
        let npts: usize = self.dims.iter().product();
        let cell = params.period.powi(self.dims.len() as i32) / npts as f64;
        let sum: f64 = phys.iter().map(|v| v.abs().powf(q)).sum();
        (vol * cell * sum).powf(1.0 / q)
    }

    /// Sobolev `W^{s,q}(dk_t)` norm: diagonal multiplier
    /// `(1 + lambda_xi(t))^{s/2}` followed by `lq_norm`.
    pub fn sobolev_norm(&self, s: f64, q: f64, params: &ModelParams) -> f64 {
        if s == 0.0 {
            return self.lq_norm(q, params);
        }
        let mut reg = self.clone();
        let t = self.t;
        reg.apply_radial_multiplier(params, |mu2| {
            (1.0 + laplacian_multiplier_mu2(mu2, t, params)).powf(s / 2.0)
        });
        reg.lq_norm(q, params)
    }

    /// `sum |fhat|^2` over modes (spectral side of Plancherel).
    pub fn coeff_power(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Cauchy data `(phi, psi)` on one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub phi: SpectralField,
    pub psi: SpectralField,
}

impl CauchyData {
    pub fn new(phi: SpectralField, psi: SpectralField) -> Result<Self, FieldError> {
        phi.same_shape(&psi)?;
        if phi.t != psi.t {
            return Err(FieldError::ShapeMismatch(
                format!("phi at t = {}", phi.t),
                format!("psi at t = {}", psi.t),
            ));
        }
        Ok(Self { phi, psi })
    }

    pub fn zero(dim: usize, n_per_axis: usize, t: f64) -> Self {
        Self {
            phi: SpectralField::zero(dim, n_per_axis, t),
            psi: SpectralField::zero(dim, n_per_axis, t),
        }
    }

    pub fn t(&self) -> f64 {
        self.phi.t
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            phi: self.phi.scaled(factor),
            psi: self.psi.scaled(factor),
        }
    }
}

/// Slice energy split into its nonnegative parts.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergyValue {
    pub kinetic: f64,
    pub gradient: f64,
    pub mass: f64,
    pub nonlinear: f64,
    pub total: f64,
}

impl EnergyValue {
    pub fn norm(&self) -> f64 {
        self.total.max(0.0).sqrt()
    }
}

/// Energy `1/2 int (|grad_k phi|^2 + |psi|^2 + mu |phi|^2) dk_t` of Cauchy
/// data, via the mode sums fixed by the Plancherel convention.
pub fn energy_norm(data: &CauchyData, mu: f64, params: &ModelParams) -> EnergyValue {
    assert!(mu >= 0.0, "energy weight mu must be >= 0");
    let t = data.t();
    let dim = data.phi.dims().len();
    let vol = volume_scale(t, params) * params.period.powi(dim as i32);
    let scale = (std::f64::consts::TAU / params.period).powi(2);
    let table = data.phi.grid().int_mu2_table();
    let (mut grad, mut kin, mut mass) = (0.0f64, 0.0f64, 0.0f64);
    for (lin, &m2) in table.iter().enumerate() {
        let lam_xi = laplacian_multiplier_mu2(m2 as f64 * scale, t, params);
        let p2 = data.phi.coeffs()[lin].norm_sqr();
        grad += lam_xi * p2;
        mass += mu * p2;
        kin += data.psi.coeffs()[lin].norm_sqr();
    }
    let half_vol = 0.5 * vol;
    let (kinetic, gradient, mass) = (half_vol * kin, half_vol * grad, half_vol * mass);
    EnergyValue {
        kinetic,
        gradient,
        mass,
        nonlinear: 0.0,
        total: kinetic + gradient + mass,
    }
}

/// Composite quadrature weights on a uniform grid with `m` intervals:
/// Simpson when `m` is even, Simpson plus a 3/8 tail when odd (trapezoid for
/// the degenerate single interval).  The integral is `h * sum w_i f_i`.
pub fn composite_weights(m: usize) -> Vec<f64> {
    let mut w = vec![0.0f64; m + 1];
    if m == 0 {
        return w;
    }
    if m == 1 {
        w[0] = 0.5;
        w[1] = 0.5;
        return w;
    }
    let simpson_end = if m.is_multiple_of(2) { m } else { m - 3 };
    let mut k = 0;
    while k + 2 <= simpson_end {
        w[k] += 1.0 / 3.0;
        w[k + 1] += 4.0 / 3.0;
        w[k + 2] += 1.0 / 3.0;
        k += 2;
    }
    if m % 2 == 1 {
        let b = simpson_end;
        w[b] += 3.0 / 8.0;
        w[b + 1] += 9.0 / 8.0;
        w[b + 2] += 9.0 / 8.0;
        w[b + 3] += 3.0 / 8.0;
    }
    w
}

/// Weighted mixed norm in time of a sequence of slices on a uniform grid:
/// `( integral [e^{weight_rate (t - t0)} sobolev_norm(f(t), s, q, t)]^p dt )^{1/p}`,
/// with `p = inf` giving the max over slices.
pub fn mixed_norm(
    slices: &[SpectralField],
    p: f64,
    q: f64,
    s: f64,
    weight_rate: f64,
    t0: f64,
    params: &ModelParams,
) -> Result<f64, FieldError> {
    if slices.is_empty() {
        return Err(FieldError::EmptyTrace);
    }
    let vals: Vec<f64> = slices
        .par_iter()
        .map(|f| ((f.t - t0) * weight_rate).exp() * f.sobolev_norm(s, q, params))
        .collect();
    if slices.len() == 1 || p.is_infinite() {
        return Ok(vals.iter().fold(0.0f64, |m, &v| m.max(v)));
    }
    let h = slices[1].t - slices[0].t;
    for w in slices.windows(2) {
        if ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.abs().max(1e-12) || h <= 0.0 {
            return Err(FieldError::NonUniformGrid);
        }
    }
    let w = composite_weights(slices.len() - 1);
    let sum: f64 = vals.iter().zip(&w).map(|(v, wi)| wi * v.powf(p)).sum();
    Ok((h * sum).powf(1.0 / p))
}
