//! Measurement harnesses that turn the estimates into experiments:
//! exponent admissibility, energy growth-rate fits, dispersive kernel decay
//! slopes, mixed-norm (Strichartz) constants, and the long-time obstruction
//! scan.

pub mod data;
pub mod experiments;
pub mod exponents;
pub mod fit;

pub use data::{random_cauchy_data, random_forcing_profile};
pub use experiments::{
    dispersive_decay_report, energy_growth_report, obstruction_scan, strichartz_ratio_homog,
    strichartz_ratio_inhomog, DispersiveConfig, EnsembleConfig, ObstructionConfig,
};
pub use exponents::{admissible, scaling_s, ExponentTriple, Exponent};
pub use fit::fit_power_law;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Measured constants, fitted rates, and the pass verdict of one harness run.
///
/// The semantics of `fitted_rate` vs `target_rate` vs `measured_constant`
/// are harness-specific and recorded in `metadata["semantics"]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub measured_constant: f64,
    pub fitted_rate: f64,
    pub target_rate: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
    pub metadata: BTreeMap<String, String>,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            measured_constant: 0.0,
            fitted_rate: 0.0,
            target_rate: 0.0,
            tolerance: 0.0,
            samples: 0,
            pass: false,
            metadata: BTreeMap::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }
}

/// One raw measured point for `series.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

impl SeriesPoint {
    pub fn new(series: impl Into<String>, x: f64, y: f64) -> Self {
        Self {
            series: series.into(),
            x,
            y,
        }
    }
}

/// Least-squares slope of `y` against `x` (used for log-energy rate fits).
pub fn linear_fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
