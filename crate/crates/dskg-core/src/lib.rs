//! Spectral simulation laboratory for the Klein-Gordon operator
//! `P(lambda) = Box_g + lambda` on model expanding (de Sitter-like) spacetimes
//! `R_t x T^n` with metric `-dt^2 + e^{2t} h_t`, where `h_t` is a flat torus
//! metric with an optional conformal perturbation `(1 + a e^{-t})^2`.
//!
//! Fourier modes of the torus decouple into second-order ODEs in time.  The
//! crate solves those ODEs adaptively, cross-checks them against an
//! independent Bessel-series oracle, assembles full-field linear and
//! semilinear solution operators, and measures energy growth, dispersive
//! kernel decay, and mixed-norm (Strichartz-type) estimate constants.

pub mod error;
pub mod fft;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod modes;
pub mod propagators;
pub mod semilinear;

pub use error::{FieldError, HarnessError, ModeError, PropagatorError, SemilinearError};
pub use fields::{CauchyData, EnergyValue, SpectralField};
pub use geometry::{AlphaChoice, ModelParams};
pub use modes::PropagatorMatrix;
pub use propagators::{KernelOp, KernelSnapshot, SolutionTrace};
