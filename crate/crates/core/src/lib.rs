//! Angle / angular-momentum uncertainty products for periodic states.
//!
//! A state on the circle is described by a one-parameter family of Fourier
//! coefficients `C_n(alpha)`; the state itself is
//! `f(phi) = A * sum_n C_n e^{i n phi}` with `A` fixed by normalization on
//! `[-pi, pi]`. Everything here works in units where `hbar = 1`: variances of
//! `L_z` are in units of `hbar^2` and uncertainty products in units of `hbar`.
//!
//! Layout:
//! - [`spectrum`]: coefficient families, truncated normalized spectra, state evaluation.
//! - [`special`]: dilogarithm, Riemann zeta and `ln(1+x)`.
//! - [`moments`]: series formulas for angle, `L_z` and trigonometric moments.
//! - [`closed_forms`]: closed-form evaluators for the exponential and polynomial families.
//! - [`oracle`]: adaptive quadrature of the explicit state, independent of the series.
//! - [`analysis`]: dominance/admissibility checks, `alpha*` search, bound crossings, sweeps.

pub mod analysis;
pub mod closed_forms;
pub mod error;
pub mod moments;
pub mod oracle;
pub mod special;
pub mod spectrum;
pub mod summation;

pub use error::{Error, Result};
pub use spectrum::{
    boundary_density, build_spectrum, evaluate_state, tail_second_moment, BuildOptions,
    CoefficientFamily, FamilyKind, StateSample, TruncatedSpectrum,
};

/// Reduced Planck constant in the units used throughout the crate.
pub const HBAR: f64 = 1.0;

/// Naive Heisenberg–Robertson bound on `sigma_phi * sigma_Lz`.
pub const HR_BOUND: f64 = 0.5 * HBAR;
