//! Stochastic shape processes on spherical harmonic coefficients.
//!
//! A shape is a map from the unit sphere into `R^3`, stored as three real
//! harmonic expansions (one per coordinate). Noise is injected coefficient
//! by coefficient through independent scalar processes whose amplitudes are
//! set by a per-degree covariance spectrum, and the results are rendered
//! back onto point sets or triangle meshes.

pub mod sh;
pub mod rng;
pub mod sde;
pub mod spectra;
pub mod diffusion;
pub mod mesh;
