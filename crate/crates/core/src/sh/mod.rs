//! Real spherical harmonics on the unit sphere.
//!
//! Angles follow the physics convention: `theta` is the colatitude in
//! `[0, π]` and `phi` the azimuth in `[0, 2π)`, so that the unit sphere is
//! `(sin θ cos φ, sin θ sin φ, cos θ)`.
//!
//! The real orthonormal basis is built from the complex harmonics (with the
//! Condon–Shortley phase) as
//!
//! ```text
//! Y_{l,0}  = K_l^0 P_l^0(cos θ)
//! Y_{l,m}  = √2 K_l^m P_l^m(cos θ) cos(mφ)     m > 0
//! Y_{l,-m} = √2 K_l^m P_l^m(cos θ) sin(mφ)     m > 0
//! ```

mod coeffs;
mod grid;
mod legendre;
mod transform;

use std::f64::consts::SQRT_2;

pub use coeffs::{BandLimit, CoefficientDocument, HarmonicCoefficients};
pub use grid::{build_grid, gauss_legendre, SphericalGrid};
pub use legendre::{assoc_legendre, LegendreTable};
pub use transform::{forward_sht, inverse_sht, inverse_sht_at, SynthesisMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShError {
    #[error("order m={m} is out of range for degree l={l}")]
    OrderOutOfRange { l: usize, m: i64 },
    #[error("Legendre argument {0} lies outside [-1, 1]")]
    ArgumentOutOfRange(f64),
    #[error("expected {expected} samples for the grid, got {actual}")]
    SampleCountMismatch { expected: usize, actual: usize },
    #[error("grid integrates exactly only up to degree {grid_degree}, transform needs {needed}")]
    GridTooCoarse { grid_degree: usize, needed: usize },
    #[error("expected {expected} coefficients for band limit {band_limit}, got {actual}")]
    CoefficientCountMismatch {
        band_limit: usize,
        expected: usize,
        actual: usize,
    },
    #[error("coefficient ({l}, {m}) is not finite")]
    NonFinite { l: usize, m: i64 },
    #[error("band limits differ: {0} vs {1}")]
    BandLimitMismatch(usize, usize),
    #[error("malformed coefficient document: {0}")]
    Document(String),
}

/// Evaluates the real orthonormal harmonic `Y_{l,m}(θ, φ)`.
pub fn eval_real_sh(l: usize, m: i64, theta: f64, phi: f64) -> Result<f64, ShError> {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Err(ShError::OrderOutOfRange { l, m });
    }
    let table = LegendreTable::at_colatitude(l, theta);
    let p = table.get(l, am);
    Ok(match m {
        0 => p,
        m if m > 0 => SQRT_2 * p * (am as f64 * phi).cos(),
        _ => SQRT_2 * p * (am as f64 * phi).sin(),
    })
}

/// Applies `(-Δ)^{ν/2}`: multiplies every degree-`l` coefficient by
/// `(l(l+1))^{ν/2}`.
pub fn fractional_laplacian_apply(coeffs: &HarmonicCoefficients, nu: f64) -> HarmonicCoefficients {
    coeffs.map_degrees(|l| ((l * (l + 1)) as f64).powf(nu / 2.0))
}
