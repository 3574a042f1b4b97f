//! Fractional Brownian motion by circulant embedding of fractional Gaussian
//! noise (Davies–Harte), with a dense Cholesky fallback.
//!
//! The covariance used is the standard
//!
//! ```text
//! E[B_s B_t] = ½ (|s|^{2h} + |t|^{2h} − |t − s|^{2h})
//! ```
//!
//! which reduces to `min(s, t)` at `h = ½`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{num_complex::Complex64, Fft, FftPlanner};

use super::{cumulative_path, PathMatrix, SdeError, TimeGrid};
use crate::rng::{SeedSpec, StreamKey};

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FgnMethod {
    Circulant,
    Cholesky,
}

enum Sampler {
    Circulant {
        /// `sqrt(λ_k / m)` for the embedding eigenvalues.
        scales: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky {
        factor: DMatrix<f64>,
    },
}

/// Draws fractional Gaussian noise vectors of fixed length.
pub struct FgnGenerator {
    hurst: f64,
    n: usize,
    step_scale: f64,
    sampler: Sampler,
}

impl std::fmt::Debug for FgnGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnGenerator")
            .field("hurst", &self.hurst)
            .field("n", &self.n)
            .field("method", &self.method())
            .finish()
    }
}

impl FgnGenerator {
    /// Generator for the `K` increments of a fBm on `grid`. Uses circulant
    /// embedding, falling back to Cholesky if the embedding has a
    /// significantly negative eigenvalue.
    pub fn new(hurst: f64, grid: &TimeGrid) -> Result<Self, SdeError> {
        check_hurst(hurst)?;
        let n = grid.steps();
        let step_scale = grid.dt().powf(hurst);
        let sampler = match circulant_scales(hurst, n) {
            Some((scales, fft)) => Sampler::Circulant { scales, fft },
            None => {
                log::debug!("circulant embedding not nonnegative for h={hurst}, n={n}; using Cholesky");
                Sampler::Cholesky {
                    factor: cholesky_factor(hurst, n)?,
                }
            }
        };
        Ok(Self {
            hurst,
            n,
            step_scale,
            sampler,
        })
    }

    /// Generator pinned to one method.
    pub fn with_method(hurst: f64, grid: &TimeGrid, method: FgnMethod) -> Result<Self, SdeError> {
        check_hurst(hurst)?;
        let n = grid.steps();
        let sampler = match method {
            FgnMethod::Circulant => {
                let (scales, fft) = circulant_scales(hurst, n).ok_or_else(|| {
                    SdeError::InvalidParameter(format!("circulant embedding fails for h={hurst}, n={n}"))
                })?;
                Sampler::Circulant { scales, fft }
            }
            FgnMethod::Cholesky => Sampler::Cholesky {
                factor: cholesky_factor(hurst, n)?,
            },
        };
        Ok(Self {
            hurst,
            n,
            step_scale: grid.dt().powf(hurst),
            sampler,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn method(&self) -> FgnMethod {
        match self.sampler {
            Sampler::Circulant { .. } => FgnMethod::Circulant,
            Sampler::Cholesky { .. } => FgnMethod::Cholesky,
        }
    }

    /// `K` noise increments scaled to the grid step.
    pub fn sample_increments<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.n;
        let mut out = match &self.sampler {
            Sampler::Circulant { scales, fft } => {
                let m = 2 * n;
                let mut w = vec![Complex64::new(0.0, 0.0); m];
                w[0] = Complex64::new(scales[0] * rng.sample::<f64, _>(StandardNormal), 0.0);
                for k in 1..n {
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    let s = scales[k] / std::f64::consts::SQRT_2;
                    w[k] = Complex64::new(s * a, s * b);
                    w[m - k] = w[k].conj();
                }
                w[n] = Complex64::new(scales[n] * rng.sample::<f64, _>(StandardNormal), 0.0);
                fft.process(&mut w);
                w.truncate(n);
                w.into_iter().map(|z| z.re).collect::<Vec<f64>>()
            }
            Sampler::Cholesky { factor } => {
                let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                (factor * z).iter().copied().collect()
            }
        };
        for v in &mut out {
            *v *= self.step_scale;
        }
        out
    }

    /// A fBm path `B_{t_0} = 0, B_{t_1}, …, B_{t_K}`.
    pub fn sample_path<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        cumulative_path(&self.sample_increments(rng))
    }
}

fn check_hurst(h: f64) -> Result<(), SdeError> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(SdeError::InvalidHurst(h))
    }
}

/// Square-rooted, normalised eigenvalues of the size-`2n` circulant
/// embedding, or `None` if any eigenvalue is meaningfully negative.
fn circulant_scales(hurst: f64, n: usize) -> Option<(Vec<f64>, Arc<dyn Fft<f64>>)> {
    let m = 2 * n;
    let row: Vec<Complex64> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex64::new(fgn_autocovariance(hurst, lag), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let mut eig = row;
    fft.process(&mut eig);
    let max = eig.iter().fold(0.0f64, |a, z| a.max(z.re.abs()));
    let tol = 1e-10 * max.max(1.0);
    if eig.iter().any(|z| z.re < -tol) {
        return None;
    }
    let scales = eig[..=n]
        .iter()
        .map(|z| (z.re.max(0.0) / m as f64).sqrt())
        .collect();
    Some((scales, fft))
}

/// Lower Cholesky factor of the `n × n` fGn Toeplitz covariance.
fn cholesky_factor(hurst: f64, n: usize) -> Result<DMatrix<f64>, SdeError> {
    let gamma: Vec<f64> = (0..n).map(|k| fgn_autocovariance(hurst, k)).collect();
    let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
    cov.cholesky()
        .map(|c| c.l())
        .ok_or_else(|| SdeError::InvalidParameter(format!("fGn covariance not positive definite for h={hurst}")))
}

/// `n_streams` independent fBm paths on `grid`, path `p` drawn from stream
/// `Path(p)`.
pub fn fbm_paths(hurst: f64, grid: &TimeGrid, n_streams: usize, seed: SeedSpec) -> Result<PathMatrix, SdeError> {
    let generator = FgnGenerator::new(hurst, grid)?;
    let rows = (0..n_streams)
        .into_par_iter()
        .map(|p| generator.sample_path(&mut seed.stream(StreamKey::Path(p as u64))))
        .collect();
    PathMatrix::from_rows(*grid, rows)
}
