//! Scalar stochastic processes on uniform time grids.
//!
//! ```text
//! u_{k+1} = u_k + b(t_k, u_k) Δt + σ(t_k, u_k) ΔW_k,   ΔW_k ~ N(0, Δt)
//! ```
//!
//! Each path draws its noise from its own seeded stream, so batches are
//! reproducible under any parallel schedule.

mod fbm;
mod process;

pub use fbm::{fbm_paths, fgn_autocovariance, FgnGenerator, FgnMethod};
pub use process::{Diffusion, Drift, ProcessSpec};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{SeedSpec, StreamKey};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdeError {
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error("Hurst index must lie strictly inside (0, 1), got {0}")]
    InvalidHurst(f64),
    #[error("invalid process parameter: {0}")]
    InvalidParameter(String),
    #[error("a fractional driving noise cannot be integrated by Euler–Maruyama; use the fractional path generator")]
    FractionalNotSupported,
    #[error("state became non-finite at step {step} of path {path}")]
    NonFinite { path: usize, step: usize },
    #[error("expected {expected} values, got {actual}")]
    Dimension { expected: usize, actual: usize },
}

/// Uniform grid `t0 < t0 + dt < … < T` with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TimeGridRepr", into = "TimeGridRepr")]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    steps: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeGridRepr {
    #[serde(default)]
    t0: f64,
    #[serde(rename = "T")]
    t_end: f64,
    steps: usize,
}

impl TryFrom<TimeGridRepr> for TimeGrid {
    type Error = SdeError;
    fn try_from(r: TimeGridRepr) -> Result<Self, SdeError> {
        TimeGrid::new(r.t0, r.t_end, r.steps)
    }
}

impl From<TimeGrid> for TimeGridRepr {
    fn from(g: TimeGrid) -> Self {
        Self {
            t0: g.t0,
            t_end: g.t_end,
            steps: g.steps,
        }
    }
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, steps: usize) -> Result<Self, SdeError> {
        if !(t0.is_finite() && t_end.is_finite()) {
            return Err(SdeError::InvalidTimeGrid("times must be finite".into()));
        }
        if steps == 0 {
            return Err(SdeError::InvalidTimeGrid("at least one step is required".into()));
        }
        if t_end <= t0 {
            return Err(SdeError::InvalidTimeGrid(format!(
                "end time {t_end} must exceed start time {t0}"
            )));
        }
        let g = Self { t0, t_end, steps };
        if g.dt() <= 0.0 {
            return Err(SdeError::InvalidTimeGrid("step size underflows to zero".into()));
        }
        Ok(g)
    }

    /// Grid on `[0, t_end]`.
    pub fn from_horizon(t_end: f64, steps: usize) -> Result<Self, SdeError> {
        Self::new(0.0, t_end, steps)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t0) / self.steps as f64
    }

    /// `t_k`; the last node is exactly `T`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_end
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

/// Values `x_{p,k}` of `n_paths` paths on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    times: TimeGrid,
    n_paths: usize,
    values: Vec<f64>,
}

impl PathMatrix {
    pub fn from_rows(times: TimeGrid, rows: Vec<Vec<f64>>) -> Result<Self, SdeError> {
        let width = times.steps() + 1;
        let n_paths = rows.len();
        let mut values = Vec::with_capacity(n_paths * width);
        for row in rows {
            if row.len() != width {
                return Err(SdeError::Dimension {
                    expected: width,
                    actual: row.len(),
                });
            }
            values.extend(row);
        }
        Ok(Self {
            times,
            n_paths,
            values,
        })
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn path(&self, p: usize) -> &[f64] {
        let w = self.times.steps() + 1;
        &self.values[p * w..(p + 1) * w]
    }

    pub fn value(&self, p: usize, k: usize) -> f64 {
        self.path(p)[k]
    }

    /// Values of every path at time node `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_paths).map(|p| self.value(p, k)).collect()
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.times.steps() + 1)
    }
}

/// `K` Gaussian increments of variance `dt` drawn from `rng`.
pub fn draw_increments<R: Rng>(rng: &mut R, grid: &TimeGrid) -> Vec<f64> {
    let sd = grid.dt().sqrt();
    (0..grid.steps())
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Increment matrix: row `s` holds the `K` increments of stream `s`.
pub fn brownian_increments(grid: &TimeGrid, n_streams: usize, seed: SeedSpec) -> Vec<Vec<f64>> {
    (0..n_streams)
        .into_par_iter()
        .map(|s| draw_increments(&mut seed.stream(StreamKey::Path(s as u64)), grid))
        .collect()
}

/// Partial sums of increments, starting at 0.
pub fn cumulative_path(increments: &[f64]) -> Vec<f64> {
    let mut path = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    path.push(acc);
    for dw in increments {
        acc += dw;
        path.push(acc);
    }
    path
}

/// One Euler–Maruyama path driven by the supplied increments.
///
/// `path_index` is only used to label errors.
pub fn euler_maruyama_path(
    spec: &ProcessSpec,
    x0: f64,
    grid: &TimeGrid,
    increments: &[f64],
    path_index: usize,
) -> Result<Vec<f64>, SdeError> {
    if increments.len() != grid.steps() {
        return Err(SdeError::Dimension {
            expected: grid.steps(),
            actual: increments.len(),
        });
    }
    if !x0.is_finite() {
        return Err(SdeError::NonFinite {
            path: path_index,
            step: 0,
        });
    }
    let dt = grid.dt();
    let mut path = Vec::with_capacity(grid.steps() + 1);
    let mut x = x0;
    path.push(x);
    for (k, dw) in increments.iter().enumerate() {
        let t = grid.time(k);
        x = x + spec.drift.eval(t, x) * dt + spec.diffusion.eval(t, x) * dw;
        if !x.is_finite() {
            return Err(SdeError::NonFinite {
                path: path_index,
                step: k + 1,
            });
        }
        path.push(x);
    }
    Ok(path)
}

/// Euler–Maruyama paths, one per initial value; path `p` uses stream
/// `Path(p)`.
pub fn euler_maruyama(
    spec: &ProcessSpec,
    x0: &[f64],
    grid: &TimeGrid,
    seed: SeedSpec,
) -> Result<PathMatrix, SdeError> {
    spec.validate()?;
    if spec.hurst.is_some() {
        return Err(SdeError::FractionalNotSupported);
    }
    let rows = x0
        .par_iter()
        .enumerate()
        .map(|(p, &x)| {
            let dw = draw_increments(&mut seed.stream(StreamKey::Path(p as u64)), grid);
            euler_maruyama_path(spec, x, grid, &dw, p)
        })
        .collect::<Result<Vec<_>, _>>()?;
    PathMatrix::from_rows(*grid, rows)
}

/// Mean and variance of the Ornstein–Uhlenbeck process
/// `dX = θ(μ − X)dt + σ dW` at time `t`.
pub fn ou_moments(theta: f64, mu: f64, sigma: f64, x0: f64, t: f64) -> Result<(f64, f64), SdeError> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(SdeError::InvalidParameter(format!(
            "mean-reversion rate must be positive, got {theta}"
        )));
    }
    let decay = (-theta * t).exp();
    let mean = mu + (x0 - mu) * decay;
    let variance = sigma * sigma * (1.0 - (-2.0 * theta * t).exp()) / (2.0 * theta);
    Ok((mean, variance))
}
