//! Spectral shape processes.
//!
//! Every coefficient `(i, l, m)` of a shape (channel `i` in `x, y, z`) is
//! perturbed by its own scalar process `x^{i,l,m}_t`, started at zero and
//! weighted by the covariance spectrum:
//!
//! ```text
//! u_t = u_0 + Σ_{i,l,m} w_l x^{i,l,m}_t Y_{l,m} e_i
//! ```
//!
//! with `w_l = √λ_l` for a Q-Wiener process (or `λ_l` in linear scaling
//! mode). The driver may be Brownian motion, an Itô diffusion integrated by
//! Euler–Maruyama, or fractional Brownian motion.
//!
//! Trajectories keep the source shape and the perturbations apart, so frame
//! 0 is the source bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{SeedSpec, StreamKey};
use crate::sde::{self, FgnGenerator, ProcessSpec, SdeError, TimeGrid};
use crate::sh::{self, BandLimit, HarmonicCoefficients, ShError, SynthesisMatrix};
use crate::spectra::{CovarianceSpectrum, SpectrumSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffusionError {
    #[error("band limit mismatch: shape has {shape}, spectrum has {spectrum}")]
    BandLimitMismatch { shape: usize, spectrum: usize },
    #[error("a sphere needs band limit at least 1")]
    SphereNeedsDegreeOne,
    #[error("integration of coefficient (channel {channel}, l={l}, m={m}) blew up at step {step}")]
    BlowUp {
        channel: usize,
        l: usize,
        m: i64,
        step: usize,
    },
    #[error(transparent)]
    Process(#[from] SdeError),
    #[error(transparent)]
    Harmonics(#[from] ShError),
}

/// Three coordinate expansions sharing a band limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCoefficients {
    channels: [HarmonicCoefficients; 3],
}

impl ShapeCoefficients {
    pub fn new(channels: [HarmonicCoefficients; 3]) -> Result<Self, ShError> {
        let n = channels[0].band_limit();
        for c in &channels[1..] {
            if c.band_limit() != n {
                return Err(ShError::BandLimitMismatch(n, c.band_limit()));
            }
        }
        Ok(Self { channels })
    }

    pub fn zeros(band_limit: usize) -> Self {
        let z = HarmonicCoefficients::zeros(band_limit);
        Self {
            channels: [z.clone(), z.clone(), z],
        }
    }

    pub fn band_limit(&self) -> usize {
        self.channels[0].band_limit()
    }

    pub fn channel(&self, i: usize) -> &HarmonicCoefficients {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[HarmonicCoefficients; 3] {
        &self.channels
    }

    pub fn into_channels(self) -> [HarmonicCoefficients; 3] {
        self.channels
    }

    pub fn add(&self, other: &Self) -> Result<Self, ShError> {
        Ok(Self {
            channels: [
                self.channels[0].add(&other.channels[0])?,
                self.channels[1].add(&other.channels[1])?,
                self.channels[2].add(&other.channels[2])?,
            ],
        })
    }

    /// `sqrt(Σ_i ‖c_i‖²)`.
    pub fn l2_norm(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.channels.iter().fold(0.0, |a, c| a.max(c.max_abs()))
    }
}

/// Weight applied to the unit-variance coefficient processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// `√λ_l`, the Q-Wiener convention.
    #[default]
    Sqrt,
    /// `λ_l`.
    Linear,
}

impl ScaleMode {
    pub fn weight(self, lambda: f64) -> f64 {
        match self {
            ScaleMode::Sqrt => lambda.sqrt(),
            ScaleMode::Linear => lambda,
        }
    }
}

/// Which scalar process drives each coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ProcessModel {
    QWiener,
    Ito(ProcessSpec),
    Fractional { hurst: f64 },
}

enum Driver<'a> {
    Brownian,
    Ito(&'a ProcessSpec),
    Fractional(&'a FgnGenerator),
}

/// Immutable record of how a trajectory was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub spectrum: SpectrumSpec,
    pub process: ProcessModel,
    pub seed: SeedSpec,
    pub scale: ScaleMode,
}

/// Coefficient frames of a shape process at every node of a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeTrajectory {
    times: TimeGrid,
    source: ShapeCoefficients,
    perturbations: Vec<ShapeCoefficients>,
    provenance: Provenance,
}

impl ShapeTrajectory {
    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn frame_count(&self) -> usize {
        self.perturbations.len()
    }

    pub fn source(&self) -> &ShapeCoefficients {
        &self.source
    }

    /// Noise part of frame `k`; zero at `k = 0`.
    pub fn perturbation(&self, k: usize) -> &ShapeCoefficients {
        &self.perturbations[k]
    }

    /// Source plus noise at frame `k`. Frame 0 is the source itself.
    pub fn frame(&self, k: usize) -> ShapeCoefficients {
        if k == 0 {
            return self.source.clone();
        }
        self.source
            .add(&self.perturbations[k])
            .expect("trajectory frames share the source band limit")
    }

    pub fn frames(&self) -> impl Iterator<Item = ShapeCoefficients> + '_ {
        (0..self.frame_count()).map(|k| self.frame(k))
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// Scaled perturbation path of one coefficient.
fn coefficient_path(
    driver: &Driver<'_>,
    weight: f64,
    grid: &TimeGrid,
    seed: SeedSpec,
    (channel, l, m): (usize, usize, i64),
) -> Result<Vec<f64>, DiffusionError> {
    if weight == 0.0 {
        return Ok(vec![0.0; grid.steps() + 1]);
    }
    let mut rng = seed.stream(StreamKey::Coefficient { channel, l, m });
    let path = match driver {
        Driver::Brownian => sde::cumulative_path(&sde::draw_increments(&mut rng, grid)),
        Driver::Ito(spec) => {
            let dw = sde::draw_increments(&mut rng, grid);
            sde::euler_maruyama_path(spec, 0.0, grid, &dw, 0).map_err(|e| match e {
                SdeError::NonFinite { step, .. } => DiffusionError::BlowUp { channel, l, m, step },
                other => other.into(),
            })?
        }
        Driver::Fractional(generator) => generator.sample_path(&mut rng),
    };
    Ok(path.into_iter().map(|x| weight * x).collect())
}

/// Perturbation paths for every coefficient of one channel, in storage
/// order: result `[k]` is the channel's noise table at time node `k`.
fn channel_noise(
    channel: usize,
    driver: &Driver<'_>,
    spectrum: &CovarianceSpectrum,
    grid: &TimeGrid,
    seed: SeedSpec,
    scale: ScaleMode,
) -> Result<Vec<HarmonicCoefficients>, DiffusionError> {
    let n = spectrum.band_limit();
    let keys: Vec<(usize, i64)> = HarmonicCoefficients::zeros(n).iter().map(|(l, m, _)| (l, m)).collect();
    let paths = keys
        .par_iter()
        .map(|&(l, m)| coefficient_path(driver, scale.weight(spectrum.lambda(l)), grid, seed, (channel, l, m)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((0..=grid.steps())
        .map(|k| {
            let values = paths.iter().map(|p| p[k]).collect();
            HarmonicCoefficients::from_values(n, values).expect("finite perturbations")
        })
        .collect())
}

fn run(
    u0: &ShapeCoefficients,
    spectrum: &CovarianceSpectrum,
    driver: Driver<'_>,
    model: ProcessModel,
    grid: &TimeGrid,
    seed: SeedSpec,
    scale: ScaleMode,
) -> Result<ShapeTrajectory, DiffusionError> {
    if u0.band_limit() != spectrum.band_limit() {
        return Err(DiffusionError::BandLimitMismatch {
            shape: u0.band_limit(),
            spectrum: spectrum.band_limit(),
        });
    }
    let per_channel = (0..3)
        .map(|c| channel_noise(c, &driver, spectrum, grid, seed, scale))
        .collect::<Result<Vec<_>, _>>()?;
    let [xs, ys, zs]: [Vec<HarmonicCoefficients>; 3] = per_channel.try_into().expect("three channels");
    let perturbations = xs
        .into_iter()
        .zip(ys)
        .zip(zs)
        .map(|((x, y), z)| ShapeCoefficients { channels: [x, y, z] })
        .collect();
    Ok(ShapeTrajectory {
        times: *grid,
        source: u0.clone(),
        perturbations,
        provenance: Provenance {
            spectrum: SpectrumSpec::describe(spectrum),
            process: model,
            seed,
            scale,
        },
    })
}

/// `u_t = u_0 + Σ w_l B^{i,l,m}_t Y_{l,m} e_i` with independent Brownian
/// motions.
pub fn q_wiener_shape_process(
    u0: &ShapeCoefficients,
    spectrum: &CovarianceSpectrum,
    grid: &TimeGrid,
    seed: SeedSpec,
    scale: ScaleMode,
) -> Result<ShapeTrajectory, DiffusionError> {
    run(u0, spectrum, Driver::Brownian, ProcessModel::QWiener, grid, seed, scale)
}

/// Each coefficient follows an independent Euler–Maruyama path of `process`
/// started at 0, weighted by `w_l`.
pub fn ito_shape_process(
    u0: &ShapeCoefficients,
    spectrum: &CovarianceSpectrum,
    process: &ProcessSpec,
    grid: &TimeGrid,
    seed: SeedSpec,
    scale: ScaleMode,
) -> Result<ShapeTrajectory, DiffusionError> {
    process.validate()?;
    if process.hurst.is_some() {
        return Err(SdeError::FractionalNotSupported.into());
    }
    run(
        u0,
        spectrum,
        Driver::Ito(process),
        ProcessModel::Ito(*process),
        grid,
        seed,
        scale,
    )
}

/// Q-Wiener process with every Brownian motion replaced by an independent
/// fractional Brownian motion of Hurst index `hurst`.
pub fn fractional_shape_process(
    u0: &ShapeCoefficients,
    spectrum: &CovarianceSpectrum,
    hurst: f64,
    grid: &TimeGrid,
    seed: SeedSpec,
    scale: ScaleMode,
) -> Result<ShapeTrajectory, DiffusionError> {
    let generator = FgnGenerator::new(hurst, grid)?;
    run(
        u0,
        spectrum,
        Driver::Fractional(&generator),
        ProcessModel::Fractional { hurst },
        grid,
        seed,
        scale,
    )
}

/// Dispatches on the process model.
pub fn shape_process(
    u0: &ShapeCoefficients,
    spectrum: &CovarianceSpectrum,
    model: &ProcessModel,
    grid: &TimeGrid,
    seed: SeedSpec,
    scale: ScaleMode,
) -> Result<ShapeTrajectory, DiffusionError> {
    match model {
        ProcessModel::QWiener => q_wiener_shape_process(u0, spectrum, grid, seed, scale),
        ProcessModel::Ito(p) => ito_shape_process(u0, spectrum, p, grid, seed, scale),
        ProcessModel::Fractional { hurst } => fractional_shape_process(u0, spectrum, *hurst, grid, seed, scale),
    }
}

/// Noise tables of a single channel under the given model, one per time
/// node. The result depends only on the channel index, not on which other
/// channels are simulated or in what order.
pub fn channel_perturbations(
    channel: usize,
    spectrum: &CovarianceSpectrum,
    model: &ProcessModel,
    grid: &TimeGrid,
    seed: SeedSpec,
    scale: ScaleMode,
) -> Result<Vec<HarmonicCoefficients>, DiffusionError> {
    match model {
        ProcessModel::QWiener => channel_noise(channel, &Driver::Brownian, spectrum, grid, seed, scale),
        ProcessModel::Ito(p) => {
            p.validate()?;
            channel_noise(channel, &Driver::Ito(p), spectrum, grid, seed, scale)
        }
        ProcessModel::Fractional { hurst } => {
            let generator = FgnGenerator::new(*hurst, grid)?;
            channel_noise(channel, &Driver::Fractional(&generator), spectrum, grid, seed, scale)
        }
    }
}

/// Evaluates every frame at the given angles: `result[k][p]` is point `p`
/// of frame `k`.
pub fn sample_frames(traj: &ShapeTrajectory, points: &[(f64, f64)]) -> Result<Vec<Vec<[f64; 3]>>, DiffusionError> {
    let synth = SynthesisMatrix::new(traj.source.band_limit(), points);
    (0..traj.frame_count())
        .into_par_iter()
        .map(|k| synthesize_shape(&synth, &traj.frame(k)))
        .collect()
}

/// Evaluates a shape at precomputed basis points.
pub fn synthesize_shape(synth: &SynthesisMatrix, shape: &ShapeCoefficients) -> Result<Vec<[f64; 3]>, DiffusionError> {
    let x = synth.synthesize(&shape.channels[0])?;
    let y = synth.synthesize(&shape.channels[1])?;
    let z = synth.synthesize(&shape.channels[2])?;
    Ok(x.into_iter()
        .zip(y)
        .zip(z)
        .map(|((x, y), z)| [x, y, z])
        .collect())
}

/// Harmonic expansion of the unit sphere `(sin θ cos φ, sin θ sin φ, cos θ)`.
pub fn decompose_sphere(band_limit: BandLimit) -> Result<ShapeCoefficients, DiffusionError> {
    if band_limit.degree() == 0 {
        return Err(DiffusionError::SphereNeedsDegreeOne);
    }
    let grid = sh::build_grid(band_limit);
    let coords: [fn(f64, f64) -> f64; 3] = [
        |t, p| t.sin() * p.cos(),
        |t, p| t.sin() * p.sin(),
        |t, _| t.cos(),
    ];
    let channels = coords.map(|f| {
        let samples: Vec<f64> = grid.nodes().map(|(t, p)| f(t, p)).collect();
        sh::forward_sht(&samples, &grid, band_limit)
    });
    let [x, y, z] = channels;
    Ok(ShapeCoefficients::new([x?, y?, z?])?)
}
