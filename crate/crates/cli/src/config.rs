//! Run configuration: parsing, defaults, validation, and the resolved form
//! echoed into each run's manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shape_diffusion::diffusion::{ProcessModel, ScaleMode};
use shape_diffusion::mesh::Point3;
use shape_diffusion::rng::SeedSpec;
use shape_diffusion::sde::TimeGrid;
use shape_diffusion::spectra::{CovarianceSpectrum, SpectrumKind, SpectrumSpec};

use crate::CliError;

/// Band limit used when neither the config nor its spectrum names one.
pub fn default_band_limit(spectrum: &SpectrumSpec) -> usize {
    match spectrum.kind.as_str() {
        "identity" => 6,
        "custom" => spectrum.lambdas.as_ref().map_or(0, |l| l.len().saturating_sub(1)),
        _ => 25,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    /// The unit sphere, rendered on an icosphere.
    Sphere,
    /// A triangle mesh displaced along its radial parameterisation.
    Mesh {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Point3>,
    },
    /// A three-channel coefficient document used as the source shape.
    Coefficients { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FrameFormat {
    #[default]
    Obj,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Where results go. Not echoed into manifests, so that identical runs
    /// written to different places produce identical files.
    #[serde(default = "default_out_dir", skip_serializing)]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: FrameFormat,
    /// Icosphere subdivision level used to render spectral inputs.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_resolution() -> usize {
    3
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            format: FrameFormat::default(),
            resolution: default_resolution(),
        }
    }
}

fn default_spectrum() -> SpectrumSpec {
    SpectrumSpec {
        kind: "bessel".into(),
        nu: Some(1.0),
        band_limit: None,
        lambdas: None,
    }
}

fn default_time() -> TimeGrid {
    TimeGrid::from_horizon(1.0, 100).expect("valid default grid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_limit: Option<usize>,
    #[serde(default = "default_spectrum")]
    pub spectrum: SpectrumSpec,
    #[serde(default = "default_process")]
    pub process: ProcessModel,
    #[serde(default = "default_time")]
    pub time: TimeGrid,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scale: ScaleMode,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_process() -> ProcessModel {
    ProcessModel::QWiener
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<FrameFormat>,
}

/// A validated config with every default filled in.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    /// The config as echoed into the manifest.
    pub config: RunConfig,
    pub band_limit: usize,
    pub spectrum: CovarianceSpectrum,
    pub seed: SeedSpec,
    /// `input` paths made absolute against the config file's directory.
    pub input_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Accepts a config document or a run manifest, whose `config` entry is
    /// itself a complete config.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let invalid = |e: serde_json::Error| CliError::Config(format!("invalid config: {e}"));
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(invalid)?;
        if value.get("tool").and_then(|t| t.as_str()) == Some(crate::commands::TOOL_NAME) {
            value = value["config"].take();
        }
        serde_json::from_value(value).map_err(invalid)
    }

    /// Applies overrides, fills defaults, and checks every field before any
    /// computation happens. `base_dir` anchors relative input paths.
    pub fn resolve(mut self, overrides: &Overrides, base_dir: &Path) -> Result<ResolvedRun, CliError> {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(out) = &overrides.out {
            self.output.dir = out.clone();
        }
        if let Some(format) = overrides.format {
            self.output.format = format;
        }

        // Input paths are echoed in absolute form so a manifest can be replayed
        // from any working directory.
        let input_path = match &mut self.input {
            InputSpec::Sphere => None,
            InputSpec::Mesh { path, .. } | InputSpec::Coefficients { path } => {
                let absolute = std::path::absolute(base_dir.join(&*path))
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                *path = absolute.clone();
                Some(absolute)
            }
        };
        if let InputSpec::Mesh { center: Some(c), .. } = &self.input {
            if c.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config("mesh center must be finite".into()));
            }
        }

        let band_limit = self
            .band_limit
            .or(self.spectrum.band_limit)
            .unwrap_or_else(|| default_band_limit(&self.spectrum));
        if matches!(self.input, InputSpec::Sphere) && band_limit == 0 {
            return Err(CliError::Config("sphere input needs band_limit >= 1".into()));
        }
        let spectrum = self
            .spectrum
            .resolve(band_limit)
            .map_err(|e| CliError::Config(format!("spectrum: {e}")))?;

        match &self.process {
            ProcessModel::QWiener => {}
            ProcessModel::Ito(spec) => {
                spec.validate().map_err(|e| CliError::Config(format!("process: {e}")))?;
                if spec.hurst.is_some() {
                    return Err(CliError::Config(
                        "process: use the fractional model for fractional noise".into(),
                    ));
                }
            }
            ProcessModel::Fractional { hurst } => {
                if !(*hurst > 0.0 && *hurst < 1.0) {
                    return Err(CliError::Config(format!("process: Hurst index {hurst} outside (0, 1)")));
                }
            }
        }
        if self.output.resolution > 7 {
            return Err(CliError::Config(format!(
                "output resolution {} is too fine (max 7)",
                self.output.resolution
            )));
        }

        self.band_limit = Some(band_limit);
        if spectrum.kind() != SpectrumKind::Custom {
            self.spectrum = SpectrumSpec::describe(&spectrum);
        }
        Ok(ResolvedRun {
            seed: SeedSpec::new(self.seed),
            config: self,
            band_limit,
            spectrum,
            input_path,
        })
    }
}
