//! Command implementations behind the `shape-diffusion` binary.
//!
//! Every command returns a [`CliError`] whose [`exit_code`](CliError::exit_code)
//! separates configuration mistakes (2), I/O failures (3), and numerical
//! blow-up (4).

pub mod commands;
pub mod config;

pub use commands::{decompose, info, simulate, spectrum_check, DecomposeSource, SimulateSummary, SpectrumReport};
pub use config::{FrameFormat, InputSpec, Overrides, OutputSpec, ResolvedRun, RunConfig};

use shape_diffusion::diffusion::DiffusionError;
use shape_diffusion::mesh::MeshError;
use shape_diffusion::sde::SdeError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("numerical blow-up: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<DiffusionError> for CliError {
    fn from(e: DiffusionError) -> Self {
        match e {
            DiffusionError::BlowUp { .. } | DiffusionError::Process(SdeError::NonFinite { .. }) => {
                CliError::Numeric(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::NonFinite { .. } => CliError::Numeric(e.to_string()),
            MeshError::Synthesis(inner) => inner.into(),
            MeshError::Parse { .. }
            | MeshError::NonTriangular { .. }
            | MeshError::IndexOutOfRange { .. }
            | MeshError::DegenerateFace { .. }
            | MeshError::Unsupported(_)
            | MeshError::Io(_) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
