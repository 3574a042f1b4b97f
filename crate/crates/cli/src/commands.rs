use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use shape_diffusion::diffusion::{
    decompose_sphere, sample_frames, shape_process, ShapeCoefficients, ShapeTrajectory,
};
use shape_diffusion::mesh::{
    decompose_mesh, load_mesh, mesh_stats, radial_project, transfer_process, write_obj, Point3, TriangleMesh,
};
use shape_diffusion::sh::{BandLimit, CoefficientDocument};
use shape_diffusion::spectra::{
    hnu_convergence_margin, sobolev_norm, truncated_trace, DecayClass, SobolevOrder, SpectrumSpec,
};

use crate::config::{FrameFormat, InputSpec, Overrides, ResolvedRun, RunConfig};
use crate::CliError;

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn read_coefficients(path: &Path) -> Result<CoefficientDocument, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, format!("invalid coefficient document: {e}")))
}

pub const TOOL_NAME: &str = "shape-diffusion";

pub fn frame_name(k: usize, format: FrameFormat) -> String {
    match format {
        FrameFormat::Obj => format!("frame_{k:04}.obj"),
        FrameFormat::Json => format!("frame_{k:04}.json"),
    }
}

#[derive(Debug, Clone)]
pub struct SimulateSummary {
    pub out_dir: PathBuf,
    pub frames: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    seed: u64,
    band_limit: usize,
    times: Vec<f64>,
    frames: &'a [String],
    warnings: &'a [String],
}

/// How the run's frames are turned into geometry.
enum Geometry {
    /// Displace a mesh by the noise part of each frame.
    Displace(TriangleMesh, shape_diffusion::mesh::SphericalParameterization),
    /// Synthesize the whole frame at the vertex directions of a unit mesh.
    Synthesize(TriangleMesh),
}

/// Runs the config at `config_path`, writing frames, `manifest.json`, and
/// `stats.csv` to the output directory.
pub fn simulate(config_path: &Path, overrides: &Overrides) -> Result<SimulateSummary, CliError> {
    let config = RunConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    simulate_resolved(config.resolve(overrides, base)?)
}

pub fn simulate_resolved(run: ResolvedRun) -> Result<SimulateSummary, CliError> {
    let n = run.band_limit;
    let cfg = &run.config;
    let mut warnings = Vec::new();

    let (u0, geometry) = match &cfg.input {
        InputSpec::Sphere => {
            let sphere = TriangleMesh::icosphere(cfg.output.resolution);
            let param = radial_project(&sphere, Some([0.0; 3]))?;
            (decompose_sphere(BandLimit(n))?, Geometry::Displace(sphere, param))
        }
        InputSpec::Mesh { center, .. } => {
            let path = run.input_path.as_deref().expect("mesh input has a path");
            let mesh = load_mesh(path)?;
            let param = radial_project(&mesh, *center)?;
            if !param.duplicate_pairs.is_empty() {
                warnings.push(format!(
                    "radial projection is not injective: {} vertex pairs share a direction",
                    param.duplicate_pairs.len()
                ));
            }
            (ShapeCoefficients::zeros(n), Geometry::Displace(mesh, param))
        }
        InputSpec::Coefficients { .. } => {
            let path = run.input_path.as_deref().expect("coefficient input has a path");
            let doc = read_coefficients(path)?;
            let channels = doc.to_channels().map_err(|e| io_err(path, e))?;
            if channels.len() != 3 {
                return Err(CliError::Config(format!(
                    "{}: a shape needs 3 channels, found {}",
                    path.display(),
                    channels.len()
                )));
            }
            if doc.band_limit > n {
                return Err(CliError::Config(format!(
                    "{}: band limit {} exceeds the run's {n}",
                    path.display(),
                    doc.band_limit
                )));
            }
            let [x, y, z]: [_; 3] = channels
                .into_iter()
                .map(|c| c.resized(n))
                .collect::<Vec<_>>()
                .try_into()
                .expect("three channels");
            let u0 = ShapeCoefficients::new([x, y, z]).map_err(|e| CliError::Config(e.to_string()))?;
            (u0, Geometry::Synthesize(TriangleMesh::icosphere(cfg.output.resolution)))
        }
    };
    for w in &warnings {
        log::warn!("{w}");
    }

    let traj = shape_process(&u0, &run.spectrum, &cfg.process, &cfg.time, run.seed, cfg.scale)?;

    let out = &cfg.output.dir;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let format = cfg.output.format;
    let frames: Vec<String> = (0..traj.frame_count()).map(|k| frame_name(k, format)).collect();

    match format {
        FrameFormat::Json => {
            frames.par_iter().enumerate().try_for_each(|(k, name)| {
                let frame = traj.frame(k);
                let [x, y, z] = frame.channels();
                let doc = CoefficientDocument::from_channels(&[x, y, z]).map_err(|e| CliError::Numeric(e.to_string()))?;
                let text = serde_json::to_string(&doc).map_err(|e| CliError::Numeric(e.to_string()))?;
                write_file(&out.join(name), text + "\n")
            })?;
        }
        FrameFormat::Obj => {
            let meshes = render(&geometry, &traj)?;
            meshes
                .par_iter()
                .zip(&frames)
                .try_for_each(|(mesh, name)| write_file(&out.join(name), write_obj(mesh)))?;
        }
    }

    write_file(&out.join("stats.csv"), stats_csv(&traj))?;
    let manifest = Manifest {
        tool: TOOL_NAME,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        seed: run.seed.master_seed,
        band_limit: n,
        times: cfg.time.times(),
        frames: &frames,
        warnings: &warnings,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Numeric(e.to_string()))?;
    write_file(&out.join("manifest.json"), text + "\n")?;

    Ok(SimulateSummary {
        out_dir: out.clone(),
        frames,
        warnings,
    })
}

fn render(geometry: &Geometry, traj: &ShapeTrajectory) -> Result<Vec<TriangleMesh>, CliError> {
    match geometry {
        Geometry::Displace(mesh, param) => Ok(transfer_process(mesh, param, traj)?),
        Geometry::Synthesize(unit) => {
            let param = radial_project(unit, Some([0.0; 3]))?;
            let points = sample_frames(traj, &param.angles())?;
            points
                .into_iter()
                .map(|vertices| Ok(unit.with_vertices(vertices)?))
                .collect()
        }
    }
}

/// `frame,t,l2_norm,h2_norm,max_coeff`, one row per frame, norms summed
/// over the three coordinate channels.
fn stats_csv(traj: &ShapeTrajectory) -> String {
    let h2 = SobolevOrder::new(2.0).expect("valid order");
    let mut out = String::from("frame,t,l2_norm,h2_norm,max_coeff\n");
    for k in 0..traj.frame_count() {
        let frame = traj.frame(k);
        let h2_norm = frame
            .channels()
            .iter()
            .map(|c| sobolev_norm(c, h2).powi(2))
            .sum::<f64>()
            .sqrt();
        out.push_str(&format!(
            "{k},{},{},{},{}\n",
            traj.times().time(k),
            frame.l2_norm(),
            h2_norm,
            frame.max_abs()
        ));
    }
    out
}

pub enum DecomposeSource {
    Sphere,
    Mesh { path: PathBuf, center: Option<Point3> },
}

/// Harmonic coefficients of a preset or mesh as a 3-channel document.
pub fn decompose(source: &DecomposeSource, band_limit: i64) -> Result<CoefficientDocument, CliError> {
    let n = usize::try_from(band_limit)
        .map_err(|_| CliError::Config(format!("band limit must be non-negative, got {band_limit}")))?;
    let shape = match source {
        DecomposeSource::Sphere => decompose_sphere(BandLimit(n))?,
        DecomposeSource::Mesh { path, center } => {
            let mesh = load_mesh(path)?;
            let param = radial_project(&mesh, *center)?;
            decompose_mesh(&mesh, &param, n)?
        }
    };
    let [x, y, z] = shape.channels();
    CoefficientDocument::from_channels(&[x, y, z]).map_err(|e| CliError::Numeric(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub spectrum: SpectrumSpec,
    pub band_limit: usize,
    pub trace: f64,
    pub nu: f64,
    pub margin_partial_sum: f64,
    pub margin_last_term: Option<f64>,
    pub margin_last_ratio: Option<f64>,
    pub decay: DecayClass,
}

impl fmt::Display for SpectrumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.spectrum.nu {
            Some(nu) => format!("{} (nu = {nu})", self.spectrum.kind),
            None => self.spectrum.kind.clone(),
        };
        writeln!(f, "spectrum: {kind}, band limit {}", self.band_limit)?;
        writeln!(f, "truncated trace: {}", self.trace)?;
        writeln!(f, "H^{} margin partial sum: {}", self.nu, self.margin_partial_sum)?;
        if let Some(t) = self.margin_last_term {
            writeln!(f, "last term: {t}")?;
        }
        if let Some(r) = self.margin_last_ratio {
            writeln!(f, "last partial-sum ratio: {r}")?;
        }
        let verdict = match self.decay {
            DecayClass::Decaying => "terms decaying",
            DecayClass::NotDecaying => "terms not decaying",
            DecayClass::Undetermined => "undetermined (fewer than two terms)",
        };
        write!(f, "classification: {verdict}")
    }
}

/// Trace and `H^nu` convergence diagnostics of a spectrum.
pub fn spectrum_check(spec: &SpectrumSpec, band_limit: Option<i64>, nu: f64) -> Result<SpectrumReport, CliError> {
    let n = match band_limit {
        Some(b) => usize::try_from(b).map_err(|_| CliError::Config(format!("band limit must be non-negative, got {b}")))?,
        None => spec
            .band_limit
            .unwrap_or_else(|| crate::config::default_band_limit(spec)),
    };
    let spectrum = spec.resolve(n).map_err(|e| CliError::Config(e.to_string()))?;
    let order = SobolevOrder::new(nu).map_err(|e| CliError::Config(e.to_string()))?;
    let margin = hnu_convergence_margin(&spectrum, order);
    Ok(SpectrumReport {
        spectrum: SpectrumSpec::describe(&spectrum),
        band_limit: n,
        trace: truncated_trace(&spectrum),
        nu,
        margin_partial_sum: margin.total(),
        margin_last_term: margin.terms.last().copied(),
        margin_last_ratio: margin.last_ratio,
        decay: margin.decay,
    })
}

/// Summary of a mesh (`.obj`, `.ply`) or coefficient document (`.json`).
pub fn info(path: &Path) -> Result<serde_json::Value, CliError> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let doc = read_coefficients(path)?;
        let channels = doc.to_channels().map_err(|e| io_err(path, e))?;
        let norms: Vec<f64> = channels.iter().map(|c| c.l2_norm()).collect();
        let max = channels.iter().fold(0.0f64, |a, c| a.max(c.max_abs()));
        Ok(json!({
            "kind": "coefficients",
            "band_limit": doc.band_limit,
            "channels": doc.channels,
            "l2_norms": norms,
            "max_coeff": max,
        }))
    } else {
        let mesh = load_mesh(path)?;
        let stats = mesh_stats(&mesh)?;
        let mut value = serde_json::to_value(stats).map_err(|e| CliError::Numeric(e.to_string()))?;
        value["kind"] = json!("mesh");
        Ok(value)
    }
}
