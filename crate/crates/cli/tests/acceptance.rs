//! Acceptance suite. Each test checks one criterion at its stated
//! tolerance and prints a single `criterion N [PASS|FAIL]` line to the real
//! stdout, so the summary is visible even when libtest captures output.
//!
//! Set `SHAPE_DIFFUSION_BLESS=1` to regenerate the torus golden file.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use shape_diffusion::diffusion::{decompose_sphere, q_wiener_shape_process, ScaleMode, ShapeCoefficients};
use shape_diffusion::mesh::{load_mesh, radial_project, save_mesh, write_obj, TriangleMesh};
use shape_diffusion::rng::{SeedSpec, StreamKey};
use shape_diffusion::sde::{
    brownian_increments, euler_maruyama, euler_maruyama_path, fbm_paths, ou_moments, ProcessSpec, TimeGrid,
};
use shape_diffusion::sh::{build_grid, forward_sht, BandLimit, HarmonicCoefficients, SynthesisMatrix};
use shape_diffusion::spectra::{make_spectrum, CovarianceSpectrum, SobolevOrder, SpectrumKind};
use statrs::distribution::{ContinuousCDF, Normal};

const BIN: &str = env!("CARGO_BIN_EXE_shape-diffusion");

fn report(criterion: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {criterion:>2} [{verdict}] {title}: {detail}\n");
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn mean_and_se(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var, (var / n).sqrt())
}

/// Sample variance together with the standard error of the variance of a
/// normal sample, computed about a known zero mean.
fn zero_mean_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let var = xs.iter().map(|x| x * x).sum::<f64>() / n;
    (var, var * (2.0 / n).sqrt())
}

/// Kolmogorov–Smirnov distance between a sample and `N(0, variance)`.
fn ks_statistic(xs: &[f64], variance: f64) -> f64 {
    let normal = Normal::new(0.0, variance.sqrt()).unwrap();
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_01_orthonormality() {
    let start = Instant::now();
    let n = 25;
    let grid = build_grid(BandLimit(n));
    let points: Vec<(f64, f64)> = grid.nodes().collect();
    let synth = SynthesisMatrix::new(n, &points);
    let k = (n + 1) * (n + 1);
    // Column-major copy scaled by sqrt(w) so the Gram matrix is B^T B.
    let columns: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            (0..points.len())
                .map(|p| synth.row(p)[j] * grid.weights[p].sqrt())
                .collect()
        })
        .collect();
    let worst = (0..k)
        .into_par_iter()
        .map(|i| {
            (i..k)
                .map(|j| {
                    let dot: f64 = columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum();
                    (dot - if i == j { 1.0 } else { 0.0 }).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "SH orthonormality on build_grid(25)",
        worst < 1e-10 && elapsed < 30.0,
        &format!("max |<Y,Y'> - delta| = {worst:.3e} (< 1e-10), {elapsed:.2} s (< 30 s)"),
    );
}

#[test]
fn criterion_02_transform_round_trip() {
    let n = 25;
    let grid = build_grid(BandLimit(n));
    let points: Vec<(f64, f64)> = grid.nodes().collect();
    let synth = SynthesisMatrix::new(n, &points);
    let seed = SeedSpec::new(2024);
    let (worst_values, worst_coeffs) = (0..100u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seed.stream(StreamKey::Path(trial));
            let values: Vec<f64> = (0..(n + 1) * (n + 1)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let coeffs = HarmonicCoefficients::from_values(n, values).unwrap();
            let samples = synth.synthesize(&coeffs).unwrap();
            let back = forward_sht(&samples, &grid, BandLimit(n)).unwrap();
            let resampled = synth.synthesize(&back).unwrap();
            let dv = samples.iter().zip(&resampled).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let dc = coeffs.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (dv, dc)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    report(
        2,
        "transform round-trip, N=25, 100 trials",
        worst_values < 1e-9 && worst_coeffs < 1e-9,
        &format!("max sample error {worst_values:.3e}, max coefficient error {worst_coeffs:.3e} (< 1e-9)"),
    );
}

#[test]
fn criterion_03_sphere_decomposition() {
    let shape = decompose_sphere(BandLimit(25)).unwrap();
    let target = (4.0 * PI / 3.0).sqrt();
    let mut large = Vec::new();
    let mut worst_small: f64 = 0.0;
    for (c, channel) in shape.channels().iter().enumerate() {
        for (l, m, v) in channel.iter() {
            if v.abs() > 1e-6 {
                large.push((c, l, m, v));
            } else {
                worst_small = worst_small.max(v.abs());
            }
        }
    }
    let large_ok = large.len() == 3 && large.iter().all(|&(_, l, _, v)| l == 1 && (v.abs() - target).abs() < 1e-10);
    let worst_dev = large.iter().map(|&(.., v)| (v.abs() - target).abs()).fold(0.0, f64::max);
    report(
        3,
        "sphere decomposition",
        large_ok && worst_small < 1e-12,
        &format!(
            "{} large coefficients (all degree 1: {}), max | |c| - sqrt(4pi/3) | = {worst_dev:.2e}, largest other {worst_small:.2e}",
            large.len(),
            large.iter().all(|&(_, l, ..)| l == 1)
        ),
    );
}

#[test]
fn criterion_04_q_wiener_marginals() {
    let start = Instant::now();
    let n = 5;
    let spectrum = make_spectrum(SpectrumKind::Bessel { nu: SobolevOrder::new(1.0).unwrap() }, n).unwrap();
    let grid = TimeGrid::from_horizon(1.0, 10).unwrap();
    let u0 = decompose_sphere(BandLimit(n)).unwrap();
    let runs = 10_000u64;
    let targets = [(0usize, 0i64), (2, 0), (5, 3)];
    let samples: Vec<[f64; 3]> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let traj = q_wiener_shape_process(&u0, &spectrum, &grid, SeedSpec::new(r), ScaleMode::Sqrt).unwrap();
            let last = traj.frame(grid.steps());
            targets.map(|(l, m)| last.channel(0).get(l, m) - traj.frame(0).channel(0).get(l, m))
        })
        .collect();

    let c20: Vec<f64> = samples.iter().map(|s| s[1]).collect();
    let (_, var, _) = mean_and_se(&c20);
    let se = var * (2.0 / (runs as f64 - 1.0)).sqrt();
    let var_ok = (var - 1.0 / 7.0).abs() < 3.0 * se;

    let critical = 1.628 / (runs as f64).sqrt();
    let mut ks_ok = true;
    let mut ks_detail = Vec::new();
    for (i, &(l, m)) in targets.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s[i]).collect();
        let d = ks_statistic(&xs, spectrum.lambda(l) * grid.t_end());
        ks_ok &= d < critical;
        ks_detail.push(format!("D({l},{m})={d:.4}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        4,
        "Q-Wiener marginals, bessel(1), 1e4 paths",
        var_ok && ks_ok && elapsed < 120.0,
        &format!(
            "Var c_(2,0)(1) = {var:.5} vs 1/7 = {:.5} (3 SE = {:.5}); KS {} vs critical {critical:.4}; {elapsed:.1} s",
            1.0 / 7.0,
            3.0 * se,
            ks_detail.join(", ")
        ),
    );
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Mean `|X_K(T) - X_ref(T)|` for each coarse `K`, with all levels driven
/// by the same Brownian paths.
fn strong_errors(spec: &ProcessSpec, x0: f64, paths: usize, ref_log2: u32, levels: &[u32]) -> Vec<f64> {
    let fine = TimeGrid::from_horizon(1.0, 1 << ref_log2).unwrap();
    let increments = brownian_increments(&fine, paths, SeedSpec::new(55));
    let per_path: Vec<Vec<f64>> = increments
        .par_iter()
        .enumerate()
        .map(|(p, dw)| {
            let reference = *euler_maruyama_path(spec, x0, &fine, dw, p).unwrap().last().unwrap();
            levels
                .iter()
                .map(|&lk| {
                    let grid = TimeGrid::from_horizon(1.0, 1 << lk).unwrap();
                    let block = 1 << (ref_log2 - lk);
                    let coarse: Vec<f64> = dw.chunks(block).map(|c| c.iter().sum()).collect();
                    let x = *euler_maruyama_path(spec, x0, &grid, &coarse, p).unwrap().last().unwrap();
                    (x - reference).abs()
                })
                .collect()
        })
        .collect();
    (0..levels.len())
        .map(|i| per_path.iter().map(|e| e[i]).sum::<f64>() / paths as f64)
        .collect()
}

#[test]
fn criterion_05_euler_maruyama_convergence() {
    let levels: Vec<u32> = (6..=12).collect();
    let spec = ProcessSpec::ornstein_uhlenbeck(1.0, 0.0, 0.1);
    let errors = strong_errors(&spec, 1.0, 2000, 14, &levels);
    let log_dt: Vec<f64> = levels.iter().map(|&k| -(k as f64) * 2f64.ln()).collect();
    let log_err: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let rate = slope(&log_dt, &log_err);
    let table: Vec<String> = levels.iter().zip(&errors).map(|(k, e)| format!("2^{k}:{e:.2e}")).collect();
    report(
        5,
        "Euler-Maruyama strong rate on OU (theta=1, sigma=0.1)",
        (rate - 0.5).abs() <= 0.1,
        &format!("measured rate {rate:.3} (target 0.5 +/- 0.1); mean |error| {}", table.join(" ")),
    );
}

#[test]
fn criterion_06_ou_moments() {
    let (theta, mu, sigma, x0) = (1.0, 0.0, 0.1, 1.0);
    let spec = ProcessSpec::ornstein_uhlenbeck(theta, mu, sigma);
    let n = 10_000;
    let grid = TimeGrid::from_horizon(1.0, 1000).unwrap();
    let paths = euler_maruyama(&spec, &vec![x0; n], &grid, SeedSpec::new(6)).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (t, k) in [(0.25, 250usize), (1.0, 1000)] {
        let xs = paths.column(k);
        let (mean, var, se_mean) = mean_and_se(&xs);
        let (m_exact, v_exact) = ou_moments(theta, mu, sigma, x0, t).unwrap();
        let se_var = var * (2.0 / (n as f64 - 1.0)).sqrt();
        let pass = (mean - m_exact).abs() < 3.0 * se_mean && (var - v_exact).abs() < 3.0 * se_var;
        ok &= pass;
        detail.push(format!(
            "t={t}: mean {mean:.5} vs {m_exact:.5} (SE {se_mean:.1e}), var {var:.3e} vs {v_exact:.3e} (SE {se_var:.1e})"
        ));
    }

    let long = TimeGrid::from_horizon(10.0, 1000).unwrap();
    let xs = euler_maruyama(&spec, &vec![x0; n], &long, SeedSpec::new(66)).unwrap().column(1000);
    let (_, var, _) = mean_and_se(&xs);
    let se_var = var * (2.0 / (n as f64 - 1.0)).sqrt();
    let stationary = sigma * sigma / (2.0 * theta);
    let long_ok = (var - stationary).abs() < 3.0 * se_var;
    detail.push(format!("t=10: var {var:.3e} vs {stationary} (SE {se_var:.1e})"));
    report(6, "OU moments, 1e4 paths", ok && long_ok, &detail.join("; "));
}

#[test]
fn criterion_07_fbm() {
    let n = 100_000;
    let mut detail = Vec::new();

    let g2 = TimeGrid::from_horizon(1.0, 2).unwrap();
    let half = fbm_paths(0.5, &g2, n, SeedSpec::new(71)).unwrap();
    let (var, se) = zero_mean_variance(&half.column(2));
    let var_ok = (var - 1.0).abs() < 3.0 * se;
    detail.push(format!("h=0.5 Var X_1 = {var:.4} vs 1 (SE {se:.4})"));

    let rough = fbm_paths(0.7, &g2, n, SeedSpec::new(72)).unwrap();
    let prods: Vec<f64> = rough.paths().map(|p| p[1] * p[2]).collect();
    let (cov, _, se) = mean_and_se(&prods);
    let cov_ok = (cov - 0.5).abs() < 3.0 * se;
    detail.push(format!("h=0.7 E[X_.5 X_1] = {cov:.4} vs 0.5 (SE {se:.4})"));

    // Sign test on each path's lag-1 increment product sum.
    let g16 = TimeGrid::from_horizon(1.0, 16).unwrap();
    let mut sign_ok = true;
    for (h, expect_positive, seed) in [(0.7, true, 73), (0.3, false, 74)] {
        let paths = fbm_paths(h, &g16, n, SeedSpec::new(seed)).unwrap();
        let positive = paths
            .paths()
            .filter(|p| {
                let d: Vec<f64> = p.windows(2).map(|w| w[1] - w[0]).collect();
                d.windows(2).map(|w| w[0] * w[1]).sum::<f64>() > 0.0
            })
            .count() as f64;
        let z = (positive - n as f64 / 2.0) / (n as f64 / 4.0).sqrt();
        let pass = if expect_positive { z > 2.326 } else { z < -2.326 };
        sign_ok &= pass;
        detail.push(format!("h={h} sign-test z = {z:.1}"));
    }
    report(7, "fBm covariance and increment correlation", var_ok && cov_ok && sign_ok, &detail.join("; "));
}

#[test]
fn criterion_08_regularity_contrast() {
    let n = 25;
    let runs = 3000u64;
    let grid = TimeGrid::from_horizon(1.0, 1).unwrap();
    let zero = ShapeCoefficients::zeros(n);
    let energies = |spectrum: &CovarianceSpectrum| -> Vec<f64> {
        (0..runs)
            .into_par_iter()
            .flat_map_iter(|r| {
                let traj = q_wiener_shape_process(&zero, spectrum, &grid, SeedSpec::new(r), ScaleMode::Sqrt).unwrap();
                let noise = traj.perturbation(1).clone();
                noise
                    .into_channels()
                    .into_iter()
                    .map(|c| c.values().iter().map(|v| v * v).sum::<f64>())
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let identity = make_spectrum(SpectrumKind::Identity, n).unwrap();
    let decaying = make_spectrum(SpectrumKind::InvQuadratic, n).unwrap();
    let expect_identity = 676.0;
    let expect_decaying: f64 = (0..=n).map(|l| (2 * l + 1) as f64 / ((l + 1) as f64).powi(2)).sum();
    let (mi, _, sei) = mean_and_se(&energies(&identity));
    let (md, _, sed) = mean_and_se(&energies(&decaying));
    let pass = (mi - expect_identity).abs() < 3.0 * sei && (md - expect_decaying).abs() < 3.0 * sed && mi > 10.0 * md;
    report(
        8,
        "regularity contrast at t=1, N=25",
        pass,
        &format!(
            "identity E|noise|^2 = {mi:.2} vs 676 (SE {sei:.2}); (l+1)^-2 gives {md:.4} vs {expect_decaying:.4} (SE {sed:.4}); ratio {:.1}",
            mi / md
        ),
    );
}

fn run_cli(args: &[&str], threads: Option<usize>) -> std::process::Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("SHAPE_DIFFUSION_THREADS", t.to_string()),
        None => cmd.env_remove("SHAPE_DIFFUSION_THREADS"),
    };
    cmd.env_remove("RUST_LOG");
    cmd.output().expect("run shape-diffusion")
}

fn write_config(dir: &Path, name: &str, value: serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path
}

fn golden_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/torus_identity_n6.json")
}

const GOLDEN_FRAMES: [usize; 2] = [5, 10];
const GOLDEN_STRIDE: usize = 16;

#[test]
fn criterion_09_mesh_pipeline() {
    let mut detail = Vec::new();

    // Projection round trip on the sphere and icosahedron fixtures.
    let mut worst: f64 = 0.0;
    for mesh in [TriangleMesh::icosphere(4), TriangleMesh::icosahedron()] {
        for center in [None, Some([0.0; 3])] {
            let param = radial_project(&mesh, center).unwrap();
            for (a, b) in param.reconstruct().iter().zip(mesh.vertices()) {
                let err = (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt();
                let scale = (0..3).map(|i| b[i] * b[i]).sum::<f64>().sqrt();
                worst = worst.max(err / scale);
            }
        }
    }
    let round_trip_ok = worst < 1e-12;
    detail.push(format!("projection round-trip {worst:.2e}"));

    // Torus run through the CLI.
    let dir = tempfile::tempdir().unwrap();
    let torus = TriangleMesh::torus(2.0, 0.5, 32, 16);
    save_mesh(&torus, dir.path().join("torus.obj")).unwrap();
    let config = write_config(
        dir.path(),
        "torus.json",
        serde_json::json!({
            "input": {"kind": "mesh", "path": "torus.obj"},
            "spectrum": {"kind": "identity"},
            "band_limit": 6,
            "time": {"T": 1.0, "steps": 10},
            "seed": 49,
            "output": {"format": "obj"}
        }),
    );
    let out = dir.path().join("out");
    let result = run_cli(&["simulate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    let completed = result.status.success();
    let stderr = String::from_utf8_lossy(&result.stderr);
    let warned = stderr.contains("not injective");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap_or_default()).unwrap_or_default();
    let manifest_warned = manifest["warnings"].as_array().is_some_and(|w| !w.is_empty());
    detail.push(format!(
        "torus run exit {:?}, duplicate-angle warning on stderr {warned}, in manifest {manifest_warned}",
        result.status.code()
    ));

    let frame0 = std::fs::read(out.join("frame_0000.obj")).unwrap_or_default();
    let frame0_ok = frame0 == std::fs::read(dir.path().join("torus.obj")).unwrap() && frame0 == write_obj(&torus).into_bytes();
    detail.push(format!("frame 0 byte-identical {frame0_ok}"));

    let connectivity_ok = (0..=10).all(|k| {
        load_mesh(out.join(format!("frame_{k:04}.obj")))
            .map(|m| m.faces() == torus.faces())
            .unwrap_or(false)
    });

    // Golden regression on a subset of vertices.
    let mut observed: BTreeMap<String, Vec<[f64; 3]>> = BTreeMap::new();
    for k in GOLDEN_FRAMES {
        if let Ok(mesh) = load_mesh(out.join(format!("frame_{k:04}.obj"))) {
            observed.insert(
                k.to_string(),
                mesh.vertices().iter().step_by(GOLDEN_STRIDE).copied().collect(),
            );
        }
    }
    if std::env::var_os("SHAPE_DIFFUSION_BLESS").is_some() {
        std::fs::create_dir_all(golden_path().parent().unwrap()).unwrap();
        let doc = serde_json::json!({"seed": 49, "vertex_stride": GOLDEN_STRIDE, "frames": observed});
        std::fs::write(golden_path(), serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
    }
    let golden: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(golden_path()).expect("golden file present")).unwrap();
    let expected: BTreeMap<String, Vec<[f64; 3]>> = serde_json::from_value(golden["frames"].clone()).unwrap();
    let mut golden_dev: f64 = if expected.len() == GOLDEN_FRAMES.len() && expected.keys().eq(observed.keys()) {
        0.0
    } else {
        f64::INFINITY
    };
    for (k, verts) in &expected {
        match observed.get(k) {
            Some(obs) if obs.len() == verts.len() => {
                for (a, b) in obs.iter().zip(verts) {
                    for i in 0..3 {
                        golden_dev = golden_dev.max((a[i] - b[i]).abs());
                    }
                }
            }
            _ => golden_dev = f64::INFINITY,
        }
    }
    let golden_ok = golden_dev < 1e-10;
    detail.push(format!("golden frames max deviation {golden_dev:.2e}"));

    report(
        9,
        "mesh pipeline",
        round_trip_ok && completed && warned && manifest_warned && frame0_ok && connectivity_ok && golden_ok,
        &detail.join("; "),
    );
}

fn tree_digest(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        let bytes = std::fs::read(entry.path()).unwrap();
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        out.insert(entry.file_name().to_string_lossy().into_owned(), hex);
    }
    out
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    save_mesh(&TriangleMesh::torus(2.0, 0.5, 16, 8), dir.path().join("torus.obj")).unwrap();
    let configs = [
        serde_json::json!({
            "input": {"kind": "sphere"},
            "spectrum": {"kind": "inv_quadratic"},
            "time": {"T": 1.0, "steps": 8},
            "seed": 1,
            "output": {"resolution": 2}
        }),
        serde_json::json!({
            "input": {"kind": "sphere"},
            "band_limit": 10,
            "spectrum": {"kind": "bessel", "nu": 1.0},
            "process": {"model": "ito", "drift": {"kind": "ou", "rate": 1.0, "mean": 0.0}, "diffusion": {"kind": "constant", "sigma": 0.1}},
            "time": {"T": 2.0, "steps": 20},
            "seed": 2,
            "output": {"format": "json"}
        }),
        serde_json::json!({
            "input": {"kind": "mesh", "path": "torus.obj"},
            "spectrum": {"kind": "identity"},
            "process": {"model": "fractional", "hurst": 0.7},
            "time": {"T": 1.0, "steps": 16},
            "seed": 3
        }),
    ];
    let mut all_equal = true;
    let mut files = 0;
    for (i, cfg) in configs.into_iter().enumerate() {
        let path = write_config(dir.path(), &format!("cfg{i}.json"), cfg);
        let mut digests = Vec::new();
        for (run, threads) in [(0, Some(1)), (1, Some(4))] {
            let out = dir.path().join(format!("out{i}_{run}"));
            let res = run_cli(
                &["simulate", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()],
                threads,
            );
            assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
            digests.push(tree_digest(&out));
        }
        files += digests[0].len();
        all_equal &= !digests[0].is_empty() && digests[0] == digests[1];
    }
    report(
        10,
        "determinism of simulate output trees",
        all_equal,
        &format!("3 configs, {files} files, SHA-256 identical across reruns with 1 and 4 threads: {all_equal}"),
    );
}
