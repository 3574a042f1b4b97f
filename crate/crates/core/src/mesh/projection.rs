use std::collections::HashMap;
use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{MeshError, Point3, TriangleMesh};
use crate::diffusion::{synthesize_shape, ShapeCoefficients, ShapeTrajectory};
use crate::sh::{HarmonicCoefficients, SynthesisMatrix};

/// Two vertices whose angles agree to this tolerance are reported as
/// sharing a direction.
const ANGLE_TOLERANCE: f64 = 1e-9;

/// Per-vertex spherical coordinates about a center.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalParameterization {
    pub center: Point3,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub radii: Vec<f64>,
    /// Vertex pairs `(i, j)`, `i < j`, whose directions coincide.
    pub duplicate_pairs: Vec<(usize, usize)>,
}

impl SphericalParameterization {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn angles(&self) -> Vec<(f64, f64)> {
        self.thetas.iter().copied().zip(self.phis.iter().copied()).collect()
    }

    /// `center + r·dir(θ, φ)` for every vertex.
    pub fn reconstruct(&self) -> Vec<Point3> {
        (0..self.len())
            .map(|i| {
                let (st, ct) = self.thetas[i].sin_cos();
                let (sp, cp) = self.phis[i].sin_cos();
                let r = self.radii[i];
                [
                    self.center[0] + r * st * cp,
                    self.center[1] + r * st * sp,
                    self.center[2] + r * ct,
                ]
            })
            .collect()
    }
}

/// Projects vertices radially onto the unit sphere about `center`
/// (the vertex centroid when `None`).
///
/// Non-star-shaped meshes, such as a torus, map several vertices to the same
/// direction. That is allowed: the pairs are recorded and a warning is
/// logged.
pub fn radial_project(mesh: &TriangleMesh, center: Option<Point3>) -> Result<SphericalParameterization, MeshError> {
    if mesh.vertex_count() == 0 {
        return Err(MeshError::Empty);
    }
    let c = center.unwrap_or_else(|| mesh.centroid());
    let n = mesh.vertex_count();
    let (mut thetas, mut phis, mut radii) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, v) in mesh.vertices().iter().enumerate() {
        let d = [v[0] - c[0], v[1] - c[1], v[2] - c[2]];
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if r == 0.0 {
            return Err(MeshError::VertexAtCenter { vertex: i });
        }
        let theta = (d[2] / r).clamp(-1.0, 1.0).acos();
        let mut phi = d[1].atan2(d[0]);
        if phi < 0.0 {
            phi += TAU;
        }
        if phi >= TAU {
            phi = 0.0;
        }
        thetas.push(theta);
        phis.push(phi);
        radii.push(r);
    }
    let duplicate_pairs = find_duplicate_directions(&thetas, &phis);
    if !duplicate_pairs.is_empty() {
        let (i, j) = duplicate_pairs[0];
        log::warn!(
            "radial projection is not injective: {} vertex pairs share a direction (first: {i} and {j})",
            duplicate_pairs.len()
        );
    }
    Ok(SphericalParameterization {
        center: c,
        thetas,
        phis,
        radii,
        duplicate_pairs,
    })
}

/// Bucket search on a `ANGLE_TOLERANCE`-sized (θ, φ) lattice; azimuth
/// wraps around.
fn find_duplicate_directions(thetas: &[f64], phis: &[f64]) -> Vec<(usize, usize)> {
    let cell = |x: f64| (x / ANGLE_TOLERANCE).floor() as i64;
    let phi_cells = (TAU / ANGLE_TOLERANCE).ceil() as i64;
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut pairs = Vec::new();
    for i in 0..thetas.len() {
        let (ct, cp) = (cell(thetas[i]), cell(phis[i]));
        for dt in -1..=1 {
            for dp in -1..=1 {
                let key = (ct + dt, (cp + dp).rem_euclid(phi_cells));
                let Some(others) = buckets.get(&key) else { continue };
                for &j in others {
                    let dphi = (phis[i] - phis[j]).abs();
                    let dphi = dphi.min(TAU - dphi);
                    if (thetas[i] - thetas[j]).abs() <= ANGLE_TOLERANCE && dphi <= ANGLE_TOLERANCE {
                        pairs.push((j, i));
                    }
                }
            }
        }
        buckets.entry((ct, cp.rem_euclid(phi_cells))).or_default().push(i);
    }
    pairs.sort_unstable();
    pairs
}

/// Moves the mesh along a shape trajectory: frame `k` places vertex `v` at
/// `v + noise_k(θ_v, φ_v)`, where `noise_k` is the trajectory's
/// perturbation at frame `k`. The trajectory's source shape is ignored; the
/// mesh itself plays that role. Frame 0 is the input mesh unchanged.
pub fn transfer_process(
    mesh: &TriangleMesh,
    param: &SphericalParameterization,
    traj: &ShapeTrajectory,
) -> Result<Vec<TriangleMesh>, MeshError> {
    if param.len() != mesh.vertex_count() {
        return Err(MeshError::VertexCountMismatch {
            param: param.len(),
            mesh: mesh.vertex_count(),
        });
    }
    let synth = SynthesisMatrix::new(traj.source().band_limit(), &param.angles());
    (0..traj.frame_count())
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                return Ok(mesh.clone());
            }
            let noise = synthesize_shape(&synth, traj.perturbation(k))?;
            let moved = mesh
                .vertices()
                .iter()
                .zip(&noise)
                .map(|(v, d)| [v[0] + d[0], v[1] + d[1], v[2] + d[2]])
                .collect();
            mesh.with_vertices(moved)
        })
        .collect()
}

/// Least-squares harmonic fit of the vertex coordinates as functions of
/// their projected angles.
pub fn decompose_mesh(
    mesh: &TriangleMesh,
    param: &SphericalParameterization,
    band_limit: usize,
) -> Result<ShapeCoefficients, MeshError> {
    let n = mesh.vertex_count();
    let k = (band_limit + 1) * (band_limit + 1);
    if param.len() != n {
        return Err(MeshError::VertexCountMismatch { param: param.len(), mesh: n });
    }
    if n < k {
        return Err(MeshError::Underdetermined { vertices: n, unknowns: k });
    }
    let synth = SynthesisMatrix::new(band_limit, &param.angles());
    let a = DMatrix::from_fn(n, k, |p, j| synth.row(p)[j]);
    let b = DMatrix::from_fn(n, 3, |p, c| mesh.vertices()[p][c]);
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-12)
        .map_err(|e| MeshError::Unsupported(format!("least-squares solve failed: {e}")))?;
    let channel = |c: usize| {
        HarmonicCoefficients::from_values(band_limit, x.column(c).iter().copied().collect())
            .map_err(|e| MeshError::Synthesis(e.into()))
    };
    let shape = ShapeCoefficients::new([channel(0)?, channel(1)?, channel(2)?]).map_err(|e| MeshError::Synthesis(e.into()))?;
    Ok(shape)
}
