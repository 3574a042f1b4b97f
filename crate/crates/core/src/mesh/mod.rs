//! Triangle meshes, radial spherical parameterisation, and transfer of
//! spectral noise back onto mesh vertices.

mod io;
mod projection;

pub use io::{load_mesh, parse_obj, parse_ply, save_mesh, write_obj};
pub use projection::{decompose_mesh, radial_project, transfer_process, SphericalParameterization};

use std::collections::HashMap;

pub type Point3 = [f64; 3];

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: face has {count} vertices, only triangles are supported")]
    NonTriangular { line: usize, count: usize },
    #[error("face {face}: vertex index {index} out of range (mesh has {vertex_count} vertices)")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex")]
    DegenerateFace { face: usize },
    #[error("vertex {vertex} has non-finite coordinates")]
    NonFinite { vertex: usize },
    #[error("mesh has no vertices")]
    Empty,
    #[error("vertex {vertex} coincides with the projection center")]
    VertexAtCenter { vertex: usize },
    #[error("{vertices} vertices cannot determine {unknowns} coefficients per channel")]
    Underdetermined { vertices: usize, unknowns: usize },
    #[error("unsupported mesh format: {0}")]
    Unsupported(String),
    #[error("parameterisation has {param} vertices, mesh has {mesh}")]
    VertexCountMismatch { param: usize, mesh: usize },
    #[error(transparent)]
    Synthesis(#[from] crate::diffusion::DiffusionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Vertices plus triangle connectivity (0-based indices).
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if let Some(vertex) = vertices.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(MeshError::NonFinite { vertex });
        }
        for (face, f) in faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i >= vertices.len()) {
                return Err(MeshError::IndexOutOfRange {
                    face,
                    index,
                    vertex_count: vertices.len(),
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace { face });
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn centroid(&self) -> Point3 {
        let n = self.vertices.len() as f64;
        let mut c = [0.0; 3];
        for v in &self.vertices {
            for i in 0..3 {
                c[i] += v[i];
            }
        }
        c.map(|s| s / n)
    }

    /// Same connectivity, new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<Point3>) -> Result<Self, MeshError> {
        assert_eq!(vertices.len(), self.vertices.len());
        Self::new(vertices, self.faces.clone())
    }

    pub fn translated(&self, offset: Point3) -> Self {
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v[0] + offset[0], v[1] + offset[1], v[2] + offset[2]])
                .collect(),
            faces: self.faces.clone(),
        }
    }

    /// Regular icosahedron inscribed in the unit sphere.
    pub fn icosahedron() -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let raw = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let vertices = raw.iter().map(|v| normalize(*v)).collect();
        let faces = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        Self { vertices, faces }
    }

    /// Unit sphere from `subdivisions` rounds of midpoint refinement of the
    /// icosahedron.
    pub fn icosphere(subdivisions: usize) -> Self {
        let mut mesh = Self::icosahedron();
        for _ in 0..subdivisions {
            let mut vertices = mesh.vertices.clone();
            let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point3>| -> usize {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    let (p, q) = (vertices[a], vertices[b]);
                    vertices.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                    vertices.len() - 1
                })
            };
            let mut faces = Vec::with_capacity(mesh.faces.len() * 4);
            for &[a, b, c] in &mesh.faces {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                faces.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            mesh = Self { vertices, faces };
        }
        mesh
    }

    /// Torus around the z axis with tube centre radius `major` and tube
    /// radius `minor`, sampled on a `segments × rings` grid.
    pub fn torus(major: f64, minor: f64, segments: usize, rings: usize) -> Self {
        use std::f64::consts::TAU;
        let mut vertices = Vec::with_capacity(segments * rings);
        for i in 0..segments {
            let u = TAU * i as f64 / segments as f64;
            for j in 0..rings {
                let v = TAU * j as f64 / rings as f64;
                let r = major + minor * v.cos();
                vertices.push([r * u.cos(), r * u.sin(), minor * v.sin()]);
            }
        }
        let idx = |i: usize, j: usize| (i % segments) * rings + (j % rings);
        let mut faces = Vec::with_capacity(2 * segments * rings);
        for i in 0..segments {
            for j in 0..rings {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
        Self { vertices, faces }
    }
}

fn normalize(v: Point3) -> Point3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Summary used by the `info` command.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MeshStats {
    pub vertex_count: usize,
    pub face_count: usize,
    pub bbox_min: Point3,
    pub bbox_max: Point3,
    /// Mean length over unique undirected edges; 0 for a mesh with no faces.
    pub mean_edge_length: f64,
}

pub fn mesh_stats(mesh: &TriangleMesh) -> Result<MeshStats, MeshError> {
    if mesh.vertices.is_empty() {
        return Err(MeshError::Empty);
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in &mesh.vertices {
        for i in 0..3 {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let mut edges: Vec<(usize, usize)> = mesh
        .faces
        .iter()
        .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let mean_edge_length = if edges.is_empty() {
        0.0
    } else {
        edges
            .iter()
            .map(|&(a, b)| {
                let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
            })
            .sum::<f64>()
            / edges.len() as f64
    };
    Ok(MeshStats {
        vertex_count: mesh.vertices.len(),
        face_count: mesh.faces.len(),
        bbox_min: lo,
        bbox_max: hi,
        mean_edge_length,
    })
}
