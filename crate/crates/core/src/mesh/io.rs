//! OBJ (read/write) and ASCII PLY (read) triangle meshes.
//!
//! Coordinates are written with 17 significant digits, so a save/load cycle
//! reproduces every `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{MeshError, Point3, TriangleMesh};

pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh, MeshError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let is_ply = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ply"))
        || text.lines().next().is_some_and(|l| l.trim() == "ply");
    if is_ply {
        parse_ply(&text)
    } else {
        parse_obj(&text)
    }
}

pub fn save_mesh(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    fs::write(path, write_obj(mesh))?;
    Ok(())
}

/// OBJ text: `v x y z` records then `f i j k` records (1-based).
pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::with_capacity(mesh.vertex_count() * 80 + mesh.face_count() * 24);
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_coord(token: Option<&str>, line: usize) -> Result<f64, MeshError> {
    let token = token.ok_or_else(|| parse_err(line, "vertex needs three coordinates"))?;
    token
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid coordinate {token:?}")))
}

/// Parses `v` and `f` records; texture/normal records, groups, and
/// materials are ignored. Face entries may use the `i/j/k` forms and
/// negative (relative) indices.
pub fn parse_obj(text: &str) -> Result<TriangleMesh, MeshError> {
    let mut vertices: Vec<Point3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut face_lines: Vec<usize> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let v = [
                    parse_coord(tokens.next(), line)?,
                    parse_coord(tokens.next(), line)?,
                    parse_coord(tokens.next(), line)?,
                ];
                vertices.push(v);
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(MeshError::NonTriangular {
                        line,
                        count: refs.len(),
                    });
                }
                let mut face = [0usize; 3];
                for (slot, r) in face.iter_mut().zip(&refs) {
                    let idx_text = r.split('/').next().unwrap_or("");
                    let idx: i64 = idx_text
                        .parse()
                        .map_err(|_| parse_err(line, format!("invalid vertex reference {r:?}")))?;
                    *slot = match idx {
                        0 => return Err(parse_err(line, "vertex index 0 is invalid (OBJ indices are 1-based)")),
                        i if i > 0 => (i - 1) as usize,
                        i => {
                            let back = i.unsigned_abs() as usize;
                            if back > vertices.len() {
                                return Err(parse_err(line, format!("relative index {i} precedes the first vertex")));
                            }
                            vertices.len() - back
                        }
                    };
                }
                faces.push(face);
                face_lines.push(line);
            }
            _ => {}
        }
    }

    for (f, face) in faces.iter().enumerate() {
        if let Some(&index) = face.iter().find(|&&i| i >= vertices.len()) {
            return Err(parse_err(
                face_lines[f],
                format!("vertex index {} out of range ({} vertices)", index + 1, vertices.len()),
            ));
        }
    }
    TriangleMesh::new(vertices, faces)
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<PlyProperty>,
}

enum PlyProperty {
    Scalar(String),
    List(String),
}

/// ASCII PLY with a `vertex` element (`x`, `y`, `z` properties) and an
/// optional `face` element with a vertex-index list.
pub fn parse_ply(text: &str) -> Result<TriangleMesh, MeshError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(1, "missing `ply` magic")),
    }

    let mut elements: Vec<PlyElement> = Vec::new();
    let mut header_done = false;
    for (line, l) in lines.by_ref() {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, ..] => return Err(MeshError::Unsupported(format!("PLY format {other}"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| parse_err(line, format!("invalid element count {count:?}")))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", _, _, name] => elements
                .last_mut()
                .ok_or_else(|| parse_err(line, "property before element"))?
                .properties
                .push(PlyProperty::List(name.to_string())),
            ["property", _, name] => elements
                .last_mut()
                .ok_or_else(|| parse_err(line, "property before element"))?
                .properties
                .push(PlyProperty::Scalar(name.to_string())),
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => return Err(parse_err(line, format!("unrecognised header line {l:?}"))),
        }
    }
    if !header_done {
        return Err(parse_err(0, "missing end_header"));
    }

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut body = lines.filter(|(_, l)| !l.is_empty());
    for element in &elements {
        for _ in 0..element.count {
            let (line, l) = body
                .next()
                .ok_or_else(|| parse_err(0, format!("unexpected end of file in element {}", element.name)))?;
            let values: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("invalid number {t:?}"))))
                .collect::<Result<_, _>>()?;
            let mut cursor = 0;
            let mut xyz = [None; 3];
            let mut list: Option<Vec<f64>> = None;
            for prop in &element.properties {
                match prop {
                    PlyProperty::Scalar(name) => {
                        let v = *values.get(cursor).ok_or_else(|| parse_err(line, "too few values"))?;
                        cursor += 1;
                        match name.as_str() {
                            "x" => xyz[0] = Some(v),
                            "y" => xyz[1] = Some(v),
                            "z" => xyz[2] = Some(v),
                            _ => {}
                        }
                    }
                    PlyProperty::List(name) => {
                        let n = *values.get(cursor).ok_or_else(|| parse_err(line, "too few values"))? as usize;
                        let items = values
                            .get(cursor + 1..cursor + 1 + n)
                            .ok_or_else(|| parse_err(line, "list shorter than its count"))?;
                        cursor += 1 + n;
                        if name == "vertex_indices" || name == "vertex_index" {
                            list = Some(items.to_vec());
                        }
                    }
                }
            }
            match element.name.as_str() {
                "vertex" => {
                    let [x, y, z] = xyz;
                    match (x, y, z) {
                        (Some(x), Some(y), Some(z)) => vertices.push([x, y, z]),
                        _ => return Err(parse_err(line, "vertex element lacks x, y, z")),
                    }
                }
                "face" => {
                    let idx = list.ok_or_else(|| parse_err(line, "face element lacks vertex_indices"))?;
                    if idx.len() != 3 {
                        return Err(MeshError::NonTriangular { line, count: idx.len() });
                    }
                    let mut face = [0usize; 3];
                    for (slot, v) in face.iter_mut().zip(&idx) {
                        if *v < 0.0 || v.fract() != 0.0 {
                            return Err(parse_err(line, format!("invalid vertex index {v}")));
                        }
                        *slot = *v as usize;
                    }
                    faces.push(face);
                }
                _ => {}
            }
        }
    }
    TriangleMesh::new(vertices, faces)
}
