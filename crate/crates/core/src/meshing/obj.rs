//! ASCII OBJ import/export for triangle meshes.
//!
//! Supports `v x y z` and `f` lines (triangles or fans of general polygons),
//! ignoring normals/texcoords (`v/vt/vn` face syntax is accepted). Indices may
//! be 1-based or negative (relative), per the OBJ convention.

use super::{MeshError, SurfaceMesh};
use crate::math::{Real, Vec3};
use std::io::{BufRead, Write};
use std::path::Path;

pub fn read_obj(path: &Path) -> Result<SurfaceMesh, MeshError> {
    let file = std::fs::File::open(path)?;
    parse_obj(std::io::BufReader::new(file))
}

pub fn parse_obj<R: BufRead>(reader: R) -> Result<SurfaceMesh, MeshError> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = line_no + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut it = body.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut coord = |name: &str| -> Result<Real, MeshError> {
                    it.next()
                        .ok_or_else(|| MeshError::ObjParse {
                            line: line_no,
                            message: format!("vertex missing {name} coordinate"),
                        })?
                        .parse::<Real>()
                        .map_err(|e| MeshError::ObjParse {
                            line: line_no,
                            message: format!("bad {name} coordinate: {e}"),
                        })
                };
                let x = coord("x")?;
                let y = coord("y")?;
                let z = coord("z")?;
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for token in it {
                    let first = token.split('/').next().unwrap_or("");
                    let raw: i64 = first.parse().map_err(|e| MeshError::ObjParse {
                        line: line_no,
                        message: format!("bad face index {token:?}: {e}"),
                    })?;
                    let resolved = if raw > 0 {
                        raw - 1
                    } else if raw < 0 {
                        vertices.len() as i64 + raw
                    } else {
                        return Err(MeshError::ObjParse {
                            line: line_no,
                            message: "face index 0 is not valid".into(),
                        });
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(MeshError::ObjParse {
                            line: line_no,
                            message: format!("face index {raw} out of range"),
                        });
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(MeshError::ObjParse {
                        line: line_no,
                        message: format!("face with {} vertices", idx.len()),
                    });
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            // Groups, materials, normals etc. are ignored.
            _ => {}
        }
    }
    if vertices.is_empty() {
        return Err(MeshError::Empty);
    }
    Ok(SurfaceMesh::new(vertices, faces))
}

pub fn write_obj(mesh: &SurfaceMesh, path: &Path) -> Result<(), MeshError> {
    mesh.validate_indices()?;
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_obj_to(mesh, &mut w)
}

pub fn write_obj_to<W: Write>(mesh: &SurfaceMesh, w: &mut W) -> Result<(), MeshError> {
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}
