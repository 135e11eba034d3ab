//! Surface extraction and mesh topology: particle-based signed distance
//! fields, dual contouring, and Euler-characteristic genus.

mod bvh;
mod dual_contour;
mod euler;
mod field;
mod mesh_sdf;
mod obj;
pub mod primitives;

pub use bvh::TriangleBvh;
pub use dual_contour::dual_contour;
pub use euler::{euler_characteristic, shell_face_components, subdivide4, EulerReport};
pub use field::{sdf_from_particles, ScalarField};
pub use mesh_sdf::MeshSdf;
pub use obj::{read_obj, write_obj};

use crate::math::{Aabb, Real, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh is not watertight; signed distance would be ambiguous ({0})")]
    NotWatertight(String),
    #[error("mesh is not 2-manifold; offending edges: {0:?}")]
    NonManifold(Vec<(u32, u32)>),
    #[error("mesh has no faces")]
    Empty,
    #[error("face index {index} out of range for {vertex_count} vertices")]
    FaceIndexOutOfRange { index: u32, vertex_count: usize },
    #[error("OBJ parse error at line {line}: {message}")]
    ObjParse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Indexed triangle mesh.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    /// Component id carried through extraction, when meaningful.
    pub component_id: Option<u32>,
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Self {
        SurfaceMesh {
            vertices,
            faces,
            component_id: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn validate_indices(&self) -> Result<(), MeshError> {
        let n = self.vertices.len();
        for f in &self.faces {
            for &i in f {
                if i as usize >= n {
                    return Err(MeshError::FaceIndexOutOfRange {
                        index: i,
                        vertex_count: n,
                    });
                }
            }
        }
        Ok(())
    }

    /// Every undirected edge shared by exactly two faces, with opposite
    /// orientations. This is the precondition for signed distance and for
    /// the Euler characteristic.
    pub fn is_closed_manifold(&self) -> bool {
        euler::manifold_violations(self).is_empty() && !self.faces.is_empty()
    }

    pub fn area(&self) -> Real {
        self.faces
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let [a, b, c] = self.triangle(i);
                (b - a).cross(&(c - a)).norm() * 0.5
            })
            .sum()
    }

    /// Signed volume via the divergence theorem; positive for outward-oriented
    /// closed meshes.
    pub fn signed_volume(&self) -> Real {
        self.faces
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let [a, b, c] = self.triangle(i);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }
}
