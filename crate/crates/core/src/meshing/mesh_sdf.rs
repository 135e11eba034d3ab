//! Signed distance to a closed triangle mesh.
//!
//! The sign comes from angle-weighted pseudo-normals (Baerentzen & Aanaes):
//! the dot product of `query - closest_point` with the pseudo-normal of the
//! closest feature (face, edge, or vertex) is positive outside and negative
//! inside, for any watertight mesh with consistent outward winding.

use super::bvh::TriangleBvh;
use super::{MeshError, SurfaceMesh};
use crate::math::{Real, Vec3};
use std::collections::HashMap;

pub struct MeshSdf {
    bvh: TriangleBvh,
    mesh: SurfaceMesh,
    face_normals: Vec<Vec3>,
    vertex_normals: Vec<Vec3>,
    edge_normals: HashMap<(u32, u32), Vec3>,
}

fn edge_key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MeshSdf {
    /// Builds the SDF; fails if the mesh is not a closed 2-manifold.
    pub fn build(mesh: SurfaceMesh) -> Result<Self, MeshError> {
        mesh.validate_indices()?;
        if mesh.is_empty() {
            return Err(MeshError::Empty);
        }
        let violations = super::euler::manifold_violations(&mesh);
        if !violations.is_empty() {
            return Err(MeshError::NonManifold(violations));
        }

        let mut face_normals = vec![Vec3::zeros(); mesh.faces.len()];
        let mut vertex_normals = vec![Vec3::zeros(); mesh.vertices.len()];
        let mut edge_normals: HashMap<(u32, u32), Vec3> = HashMap::new();
        for (fi, f) in mesh.faces.iter().enumerate() {
            let [a, b, c] = [
                mesh.vertices[f[0] as usize],
                mesh.vertices[f[1] as usize],
                mesh.vertices[f[2] as usize],
            ];
            let n = (b - a).cross(&(c - a));
            let n_unit = if n.norm() > 1e-30 {
                n.normalize()
            } else {
                Vec3::zeros()
            };
            face_normals[fi] = n_unit;
            // Edge pseudo-normal: sum of the two adjacent face normals.
            for k in 0..3 {
                *edge_normals
                    .entry(edge_key(f[k], f[(k + 1) % 3]))
                    .or_insert_with(Vec3::zeros) += n_unit;
            }
            // Vertex pseudo-normal: incident angle-weighted face normals.
            let verts = [a, b, c];
            for k in 0..3 {
                let e1 = verts[(k + 1) % 3] - verts[k];
                let e2 = verts[(k + 2) % 3] - verts[k];
                let denom = e1.norm() * e2.norm();
                if denom > 1e-30 {
                    let angle = (e1.dot(&e2) / denom).clamp(-1.0, 1.0).acos();
                    vertex_normals[f[k] as usize] += n_unit * angle;
                }
            }
        }

        let bvh = TriangleBvh::build(&mesh);
        Ok(MeshSdf {
            bvh,
            mesh,
            face_normals,
            vertex_normals,
            edge_normals,
        })
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        &self.mesh
    }

    pub fn bvh(&self) -> &TriangleBvh {
        &self.bvh
    }

    /// Signed distance (negative inside) and the closest surface point.
    pub fn signed_distance_point(&self, p: &Vec3) -> (Real, Vec3) {
        let hit = self.bvh.nearest(p).expect("mesh is non-empty");
        let f = self.mesh.faces[hit.triangle];
        let bary = hit.barycentric;
        // Pick the pseudo-normal of the closest feature. Barycentric
        // coordinates near 0 mean the foot lies on the opposite edge/vertex.
        let eps = 1e-9;
        let on = [bary[0] > eps, bary[1] > eps, bary[2] > eps];
        let normal = match on.iter().filter(|&&b| b).count() {
            3 => self.face_normals[hit.triangle],
            2 => {
                let k = (0..3).find(|&k| !on[k]).unwrap();
                self.edge_normals[&edge_key(f[(k + 1) % 3], f[(k + 2) % 3])]
            }
            _ => {
                let k = (0..3).find(|&k| on[k]).unwrap_or(0);
                self.vertex_normals[f[k] as usize]
            }
        };
        let diff = p - hit.point;
        let sign = if diff.dot(&normal) >= 0.0 { 1.0 } else { -1.0 };
        (sign * hit.distance, hit.point)
    }

    /// Signed distance (negative inside).
    pub fn signed_distance(&self, p: &Vec3) -> Real {
        self.signed_distance_point(p).0
    }

    /// Outward surface normal at the closest feature to `p`.
    pub fn gradient(&self, p: &Vec3) -> Vec3 {
        let (d, q) = self.signed_distance_point(p);
        let diff = p - q;
        if diff.norm() > 1e-12 {
            diff / diff.norm() * d.signum()
        } else {
            // On the surface: fall back to the closest face normal.
            let hit = self.bvh.nearest(p).expect("mesh is non-empty");
            self.face_normals[hit.triangle]
        }
    }
}
