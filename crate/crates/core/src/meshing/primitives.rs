//! Mesh construction helpers: analytic solids for fixtures and finger
//! geometry, plus a polycube boundary extractor.

use super::SurfaceMesh;
use crate::math::{Real, Vec3};
use std::collections::HashMap;

/// Axis-aligned box centered at `center` with full extents `size`.
pub fn box_mesh(center: Vec3, size: Vec3) -> SurfaceMesh {
    let h = size * 0.5;
    let corner = |i: usize| {
        Vec3::new(
            center.x + if i & 1 == 0 { -h.x } else { h.x },
            center.y + if i & 2 == 0 { -h.y } else { h.y },
            center.z + if i & 4 == 0 { -h.z } else { h.z },
        )
    };
    let vertices: Vec<Vec3> = (0..8).map(corner).collect();
    // Two triangles per face, outward-oriented.
    let faces: Vec<[u32; 3]> = vec![
        [0, 4, 6],
        [0, 6, 2], // -x
        [1, 3, 7],
        [1, 7, 5], // +x
        [0, 1, 5],
        [0, 5, 4], // -y
        [2, 6, 7],
        [2, 7, 3], // +y
        [0, 2, 3],
        [0, 3, 1], // -z
        [4, 5, 7],
        [4, 7, 6], // +z
    ];
    SurfaceMesh::new(vertices, faces)
}

/// Icosphere of radius `r` about `center`; `subdivisions` levels of 1->4
/// face splits with re-projection.
pub fn icosphere(center: Vec3, r: Real, subdivisions: u32) -> SurfaceMesh {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices = vec![
        Vec3::new(-1.0, phi, 0.0),
        Vec3::new(1.0, phi, 0.0),
        Vec3::new(-1.0, -phi, 0.0),
        Vec3::new(1.0, -phi, 0.0),
        Vec3::new(0.0, -1.0, phi),
        Vec3::new(0.0, 1.0, phi),
        Vec3::new(0.0, -1.0, -phi),
        Vec3::new(0.0, 1.0, -phi),
        Vec3::new(phi, 0.0, -1.0),
        Vec3::new(phi, 0.0, 1.0),
        Vec3::new(-phi, 0.0, -1.0),
        Vec3::new(-phi, 0.0, 1.0),
    ];
    for v in &mut vertices {
        *v = v.normalize();
    }
    let mut faces: Vec<[u32; 3]> = vec![
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

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let mut mid = |i: u32, j: u32, vertices: &mut Vec<Vec3>| {
                let key = (i.min(j), i.max(j));
                *midpoint.entry(key).or_insert_with(|| {
                    let m = ((vertices[i as usize] + vertices[j as usize]) * 0.5).normalize();
                    vertices.push(m);
                    (vertices.len() - 1) as u32
                })
            };
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }

    for v in &mut vertices {
        *v = center + *v * r;
    }
    SurfaceMesh::new(vertices, faces)
}

/// Parametric torus about a vertical axis through `center`: major radius
/// `major` in the xy-plane, tube radius `minor`. Grid resolution
/// `nu` (major) x `nv` (tube). V = nu*nv, E = 3V, F = 2V, so chi = 0.
pub fn torus_mesh(center: Vec3, major: Real, minor: Real, nu: usize, nv: usize) -> SurfaceMesh {
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * std::f64::consts::PI * i as Real / nu as Real;
        for j in 0..nv {
            let v = 2.0 * std::f64::consts::PI * j as Real / nv as Real;
            let ring = major + minor * v.cos();
            vertices.push(
                center + Vec3::new(ring * u.cos(), ring * u.sin(), minor * v.sin()),
            );
        }
    }
    let mut faces = Vec::with_capacity(2 * nu * nv);
    let idx = |i: usize, j: usize| (i % nu * nv + j % nv) as u32;
    for i in 0..nu {
        for j in 0..nv {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    SurfaceMesh::new(vertices, faces)
}

/// Boundary surface of a set of unit voxels, scaled by `scale` and offset by
/// `origin`. Quads between solid and empty cells, split into triangles with
/// outward orientation. The input must be face-connected without
/// edge-only or corner-only contacts for the result to be manifold.
pub fn polycube_surface(cells: &[(i32, i32, i32)], origin: Vec3, scale: Real) -> SurfaceMesh {
    use std::collections::HashSet;
    let solid: HashSet<(i32, i32, i32)> = cells.iter().copied().collect();
    let mut vert_ids: HashMap<(i32, i32, i32), u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();

    let mut vid = |corner: (i32, i32, i32), vertices: &mut Vec<Vec3>| {
        *vert_ids.entry(corner).or_insert_with(|| {
            vertices.push(
                origin
                    + Vec3::new(corner.0 as Real, corner.1 as Real, corner.2 as Real) * scale,
            );
            (vertices.len() - 1) as u32
        })
    };

    // For each face direction: quad corner offsets, wound so the normal
    // points toward the empty neighbor.
    const DIRS: [((i32, i32, i32), [(i32, i32, i32); 4]); 6] = [
        ((1, 0, 0), [(1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)]),
        ((-1, 0, 0), [(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)]),
        ((0, 1, 0), [(0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)]),
        ((0, -1, 0), [(0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)]),
        ((0, 0, 1), [(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]),
        ((0, 0, -1), [(0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)]),
    ];

    for &(x, y, z) in cells {
        for (dir, corners) in DIRS {
            if solid.contains(&(x + dir.0, y + dir.1, z + dir.2)) {
                continue;
            }
            let q: Vec<u32> = corners
                .iter()
                .map(|c| vid((x + c.0, y + c.1, z + c.2), &mut vertices))
                .collect();
            faces.push([q[0], q[1], q[2]]);
            faces.push([q[0], q[2], q[3]]);
        }
    }
    SurfaceMesh::new(vertices, faces)
}

/// Extruded theta-shape polycube: a plate with two through holes, genus 2.
pub fn genus2_fixture(origin: Vec3, scale: Real) -> SurfaceMesh {
    let mut cells = Vec::new();
    // 5 wide (x), 7 tall (y), 1 deep (z): solid border plus middle bar.
    for x in 0..5 {
        for y in 0..7 {
            if x == 0 || x == 4 || y == 0 || y == 3 || y == 6 {
                cells.push((x, y, 0));
            }
        }
    }
    polycube_surface(&cells, origin, scale)
}
