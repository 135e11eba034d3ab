//! Dual contouring of a scalar field with QEF vertex placement.

use super::field::ScalarField;
use super::SurfaceMesh;
use crate::math::{svd3, Mat3, Real, Vec3};
use rayon::prelude::*;

const QEF_DAMPING: Real = 1e-3;
const QEF_MAX_CONDITION: Real = 1e6;

/// Cell-edge crossing with an interpolated surface normal.
struct Hermite {
    point: Vec3,
    normal: Vec3,
}

/// Extracts the iso-surface as a triangle mesh. One vertex is placed per
/// sign-changing cell by minimizing the quadratic error to the Hermite
/// samples on that cell's edges; a quad (two triangles) is emitted across
/// every sign-changing lattice edge. All-positive or all-negative fields
/// yield an empty mesh.
pub fn dual_contour(field: &ScalarField, iso: Real) -> SurfaceMesh {
    let [nx, ny, nz] = field.dims;
    if nx < 2 || ny < 2 || nz < 2 {
        return SurfaceMesh::new(Vec::new(), Vec::new());
    }
    let (cx, cy, cz) = (nx - 1, ny - 1, nz - 1);
    let cell_idx = |ix: usize, iy: usize, iz: usize| (ix * cy + iy) * cz + iz;

    // Pass 1: find sign-changing cells.
    let mut cell_vertex: Vec<i64> = vec![-1; cx * cy * cz];
    let mut active: Vec<(usize, usize, usize)> = Vec::new();
    for ix in 0..cx {
        for iy in 0..cy {
            for iz in 0..cz {
                let mut pos = false;
                let mut neg = false;
                for (dx, dy, dz) in CORNERS {
                    let v = field.value(ix + dx, iy + dy, iz + dz) - iso;
                    if v >= 0.0 {
                        pos = true;
                    } else {
                        neg = true;
                    }
                }
                if pos && neg {
                    cell_vertex[cell_idx(ix, iy, iz)] = active.len() as i64;
                    active.push((ix, iy, iz));
                }
            }
        }
    }
    if active.is_empty() {
        return SurfaceMesh::new(Vec::new(), Vec::new());
    }

    // Pass 2: place one vertex per active cell (parallel, order-stable).
    let vertices: Vec<Vec3> = active
        .par_iter()
        .map(|&(ix, iy, iz)| place_vertex(field, iso, ix, iy, iz))
        .collect();

    // Pass 3: stitch quads across sign-changing lattice edges (serial).
    let mut faces: Vec<[u32; 3]> = Vec::new();
    for axis in 0..3usize {
        let u = (axis + 1) % 3;
        let v = (axis + 2) % 3;
        // Interior edges only: all four adjacent cells must exist.
        let mut hi = [nx, ny, nz];
        hi[axis] -= 1;
        for ix in 0..hi[0] {
            for iy in 0..hi[1] {
                for iz in 0..hi[2] {
                    let n = [ix, iy, iz];
                    if n[u] == 0 || n[v] == 0 || n[u] >= [cx, cy, cz][u] || n[v] >= [cx, cy, cz][v]
                    {
                        continue;
                    }
                    let mut m = n;
                    m[axis] += 1;
                    let s0 = field.value(n[0], n[1], n[2]) - iso;
                    let s1 = field.value(m[0], m[1], m[2]) - iso;
                    if (s0 >= 0.0) == (s1 >= 0.0) {
                        continue;
                    }
                    // Cells around the edge, counterclockwise seen from +axis.
                    let mut quad = [0u32; 4];
                    let offsets = [(1, 1), (0, 1), (0, 0), (1, 0)];
                    for (qi, (du, dv)) in offsets.iter().enumerate() {
                        let mut c = n;
                        c[u] -= du;
                        c[v] -= dv;
                        let id = cell_vertex[cell_idx(c[0], c[1], c[2])];
                        debug_assert!(id >= 0, "cell next to a crossing edge is active");
                        quad[qi] = id as u32;
                    }
                    // Outward normal points from inside (negative) to outside.
                    if s0 >= 0.0 {
                        quad.reverse();
                    }
                    faces.push([quad[0], quad[1], quad[2]]);
                    faces.push([quad[0], quad[2], quad[3]]);
                }
            }
        }
    }

    SurfaceMesh::new(vertices, faces)
}

const CORNERS: [(usize, usize, usize); 8] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (1, 1, 0),
    (0, 0, 1),
    (1, 0, 1),
    (0, 1, 1),
    (1, 1, 1),
];

// The 12 cell edges as corner-index pairs into CORNERS.
const CELL_EDGES: [(usize, usize); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

fn place_vertex(field: &ScalarField, iso: Real, ix: usize, iy: usize, iz: usize) -> Vec3 {
    let corner_pos: Vec<Vec3> = CORNERS
        .iter()
        .map(|&(dx, dy, dz)| field.position(ix + dx, iy + dy, iz + dz))
        .collect();
    let corner_val: Vec<Real> = CORNERS
        .iter()
        .map(|&(dx, dy, dz)| field.value(ix + dx, iy + dy, iz + dz) - iso)
        .collect();
    let corner_grad: Vec<Vec3> = CORNERS
        .iter()
        .map(|&(dx, dy, dz)| field.gradient(ix + dx, iy + dy, iz + dz))
        .collect();

    let mut samples: Vec<Hermite> = Vec::new();
    for &(a, b) in &CELL_EDGES {
        let (va, vb) = (corner_val[a], corner_val[b]);
        if (va >= 0.0) == (vb >= 0.0) {
            continue;
        }
        let t = va / (va - vb);
        let point = corner_pos[a] + (corner_pos[b] - corner_pos[a]) * t;
        let normal = corner_grad[a] + (corner_grad[b] - corner_grad[a]) * t;
        if normal.norm() > 1e-12 {
            samples.push(Hermite {
                point,
                normal: normal.normalize(),
            });
        }
    }

    let lo = corner_pos[0];
    let hi = corner_pos[7];
    let mass = samples.iter().fold(Vec3::zeros(), |acc, s| acc + s.point)
        / (samples.len().max(1) as Real);
    if samples.is_empty() {
        return (lo + hi) / 2.0;
    }

    // Damped normal equations around the mass point:
    //   (A + damping*I) delta = sum n (n . (p - mass))
    let mut a = Mat3::zeros();
    let mut rhs = Vec3::zeros();
    for s in &samples {
        a += s.normal * s.normal.transpose();
        rhs += s.normal * s.normal.dot(&(s.point - mass));
    }
    let damped = a + Mat3::identity() * QEF_DAMPING;
    let sv = svd3(&damped).sigma;
    let cond = sv.x.abs() / sv.z.abs().max(1e-30);
    let vertex = if cond > QEF_MAX_CONDITION {
        mass
    } else {
        match damped.lu().solve(&rhs) {
            Some(delta) if delta.iter().all(|x| x.is_finite()) => mass + delta,
            _ => mass,
        }
    };
    Vec3::new(
        vertex.x.clamp(lo.x, hi.x),
        vertex.y.clamp(lo.y, hi.y),
        vertex.z.clamp(lo.z, hi.z),
    )
}

#[cfg(test)]
mod tests {
    use super::super::euler::euler_characteristic;
    use super::super::field::ScalarField;
    use super::*;

    fn sphere_field(center: Vec3, r: Real, spacing: Real) -> ScalarField {
        let n = ((2.0 * r + 8.0 * spacing) / spacing).ceil() as usize + 1;
        let origin = center - Vec3::repeat((n - 1) as Real * spacing / 2.0);
        ScalarField::from_fn(origin, spacing, [n, n, n], |p| (p - center).norm() - r)
    }

    #[test]
    fn sphere_vertices_on_radius_and_chi_two() {
        let r = 0.035;
        let spacing = 0.004;
        let center = Vec3::new(0.001, -0.002, 0.0015);
        let mesh = dual_contour(&sphere_field(center, r, spacing), 0.0);
        assert!(mesh.is_closed_manifold());
        for v in &mesh.vertices {
            let err = ((v - center).norm() - r).abs();
            assert!(err <= 1.5 * spacing, "vertex radius error {err}");
        }
        let report = euler_characteristic(&mesh).unwrap();
        assert_eq!(report.chi, 2);
        assert_eq!(report.genus, 0);
    }

    #[test]
    fn box_field_keeps_sharp_edges() {
        let half = Vec3::new(0.031, 0.0205, 0.0145);
        let center = Vec3::new(0.0013, -0.0021, 0.0008);
        let spacing = 0.005;
        let box_sdf = |p: &Vec3| {
            let q = (p - center).abs() - half;
            let outside = Vec3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0));
            outside.norm() + q.x.max(q.y).max(q.z).min(0.0)
        };
        let n = [
            (2.0 * half.x / spacing).ceil() as usize + 9,
            (2.0 * half.y / spacing).ceil() as usize + 9,
            (2.0 * half.z / spacing).ceil() as usize + 9,
        ];
        let origin = center
            - Vec3::new(
                (n[0] - 1) as Real * spacing / 2.0,
                (n[1] - 1) as Real * spacing / 2.0,
                (n[2] - 1) as Real * spacing / 2.0,
            );
        let field = ScalarField::from_fn(origin, spacing, n, box_sdf);
        let mesh = dual_contour(&field, 0.0);
        assert!(mesh.is_closed_manifold());

        // 12 edges of the box as segments.
        let mut edges: Vec<(Vec3, Vec3)> = Vec::new();
        for &sx in &[-1.0, 1.0] {
            for &sy in &[-1.0, 1.0] {
                edges.push((
                    center + Vec3::new(sx * half.x, sy * half.y, -half.z),
                    center + Vec3::new(sx * half.x, sy * half.y, half.z),
                ));
            }
        }
        for &sx in &[-1.0, 1.0] {
            for &sz in &[-1.0, 1.0] {
                edges.push((
                    center + Vec3::new(sx * half.x, -half.y, sz * half.z),
                    center + Vec3::new(sx * half.x, half.y, sz * half.z),
                ));
            }
        }
        for &sy in &[-1.0, 1.0] {
            for &sz in &[-1.0, 1.0] {
                edges.push((
                    center + Vec3::new(-half.x, sy * half.y, sz * half.z),
                    center + Vec3::new(half.x, sy * half.y, sz * half.z),
                ));
            }
        }
        let seg_dist = |p: &Vec3, a: &Vec3, b: &Vec3| -> Real {
            let ab = b - a;
            let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
            (p - (a + ab * t)).norm()
        };

        // Vertices of cells that contain a true box edge must land on it.
        let mut tested = 0;
        for v in &mesh.vertices {
            // The vertex is clamped to its cell, so the cell containing the
            // vertex is the generating cell (up to boundary ties).
            let cell_lo = Vec3::new(
                ((v.x - field.origin.x) / spacing).floor() * spacing + field.origin.x,
                ((v.y - field.origin.y) / spacing).floor() * spacing + field.origin.y,
                ((v.z - field.origin.z) / spacing).floor() * spacing + field.origin.z,
            );
            let cell_hi = cell_lo + Vec3::repeat(spacing);
            let edge_in_cell = edges.iter().any(|(a, b)| {
                // Sample the segment finely; cheap and robust for a test.
                (0..=40).any(|i| {
                    let p = a + (b - a) * (i as Real / 40.0);
                    p.x >= cell_lo.x
                        && p.x <= cell_hi.x
                        && p.y >= cell_lo.y
                        && p.y <= cell_hi.y
                        && p.z >= cell_lo.z
                        && p.z <= cell_hi.z
                })
            });
            if edge_in_cell {
                tested += 1;
                let d = edges
                    .iter()
                    .map(|(a, b)| seg_dist(v, a, b))
                    .fold(Real::INFINITY, Real::min);
                assert!(d <= 0.5 * spacing, "edge vertex off by {d}");
            }
        }
        assert!(tested > 20, "only {tested} edge cells exercised");
    }

    #[test]
    fn torus_field_has_chi_zero() {
        let (cr, tr) = (0.03_f64, 0.01_f64);
        let spacing = 0.0025_f64;
        let nx = ((2.0 * (cr + tr) + 8.0 * spacing) / spacing).ceil() as usize + 1;
        let nz = ((2.0 * tr + 8.0 * spacing) / spacing).ceil() as usize + 1;
        let origin = Vec3::new(
            -((nx - 1) as Real) * spacing / 2.0,
            -((nx - 1) as Real) * spacing / 2.0,
            -((nz - 1) as Real) * spacing / 2.0,
        );
        let field = ScalarField::from_fn(origin, spacing, [nx, nx, nz], |p| {
            let q = (p.x * p.x + p.y * p.y).sqrt() - cr;
            (q * q + p.z * p.z).sqrt() - tr
        });
        let mesh = dual_contour(&field, 0.0);
        assert!(mesh.is_closed_manifold());
        let report = euler_characteristic(&mesh).unwrap();
        assert_eq!(report.chi, 0);
        assert_eq!(report.genus, 1);
    }

    #[test]
    fn single_sign_field_gives_empty_mesh() {
        let field = ScalarField::from_fn(Vec3::zeros(), 0.01, [4, 4, 4], |_| 1.0);
        assert!(dual_contour(&field, 0.0).is_empty());
        let field = ScalarField::from_fn(Vec3::zeros(), 0.01, [4, 4, 4], |_| -1.0);
        assert!(dual_contour(&field, 0.0).is_empty());
    }
}
