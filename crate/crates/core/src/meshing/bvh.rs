//! Median-split triangle BVH with nearest-point and ray queries.

use super::SurfaceMesh;
use crate::math::{Aabb, Real, Vec3};

struct Node {
    aabb: Aabb,
    left: u32,
    right: u32,
    // Leaf when count > 0: triangles `order[first..first+count]`.
    first: u32,
    count: u32,
}

pub struct TriangleBvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    tris: Vec<[Vec3; 3]>,
}

/// Closest point on a triangle to `p` (Ericson, Real-Time Collision
/// Detection, 5.1.5).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> (Vec3, [Real; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

fn aabb_dist_sq(aabb: &Aabb, p: &Vec3) -> Real {
    let mut d = 0.0;
    for k in 0..3 {
        let v = p[k];
        if v < aabb.min[k] {
            d += (aabb.min[k] - v) * (aabb.min[k] - v);
        } else if v > aabb.max[k] {
            d += (v - aabb.max[k]) * (v - aabb.max[k]);
        }
    }
    d
}

fn ray_aabb(aabb: &Aabb, origin: &Vec3, inv_dir: &Vec3, t_max: Real) -> bool {
    let mut t0 = 0.0_f64;
    let mut t1 = t_max;
    for k in 0..3 {
        let ta = (aabb.min[k] - origin[k]) * inv_dir[k];
        let tb = (aabb.max[k] - origin[k]) * inv_dir[k];
        let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
        t0 = t0.max(lo);
        t1 = t1.min(hi);
        if t0 > t1 {
            return false;
        }
    }
    true
}

/// Moller-Trumbore; returns (t, u, v) for hits with t in (eps, inf).
pub fn ray_triangle(origin: &Vec3, dir: &Vec3, tri: &[Vec3; 3]) -> Option<(Real, Real, Real)> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - tri[0];
    let u = tvec.dot(&pvec) * inv_det;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv_det;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    let t = e2.dot(&qvec) * inv_det;
    if t > 1e-12 {
        Some((t, u, v))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RayHit {
    pub t: Real,
    pub triangle: usize,
    pub u: Real,
    pub v: Real,
}

#[derive(Debug, Clone, Copy)]
pub struct NearestHit {
    pub distance: Real,
    pub point: Vec3,
    pub triangle: usize,
    pub barycentric: [Real; 3],
}

impl TriangleBvh {
    pub fn build(mesh: &SurfaceMesh) -> Self {
        let tris: Vec<[Vec3; 3]> = (0..mesh.faces.len()).map(|f| mesh.triangle(f)).collect();
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::new();

        if tris.is_empty() {
            nodes.push(Node {
                aabb: Aabb::empty(),
                left: 0,
                right: 0,
                first: 0,
                count: 0,
            });
            return TriangleBvh { nodes, order, tris };
        }

        // Recursive median split over the widest centroid axis.
        let mut explicit: Vec<(Aabb, i64, i64, u32, u32)> = Vec::new(); // (aabb, l, r, first, count)
        fn build_explicit(
            tris: &[[Vec3; 3]],
            centroids: &[Vec3],
            nodes: &mut Vec<(Aabb, i64, i64, u32, u32)>,
            order: &mut [u32],
            base: u32,
        ) -> usize {
            let mut aabb = Aabb::empty();
            for &i in order.iter() {
                for v in &tris[i as usize] {
                    aabb.grow(v);
                }
            }
            let me = nodes.len();
            nodes.push((aabb, -1, -1, base, order.len() as u32));
            if order.len() <= 4 {
                return me;
            }
            let mut cb = Aabb::empty();
            for &i in order.iter() {
                cb.grow(&centroids[i as usize]);
            }
            let ext = cb.extents();
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            if ext[axis] < 1e-12 {
                return me;
            }
            let mid = order.len() / 2;
            order.select_nth_unstable_by(mid, |&a, &b| {
                centroids[a as usize][axis]
                    .partial_cmp(&centroids[b as usize][axis])
                    .unwrap()
            });
            let (left, right) = order.split_at_mut(mid);
            let l = build_explicit(tris, centroids, nodes, left, base);
            let r = build_explicit(tris, centroids, nodes, right, base + mid as u32);
            nodes[me].1 = l as i64;
            nodes[me].2 = r as i64;
            nodes[me].4 = 0;
            me
        }
        build_explicit(&tris, &centroids, &mut explicit, &mut order, 0);

        let nodes = explicit
            .into_iter()
            .map(|(aabb, l, r, first, count)| Node {
                aabb,
                left: l.max(0) as u32,
                right: r.max(0) as u32,
                first,
                count,
            })
            .collect();
        TriangleBvh { nodes, order, tris }
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    /// Nearest surface point to `p`.
    pub fn nearest(&self, p: &Vec3) -> Option<NearestHit> {
        if self.tris.is_empty() {
            return None;
        }
        let mut best = NearestHit {
            distance: Real::INFINITY,
            point: Vec3::zeros(),
            triangle: 0,
            barycentric: [0.0; 3],
        };
        let mut best_sq = Real::INFINITY;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if aabb_dist_sq(&node.aabb, p) >= best_sq {
                continue;
            }
            if node.count > 0 {
                for &ti in &self.order[node.first as usize..(node.first + node.count) as usize] {
                    let tri = &self.tris[ti as usize];
                    let (q, bary) = closest_point_on_triangle(p, &tri[0], &tri[1], &tri[2]);
                    let d_sq = (p - q).norm_squared();
                    if d_sq < best_sq {
                        best_sq = d_sq;
                        best = NearestHit {
                            distance: d_sq.sqrt(),
                            point: q,
                            triangle: ti as usize,
                            barycentric: bary,
                        };
                    }
                }
            } else {
                let l = node.left as usize;
                let r = node.right as usize;
                // Visit nearer child first.
                let dl = aabb_dist_sq(&self.nodes[l].aabb, p);
                let dr = aabb_dist_sq(&self.nodes[r].aabb, p);
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        Some(best)
    }

    /// Nearest ray hit, if any.
    pub fn raycast(&self, origin: &Vec3, dir: &Vec3) -> Option<RayHit> {
        if self.tris.is_empty() {
            return None;
        }
        let inv_dir = Vec3::new(
            1.0 / non_zero(dir.x),
            1.0 / non_zero(dir.y),
            1.0 / non_zero(dir.z),
        );
        let mut best: Option<RayHit> = None;
        let mut t_max = Real::INFINITY;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if !ray_aabb(&node.aabb, origin, &inv_dir, t_max) {
                continue;
            }
            if node.count > 0 {
                for &ti in &self.order[node.first as usize..(node.first + node.count) as usize] {
                    if let Some((t, u, v)) = ray_triangle(origin, dir, &self.tris[ti as usize]) {
                        if t < t_max {
                            t_max = t;
                            best = Some(RayHit {
                                t,
                                triangle: ti as usize,
                                u,
                                v,
                            });
                        }
                    }
                }
            } else {
                stack.push(node.left as usize);
                stack.push(node.right as usize);
            }
        }
        best
    }

    /// Number of ray crossings (for parity checks in tests).
    pub fn count_hits(&self, origin: &Vec3, dir: &Vec3) -> usize {
        let mut n = 0;
        for tri in &self.tris {
            if ray_triangle(origin, dir, tri).is_some() {
                n += 1;
            }
        }
        n
    }
}

fn non_zero(x: Real) -> Real {
    if x.abs() < 1e-300 {
        1e-300_f64.copysign(x)
    } else {
        x
    }
}
