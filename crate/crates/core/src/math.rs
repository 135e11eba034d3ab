//! Small shared math utilities: type aliases, a fast 3x3 SVD, axis-aligned
//! boxes, and seed derivation.

use nalgebra::{Matrix3, Vector3};

pub type Real = f64;
pub type Vec3 = Vector3<Real>;
pub type Mat3 = Matrix3<Real>;

/// Result of [`svd3`]: `m = u * diag(sigma) * v.transpose()`.
///
/// `u` and `v` are proper rotations (det = +1). Singular values are sorted
/// by decreasing magnitude; if `det(m) < 0` the last entry of `sigma` is
/// negative so the factorization stays rotation-safe.
#[derive(Debug, Clone, Copy)]
pub struct Svd3 {
    pub u: Mat3,
    pub sigma: Vec3,
    pub v: Mat3,
}

impl Svd3 {
    pub fn reconstruct(&self) -> Mat3 {
        self.u * Mat3::from_diagonal(&self.sigma) * self.v.transpose()
    }
}

/// Jacobi SVD of a 3x3 matrix, tuned for the per-particle inner loop.
///
/// Diagonalizes `mᵀm` with cyclic Jacobi rotations, then recovers `u` from
/// `m v = u Σ` with Gram-Schmidt and a cross product so both factors are
/// proper rotations.
pub fn svd3(m: &Mat3) -> Svd3 {
    let mut b = m.transpose() * m;
    let mut v = Mat3::identity();

    // Cyclic Jacobi sweeps; quadratic convergence makes 12 passes plenty
    // for f64 on well-scaled deformation gradients.
    for _ in 0..12 {
        let off = b[(0, 1)] * b[(0, 1)] + b[(0, 2)] * b[(0, 2)] + b[(1, 2)] * b[(1, 2)];
        if off < 1e-30 * b.trace().abs().max(1e-300) {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = b[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let app = b[(p, p)];
            let aqq = b[(q, q)];
            let tau = (aqq - app) / (2.0 * apq);
            // Stable tangent of the rotation angle.
            let t = if tau >= 0.0 {
                1.0 / (tau + (1.0 + tau * tau).sqrt())
            } else {
                1.0 / (tau - (1.0 + tau * tau).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;

            for k in 0..3 {
                let bkp = b[(k, p)];
                let bkq = b[(k, q)];
                b[(k, p)] = c * bkp - s * bkq;
                b[(k, q)] = s * bkp + c * bkq;
            }
            for k in 0..3 {
                let bpk = b[(p, k)];
                let bqk = b[(q, k)];
                b[(p, k)] = c * bpk - s * bqk;
                b[(q, k)] = s * bpk + c * bqk;
            }
            for k in 0..3 {
                let vkp = v[(k, p)];
                let vkq = v[(k, q)];
                v[(k, p)] = c * vkp - s * vkq;
                v[(k, q)] = s * vkp + c * vkq;
            }
        }
    }

    // Sort eigenvalues descending, permuting V's columns to match.
    let mut order = [0usize, 1, 2];
    let diag = [b[(0, 0)], b[(1, 1)], b[(2, 2)]];
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let cols: [Vec3; 3] = [
        v.column(order[0]).into_owned(),
        v.column(order[1]).into_owned(),
        v.column(order[2]).into_owned(),
    ];
    let mut v = Mat3::from_columns(&cols);
    if v.determinant() < 0.0 {
        v.column_mut(2).neg_mut();
    }

    // Recover U column by column; degenerate directions fall back to an
    // orthogonal complement so U is always a rotation.
    let mv0 = m * v.column(0);
    let mv1 = m * v.column(1);
    let mv2 = m * v.column(2);

    let n0 = mv0.norm();
    let u0 = if n0 > 1e-150 {
        mv0 / n0
    } else {
        Vec3::new(1.0, 0.0, 0.0)
    };
    let mut u1 = mv1 - u0 * u0.dot(&mv1);
    let n1 = u1.norm();
    u1 = if n1 > 1e-12 * n0.max(1e-150) {
        u1 / n1
    } else {
        // Any unit vector orthogonal to u0.
        let pick = if u0.x.abs() < 0.9 {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 1.0, 0.0)
        };
        let c = u0.cross(&pick);
        c / c.norm()
    };
    let u2 = u0.cross(&u1);

    let u = Mat3::from_columns(&[u0, u1, u2]);
    // Projecting through U keeps the signs consistent: a reflection in m
    // surfaces as a negative third singular value.
    let sigma = Vec3::new(u0.dot(&mv0), u1.dot(&mv1), u2.dot(&mv2));

    Svd3 { u, sigma, v }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(Real::INFINITY),
            max: Vec3::repeat(Real::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn dilated(&self, margin: Real) -> Aabb {
        Aabb {
            min: self.min - Vec3::repeat(margin),
            max: self.max + Vec3::repeat(margin),
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extents(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        p.x >= self.min.x
            && p.y >= self.min.y
            && p.z >= self.min.z
            && p.x <= self.max.x
            && p.y <= self.max.y
            && p.z <= self.max.z
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x
    }
}

/// SplitMix64 step; used to derive independent per-episode and per-sample
/// seeds from one root seed.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
