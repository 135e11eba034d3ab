//! Signed-distance fields sampled on a regular lattice.

use crate::math::{Real, Vec3};
use crate::spatial::PointHash;
use rayon::prelude::*;

/// Regular lattice of signed distance values, node-centered.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub origin: Vec3,
    pub spacing: Real,
    /// Node counts per axis.
    pub dims: [usize; 3],
    /// Values indexed by `(ix * ny + iy) * nz + iz`.
    pub values: Vec<Real>,
}

impl ScalarField {
    pub fn from_fn(
        origin: Vec3,
        spacing: Real,
        dims: [usize; 3],
        f: impl Fn(&Vec3) -> Real + Sync,
    ) -> Self {
        assert!(spacing > 0.0, "spacing must be positive");
        assert!(dims.iter().all(|&n| n >= 2), "need >= 2 nodes per axis");
        let [nx, ny, nz] = dims;
        let mut values = vec![0.0; nx * ny * nz];
        values
            .par_chunks_mut(ny * nz)
            .enumerate()
            .for_each(|(ix, slab)| {
                for iy in 0..ny {
                    for iz in 0..nz {
                        let p = origin
                            + Vec3::new(ix as Real, iy as Real, iz as Real) * spacing;
                        slab[iy * nz + iz] = f(&p);
                    }
                }
            });
        ScalarField {
            origin,
            spacing,
            dims,
            values,
        }
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.dims[1] + iy) * self.dims[2] + iz
    }

    #[inline]
    pub fn value(&self, ix: usize, iy: usize, iz: usize) -> Real {
        self.values[self.idx(ix, iy, iz)]
    }

    #[inline]
    pub fn position(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        self.origin + Vec3::new(ix as Real, iy as Real, iz as Real) * self.spacing
    }

    /// Central-difference gradient at a node (one-sided on the boundary).
    pub fn gradient(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        let diff = |i: usize, n: usize, lo: Real, hi: Real, at: Real| -> Real {
            if i == 0 {
                (hi - at) / self.spacing
            } else if i == n - 1 {
                (at - lo) / self.spacing
            } else {
                (hi - lo) / (2.0 * self.spacing)
            }
        };
        let at = self.value(ix, iy, iz);
        let [nx, ny, nz] = self.dims;
        let gx = diff(
            ix,
            nx,
            self.value(ix.saturating_sub(1), iy, iz),
            self.value((ix + 1).min(nx - 1), iy, iz),
            at,
        );
        let gy = diff(
            iy,
            ny,
            self.value(ix, iy.saturating_sub(1), iz),
            self.value(ix, (iy + 1).min(ny - 1), iz),
            at,
        );
        let gz = diff(
            iz,
            nz,
            self.value(ix, iy, iz.saturating_sub(1)),
            self.value(ix, iy, (iz + 1).min(nz - 1)),
            at,
        );
        Vec3::new(gx, gy, gz)
    }

    /// Trilinear interpolation; clamps to the lattice bounds.
    pub fn sample(&self, p: &Vec3) -> Real {
        let [nx, ny, nz] = self.dims;
        let local = (p - self.origin) / self.spacing;
        let fx = local.x.clamp(0.0, (nx - 1) as Real);
        let fy = local.y.clamp(0.0, (ny - 1) as Real);
        let fz = local.z.clamp(0.0, (nz - 1) as Real);
        let ix = (fx as usize).min(nx - 2);
        let iy = (fy as usize).min(ny - 2);
        let iz = (fz as usize).min(nz - 2);
        let (tx, ty, tz) = (fx - ix as Real, fy - iy as Real, fz - iz as Real);
        let mut acc = 0.0;
        for (dx, wx) in [(0, 1.0 - tx), (1, tx)] {
            for (dy, wy) in [(0, 1.0 - ty), (1, ty)] {
                for (dz, wz) in [(0, 1.0 - tz), (1, tz)] {
                    acc += wx * wy * wz * self.value(ix + dx, iy + dy, iz + dz);
                }
            }
        }
        acc
    }

    pub fn min_value(&self) -> Real {
        self.values.iter().copied().fold(Real::INFINITY, Real::min)
    }

    pub fn max_value(&self) -> Real {
        self.values
            .iter()
            .copied()
            .fold(Real::NEG_INFINITY, Real::max)
    }
}

/// Signed distance to a particle set: distance to the nearest particle
/// center minus `particle_radius`, sampled on a lattice covering the
/// particles' bounding box plus `padding` on every side.
pub fn sdf_from_particles(
    positions: &[Vec3],
    particle_radius: Real,
    spacing: Real,
    padding: Real,
) -> ScalarField {
    assert!(!positions.is_empty(), "need at least one particle");
    assert!(particle_radius > 0.0 && spacing > 0.0 && padding >= 0.0);
    let aabb = crate::math::Aabb::from_points(positions).dilated(padding);
    let dims = [
        ((aabb.max.x - aabb.min.x) / spacing).ceil() as usize + 2,
        ((aabb.max.y - aabb.min.y) / spacing).ceil() as usize + 2,
        ((aabb.max.z - aabb.min.z) / spacing).ceil() as usize + 2,
    ];
    let hash = PointHash::build(positions, particle_radius.max(spacing) * 2.0);
    ScalarField::from_fn(aabb.min, spacing, dims, |p| {
        hash.nearest(p).map(|(_, d)| d).unwrap() - particle_radius
    })
}
