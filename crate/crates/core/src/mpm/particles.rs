//! Particle state in structure-of-arrays layout.

use super::plasticity::kirchhoff_stress;
use super::MaterialParams;
use crate::math::{svd3, Mat3, Real, Vec3};
use serde::{Deserialize, Serialize};

/// Material state sampled at particles. Deformation gradients are kept
/// behind accessors so the cached Kirchhoff stresses can be invalidated on
/// mutation; everything else is plain data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticleSystem {
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    /// APIC affine velocity matrices C (1/s).
    pub affine: Vec<Mat3>,
    pub masses: Vec<Real>,
    pub rest_volumes: Vec<Real>,
    /// Component labels, contiguous from 1.
    pub labels: Vec<u32>,
    def_grad: Vec<Mat3>,
    rest_positions: Vec<Vec3>,
    #[serde(skip)]
    stress_cache: Vec<Mat3>,
    #[serde(skip)]
    stress_valid: bool,
}

impl ParticleSystem {
    /// Seeds particles at rest: velocity zero, F = identity. `volume` is the
    /// rest volume represented by each particle; mass = density * volume.
    pub fn seeded(positions: Vec<Vec3>, labels: Vec<u32>, volume: Real, density: Real) -> Self {
        assert_eq!(positions.len(), labels.len());
        assert!(volume > 0.0 && density > 0.0);
        let n = positions.len();
        ParticleSystem {
            rest_positions: positions.clone(),
            positions,
            velocities: vec![Vec3::zeros(); n],
            affine: vec![Mat3::zeros(); n],
            def_grad: vec![Mat3::identity(); n],
            masses: vec![volume * density; n],
            rest_volumes: vec![volume; n],
            labels,
            stress_cache: vec![Mat3::zeros(); n],
            stress_valid: true,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Deep copy restricted to `indices` (kept in the given order).
    pub fn subset(&self, indices: &[u32]) -> ParticleSystem {
        ParticleSystem {
            positions: indices.iter().map(|&i| self.positions[i as usize]).collect(),
            velocities: indices.iter().map(|&i| self.velocities[i as usize]).collect(),
            affine: indices.iter().map(|&i| self.affine[i as usize]).collect(),
            masses: indices.iter().map(|&i| self.masses[i as usize]).collect(),
            rest_volumes: indices.iter().map(|&i| self.rest_volumes[i as usize]).collect(),
            labels: indices.iter().map(|&i| self.labels[i as usize]).collect(),
            def_grad: indices.iter().map(|&i| self.def_grad[i as usize]).collect(),
            rest_positions: indices.iter().map(|&i| self.rest_positions[i as usize]).collect(),
            stress_cache: Vec::new(),
            stress_valid: false,
        }
    }

    /// Initial positions, immutable after seeding.
    pub fn rest_positions(&self) -> &[Vec3] {
        &self.rest_positions
    }

    pub fn def_grad(&self) -> &[Mat3] {
        &self.def_grad
    }

    /// Mutable deformation gradients; invalidates the stress cache.
    pub fn def_grad_mut(&mut self) -> &mut [Mat3] {
        self.stress_valid = false;
        &mut self.def_grad
    }

    /// Kirchhoff stresses, recomputed from F if the cache is stale.
    pub fn stresses(&mut self, mat: &MaterialParams) -> &[Mat3] {
        if !self.stress_valid || self.stress_cache.len() != self.len() {
            self.stress_cache = self
                .def_grad
                .iter()
                .map(|f| kirchhoff_stress(&svd3(f), mat))
                .collect();
            self.stress_valid = true;
        }
        &self.stress_cache
    }

    /// Cached stresses without a refresh; callers must run `stresses` first.
    pub(super) fn stress_slice(&self) -> &[Mat3] {
        debug_assert!(self.stress_valid);
        &self.stress_cache
    }

    /// Stores post-plasticity F and its stress together (used by the g2p
    /// kernel, which has both at hand).
    pub(super) fn set_def_grad_with_stress(&mut self, i: usize, f: Mat3, stress: Mat3) {
        self.def_grad[i] = f;
        self.stress_cache[i] = stress;
    }

    pub(super) fn mark_stress_valid(&mut self) {
        self.stress_valid = true;
    }

    pub fn total_momentum(&self) -> Vec3 {
        self.positions
            .iter()
            .zip(&self.velocities)
            .zip(&self.masses)
            .fold(Vec3::zeros(), |acc, ((_, v), &m)| acc + v * m)
    }

    pub fn total_mass(&self) -> Real {
        self.masses.iter().sum()
    }

    pub fn max_speed(&self) -> Real {
        self.velocities
            .iter()
            .map(|v| v.norm())
            .fold(0.0, Real::max)
    }

    /// Mean distance between rest-position nearest neighbors; the spacing
    /// scale `h` used by topology thresholds.
    pub fn mean_rest_spacing(&self) -> Real {
        if self.len() < 2 {
            return 0.0;
        }
        let cell = self.estimate_cell();
        let hash = crate::spatial::PointHash::build(&self.rest_positions, cell);
        let mut total = 0.0;
        for (i, p) in self.rest_positions.iter().enumerate() {
            let mut best = Real::INFINITY;
            hash.for_each_within(p, cell * 2.0, |j, d| {
                if j != i && d < best {
                    best = d;
                }
            });
            if !best.is_finite() {
                let far = hash
                    .points()
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, q)| (q - p).norm())
                    .fold(Real::INFINITY, Real::min);
                best = far;
            }
            total += best;
        }
        total / self.len() as Real
    }

    fn estimate_cell(&self) -> Real {
        let aabb = crate::math::Aabb::from_points(&self.rest_positions);
        let ext = aabb.extents();
        let vol = (ext.x.max(1e-9)) * (ext.y.max(1e-9)) * (ext.z.max(1e-9));
        (vol / self.len() as Real).cbrt().max(1e-6)
    }
}
