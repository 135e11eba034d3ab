//! Background Eulerian grid for the MPM transfers.

use crate::math::{Aabb, Real, Vec3};

/// Node-centered mass/momentum grid over a fixed axis-aligned domain.
/// Momentum holds velocities after the grid update.
pub struct BackgroundGrid {
    pub dx: Real,
    pub origin: Vec3,
    /// Node counts per axis.
    pub dims: [usize; 3],
    pub mass: Vec<Real>,
    pub momentum: Vec<Vec3>,
}

impl BackgroundGrid {
    /// Grid covering `domain` plus `margin_cells` of padding on every side.
    pub fn new(domain: &Aabb, dx: Real, margin_cells: usize) -> Self {
        assert!(dx > 0.0, "dx must be positive");
        assert!(!domain.is_empty(), "domain must be non-empty");
        let pad = margin_cells as Real * dx;
        let origin = domain.min - Vec3::repeat(pad);
        let ext = domain.max + Vec3::repeat(pad) - origin;
        let dims = [
            (ext.x / dx).ceil() as usize + 1,
            (ext.y / dx).ceil() as usize + 1,
            (ext.z / dx).ceil() as usize + 1,
        ];
        let n = dims[0] * dims[1] * dims[2];
        BackgroundGrid {
            dx,
            origin,
            dims,
            mass: vec![0.0; n],
            momentum: vec![Vec3::zeros(); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.mass.len()
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.dims[1] + iy) * self.dims[2] + iz
    }

    #[inline]
    pub fn node_pos(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        self.origin + Vec3::new(ix as Real, iy as Real, iz as Real) * self.dx
    }

    pub fn clear(&mut self) {
        self.mass.fill(0.0);
        self.momentum.fill(Vec3::zeros());
    }

    /// Base node index and per-axis quadratic B-spline weights for the 3x3x3
    /// stencil around `p`. `None` when the stencil leaves the grid.
    #[inline]
    pub fn stencil(&self, p: &Vec3) -> Option<([usize; 3], [[Real; 3]; 3])> {
        let local = (p - self.origin) / self.dx;
        let mut base = [0usize; 3];
        let mut w = [[0.0; 3]; 3];
        for a in 0..3 {
            let b = (local[a] - 0.5).floor();
            if b < 0.0 || b as usize + 2 >= self.dims[a] {
                return None;
            }
            let fx = local[a] - b;
            // Quadratic B-spline evaluated at fx - 0, fx - 1, fx - 2.
            w[a] = [
                0.5 * (1.5 - fx) * (1.5 - fx),
                0.75 - (fx - 1.0) * (fx - 1.0),
                0.5 * (fx - 0.5) * (fx - 0.5),
            ];
            base[a] = b as usize;
        }
        Some((base, w))
    }

    pub fn total_mass(&self) -> Real {
        self.mass.iter().sum()
    }

    pub fn total_momentum(&self) -> Vec3 {
        self.momentum.iter().fold(Vec3::zeros(), |acc, m| acc + m)
    }
}
