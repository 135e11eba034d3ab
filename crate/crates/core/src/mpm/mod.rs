//! Explicit MLS-MPM time stepping for an elastoplastic continuum with von
//! Mises yield, rigid SDF colliders, and a floor plane.

mod grid;
mod kernels;
mod particles;
mod plasticity;

pub use grid::BackgroundGrid;
pub use kernels::{g2p_transfer, grid_update, p2g_transfer};
pub use particles::ParticleSystem;
pub use plasticity::{apply_plasticity, kirchhoff_stress, plastic_return, SIGMA_CLAMP};

use crate::collider::{Collider, ContactMode};
use crate::math::{Real, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("particle {particle} left the grid domain margin")]
    OutOfDomain { particle: usize },
    #[error("non-finite state at particle {particle}")]
    NonFinite { particle: usize },
}

/// Elastoplastic material constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub youngs_modulus: Real,
    pub poisson_ratio: Real,
    /// Von Mises yield stress sigma_Y.
    pub yield_stress: Real,
    pub density: Real,
}

impl Default for MaterialParams {
    /// Clay-like defaults: soft, strongly plastic.
    fn default() -> Self {
        MaterialParams {
            youngs_modulus: 3e4,
            poisson_ratio: 0.35,
            yield_stress: 3e3,
            density: 1200.0,
        }
    }
}

impl MaterialParams {
    pub fn mu(&self) -> Real {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    pub fn lambda(&self) -> Real {
        self.youngs_modulus * self.poisson_ratio
            / ((1.0 + self.poisson_ratio) * (1.0 - 2.0 * self.poisson_ratio))
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.youngs_modulus > 0.0
            && self.yield_stress > 0.0
            && self.density > 0.0
            && self.poisson_ratio > 0.0
            && self.poisson_ratio < 0.5)
        {
            return Err(format!(
                "material parameters out of range: E={} nu={} sigma_y={} rho={}",
                self.youngs_modulus, self.poisson_ratio, self.yield_stress, self.density
            ));
        }
        if !(self.mu().is_finite() && self.lambda().is_finite()) {
            return Err("derived Lame parameters are not finite".into());
        }
        Ok(())
    }
}

/// Largest stable substep for spacing `dx`: 0.3 dx / sqrt(E / rho).
pub fn cfl_dt(dx: Real, mat: &MaterialParams) -> Real {
    0.3 * dx / (mat.youngs_modulus / mat.density).sqrt()
}

/// Time stepping and boundary configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: Real,
    pub gravity: Vec3,
    pub substeps_per_keyframe: usize,
    pub friction_coefficient: Real,
    pub floor_height: Real,
    pub contact_mode: ContactMode,
    pub rng_seed: u64,
}

impl SimConfig {
    pub fn new(dt: Real) -> Self {
        SimConfig {
            dt,
            gravity: Vec3::new(0.0, 0.0, -9.81),
            substeps_per_keyframe: 1,
            friction_coefficient: 0.3,
            floor_height: 0.0,
            contact_mode: ContactMode::Sticky,
            rng_seed: 0,
        }
    }

    /// Config whose dt saturates the CFL rule for spacing `dx`.
    pub fn for_material(dx: Real, mat: &MaterialParams) -> Self {
        Self::new(cfl_dt(dx, mat))
    }

    pub fn validate(&self, dx: Real, mat: &MaterialParams) -> Result<(), String> {
        if self.dt <= 0.0 {
            return Err("dt must be positive".into());
        }
        let limit = cfl_dt(dx, mat);
        if self.dt > limit * (1.0 + 1e-9) {
            return Err(format!(
                "dt {} violates the CFL limit {} for dx {}",
                self.dt, limit, dx
            ));
        }
        if self.substeps_per_keyframe == 0 {
            return Err("substeps_per_keyframe must be >= 1".into());
        }
        Ok(())
    }
}

/// One explicit substep: clear grid, scatter, grid update, gather.
/// `time` is the simulation clock used to pose time-varying colliders.
pub fn step(
    ps: &mut ParticleSystem,
    grid: &mut BackgroundGrid,
    colliders: &[&dyn Collider],
    cfg: &SimConfig,
    mat: &MaterialParams,
    time: Real,
) -> Result<(), SimError> {
    grid.clear();
    p2g_transfer(ps, grid, mat, cfg.dt)?;
    grid_update(grid, colliders, cfg, time);
    g2p_transfer(grid, ps, mat, cfg.dt)
}
