//! Scene and episode generation: parameter bands with held-out test ranges,
//! jittered-lattice particle seeding, keyframed grip episodes with topology
//! tracking, and the on-disk dataset layout.

mod bands;
mod dataset;
mod episode;
mod seed;

pub use bands::{sample_scene, Band, ParamBands, Split};
pub use dataset::{
    read_particles_bin, write_episode, write_particles_bin, ParticlesBin, PARTICLES_MAGIC,
    PARTICLES_VERSION,
};
pub use episode::{
    component_meshes, run_episode, subsample, EePoseRecord, Episode, EventRecord, GenConfig,
    Keyframe,
};
pub use seed::{seed_particles, segment_chains};

use crate::math::Real;
use crate::mpm::SimError;
use crate::topo::TopoError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenegenError {
    #[error("parameter band for {param} has an empty {side} side")]
    EmptyBand { param: &'static str, side: &'static str },
    #[error("parameter band for {param} is malformed: {why}")]
    BadBand { param: &'static str, why: String },
    #[error("invalid scene spec: {0}")]
    BadSpec(String),
    #[error("object {object} seeded only {got} particles (need {needed}); raise the resolution")]
    Resolution { object: usize, got: usize, needed: usize },
    #[error("episode faulty at keyframe {keyframe}: {why}")]
    Faulty { keyframe: usize, why: String },
    #[error("topology: {0}")]
    Topo(#[from] TopoError),
    #[error("simulation: {0}")]
    Sim(#[from] SimError),
    #[error("mesh: {0}")]
    Mesh(#[from] crate::meshing::MeshError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad particles.bin: {0}")]
    BadParticlesBin(String),
}

/// Roll cross-section shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Circular,
    Square,
}

/// In-plane placement: rotation about z by `theta`, then translation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanePose {
    pub x: Real,
    pub y: Real,
    pub theta: Real,
}

impl PlanePose {
    pub fn identity() -> Self {
        PlanePose { x: 0.0, y: 0.0, theta: 0.0 }
    }

    /// Object frame -> world frame.
    pub fn apply(&self, p: &crate::math::Vec3) -> crate::math::Vec3 {
        let (s, c) = self.theta.sin_cos();
        crate::math::Vec3::new(
            c * p.x - s * p.y + self.x,
            s * p.x + c * p.y + self.y,
            p.z,
        )
    }

    /// World frame -> object frame.
    pub fn invert(&self, p: &crate::math::Vec3) -> crate::math::Vec3 {
        let (s, c) = self.theta.sin_cos();
        let (dx, dy) = (p.x - self.x, p.y - self.y);
        crate::math::Vec3::new(c * dx + s * dy, -s * dx + c * dy, p.z)
    }
}

/// Scene geometry resting on the plane z = 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SceneSpec {
    /// Two parallel rolls along the object-frame y axis, surfaces `gap`
    /// apart along x.
    TwoRolls {
        profile: Profile,
        radius: Real,
        length: Real,
        gap: Real,
        pose: PlanePose,
    },
    /// Torus with the tube center-plane at z = minor.
    Doughnut { major: Real, minor: Real, pose: PlanePose },
}

impl SceneSpec {
    pub fn family(&self) -> &'static str {
        match self {
            SceneSpec::TwoRolls { .. } => "two_rolls",
            SceneSpec::Doughnut { .. } => "doughnut",
        }
    }

    pub fn pose(&self) -> &PlanePose {
        match self {
            SceneSpec::TwoRolls { pose, .. } | SceneSpec::Doughnut { pose, .. } => pose,
        }
    }

    pub fn object_count(&self) -> usize {
        match self {
            SceneSpec::TwoRolls { .. } => 2,
            SceneSpec::Doughnut { .. } => 1,
        }
    }

    pub fn validate(&self) -> Result<(), ScenegenError> {
        match *self {
            SceneSpec::TwoRolls { radius, length, gap, .. } => {
                if radius <= 0.0 || length <= 0.0 {
                    return Err(ScenegenError::BadSpec(
                        "roll radius and length must be positive".into(),
                    ));
                }
                if gap < 0.0 {
                    return Err(ScenegenError::BadSpec("gap must be non-negative".into()));
                }
            }
            SceneSpec::Doughnut { major, minor, .. } => {
                if minor <= 0.0 || major <= 0.0 {
                    return Err(ScenegenError::BadSpec("torus radii must be positive".into()));
                }
                if minor >= major {
                    return Err(ScenegenError::BadSpec(
                        "torus minor radius must be below the major radius".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Supporting half-width of the footprint along an in-plane direction at
    /// world angle `phi` (radians), measured from the object center. Rolls
    /// use their bounding rectangle, so corners are slightly over-covered.
    pub fn footprint_halfwidth(&self, phi: Real) -> Real {
        match *self {
            SceneSpec::TwoRolls { radius, length, gap, pose, .. } => {
                let local = phi - pose.theta;
                let wx = 2.0 * radius + gap / 2.0;
                let wy = length / 2.0;
                wx * local.cos().abs() + wy * local.sin().abs()
            }
            SceneSpec::Doughnut { major, minor, .. } => major + minor,
        }
    }
}
