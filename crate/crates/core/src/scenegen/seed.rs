//! Jittered-lattice particle seeding for the scene families.

use super::{Profile, SceneSpec, ScenegenError};
use crate::math::{Real, Vec3};
use crate::mpm::{MaterialParams, ParticleSystem};
use rand::Rng;
use std::f64::consts::PI;

/// Particles below this per object mean the lattice cannot resolve it.
const MIN_PARTICLES: usize = 100;

/// Fills each solid with an axis-aligned object-frame lattice at spacing
/// `h`, displaced by a uniform jitter of ±0.2 h per axis (inclusion is
/// tested on the unjittered node so counts stay deterministic), then posed
/// into the world. Labels are 1-based per object; mass = density · h³.
pub fn seed_particles<R: Rng>(
    scene: &SceneSpec,
    h: Real,
    mat: &MaterialParams,
    rng: &mut R,
) -> Result<ParticleSystem, ScenegenError> {
    scene.validate()?;
    assert!(h > 0.0, "spacing must be positive");
    let pose = *scene.pose();
    let mut positions = Vec::new();
    let mut labels = Vec::new();
    for object in 0..scene.object_count() {
        let before = positions.len();
        let (lo, hi) = object_bounds(scene, object);
        let dims = [
            ((hi.x - lo.x) / h).ceil() as usize,
            ((hi.y - lo.y) / h).ceil() as usize,
            ((hi.z - lo.z) / h).ceil() as usize,
        ];
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let node = lo
                        + Vec3::new(
                            (i as Real + 0.5) * h,
                            (j as Real + 0.5) * h,
                            (k as Real + 0.5) * h,
                        );
                    if !inside_object(scene, object, &node) {
                        continue;
                    }
                    let jitter = Vec3::new(
                        rng.gen_range(-0.2..0.2),
                        rng.gen_range(-0.2..0.2),
                        rng.gen_range(-0.2..0.2),
                    ) * h;
                    positions.push(pose.apply(&(node + jitter)));
                    labels.push(object as u32 + 1);
                }
            }
        }
        let got = positions.len() - before;
        if got < MIN_PARTICLES {
            return Err(ScenegenError::Resolution { object, got, needed: MIN_PARTICLES });
        }
    }
    Ok(ParticleSystem::seeded(positions, labels, h.powi(3), mat.density))
}

/// Segment-chain centers per object in the world frame, plus whether each
/// chain is closed. Rolls discretize along their axis; the doughnut along
/// its major circle.
pub fn segment_chains(scene: &SceneSpec, segments: usize) -> Vec<(Vec<Vec3>, bool)> {
    assert!(segments >= 3);
    let pose = *scene.pose();
    match *scene {
        SceneSpec::TwoRolls { radius, length, gap, .. } => {
            let c = radius + gap / 2.0;
            [-c, c]
                .iter()
                .map(|&cx| {
                    let centers = (0..segments)
                        .map(|s| {
                            let y = length * ((s as Real + 0.5) / segments as Real - 0.5);
                            pose.apply(&Vec3::new(cx, y, radius))
                        })
                        .collect();
                    (centers, false)
                })
                .collect()
        }
        SceneSpec::Doughnut { major, minor, .. } => {
            let centers = (0..segments)
                .map(|s| {
                    let u = 2.0 * PI * (s as Real + 0.5) / segments as Real;
                    pose.apply(&Vec3::new(major * u.cos(), major * u.sin(), minor))
                })
                .collect();
            vec![(centers, true)]
        }
    }
}

/// Object-frame bounding box of one object.
fn object_bounds(scene: &SceneSpec, object: usize) -> (Vec3, Vec3) {
    match *scene {
        SceneSpec::TwoRolls { radius, length, gap, .. } => {
            let c = if object == 0 { -(radius + gap / 2.0) } else { radius + gap / 2.0 };
            (
                Vec3::new(c - radius, -length / 2.0, 0.0),
                Vec3::new(c + radius, length / 2.0, 2.0 * radius),
            )
        }
        SceneSpec::Doughnut { major, minor, .. } => (
            Vec3::new(-(major + minor), -(major + minor), 0.0),
            Vec3::new(major + minor, major + minor, 2.0 * minor),
        ),
    }
}

/// Object-frame solid test.
fn inside_object(scene: &SceneSpec, object: usize, p: &Vec3) -> bool {
    match *scene {
        SceneSpec::TwoRolls { profile, radius, gap, length, .. } => {
            let c = if object == 0 { -(radius + gap / 2.0) } else { radius + gap / 2.0 };
            if p.y.abs() > length / 2.0 {
                return false;
            }
            match profile {
                Profile::Circular => {
                    (p.x - c).powi(2) + (p.z - radius).powi(2) <= radius * radius
                }
                Profile::Square => (p.x - c).abs() <= radius && (p.z - radius).abs() <= radius,
            }
        }
        SceneSpec::Doughnut { major, minor, .. } => {
            let ring = (p.x * p.x + p.y * p.y).sqrt() - major;
            ring * ring + (p.z - minor).powi(2) <= minor * minor
        }
    }
}
