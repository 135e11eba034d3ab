//! Train/test parameter bands and scene + end-effector sampling.

use super::{PlanePose, Profile, SceneSpec, ScenegenError};
use crate::collider::{EndEffectorSpec, FamilyTag, GripTrajectory};
use crate::math::Real;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Closing speed of each jaw during an episode (m/s).
pub const CLOSE_SPEED: Real = 0.05;
/// Terminal hold after the jaws reach w_min; pinched material needs this
/// time under pressure to finish extruding.
pub const GRIP_HOLD: Real = 0.08;
/// Clearance between the finger faces and material at t = 0.
const OPEN_CLEARANCE: Real = 0.004;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    /// Directory name in the dataset layout.
    pub fn dir_name(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// Disjoint train/test intervals for one scalar parameter (meters).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub train: Vec<(Real, Real)>,
    pub test: Vec<(Real, Real)>,
}

impl Band {
    pub fn new(train: Vec<(Real, Real)>, test: Vec<(Real, Real)>) -> Self {
        Band { train, test }
    }

    fn intervals(&self, split: Split) -> &[(Real, Real)] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }

    pub fn validate(&self, param: &'static str) -> Result<(), ScenegenError> {
        for (side, ivs) in [("train", &self.train), ("test", &self.test)] {
            if ivs.is_empty() {
                return Err(ScenegenError::EmptyBand { param, side });
            }
            for &(lo, hi) in ivs {
                if !(lo < hi) {
                    return Err(ScenegenError::BadBand {
                        param,
                        why: format!("interval [{lo}, {hi}] is empty or inverted"),
                    });
                }
            }
        }
        for &(a, b) in &self.train {
            for &(c, d) in &self.test {
                if a < d && c < b {
                    return Err(ScenegenError::BadBand {
                        param,
                        why: format!("train [{a}, {b}] overlaps test [{c}, {d}]"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Uniform over the split's intervals, weighted by interval length.
    pub fn sample<R: Rng>(&self, split: Split, rng: &mut R) -> Real {
        let ivs = self.intervals(split);
        let total: Real = ivs.iter().map(|&(lo, hi)| hi - lo).sum();
        let mut u = rng.gen_range(0.0..total);
        for &(lo, hi) in ivs {
            let len = hi - lo;
            if u < len {
                return lo + u;
            }
            u -= len;
        }
        ivs.last().map(|&(_, hi)| hi).unwrap()
    }

    pub fn contains(&self, split: Split, x: Real) -> bool {
        self.intervals(split).iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    /// Upper edge of the training intervals (the training hull).
    pub fn train_max(&self) -> Real {
        self.train.iter().map(|&(_, hi)| hi).fold(Real::NEG_INFINITY, Real::max)
    }
}

/// One band per scene dimension. Test intervals sit both inside the training
/// hull (interpolation) and beyond it (extrapolation).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBands {
    pub roll_radius: Band,
    pub roll_length: Band,
    pub roll_gap: Band,
    pub doughnut_major: Band,
    pub doughnut_minor: Band,
}

impl Default for ParamBands {
    fn default() -> Self {
        ParamBands {
            roll_radius: Band::new(
                vec![(0.012, 0.015), (0.016, 0.020)],
                vec![(0.015, 0.016), (0.022, 0.024)],
            ),
            roll_length: Band::new(
                vec![(0.040, 0.052), (0.056, 0.070)],
                vec![(0.052, 0.056), (0.075, 0.085)],
            ),
            roll_gap: Band::new(
                vec![(0.000, 0.004), (0.006, 0.010)],
                vec![(0.004, 0.006), (0.012, 0.015)],
            ),
            doughnut_major: Band::new(
                vec![(0.030, 0.036), (0.038, 0.045)],
                vec![(0.036, 0.038), (0.048, 0.052)],
            ),
            doughnut_minor: Band::new(
                vec![(0.008, 0.0095), (0.0105, 0.012)],
                vec![(0.0095, 0.0105), (0.013, 0.014)],
            ),
        }
    }
}

impl ParamBands {
    pub fn validate(&self) -> Result<(), ScenegenError> {
        self.roll_radius.validate("roll_radius")?;
        self.roll_length.validate("roll_length")?;
        self.roll_gap.validate("roll_gap")?;
        self.doughnut_major.validate("doughnut_major")?;
        self.doughnut_minor.validate("doughnut_minor")
    }
}

/// Draws a scene, an end-effector, and a grip trajectory for one episode.
/// Scene dimensions come from the split's bands; poses are uniform; the
/// opening width is derived so the fingers start clear of material.
pub fn sample_scene<R: Rng>(
    rng: &mut R,
    family: &str,
    split: Split,
    bands: &ParamBands,
) -> Result<(SceneSpec, EndEffectorSpec, GripTrajectory), ScenegenError> {
    bands.validate()?;
    let pose = PlanePose {
        x: rng.gen_range(-0.02..0.02),
        y: rng.gen_range(-0.02..0.02),
        theta: rng.gen_range(-PI..PI),
    };
    let scene = match family {
        "two_rolls" => SceneSpec::TwoRolls {
            profile: if rng.gen_bool(0.5) { Profile::Circular } else { Profile::Square },
            radius: bands.roll_radius.sample(split, rng),
            length: bands.roll_length.sample(split, rng),
            gap: bands.roll_gap.sample(split, rng),
            pose,
        },
        "doughnut" => SceneSpec::Doughnut {
            major: bands.doughnut_major.sample(split, rng),
            minor: bands.doughnut_minor.sample(split, rng),
            pose,
        },
        other => {
            return Err(ScenegenError::BadSpec(format!(
                "unknown family {other:?} (expected two_rolls or doughnut)"
            )))
        }
    };
    scene.validate()?;

    let ee = match rng.gen_range(0..3) {
        0 => EndEffectorSpec::narrow(),
        1 => EndEffectorSpec::regular(),
        _ => EndEffectorSpec::wide(),
    };

    let (off_x, off_y) = (rng.gen_range(-0.015..0.015), rng.gen_range(-0.015..0.015));
    let theta_z = rng.gen_range(-PI..PI);
    let t_x = pose.x + off_x;
    let t_y = pose.y + off_y;
    let offset = (off_x * off_x + off_y * off_y).sqrt();
    // The cap comfortably exceeds the widest band geometry plus the largest
    // grip offset, so the clear-start invariant survives the clamp.
    let w_open = (2.0 * (scene.footprint_halfwidth(theta_z) + offset + OPEN_CLEARANCE))
        .clamp(0.02, 0.20);
    let w_min = rng.gen_range(0.0..0.5 * w_open);
    let close_time = (w_open - w_min) / (2.0 * CLOSE_SPEED);
    let traj = GripTrajectory {
        t_x,
        t_y,
        theta_z,
        w_open,
        w_min,
        close_time,
        duration: close_time + GRIP_HOLD,
        center_z: ee.finger_height / 2.0,
    };
    Ok((scene, ee, traj))
}

/// Lowercase tag name, used in manifests and histograms.
pub fn family_tag_name(tag: FamilyTag) -> &'static str {
    match tag {
        FamilyTag::Narrow => "narrow",
        FamilyTag::Regular => "regular",
        FamilyTag::Wide => "wide",
        FamilyTag::Custom => "custom",
    }
}
