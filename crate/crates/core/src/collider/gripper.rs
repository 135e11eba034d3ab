//! Parallel-jaw end-effector: two rigid finger SDFs on a closing trajectory.

use super::contact::{Collider, ColliderHit};
use super::sdf::FingerSDF;
use crate::math::{Real, Vec3};
use crate::meshing::{primitives::box_mesh, MeshError, SurfaceMesh};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Narrow,
    Regular,
    Wide,
    Custom,
}

/// Finger box dimensions. Width spans the scissors-to-vise axis; thickness
/// is measured along the closing direction; height is vertical.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EndEffectorSpec {
    pub finger_width: Real,
    pub finger_thickness: Real,
    pub finger_height: Real,
    pub family_tag: FamilyTag,
}

impl EndEffectorSpec {
    pub fn with_width(width: Real, tag: FamilyTag) -> Self {
        EndEffectorSpec {
            finger_width: width,
            finger_thickness: 0.006,
            finger_height: 0.05,
            family_tag: tag,
        }
    }

    pub fn narrow() -> Self {
        Self::with_width(0.005, FamilyTag::Narrow)
    }

    pub fn regular() -> Self {
        Self::with_width(0.015, FamilyTag::Regular)
    }

    pub fn wide() -> Self {
        Self::with_width(0.040, FamilyTag::Wide)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.finger_width <= 0.0 || self.finger_thickness <= 0.0 || self.finger_height <= 0.0 {
            return Err("finger dimensions must be positive".into());
        }
        Ok(())
    }

    /// Axis-aligned finger mesh in the finger-local frame (centered).
    pub fn finger_mesh(&self) -> SurfaceMesh {
        box_mesh(
            Vec3::zeros(),
            Vec3::new(self.finger_thickness, self.finger_width, self.finger_height),
        )
    }
}

/// In-plane grip pose plus a linear closing profile with a terminal hold.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GripTrajectory {
    pub t_x: Real,
    pub t_y: Real,
    pub theta_z: Real,
    /// Gap between the finger inner faces at t = 0.
    pub w_open: Real,
    /// Final gap, reached at `close_time` and held to `duration`.
    pub w_min: Real,
    pub close_time: Real,
    pub duration: Real,
    /// Height of the finger centers above the world origin.
    pub center_z: Real,
}

impl GripTrajectory {
    pub fn validate(&self) -> Result<(), String> {
        if self.w_min < 0.0 {
            return Err("w_min must be non-negative".into());
        }
        if self.w_open < self.w_min {
            return Err("w_open must be at least w_min".into());
        }
        if !(self.close_time > 0.0 && self.duration >= self.close_time) {
            return Err("need 0 < close_time <= duration".into());
        }
        Ok(())
    }

    /// Opening width at `t`: linear from w_open to w_min, then a hold.
    pub fn width(&self, t: Real) -> Real {
        let t = t.clamp(0.0, self.duration);
        if t >= self.close_time {
            self.w_min
        } else {
            self.w_open + (self.w_min - self.w_open) * (t / self.close_time)
        }
    }

    /// Unit closing direction in the world frame (from +finger toward −finger).
    pub fn closing_axis(&self) -> Vec3 {
        Vec3::new(self.theta_z.cos(), self.theta_z.sin(), 0.0)
    }
}

/// Two identical finger SDFs placed symmetrically about the grip pose.
pub struct ParallelJawGripper {
    pub spec: EndEffectorSpec,
    pub traj: GripTrajectory,
    sdf: FingerSDF,
}

impl ParallelJawGripper {
    /// Builds box fingers from the spec dimensions.
    pub fn new(
        spec: EndEffectorSpec,
        traj: GripTrajectory,
        lattice_spacing: Real,
    ) -> Result<Self, MeshError> {
        Self::with_finger_mesh(&spec.finger_mesh(), spec, traj, lattice_spacing)
    }

    /// Uses a custom finger mesh (e.g. loaded from an OBJ file). The mesh is
    /// interpreted in the finger-local frame, centered on the finger origin.
    pub fn with_finger_mesh(
        mesh: &SurfaceMesh,
        spec: EndEffectorSpec,
        traj: GripTrajectory,
        lattice_spacing: Real,
    ) -> Result<Self, MeshError> {
        let sdf = FingerSDF::from_mesh(mesh, lattice_spacing)?;
        Ok(ParallelJawGripper { spec, traj, sdf })
    }

    /// World-space center of one finger (`side` = ±1) at time `t`.
    pub fn finger_center(&self, side: Real, t: Real) -> Vec3 {
        let offset = self.traj.width(t) / 2.0 + self.spec.finger_thickness / 2.0;
        Vec3::new(self.traj.t_x, self.traj.t_y, self.traj.center_z)
            + self.traj.closing_axis() * (side * offset)
    }

    fn to_local(&self, p: &Vec3, side: Real, t: Real) -> Vec3 {
        let d = p - self.finger_center(side, t);
        let (s, c) = self.traj.theta_z.sin_cos();
        // Rotate by −theta about z.
        Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    /// Grip-frame coordinates of `p`: x along the closing axis from the grip
    /// center, y the in-plane orthogonal, z relative to the finger centers.
    pub fn grip_frame(&self, p: &Vec3) -> Vec3 {
        let d = p - Vec3::new(self.traj.t_x, self.traj.t_y, self.traj.center_z);
        let (s, c) = self.traj.theta_z.sin_cos();
        Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    /// Unit in-plane axis orthogonal to the closing direction.
    pub fn in_plane_axis(&self) -> Vec3 {
        Vec3::new(-self.traj.theta_z.sin(), self.traj.theta_z.cos(), 0.0)
    }

    fn to_world_dir(&self, v: &Vec3) -> Vec3 {
        let (s, c) = self.traj.theta_z.sin_cos();
        Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
    }

    fn finger_velocity(&self, side: Real, t: Real) -> Vec3 {
        // Finite difference of the rigid pose, one-sided at the ends.
        let e = 1e-5_f64.min(self.traj.duration / 4.0);
        let t0 = (t - e).max(0.0);
        let t1 = (t + e).min(self.traj.duration);
        (self.finger_center(side, t1) - self.finger_center(side, t0)) / (t1 - t0)
    }
}

impl Collider for ParallelJawGripper {
    fn query(&self, point: &Vec3, time: Real) -> ColliderHit {
        let t = time.clamp(0.0, self.traj.duration);
        let phi_pos = self.sdf.sample(&self.to_local(point, 1.0, t));
        let phi_neg = self.sdf.sample(&self.to_local(point, -1.0, t));
        let side = if phi_pos <= phi_neg { 1.0 } else { -1.0 };
        let local = self.to_local(point, side, t);
        let grad = self.sdf.gradient(&local);
        let normal = if grad.norm() > 1e-9 {
            self.to_world_dir(&grad.normalize())
        } else {
            Vec3::new(0.0, 0.0, 1.0)
        };
        ColliderHit {
            phi: phi_pos.min(phi_neg),
            normal,
            velocity: self.finger_velocity(side, t),
        }
    }
}

/// Analytic half-space `z >= height is free`, used as a floor stand-in and
/// as a reference collider in tests.
pub struct HalfSpace {
    pub normal: Vec3,
    pub offset: Real,
    pub velocity: Vec3,
}

impl Collider for HalfSpace {
    fn query(&self, point: &Vec3, _time: Real) -> ColliderHit {
        ColliderHit {
            phi: point.dot(&self.normal) - self.offset,
            normal: self.normal,
            velocity: self.velocity,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_gripper() -> ParallelJawGripper {
        let spec = EndEffectorSpec::regular();
        let traj = GripTrajectory {
            t_x: 0.01,
            t_y: -0.02,
            theta_z: 0.3,
            w_open: 0.06,
            w_min: 0.004,
            close_time: 0.8,
            duration: 1.0,
            center_z: 0.025,
        };
        ParallelJawGripper::new(spec, traj, 0.0015).unwrap()
    }

    #[test]
    fn midpoint_phi_is_half_width() {
        let g = test_gripper();
        let mid = Vec3::new(g.traj.t_x, g.traj.t_y, g.traj.center_z);
        for t in [0.0, 0.3, 0.6] {
            let w = g.traj.width(t);
            let hit = g.query(&mid, t);
            assert!(
                (hit.phi - w / 2.0).abs() <= 2.0 * g.sdf.spacing(),
                "t={t}: phi {} vs w/2 {}",
                hit.phi,
                w / 2.0
            );
        }
    }

    #[test]
    fn far_point_positive_and_velocity_tracks_closing() {
        let g = test_gripper();
        let above = Vec3::new(g.traj.t_x, g.traj.t_y, 0.5);
        let hit = g.query(&above, 0.4);
        assert!(hit.phi > 0.3);
        // While closing, the minimizing finger moves at half the width rate.
        let closing_rate = (g.traj.w_open - g.traj.w_min) / g.traj.close_time;
        assert!((hit.velocity.norm() - closing_rate / 2.0).abs() < 1e-6);
    }

    #[test]
    fn closed_gripper_has_zero_velocity() {
        let g = test_gripper();
        let probe = Vec3::new(0.0, 0.0, 0.02);
        let hit = g.query(&probe, g.traj.duration);
        assert!(hit.velocity.norm() < 1e-12);
    }

    #[test]
    fn width_is_monotone_non_increasing() {
        let g = test_gripper();
        let mut last = Real::INFINITY;
        for i in 0..=100 {
            let w = g.traj.width(i as Real / 100.0);
            assert!(w <= last + 1e-15);
            last = w;
        }
        assert_eq!(g.traj.width(0.0), g.traj.w_open);
        assert_eq!(g.traj.width(g.traj.duration), g.traj.w_min);
    }

    #[test]
    fn query_is_lipschitz_in_space_and_time() {
        use rand::{Rng, SeedableRng};
        let g = test_gripper();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(51);
        let speed = (g.traj.w_open - g.traj.w_min) / g.traj.close_time;
        for _ in 0..300 {
            let p = Vec3::new(
                rng.gen_range(-0.05..0.07),
                rng.gen_range(-0.08..0.04),
                rng.gen_range(0.0..0.06),
            );
            let t = rng.gen_range(0.0..g.traj.duration);
            let dp = Vec3::from_fn(|_, _| rng.gen_range(-0.002..0.002));
            let dt = rng.gen_range(-0.01..0.01_f64);
            let t2 = (t + dt).clamp(0.0, g.traj.duration);
            let a = g.query(&p, t).phi;
            let b = g.query(&(p + dp), t2).phi;
            // The lattice interpolant deviates from the exact (1-Lipschitz)
            // distance by O(spacing) per sample.
            let slack = 2.0 * g.sdf.spacing();
            let bound = dp.norm() + speed * (t2 - t).abs() + slack;
            assert!((a - b).abs() <= bound, "dphi {} > {}", (a - b).abs(), bound);
        }
    }
}
