//! Rigid parallel-jaw end-effectors as time-varying signed distance fields.

mod contact;
mod gripper;
mod sdf;

pub use contact::{resolve_contact, Collider, ColliderHit, ContactMode};
pub use gripper::{EndEffectorSpec, FamilyTag, GripTrajectory, HalfSpace, ParallelJawGripper};
pub use sdf::{sdf_from_mesh, FingerSDF};
