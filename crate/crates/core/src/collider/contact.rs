//! Contact resolution between grid nodes and rigid colliders.

use crate::math::{Real, Vec3};
use serde::{Deserialize, Serialize};

/// Result of a collider distance query.
#[derive(Debug, Clone, Copy)]
pub struct ColliderHit {
    /// Signed distance to the collider surface (negative inside).
    pub phi: Real,
    /// Outward unit normal.
    pub normal: Vec3,
    /// Rigid velocity of the collider at the query point.
    pub velocity: Vec3,
}

/// Anything the grid update can collide against.
pub trait Collider: Sync {
    fn query(&self, point: &Vec3, time: Real) -> ColliderHit;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ContactMode {
    #[default]
    Sticky,
    Slip,
}

/// Projects a node velocity against a contact.
///
/// Sticky: the node takes the collider velocity whenever it approaches.
/// Slip: the approaching normal component is removed and the tangential
/// remainder is reduced by the Coulomb rule.
/// Call only where the query reported contact (phi below the margin).
pub fn resolve_contact(
    node_velocity: &Vec3,
    normal: &Vec3,
    collider_velocity: &Vec3,
    friction: Real,
    mode: ContactMode,
) -> Vec3 {
    let rel = node_velocity - collider_velocity;
    let vn = rel.dot(normal);
    if vn >= 0.0 {
        return *node_velocity; // separating
    }
    match mode {
        ContactMode::Sticky => *collider_velocity,
        ContactMode::Slip => {
            let tangent = rel - normal * vn;
            let t_norm = tangent.norm();
            let scale = if t_norm > 1e-12 {
                (1.0 + friction * vn / t_norm).max(0.0)
            } else {
                0.0
            };
            collider_velocity + tangent * scale
        }
    }
}
