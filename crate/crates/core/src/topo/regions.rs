//! Candidate merge/split regions between the gripper fingers.

use super::{ConnectivityGraph, TopoConfig, TopoError};
use crate::collider::{Collider, ParallelJawGripper};
use crate::math::{Real, Vec3};
use crate::mpm::ParticleSystem;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Merge,
    Split,
}

/// Two particle sets that may have merged or split, plus the axis along
/// which a counterfactual check pulls them apart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRegion {
    pub side_a: Vec<u32>,
    pub side_b: Vec<u32>,
    /// Unit vector; side A is pulled along +axis, side B along −axis.
    pub axis: Vec3,
    pub kind: CheckKind,
}

impl CheckRegion {
    pub fn validate(&self) -> Result<(), TopoError> {
        if self.side_a.is_empty() || self.side_b.is_empty() {
            return Err(TopoError::EmptyRegionSide);
        }
        let a: std::collections::BTreeSet<u32> = self.side_a.iter().copied().collect();
        if self.side_b.iter().any(|p| a.contains(p)) {
            return Err(TopoError::OverlappingRegionSides);
        }
        Ok(())
    }

    fn centroid(positions: &[Vec3], side: &[u32]) -> Vec3 {
        side.iter().map(|&p| positions[p as usize]).sum::<Vec3>() / side.len() as Real
    }

    /// Mean of both side centroids.
    pub fn center(&self, positions: &[Vec3]) -> Vec3 {
        (Self::centroid(positions, &self.side_a) + Self::centroid(positions, &self.side_b)) / 2.0
    }
}

fn min_cross_distance(positions: &[Vec3], a: &[u32], b: &[u32]) -> Real {
    let mut best = Real::INFINITY;
    for &i in a {
        for &j in b {
            best = best.min((positions[i as usize] - positions[j as usize]).norm());
        }
    }
    best
}

/// Orients `axis` so that it points from side B toward side A.
fn oriented(axis: Vec3, positions: &[Vec3], a: &[u32], b: &[u32]) -> Vec3 {
    let d = CheckRegion::centroid(positions, a) - CheckRegion::centroid(positions, b);
    if d.dot(&axis) < 0.0 {
        -axis
    } else {
        axis
    }
}

/// Finds candidate merge/split regions inside the inter-finger slab.
///
/// Merge candidates pair slab particles that are pressed together (min cross
/// distance below τ_merge) and belong to distinct components, or to
/// graph-distant branches of one component. Split candidates bisect each
/// component's slab particles along the in-plane axis.
pub fn find_check_regions(
    ps: &ParticleSystem,
    ee: &ParallelJawGripper,
    graph: &ConnectivityGraph,
    cfg: &TopoConfig,
    time: Real,
) -> Vec<CheckRegion> {
    let positions = &ps.positions;

    // Contact gate: the fingers must actually touch material.
    let touching = positions
        .iter()
        .any(|p| ee.query(p, time).phi < cfg.contact_threshold);
    if !touching {
        return Vec::new();
    }

    // Inter-finger slab, dilated by δ on every side.
    let half_gap = ee.traj.width(time) / 2.0 + cfg.slab_dilation;
    let half_width = ee.spec.finger_width / 2.0 + cfg.slab_dilation;
    let half_height = ee.spec.finger_height / 2.0 + cfg.slab_dilation;
    let mut slab: Vec<u32> = Vec::new();
    for (i, p) in positions.iter().enumerate() {
        let local = ee.grip_frame(p);
        if local.x.abs() <= half_gap && local.y.abs() <= half_width && local.z.abs() <= half_height
        {
            slab.push(i as u32);
        }
    }
    if slab.is_empty() {
        return Vec::new();
    }

    let labels = graph.labels();
    let mut by_component: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &p in &slab {
        by_component.entry(labels[p as usize]).or_default().push(p);
    }

    let closing = ee.traj.closing_axis();
    let in_plane = ee.in_plane_axis();
    let mut regions = Vec::new();

    // Merge candidates across distinct components.
    let comps: Vec<&Vec<u32>> = by_component.values().collect();
    for i in 0..comps.len() {
        for j in (i + 1)..comps.len() {
            let (a, b) = (comps[i], comps[j]);
            if a.len() < cfg.min_region || b.len() < cfg.min_region {
                continue;
            }
            if min_cross_distance(positions, a, b) < cfg.tau_merge {
                regions.push(CheckRegion {
                    side_a: a.clone(),
                    side_b: b.clone(),
                    axis: oriented(closing, positions, a, b),
                    kind: CheckKind::Merge,
                });
            }
        }
    }

    for comp in by_component.values() {
        // Self-merge candidates: bisect along the closing axis; the sides
        // must be pressed together yet far apart along the material.
        let center = CheckRegion::centroid(positions, comp).dot(&closing);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for &p in comp {
            if positions[p as usize].dot(&closing) >= center {
                a.push(p);
            } else {
                b.push(p);
            }
        }
        if a.len() >= cfg.min_region && b.len() >= cfg.min_region {
            let pressed = min_cross_distance(positions, &a, &b) < cfg.tau_merge;
            if pressed
                && graph
                    .geodesic_distance(&a, &b, cfg.branch_threshold)
                    .is_infinite()
            {
                let axis = oriented(closing, positions, &a, &b);
                regions.push(CheckRegion {
                    side_a: a,
                    side_b: b,
                    axis,
                    kind: CheckKind::Merge,
                });
            }
        }

        // Split candidates: bisect along the in-plane axis.
        let center = CheckRegion::centroid(positions, comp).dot(&in_plane);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for &p in comp {
            if positions[p as usize].dot(&in_plane) >= center {
                a.push(p);
            } else {
                b.push(p);
            }
        }
        if a.len() >= cfg.min_region && b.len() >= cfg.min_region {
            let axis = oriented(in_plane, positions, &a, &b);
            regions.push(CheckRegion {
                side_a: a,
                side_b: b,
                axis,
                kind: CheckKind::Split,
            });
        }
    }

    regions
}
