//! Topology labeling: particle connectivity, counterfactual merge/split
//! checks, and the segment-level scene graph.

mod connectivity;
mod dynamic;
mod regions;
mod scene_graph;
mod static_check;
mod union_find;

pub use connectivity::{build_rest_graph, ConnectivityGraph};
pub use dynamic::dynamic_check;
pub use regions::{find_check_regions, CheckKind, CheckRegion};
pub use scene_graph::{
    assign_to_segments, EventOutcome, SceneTopologyGraph, SegmentNode, TopologyLabel,
};
pub use static_check::{static_check, StaticCheckReport};

use crate::math::Real;
use crate::mpm::{cfl_dt, MaterialParams, SimError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopoError {
    #[error("need at least {needed} particles, got {got}")]
    TooFewParticles { needed: usize, got: usize },
    #[error("particles {a} and {b} share a rest position")]
    DuplicateRestPositions { a: usize, b: usize },
    #[error("check region has an empty side")]
    EmptyRegionSide,
    #[error("check region sides overlap")]
    OverlappingRegionSides,
    #[error("counterfactual simulation diverged: {source}")]
    CheckDiverged {
        #[source]
        source: SimError,
    },
    #[error("region references dead segment {node}")]
    DeadSegment { node: u32 },
    #[error("particle {particle} outside the graph's particle range")]
    ParticleOutOfRange { particle: u32 },
    #[error("particle {particle} already owned by a segment")]
    ParticleAlreadyOwned { particle: u32 },
    #[error("chain needs at least 2 segments (3 if closed), got {segments}")]
    ChainTooShort { segments: usize },
    #[error("merge region sides resolve to no distinct segment pair")]
    DegenerateMerge,
}

/// Thresholds and counterfactual-check parameters. All lengths in meters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopoConfig {
    /// Mean rest inter-particle spacing h.
    pub h: Real,
    /// Simulation grid spacing; also the occupancy voxel size.
    pub dx: Real,
    /// Finger-contact gate for region finding (phi below this = touching).
    pub contact_threshold: Real,
    /// Slab dilation δ around the inter-finger volume.
    pub slab_dilation: Real,
    /// Merge distance threshold τ_merge.
    pub tau_merge: Real,
    /// Split distance threshold τ_split.
    pub tau_split: Real,
    /// Rest-graph geodesic distance beyond which one component's pressed
    /// sides count as distinct branches (self-merge candidates).
    pub branch_threshold: Real,
    /// Minimum particles per region side.
    pub min_region: usize,
    /// Speed applied to each side during a check.
    pub v_check: Real,
    /// Substeps the side clamps are held at ±v_check.
    pub t_hold: usize,
    /// Free substeps after the clamps release.
    pub t_coast: usize,
    /// Grid spacing for check simulations. Finer than the main grid: at
    /// `dx` a sub-cell gap entrains both bodies into one velocity field,
    /// which would make every contact read as merged.
    pub check_dx: Real,
    /// Substep length for check simulations.
    pub check_dt: Real,
    /// Restrict check copies to particles within this radius of the region
    /// (plus the pull distance); infinite = copy the whole state.
    pub local_radius: Real,
}

impl TopoConfig {
    /// Thresholds scaled from the particle spacing `h` and grid spacing
    /// `dx`. The hold phase is sized so the clamped pull opens a candidate
    /// gap past the grid kernel's support (below that, a single velocity
    /// field keeps even unbonded bodies entrained); the coast phase is
    /// sized so a freely separating pair clears τ_split with margin.
    pub fn derived(h: Real, dx: Real, segment_length: Real, mat: &MaterialParams) -> Self {
        // One particle per cell: still cohesive (the kernel spans 1.5 h)
        // but with the smallest possible sticky range around contacts.
        let check_dx = h;
        let check_dt = cfl_dt(check_dx, mat);
        let v_check = 0.05;
        let rel_step = 2.0 * v_check * check_dt;
        let tau_split = 3.0 * h;
        TopoConfig {
            h,
            dx,
            contact_threshold: dx / 2.0,
            slab_dilation: 2.0 * h,
            tau_merge: 1.5 * h,
            tau_split,
            branch_threshold: 4.0 * segment_length,
            min_region: 8,
            v_check,
            t_hold: (((3.0 * check_dx).max(tau_split + h) / rel_step).ceil() as usize).max(25),
            t_coast: (((tau_split + 2.0 * h) / rel_step).ceil() as usize).max(25),
            check_dx,
            check_dt,
            local_radius: Real::INFINITY,
        }
    }
}
