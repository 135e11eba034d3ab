//! Keyframed grip episodes: simulate a parameterized grasp, run gated
//! counterfactual topology checks, and record the label trajectory.

use super::{seed_particles, segment_chains, SceneSpec, ScenegenError};
use crate::collider::{Collider, ContactMode, EndEffectorSpec, GripTrajectory, ParallelJawGripper};
use crate::math::{Aabb, Real, Vec3};
use crate::meshing::{dual_contour, sdf_from_particles, SurfaceMesh};
use crate::mpm::{cfl_dt, step, BackgroundGrid, MaterialParams, ParticleSystem, SimConfig};
use crate::topo::{
    assign_to_segments, build_rest_graph, dynamic_check, find_check_regions, CheckKind,
    CheckRegion, EventOutcome, SceneTopologyGraph, TopoConfig, TopoError, TopologyLabel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Resolution and bookkeeping knobs for episode generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    /// Particle lattice spacing.
    pub h: Real,
    /// Simulation grid spacing.
    pub dx: Real,
    pub mat: MaterialParams,
    /// Keyframes recorded per episode, including the initial state.
    pub keyframes: usize,
    pub segments_per_object: usize,
    /// Rest-graph neighbor count.
    pub knn: usize,
    /// Component-mesh particle radius and lattice spacing, as multiples of h.
    pub mesh_radius_factor: Real,
    pub mesh_spacing_factor: Real,
    /// Counterfactual checks copy only material within this radius.
    pub local_check_radius: Real,
    /// A candidate region is re-checked once the grip width has closed this
    /// far since the last check of the same region. Coarser than the check
    /// thresholds on purpose: each check is a full counterfactual rollout,
    /// and the forced final-keyframe pass already pins down the end label.
    pub recheck_width_step: Real,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            h: 0.003,
            dx: 0.006,
            mat: MaterialParams::default(),
            keyframes: 75,
            segments_per_object: 16,
            knn: 6,
            mesh_radius_factor: 1.1,
            mesh_spacing_factor: 0.75,
            local_check_radius: 0.04,
            recheck_width_step: 0.006,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), ScenegenError> {
        if self.h <= 0.0 || self.dx <= 0.0 {
            return Err(ScenegenError::BadSpec("spacings must be positive".into()));
        }
        if self.keyframes < 2 {
            return Err(ScenegenError::BadSpec("need at least 2 keyframes".into()));
        }
        if self.segments_per_object < 3 || self.knn == 0 {
            return Err(ScenegenError::BadSpec("degenerate graph parameters".into()));
        }
        Ok(())
    }

    /// Check thresholds for a scene, scaled from the shortest segment.
    pub fn topo_config(&self, scene: &SceneSpec) -> TopoConfig {
        let seg = match *scene {
            SceneSpec::TwoRolls { length, .. } => length / self.segments_per_object as Real,
            SceneSpec::Doughnut { major, .. } => {
                2.0 * std::f64::consts::PI * major / self.segments_per_object as Real
            }
        };
        let mut topo = TopoConfig::derived(self.h, self.dx, seg, &self.mat);
        topo.local_radius = self.local_check_radius;
        topo
    }
}

/// End-effector pose snapshot at one keyframe.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EePoseRecord {
    pub t_x: Real,
    pub t_y: Real,
    pub theta_z: Real,
    pub center_z: Real,
    pub width: Real,
}

/// Confirmed topology event, anchored to the keyframe where its check ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub keyframe: usize,
    pub kind: CheckKind,
    pub outcome: EventOutcome,
}

/// One recorded state. `index` is the raw keyframe number and survives
/// subsampling, so frame directories keep their original names.
#[derive(Debug, Clone)]
pub struct Keyframe {
    pub index: usize,
    pub time: Real,
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    /// Connectivity component id per particle, contiguous from 1.
    pub labels: Vec<u32>,
    pub ee: EePoseRecord,
    pub label: TopologyLabel,
}

/// A full generated episode.
#[derive(Debug, Clone)]
pub struct Episode {
    pub scene: SceneSpec,
    pub ee: EndEffectorSpec,
    pub traj: GripTrajectory,
    pub seed: u64,
    pub keyframes: Vec<Keyframe>,
    pub events: Vec<EventRecord>,
}

fn ee_pose(traj: &GripTrajectory, t: Real) -> EePoseRecord {
    EePoseRecord {
        t_x: traj.t_x,
        t_y: traj.t_y,
        theta_z: traj.theta_z,
        center_z: traj.center_z,
        width: traj.width(t.clamp(0.0, traj.duration)),
    }
}

/// Candidate identity for check gating: kind plus the connectivity
/// components its sides live in. Component ids are renumbered when an event
/// lands, which simply retires stale entries and re-checks fresh ones.
fn signature(region: &CheckRegion, labels: &[u32]) -> (u8, Vec<u32>) {
    let comps: BTreeSet<u32> = region
        .side_a
        .iter()
        .chain(&region.side_b)
        .map(|&p| labels[p as usize])
        .collect();
    (matches!(region.kind, CheckKind::Merge) as u8, comps.into_iter().collect())
}

/// Simulates one grip episode and tracks its topology label.
///
/// The scene is seeded from `seed`, dropped under gravity onto the floor at
/// z = 0, and gripped by slip-contact fingers following `traj`. After every
/// keyframe interval, candidate regions between the fingers run gated
/// counterfactual checks; confirmed events update the connectivity and
/// scene graphs. The final keyframe always re-checks every candidate so the
/// end label reflects the settled state. Non-finite state or a particle
/// escaping the grid aborts with `Faulty`.
pub fn run_episode(
    scene: &SceneSpec,
    ee: EndEffectorSpec,
    traj: GripTrajectory,
    cfg: &GenConfig,
    seed: u64,
) -> Result<Episode, ScenegenError> {
    cfg.validate()?;
    scene.validate()?;
    ee.validate().map_err(ScenegenError::BadSpec)?;
    traj.validate().map_err(ScenegenError::BadSpec)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ps = seed_particles(scene, cfg.h, &cfg.mat, &mut rng)?;
    let gripper = ParallelJawGripper::new(ee.clone(), traj, cfg.h / 2.0)?;

    // Generous margins: pinches extrude material sideways and the fingers
    // sweep beyond the initial footprint.
    let domain = Aabb::from_points(&ps.positions).dilated(0.08);
    let mut grid = BackgroundGrid::new(&domain, cfg.dx, 3);
    let mut sim = SimConfig::for_material(cfg.dx, &cfg.mat);
    sim.contact_mode = ContactMode::Slip;
    sim.floor_height = 0.0;

    let topo = cfg.topo_config(scene);
    let mut conn = build_rest_graph(ps.rest_positions(), cfg.knn)?;
    let mut graph = SceneTopologyGraph::new(ps.len());
    for (object, (centers, closed)) in segment_chains(scene, cfg.segments_per_object)
        .into_iter()
        .enumerate()
    {
        let own: Vec<u32> = (0..ps.len() as u32)
            .filter(|&p| ps.labels[p as usize] == object as u32 + 1)
            .collect();
        let points: Vec<Vec3> = own.iter().map(|&p| ps.rest_positions()[p as usize]).collect();
        let segments = assign_to_segments(&points, &centers)
            .into_iter()
            .map(|seg| seg.into_iter().map(|i| own[i as usize]).collect())
            .collect();
        graph.add_chain(segments, closed)?;
    }

    let total_substeps = (traj.duration / sim.dt).ceil() as usize;
    let spi = total_substeps.div_ceil(cfg.keyframes - 1).max(1);

    let mut labels = conn.labels();
    let mut keyframes = Vec::with_capacity(cfg.keyframes);
    keyframes.push(Keyframe {
        index: 0,
        time: 0.0,
        positions: ps.positions.clone(),
        velocities: ps.velocities.clone(),
        labels: labels.clone(),
        ee: ee_pose(&traj, 0.0),
        label: graph.topology_label(),
    });

    let mut events = Vec::new();
    let mut last_checked: BTreeMap<(u8, Vec<u32>), Real> = BTreeMap::new();
    let colliders: [&dyn Collider; 1] = [&gripper];

    for kf in 1..cfg.keyframes {
        let final_kf = kf == cfg.keyframes - 1;
        for s in 0..spi {
            let t = ((kf - 1) * spi + s) as Real * sim.dt;
            step(&mut ps, &mut grid, &colliders, &sim, &cfg.mat, t).map_err(|e| {
                ScenegenError::Faulty { keyframe: kf, why: e.to_string() }
            })?;
        }
        let time = (kf * spi) as Real * sim.dt;
        if !ps.positions.iter().all(|p| p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            return Err(ScenegenError::Faulty {
                keyframe: kf,
                why: "non-finite particle position".into(),
            });
        }

        let width = traj.width(time.clamp(0.0, traj.duration));
        let mut checked_now: BTreeSet<(u8, Vec<u32>)> = BTreeSet::new();
        // Re-scan after every landed event: outcomes change the component
        // structure, which can surface (or retract) other candidates.
        'rescan: loop {
            let regions = find_check_regions(&ps, &gripper, &conn, &topo, time);
            for region in &regions {
                let sig = signature(region, &labels);
                let due = match last_checked.get(&sig) {
                    None => true,
                    Some(&w) => w - width >= cfg.recheck_width_step,
                } || (final_kf && !checked_now.contains(&sig));
                if !due || checked_now.contains(&sig) {
                    continue;
                }
                checked_now.insert(sig.clone());
                last_checked.insert(sig, width);
                if !dynamic_check(&ps, region, &topo, &cfg.mat)? {
                    continue;
                }
                match graph.apply_event(&mut conn, region, &ps.positions, &topo) {
                    Ok(outcome) => {
                        events.push(EventRecord { keyframe: kf, kind: region.kind, outcome });
                        labels = conn.labels();
                        continue 'rescan;
                    }
                    // A prior event this keyframe emptied one of the region's
                    // segments; the candidate is stale, not fatal.
                    Err(TopoError::DeadSegment { .. }) => continue,
                    Err(e) => return Err(e.into()),
                }
            }
            break;
        }

        keyframes.push(Keyframe {
            index: kf,
            time,
            positions: ps.positions.clone(),
            velocities: ps.velocities.clone(),
            labels: labels.clone(),
            ee: ee_pose(&traj, time),
            label: graph.topology_label(),
        });
    }

    Ok(Episode { scene: scene.clone(), ee, traj, seed, keyframes, events })
}

/// Dual-contoured surface per connectivity component, keyed by component id.
/// Components too small to carry a surface at the mesh resolution are skipped.
pub fn component_meshes(
    positions: &[Vec3],
    labels: &[u32],
    cfg: &GenConfig,
) -> Vec<(u32, SurfaceMesh)> {
    let radius = cfg.mesh_radius_factor * cfg.h;
    let spacing = cfg.mesh_spacing_factor * cfg.h;
    let mut by_comp: BTreeMap<u32, Vec<Vec3>> = BTreeMap::new();
    for (p, &l) in positions.iter().zip(labels) {
        by_comp.entry(l).or_default().push(*p);
    }
    let mut meshes = Vec::new();
    for (comp, points) in by_comp {
        if points.len() < 8 {
            continue;
        }
        let field = sdf_from_particles(&points, radius, spacing, 2.0 * radius);
        let mesh = dual_contour(&field, 0.0);
        if !mesh.is_empty() {
            meshes.push((comp, mesh));
        }
    }
    meshes
}

/// Keeps `n` evenly spaced keyframes (always the first and last) and snaps
/// each event to the nearest retained keyframe, ties toward the later one.
pub fn subsample(episode: &Episode, n: usize) -> Episode {
    let k = episode.keyframes.len();
    assert!(n >= 2, "subsampling needs at least the endpoints");
    if n >= k {
        return episode.clone();
    }
    let picks: Vec<usize> = (0..n)
        .map(|i| (i as Real * (k - 1) as Real / (n - 1) as Real).round() as usize)
        .collect();
    let retained: Vec<usize> = picks.iter().map(|&i| episode.keyframes[i].index).collect();
    let events = episode
        .events
        .iter()
        .map(|e| {
            let mut best = retained[0];
            for &r in &retained {
                let (d, bd) = (r.abs_diff(e.keyframe), best.abs_diff(e.keyframe));
                if d < bd || (d == bd && r > best) {
                    best = r;
                }
            }
            EventRecord { keyframe: best, ..*e }
        })
        .collect();
    Episode {
        keyframes: picks.iter().map(|&i| episode.keyframes[i].clone()).collect(),
        events,
        ..episode.clone()
    }
}
