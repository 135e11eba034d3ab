//! Golden engine scenarios for the counterfactual topology checks: canonical
//! roll scenes squeezed by parallel-jaw grippers, with the recorded outcomes
//! asserted as fixtures.

use claylab_core::collider::{
    Collider, ContactMode, EndEffectorSpec, GripTrajectory, ParallelJawGripper,
};
use claylab_core::math::{Aabb, Real, Vec3};
use claylab_core::mpm::{step, BackgroundGrid, MaterialParams, ParticleSystem, SimConfig};
use claylab_core::topo::{
    assign_to_segments, build_rest_graph, dynamic_check, find_check_regions, static_check,
    CheckKind, CheckRegion, EventOutcome, SceneTopologyGraph, TopoConfig, TopologyLabel,
};

const H: Real = 0.002;
const DX: Real = 0.004;
const ROLL_R: Real = 0.007;
const ROLL_L: Real = 0.03;
const SEGMENTS: usize = 16;

fn mat() -> MaterialParams {
    MaterialParams::default()
}

fn cfg() -> TopoConfig {
    TopoConfig::derived(H, DX, ROLL_L / SEGMENTS as Real, &mat())
}

/// Lattice-filled cylinder along y.
fn roll(center: Vec3, radius: Real, length: Real) -> Vec<Vec3> {
    let nr = (radius / H).ceil() as i64;
    let ny = (length / (2.0 * H)).ceil() as i64;
    let mut pts = Vec::new();
    for i in -nr..=nr {
        for j in -ny..=ny {
            for k in -nr..=nr {
                let p = Vec3::new(i as Real, j as Real, k as Real) * H;
                if p.x * p.x + p.z * p.z <= radius * radius && p.y.abs() <= length / 2.0 {
                    pts.push(center + p);
                }
            }
        }
    }
    pts
}

/// Segment centers of a roll chain along y.
fn chain_centers(center: Vec3, length: Real) -> Vec<Vec3> {
    let seg = length / SEGMENTS as Real;
    (0..SEGMENTS)
        .map(|s| center + Vec3::new(0.0, -length / 2.0 + (s as Real + 0.5) * seg, 0.0))
        .collect()
}

/// Runs the whole grip trajectory; returns the sim time afterwards.
fn run_grip(ps: &mut ParticleSystem, grip: &ParallelJawGripper, mat: &MaterialParams) -> Real {
    // Generous dilation: frictionless extrusion keeps coasting after it
    // clears the fingers (no gravity, no floor in the grip phase).
    let domain = Aabb::from_points(&ps.positions).dilated(0.08);
    let mut grid = BackgroundGrid::new(&domain, DX, 3);
    let mut cfg = SimConfig::for_material(DX, mat);
    cfg.gravity = Vec3::zeros();
    cfg.floor_height = domain.min.z - 1.0;
    // Slip fingers: sticky contact freezes pinched material laterally (both
    // faces project its velocity), so nothing could ever extrude from a pinch.
    cfg.contact_mode = ContactMode::Slip;
    let steps = (grip.traj.duration / cfg.dt).ceil() as usize;
    let colliders: [&dyn Collider; 1] = [grip];
    for s in 0..steps {
        step(ps, &mut grid, &colliders, &cfg, mat, s as Real * cfg.dt).unwrap();
    }
    steps as Real * cfg.dt
}

fn grip(spec: EndEffectorSpec, w_open: Real, w_min: Real) -> ParallelJawGripper {
    let close_time = (w_open - w_min) / 2.0 / 0.05;
    let traj = GripTrajectory {
        t_x: 0.0,
        t_y: 0.0,
        theta_z: 0.0,
        w_open,
        w_min,
        close_time,
        duration: close_time + 0.08,
        center_z: 0.0,
    };
    ParallelJawGripper::new(spec, traj, 0.0015).unwrap()
}

/// Two rolls with kissing surfaces (cross-lattice gap 2h). Never squeezed,
/// the distance baseline reads them as one body while the counterfactual
/// check separates them; after a deep vise squeeze both agree on one body.
#[test]
fn touching_rolls_separate_until_squeezed() {
    let mat = mat();
    let cfg = cfg();
    // The lattice fill reaches 3h of the nominal 3.5h radius, so centers at
    // ±4h leave a 2h cross-lattice gap: the dual-contoured surfaces kiss.
    let off = Vec3::new(4.0 * H, 0.0, 0.0);
    let pts_a = roll(off, ROLL_R, ROLL_L);
    let pts_b = roll(-off, ROLL_R, ROLL_L);
    let (na, nb) = (pts_a.len(), pts_b.len());
    let mut rest = pts_a;
    rest.extend_from_slice(&pts_b);
    let mut labels = vec![1; na];
    labels.extend(std::iter::repeat(2).take(nb));
    let mut ps = ParticleSystem::seeded(rest.clone(), labels, H.powi(3), mat.density);

    let graph = build_rest_graph(&rest, 6).unwrap();
    assert_eq!(graph.component_count(), 2, "seeded rolls must start separate");

    // The distance baseline cannot see the boundary between kissing rolls.
    let baseline = static_check(&ps.positions, 2.5 * H).unwrap();
    assert_eq!(baseline.label.c, 1, "baseline should fuse touching rolls");

    // Counterfactual pull on the untouched scene: they come apart.
    let contact = CheckRegion {
        side_a: (0..na as u32).collect(),
        side_b: (na as u32..(na + nb) as u32).collect(),
        axis: Vec3::new(1.0, 0.0, 0.0),
        kind: CheckKind::Merge,
    };
    assert!(
        !dynamic_check(&ps, &contact, &cfg, &mat).unwrap(),
        "kissing rolls must not read as merged"
    );

    // Scene graph: two open chains.
    let mut centers = chain_centers(off, ROLL_L);
    centers.extend(chain_centers(-off, ROLL_L));
    let segs = assign_to_segments(&rest, &centers);
    let mut graph = build_rest_graph(&rest, 6).unwrap();
    let mut scene = SceneTopologyGraph::new(rest.len());
    scene.add_chain(segs[..SEGMENTS].to_vec(), false).unwrap();
    scene.add_chain(segs[SEGMENTS..].to_vec(), false).unwrap();
    assert_eq!(scene.topology_label(), TopologyLabel::new(2, vec![0, 0]));

    // Deep vise squeeze: 32 mm opening down to 14 mm across both rolls.
    let vise = grip(EndEffectorSpec::wide(), 0.032, 0.014);
    let t_end = run_grip(&mut ps, &vise, &mat);

    let regions = find_check_regions(&ps, &vise, &graph, &cfg, t_end);
    let merge = regions
        .iter()
        .find(|r| r.kind == CheckKind::Merge)
        .expect("squeezed rolls must yield a merge candidate");
    assert!(
        dynamic_check(&ps, merge, &cfg, &mat).unwrap(),
        "squeezed rolls must read as merged"
    );
    // The same squeeze must not also read as a split of either roll.
    for r in regions.iter().filter(|r| r.kind == CheckKind::Split).take(1) {
        assert!(
            !dynamic_check(&ps, r, &cfg, &mat).unwrap(),
            "vise squeeze must not split a roll"
        );
    }

    let outcome = scene
        .apply_event(&mut graph, merge, &ps.positions, &cfg)
        .unwrap();
    assert_eq!(outcome, EventOutcome::MergedComponents);
    assert_eq!(scene.topology_label(), TopologyLabel::new(1, vec![0]));
    assert_eq!(graph.component_count(), 1);
}

/// Scissor pinches of increasing depth on one roll: the split verdict is
/// monotone in depth, false at a 30% pinch, true when pinched through.
#[test]
fn pinch_split_verdict_is_monotone_in_depth() {
    let mat = mat();
    let cfg = cfg();
    let rest = roll(Vec3::zeros(), ROLL_R, ROLL_L);
    let n = rest.len();

    // Final openings: 30% of diameter pinched, 65%, and pinched through.
    let depths = [0.7 * 2.0 * ROLL_R, 0.35 * 2.0 * ROLL_R, 0.0008];
    let mut verdicts = Vec::new();
    let mut deepest: Option<(ParticleSystem, CheckRegion)> = None;
    for &w_min in &depths {
        let mut ps =
            ParticleSystem::seeded(rest.clone(), vec![1; n], H.powi(3), mat.density);
        let graph = build_rest_graph(&rest, 6).unwrap();
        let scissors = grip(EndEffectorSpec::narrow(), 0.018, w_min);
        let t_end = run_grip(&mut ps, &scissors, &mat);
        let regions = find_check_regions(&ps, &scissors, &graph, &cfg, t_end);
        let split = regions
            .into_iter()
            .find(|r| r.kind == CheckKind::Split)
            .expect("pinched roll must yield a split candidate");
        let verdict = dynamic_check(&ps, &split, &cfg, &mat).unwrap();
        verdicts.push(verdict);
        deepest = Some((ps, split));
    }
    assert!(!verdicts[0], "30% pinch must not split");
    assert!(*verdicts.last().unwrap(), "full pinch must split");
    assert!(
        verdicts.windows(2).all(|w| w[0] <= w[1]),
        "split verdict must be monotone in pinch depth: {verdicts:?}"
    );

    // Applying the confirmed split cuts the chain: (c=2, g={0,0}).
    let (ps, split) = deepest.unwrap();
    let mut graph = build_rest_graph(&rest, 6).unwrap();
    let mut scene = SceneTopologyGraph::new(n);
    let segs = assign_to_segments(&rest, &chain_centers(Vec3::zeros(), ROLL_L));
    scene.add_chain(segs, false).unwrap();
    let outcome = scene
        .apply_event(&mut graph, &split, &ps.positions, &cfg)
        .unwrap();
    assert_eq!(outcome, EventOutcome::Split);
    assert_eq!(scene.topology_label(), TopologyLabel::new(2, vec![0, 0]));
}
