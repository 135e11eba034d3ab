//! Counterfactual merge/split decision by pulling region sides apart in a
//! throwaway copy of the simulation.

use super::{CheckKind, CheckRegion, TopoConfig, TopoError};
use crate::math::{Aabb, Mat3, Real, Vec3};
use crate::mpm::{step, BackgroundGrid, MaterialParams, ParticleSystem, SimConfig};
use crate::spatial::PointHash;

/// Pulls the region sides apart like a tensile test and reports whether
/// they behave as one body.
///
/// The copy starts from zeroed velocities. The outer half of each side (by
/// position along the region axis) is clamped at ±v_check for t_hold
/// substeps — long enough that an openable gap outruns the grid kernel's
/// support, since a single velocity field entrains even unbonded bodies at
/// sub-cell gaps — then everything coasts freely for t_coast substeps (no
/// end-effector, no gravity, no floor). The minimum cross-side distance is
/// measured with the commanded clamp translation subtracted, so bonded
/// material that recoils reads near its initial gap while separable
/// material keeps the coast drift. Merge regions return true iff that
/// corrected distance stays below τ_merge; split regions return true iff
/// it exceeds τ_split. The input state is never mutated.
pub fn dynamic_check(
    ps: &ParticleSystem,
    region: &CheckRegion,
    cfg: &TopoConfig,
    mat: &MaterialParams,
) -> Result<bool, TopoError> {
    region.validate()?;

    let pull = cfg.v_check * cfg.check_dt * (cfg.t_hold + cfg.t_coast) as Real;

    // Restrict the copy to material near the region; distant particles
    // cannot change the local separation within the check horizon.
    let center = region.center(&ps.positions);
    let (mut copy, side_a, side_b) = if cfg.local_radius.is_finite() {
        let radius = cfg.local_radius + pull;
        let mut keep: Vec<u32> = Vec::new();
        let mut remap = vec![u32::MAX; ps.len()];
        for (i, p) in ps.positions.iter().enumerate() {
            if (p - center).norm() <= radius {
                remap[i] = keep.len() as u32;
                keep.push(i as u32);
            }
        }
        let map = |side: &[u32]| -> Vec<u32> {
            side.iter()
                .map(|&p| remap[p as usize])
                .filter(|&p| p != u32::MAX)
                .collect()
        };
        let (a, b) = (map(&region.side_a), map(&region.side_b));
        if a.is_empty() || b.is_empty() {
            return Err(TopoError::EmptyRegionSide);
        }
        (ps.subset(&keep), a, b)
    } else {
        (ps.clone(), region.side_a.clone(), region.side_b.clone())
    };

    // A clean counterfactual: discard in-flight motion, keep deformation.
    copy.velocities.fill(Vec3::zeros());
    copy.affine.fill(Mat3::zeros());

    // Clamp the outer half of each side, leaving the candidate interface
    // free to respond — grips on a specimen, not a rigid-body shove.
    let clamp_a = outer_half(&copy.positions, &side_a, &region.axis, 1.0);
    let clamp_b = outer_half(&copy.positions, &side_b, &region.axis, -1.0);
    let hold = |copy: &mut ParticleSystem| {
        for &p in &clamp_a {
            copy.velocities[p as usize] = region.axis * cfg.v_check;
            copy.affine[p as usize] = Mat3::zeros();
        }
        for &p in &clamp_b {
            copy.velocities[p as usize] = -region.axis * cfg.v_check;
            copy.affine[p as usize] = Mat3::zeros();
        }
    };
    hold(&mut copy);

    let domain = Aabb::from_points(&copy.positions).dilated(pull + 4.0 * cfg.check_dx);
    let mut grid = BackgroundGrid::new(&domain, cfg.check_dx, 3);
    let mut sim = SimConfig::new(cfg.check_dt);
    sim.gravity = Vec3::zeros();
    sim.floor_height = domain.min.z - 1.0;

    let mut time = 0.0;
    for _ in 0..cfg.t_hold {
        step(&mut copy, &mut grid, &[], &sim, mat, time)
            .map_err(|source| TopoError::CheckDiverged { source })?;
        hold(&mut copy);
        time += sim.dt;
    }
    for _ in 0..cfg.t_coast {
        step(&mut copy, &mut grid, &[], &sim, mat, time)
            .map_err(|source| TopoError::CheckDiverged { source })?;
        time += sim.dt;
    }

    // Undo the commanded clamp translation before measuring.
    let shift = region.axis * (cfg.v_check * cfg.check_dt * cfg.t_hold as Real);
    let mut corrected = copy.positions.clone();
    for &p in &side_a {
        corrected[p as usize] -= shift;
    }
    for &p in &side_b {
        corrected[p as usize] += shift;
    }
    let d_min = min_cross_distance(&corrected, &side_a, &side_b);
    if std::env::var_os("TOPO_CHECK_DEBUG").is_some() {
        let raw = min_cross_distance(&copy.positions, &side_a, &side_b);
        eprintln!(
            "check {:?}: d_raw={:.4}mm d_corr={:.4}mm tau_m={:.4} tau_s={:.4}",
            region.kind,
            raw * 1e3,
            d_min * 1e3,
            cfg.tau_merge * 1e3,
            cfg.tau_split * 1e3,
        );
    }
    Ok(match region.kind {
        CheckKind::Merge => d_min < cfg.tau_merge,
        CheckKind::Split => d_min > cfg.tau_split,
    })
}

/// Side particles at or past the side's median coordinate along ±axis.
fn outer_half(positions: &[Vec3], side: &[u32], axis: &Vec3, sign: Real) -> Vec<u32> {
    let mut coords: Vec<Real> = side
        .iter()
        .map(|&p| sign * positions[p as usize].dot(axis))
        .collect();
    let mid = coords.len() / 2;
    coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = coords[mid];
    side.iter()
        .copied()
        .filter(|&p| sign * positions[p as usize].dot(axis) >= median)
        .collect()
}

fn min_cross_distance(positions: &[Vec3], a: &[u32], b: &[u32]) -> Real {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if large.len() > 64 {
        let pts: Vec<Vec3> = large.iter().map(|&p| positions[p as usize]).collect();
        let aabb = Aabb::from_points(&pts);
        let extent = (aabb.max - aabb.min).max() / (large.len() as Real).cbrt();
        let hash = PointHash::build(&pts, extent.max(1e-6));
        small
            .iter()
            .filter_map(|&p| hash.nearest(&positions[p as usize]))
            .map(|(_, d)| d)
            .fold(Real::INFINITY, Real::min)
    } else {
        let mut best = Real::INFINITY;
        for &i in small {
            for &j in large {
                best = best.min((positions[i as usize] - positions[j as usize]).norm());
            }
        }
        best
    }
}
