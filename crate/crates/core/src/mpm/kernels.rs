//! The three MLS-MPM phases: P2G scatter, grid update, G2P gather.
//!
//! The scatter is single-threaded and order-deterministic; it is the
//! reference mode for bit-exact reproducibility. The gather writes only
//! per-particle slots and is safe to parallelize without changing results.

use super::grid::BackgroundGrid;
use super::particles::ParticleSystem;
use super::plasticity::plastic_return;
use super::{MaterialParams, SimConfig, SimError};
use crate::collider::{resolve_contact, Collider};
use crate::math::{svd3, Mat3, Real, Vec3};

/// Scatters mass and fused momentum+internal-force contributions:
///   mass_i     = sum_p w_ip m_p
///   momentum_i = sum_p w_ip [m_p v_p + (m_p C_p - (4/dx^2) dt V_p tau_p)(x_i - x_p)]
pub fn p2g_transfer(
    ps: &mut ParticleSystem,
    grid: &mut BackgroundGrid,
    mat: &MaterialParams,
    dt: Real,
) -> Result<(), SimError> {
    ps.stresses(mat);
    let d_inv = 4.0 / (grid.dx * grid.dx);
    for p in 0..ps.len() {
        let xp = ps.positions[p];
        let (base, w) = grid
            .stencil(&xp)
            .ok_or(SimError::OutOfDomain { particle: p })?;
        let m = ps.masses[p];
        let affine =
            ps.affine[p] * m - ps.stress_slice()[p] * (d_inv * dt * ps.rest_volumes[p]);
        let mv = ps.velocities[p] * m;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let weight = w[0][i] * w[1][j] * w[2][k];
                    let node = grid.idx(base[0] + i, base[1] + j, base[2] + k);
                    let dpos = grid.node_pos(base[0] + i, base[1] + j, base[2] + k) - xp;
                    grid.mass[node] += weight * m;
                    grid.momentum[node] += (mv + affine * dpos) * weight;
                }
            }
        }
    }
    Ok(())
}

/// Converts momentum to velocity, applies gravity, and projects velocities
/// at nodes in contact with the floor or a collider. After this call the
/// grid's `momentum` array holds velocities.
pub fn grid_update(
    grid: &mut BackgroundGrid,
    colliders: &[&dyn Collider],
    cfg: &SimConfig,
    time: Real,
) {
    let margin = grid.dx * 0.5;
    let up = Vec3::new(0.0, 0.0, 1.0);
    let [nx, ny, nz] = grid.dims;
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let node = grid.idx(ix, iy, iz);
                let mass = grid.mass[node];
                if mass <= 0.0 {
                    continue;
                }
                let mut v = grid.momentum[node] / mass + cfg.gravity * cfg.dt;
                let x = grid.node_pos(ix, iy, iz);
                if x.z - cfg.floor_height < margin {
                    v = resolve_contact(
                        &v,
                        &up,
                        &Vec3::zeros(),
                        cfg.friction_coefficient,
                        cfg.contact_mode,
                    );
                }
                for c in colliders {
                    let hit = c.query(&x, time);
                    if hit.phi < margin {
                        v = resolve_contact(
                            &v,
                            &hit.normal,
                            &hit.velocity,
                            cfg.friction_coefficient,
                            cfg.contact_mode,
                        );
                    }
                }
                grid.momentum[node] = v;
            }
        }
    }
}

/// Gathers velocities and APIC affine matrices, advects particles, updates
/// deformation gradients, and applies the plastic return mapping. The
/// Kirchhoff stress of the post-plasticity F is cached for the next scatter.
pub fn g2p_transfer(
    grid: &BackgroundGrid,
    ps: &mut ParticleSystem,
    mat: &MaterialParams,
    dt: Real,
) -> Result<(), SimError> {
    let d_inv = 4.0 / (grid.dx * grid.dx);
    for p in 0..ps.len() {
        let xp = ps.positions[p];
        let (base, w) = grid
            .stencil(&xp)
            .ok_or(SimError::OutOfDomain { particle: p })?;
        let mut v = Vec3::zeros();
        let mut b = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let weight = w[0][i] * w[1][j] * w[2][k];
                    let node = grid.idx(base[0] + i, base[1] + j, base[2] + k);
                    let vi = grid.momentum[node] * weight;
                    v += vi;
                    b += vi * (grid.node_pos(base[0] + i, base[1] + j, base[2] + k) - xp)
                        .transpose();
                }
            }
        }
        let c = b * d_inv;
        let f_trial = (Mat3::identity() + c * dt) * ps.def_grad()[p];
        if f_trial.iter().any(|x| !x.is_finite()) || !v.iter().all(|x| x.is_finite()) {
            return Err(SimError::NonFinite { particle: p });
        }
        let (f_new, tau) = plastic_return(&svd3(&f_trial), mat);
        ps.velocities[p] = v;
        ps.affine[p] = c;
        ps.positions[p] += v * dt;
        ps.set_def_grad_with_stress(p, f_new, tau);
    }
    ps.mark_stress_valid();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collider::{ColliderHit, ContactMode, HalfSpace};
    use crate::math::Aabb;
    use crate::mpm::plasticity::kirchhoff_stress;

    fn unit_grid(extent: Real, dx: Real) -> BackgroundGrid {
        BackgroundGrid::new(
            &Aabb {
                min: Vec3::zeros(),
                max: Vec3::repeat(extent),
            },
            dx,
            3,
        )
    }

    fn one_particle(at: Vec3) -> ParticleSystem {
        ParticleSystem::seeded(vec![at], vec![1], 1e-9, 1200.0)
    }

    #[test]
    fn resting_particle_scatters_mass_only() {
        let mat = MaterialParams::default();
        let mut grid = unit_grid(0.1, 0.01);
        let mut ps = one_particle(Vec3::new(0.043, 0.057, 0.049));
        p2g_transfer(&mut ps, &mut grid, &mat, 1e-4).unwrap();
        let m = ps.masses[0];
        assert!((grid.total_mass() - m).abs() <= 1e-12 * m);
        assert!(grid.total_momentum().norm() < 1e-24);
        for mom in &grid.momentum {
            assert!(mom.norm() < 1e-24);
        }
    }

    #[test]
    fn moving_particle_conserves_momentum_in_scatter() {
        let mat = MaterialParams::default();
        let mut grid = unit_grid(0.1, 0.01);
        // Exactly at a node center.
        let mut ps = one_particle(grid.node_pos(5, 5, 5));
        let v = Vec3::new(0.3, -0.2, 0.1);
        ps.velocities[0] = v;
        p2g_transfer(&mut ps, &mut grid, &mat, 1e-4).unwrap();
        let expect = v * ps.masses[0];
        assert!((grid.total_momentum() - expect).norm() <= 1e-12 * expect.norm());
    }

    /// Brute-force scatter oracle: loops nodes over all particles with its
    /// own B-spline formulation (distance-based, not base-offset).
    fn scatter_oracle(
        ps: &ParticleSystem,
        stresses: &[Mat3],
        grid: &BackgroundGrid,
        dt: Real,
    ) -> (Vec<Real>, Vec<Vec3>) {
        fn bspline(t: Real) -> Real {
            let a = t.abs();
            if a < 0.5 {
                0.75 - a * a
            } else if a < 1.5 {
                0.5 * (1.5 - a) * (1.5 - a)
            } else {
                0.0
            }
        }
        let d_inv = 4.0 / (grid.dx * grid.dx);
        let mut mass = vec![0.0; grid.node_count()];
        let mut mom = vec![Vec3::zeros(); grid.node_count()];
        let [nx, ny, nz] = grid.dims;
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let xi = grid.node_pos(ix, iy, iz);
                    let node = grid.idx(ix, iy, iz);
                    for p in 0..ps.len() {
                        let d = (xi - ps.positions[p]) / grid.dx;
                        let w = bspline(d.x) * bspline(d.y) * bspline(d.z);
                        if w == 0.0 {
                            continue;
                        }
                        let m = ps.masses[p];
                        let a = ps.affine[p] * m
                            - stresses[p] * (d_inv * dt * ps.rest_volumes[p]);
                        mass[node] += w * m;
                        mom[node] +=
                            (ps.velocities[p] * m + a * (xi - ps.positions[p])) * w;
                    }
                }
            }
        }
        (mass, mom)
    }

    #[test]
    fn stretched_block_matches_brute_force_oracle() {
        let mat = MaterialParams::default();
        let dx = 0.01;
        let mut grid = unit_grid(0.1, dx);
        // 10x10x10 block on a dx/2 lattice. The 0.0225 offset keeps particles
        // symmetric about grid nodes (exact interior force cancellation) while
        // the block faces land strictly between nodes.
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    pts.push(
                        Vec3::new(i as Real, j as Real, k as Real) * (dx / 2.0)
                            + Vec3::repeat(0.0225),
                    );
                }
            }
        }
        let n = pts.len();
        let volume = (dx / 2.0).powi(3);
        let mut ps = ParticleSystem::seeded(pts, vec![1; n], volume, mat.density);
        let stretch = Mat3::from_diagonal(&Vec3::new(1.05, 1.0, 1.0));
        for f in ps.def_grad_mut().iter_mut() {
            *f = stretch;
        }
        let dt = 1e-4;
        p2g_transfer(&mut ps, &mut grid, &mat, dt).unwrap();

        let stresses: Vec<Mat3> = ps
            .def_grad()
            .iter()
            .map(|f| kirchhoff_stress(&svd3(f), &mat))
            .collect();
        let (mass_o, mom_o) = scatter_oracle(&ps, &stresses, &grid, dt);
        let mom_scale = mom_o.iter().map(|m| m.norm()).fold(0.0, Real::max);
        for i in 0..grid.node_count() {
            assert!((grid.mass[i] - mass_o[i]).abs() <= 1e-12 * ps.total_mass());
            assert!((grid.momentum[i] - mom_o[i]).norm() <= 1e-9 * mom_scale);
        }

        // Interior nodes feel no net force; +x boundary nodes are pulled
        // back toward the block (tension), -x boundary pushed the other way.
        let block = Aabb::from_points(&ps.positions);
        let mut interior_max: Real = 0.0;
        let mut plus_face_seen = false;
        let mut minus_face_seen = false;
        let [nx, ny, nz] = grid.dims;
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let x = grid.node_pos(ix, iy, iz);
                    let mom = grid.momentum[grid.idx(ix, iy, iz)];
                    let inset = Vec3::new(
                        (x.x - block.min.x).min(block.max.x - x.x),
                        (x.y - block.min.y).min(block.max.y - x.y),
                        (x.z - block.min.z).min(block.max.z - x.z),
                    );
                    if inset.x > 1.6 * dx && inset.y > 1.6 * dx && inset.z > 1.6 * dx {
                        interior_max = interior_max.max(mom.norm());
                    }
                    // Nodes just off the x faces, centered in y/z.
                    if inset.y > 1.6 * dx && inset.z > 1.6 * dx {
                        if x.x > block.max.x && x.x < block.max.x + dx {
                            assert!(mom.x < 0.0, "+x face node not in tension");
                            plus_face_seen = true;
                        }
                        if x.x < block.min.x && x.x > block.min.x - dx {
                            assert!(mom.x > 0.0, "-x face node not in tension");
                            minus_face_seen = true;
                        }
                    }
                }
            }
        }
        assert!(plus_face_seen && minus_face_seen);
        assert!(interior_max <= 1e-9 * mom_scale, "interior {interior_max}");
    }

    #[test]
    fn out_of_domain_particle_names_its_index() {
        let mat = MaterialParams::default();
        let mut grid = unit_grid(0.05, 0.005);
        let mut ps = ParticleSystem::seeded(
            vec![Vec3::repeat(0.02), Vec3::new(0.02, 0.4, 0.02)],
            vec![1, 1],
            1e-9,
            1200.0,
        );
        match p2g_transfer(&mut ps, &mut grid, &mat, 1e-4) {
            Err(SimError::OutOfDomain { particle }) => assert_eq!(particle, 1),
            other => panic!("expected domain violation, got {other:?}"),
        }
    }

    #[test]
    fn grid_update_without_forces_is_momentum_over_mass() {
        let mut grid = unit_grid(0.05, 0.005);
        grid.mass[100] = 2.0;
        grid.momentum[100] = Vec3::new(1.0, -2.0, 0.5);
        grid.mass[200] = 0.5;
        grid.momentum[200] = Vec3::new(0.0, 0.25, 0.0);
        let cfg = SimConfig {
            gravity: Vec3::zeros(),
            floor_height: -1.0,
            ..SimConfig::new(1e-4)
        };
        grid_update(&mut grid, &[], &cfg, 0.0);
        assert_eq!(grid.momentum[100], Vec3::new(0.5, -1.0, 0.25));
        assert_eq!(grid.momentum[200], Vec3::new(0.0, 0.5, 0.0));
        assert_eq!(grid.momentum[0], Vec3::zeros());
    }

    #[test]
    fn floor_stops_downward_nodes() {
        let mut grid = unit_grid(0.05, 0.005);
        let cfg = SimConfig {
            gravity: Vec3::zeros(),
            floor_height: grid.node_pos(0, 0, 2).z + 0.001,
            ..SimConfig::new(1e-4)
        };
        // A node below the floor moving down, one moving up.
        let down = grid.idx(3, 3, 1);
        let up_node = grid.idx(5, 5, 1);
        grid.mass[down] = 1.0;
        grid.momentum[down] = Vec3::new(0.1, 0.0, -1.0);
        grid.mass[up_node] = 1.0;
        grid.momentum[up_node] = Vec3::new(0.1, 0.0, 0.5);
        grid_update(&mut grid, &[], &cfg, 0.0);
        assert!(grid.momentum[down].z >= 0.0);
        assert_eq!(grid.momentum[up_node], Vec3::new(0.1, 0.0, 0.5));
    }

    #[test]
    fn collider_projection_matches_half_space_rule() {
        let mut grid = unit_grid(0.05, 0.005);
        let wall = HalfSpace {
            normal: Vec3::new(1.0, 0.0, 0.0).normalize(),
            offset: 0.03,
            velocity: Vec3::new(0.2, 0.0, 0.0),
        };
        let cfg = SimConfig {
            gravity: Vec3::zeros(),
            floor_height: -1.0,
            contact_mode: ContactMode::Slip,
            ..SimConfig::new(1e-4)
        };
        let [nx, ny, nz] = grid.dims;
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let node = grid.idx(ix, iy, iz);
                    grid.mass[node] = 1.0;
                    grid.momentum[node] = Vec3::new(-0.5, 0.3, 0.0);
                }
            }
        }
        grid_update(&mut grid, &[&wall], &cfg, 0.0);
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let x = grid.node_pos(ix, iy, iz);
                    let v = grid.momentum[grid.idx(ix, iy, iz)];
                    let hit: ColliderHit = wall.query(&x, 0.0);
                    if hit.phi < grid.dx * 0.5 {
                        let rel = (v - hit.velocity).dot(&hit.normal);
                        assert!(rel >= -1e-12, "approaching after projection: {rel}");
                    } else {
                        assert_eq!(v, Vec3::new(-0.5, 0.3, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn rigid_translation_field_gathers_exactly() {
        let mat = MaterialParams::default();
        let mut grid = unit_grid(0.1, 0.01);
        let v = Vec3::new(0.2, 0.1, -0.3);
        grid.momentum.fill(v); // velocities after grid_update
        let mut ps = one_particle(Vec3::new(0.047, 0.052, 0.061));
        g2p_transfer(&grid, &mut ps, &mat, 1e-4).unwrap();
        assert!((ps.velocities[0] - v).norm() < 1e-12);
        assert!(ps.affine[0].norm() < 1e-10);
    }

    #[test]
    fn linear_velocity_field_recovers_its_gradient() {
        let mat = MaterialParams {
            yield_stress: 1e9, // keep the check purely elastic
            ..MaterialParams::default()
        };
        let mut grid = unit_grid(0.1, 0.01);
        let a = Mat3::new(0.8, -0.3, 0.1, 0.2, 0.5, -0.4, 0.0, 0.3, -0.6);
        let [nx, ny, nz] = grid.dims;
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let x = grid.node_pos(ix, iy, iz);
                    let node = grid.idx(ix, iy, iz);
                    grid.momentum[node] = a * x;
                }
            }
        }
        let mut ps = ParticleSystem::seeded(
            vec![Vec3::repeat(0.05), Vec3::new(0.043, 0.056, 0.049)],
            vec![1, 1],
            1e-9,
            1200.0,
        );
        g2p_transfer(&grid, &mut ps, &mat, 1e-7).unwrap();
        for p in 0..ps.len() {
            assert!((ps.affine[p] - a).norm() <= 1e-6, "C = {:?}", ps.affine[p]);
        }
    }

    #[test]
    fn zero_velocity_grid_leaves_particles_unchanged() {
        let mat = MaterialParams::default();
        let grid = unit_grid(0.1, 0.01);
        let start = Vec3::new(0.031, 0.062, 0.043);
        let mut ps = one_particle(start);
        g2p_transfer(&grid, &mut ps, &mat, 1e-4).unwrap();
        assert_eq!(ps.positions[0], start);
        assert_eq!(ps.def_grad()[0], Mat3::identity());

        // A mildly deformed elastic particle stays put too.
        let f = Mat3::from_diagonal(&Vec3::new(1.02, 0.99, 1.0));
        ps.def_grad_mut()[0] = f;
        g2p_transfer(&grid, &mut ps, &mat, 1e-4).unwrap();
        assert_eq!(ps.positions[0], start);
        assert!((ps.def_grad()[0] - f).norm() < 1e-12);
    }
}
