//! Distance-based topology baseline: radius-graph components plus mesh genus.

use super::union_find::UnionFind;
use super::{TopoError, TopologyLabel};
use crate::math::{Real, Vec3};
use crate::meshing::{dual_contour, euler_characteristic, sdf_from_particles};
use crate::spatial::PointHash;

/// Baseline label plus diagnostics for components whose mesh failed.
#[derive(Debug, Clone)]
pub struct StaticCheckReport {
    pub label: TopologyLabel,
    pub warnings: Vec<String>,
}

/// Labels a bare point cloud: components from the radius graph, per-component
/// genus from a dual-contoured particle SDF. This baseline cannot see whether
/// touching bodies are actually merged; it exists to document that failure.
pub fn static_check(points: &[Vec3], radius: Real) -> Result<StaticCheckReport, TopoError> {
    if points.is_empty() {
        return Err(TopoError::TooFewParticles { needed: 1, got: 0 });
    }
    assert!(radius > 0.0, "radius must be positive");

    let hash = PointHash::build(points, radius);
    let mut uf = UnionFind::new(points.len());
    for (i, p) in points.iter().enumerate() {
        hash.for_each_within(p, radius, |j, _| {
            if j > i {
                uf.union(i as u32, j as u32);
            }
        });
    }
    let labels = uf.labels();
    let c = *labels.iter().max().unwrap() as usize;

    let mut genera = Vec::with_capacity(c);
    let mut warnings = Vec::new();
    for comp in 1..=c as u32 {
        let members: Vec<Vec3> = points
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == comp)
            .map(|(p, _)| *p)
            .collect();
        let genus = match component_genus(&members, radius) {
            Ok(g) => g,
            Err(why) => {
                warnings.push(format!("component {comp}: {why}; genus set to 0"));
                0
            }
        };
        genera.push(genus);
    }
    Ok(StaticCheckReport {
        label: TopologyLabel::new(c, genera),
        warnings,
    })
}

fn component_genus(members: &[Vec3], radius: Real) -> Result<usize, String> {
    let particle_radius = 0.7 * radius;
    let spacing = 0.5 * radius;
    let field = sdf_from_particles(members, particle_radius, spacing, particle_radius + spacing);
    let mesh = dual_contour(&field, 0.0);
    if mesh.is_empty() {
        return Err("empty mesh".to_string());
    }
    let report = euler_characteristic(&mesh).map_err(|e| e.to_string())?;
    if report.genus < 0 {
        return Err(format!("negative genus {}", report.genus));
    }
    Ok(report.genus as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_far_clusters_are_two_components() {
        let mut pts = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let p = Vec3::new(i as Real, j as Real, k as Real) * 0.002;
                    pts.push(p);
                    pts.push(p + Vec3::new(10.0 * 0.003, 0.0, 0.0));
                }
            }
        }
        let report = static_check(&pts, 0.003).unwrap();
        assert_eq!(report.label.c, 2);
    }

    fn solid_torus(major: Real, minor: Real, spacing: Real) -> Vec<Vec3> {
        let mut pts = Vec::new();
        let steps = (2.0 * (major + minor) / spacing).ceil() as i64;
        for i in -steps..=steps {
            for j in -steps..=steps {
                for k in -steps..=steps {
                    let p = Vec3::new(i as Real, j as Real, k as Real) * spacing;
                    let q = (p.x * p.x + p.y * p.y).sqrt() - major;
                    if (q * q + p.z * p.z).sqrt() <= minor {
                        pts.push(p);
                    }
                }
            }
        }
        pts
    }

    #[test]
    fn torus_sample_is_one_component_genus_one() {
        let pts = solid_torus(0.024, 0.007, 0.002);
        let report = static_check(&pts, 0.003).unwrap();
        assert!(report.warnings.is_empty(), "warnings: {:?}", report.warnings);
        assert_eq!(report.label, TopologyLabel::new(1, vec![1]));
    }

    #[test]
    fn touching_rolls_fool_the_baseline() {
        // Two rolls in surface contact: dynamically two bodies, but the
        // distance graph sees one. This documents the baseline's failure.
        let spacing: Real = 0.002;
        let r: Real = 0.006;
        let mut pts = Vec::new();
        for side in [-1.0, 1.0] {
            let center_x = side * (r + spacing / 2.0);
            let steps = (r / spacing).ceil() as i64;
            for i in -steps..=steps {
                for k in -steps..=steps {
                    let (x, z) = (i as Real * spacing, k as Real * spacing);
                    if (x * x + z * z).sqrt() <= r {
                        for j in 0..20 {
                            pts.push(Vec3::new(center_x + x, j as Real * spacing, z));
                        }
                    }
                }
            }
        }
        let report = static_check(&pts, 1.5 * spacing).unwrap();
        assert_eq!(report.label.c, 1);
    }

    #[test]
    fn empty_cloud_is_rejected() {
        assert!(matches!(
            static_check(&[], 0.01),
            Err(TopoError::TooFewParticles { .. })
        ));
    }
}
