//! Euler characteristic and genus of closed triangle meshes.

use super::{MeshError, SurfaceMesh};
use std::collections::HashMap;

/// Per-mesh topology summary. Genus comes from the outermost shell; inner
/// shells (voids) are counted but ignored for genus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerReport {
    pub chi: i64,
    pub genus: i64,
    pub shell_count: usize,
    /// True when shells besides the outermost were present and ignored.
    pub has_inner_shells: bool,
}

/// Undirected edges that violate the closed-2-manifold contract (not shared
/// by exactly two faces with opposite orientation).
pub fn manifold_violations(mesh: &SurfaceMesh) -> Vec<(u32, u32)> {
    // counts = (a->b occurrences, b->a occurrences) with a < b.
    let mut counts: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
    for f in &mesh.faces {
        for k in 0..3 {
            let i = f[k];
            let j = f[(k + 1) % 3];
            if i == j {
                return vec![(i, j)];
            }
            let key = (i.min(j), i.max(j));
            let e = counts.entry(key).or_insert((0, 0));
            if i < j {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    let mut bad: Vec<(u32, u32)> = counts
        .iter()
        .filter(|(_, &(fwd, rev))| fwd != 1 || rev != 1)
        .map(|(&k, _)| k)
        .collect();
    bad.sort_unstable();
    bad
}

/// Groups face indices into shells (edge-connected components).
pub fn shell_face_components(mesh: &SurfaceMesh) -> Vec<Vec<usize>> {
    let mut edge_to_faces: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            let (i, j) = (f[k], f[(k + 1) % 3]);
            edge_to_faces
                .entry((i.min(j), i.max(j)))
                .or_default()
                .push(fi);
        }
    }
    let mut comp = vec![usize::MAX; mesh.faces.len()];
    let mut shells = Vec::new();
    for start in 0..mesh.faces.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = shells.len();
        let mut members = Vec::new();
        let mut stack = vec![start];
        comp[start] = id;
        while let Some(fi) = stack.pop() {
            members.push(fi);
            let f = mesh.faces[fi];
            for k in 0..3 {
                let (i, j) = (f[k], f[(k + 1) % 3]);
                for &nf in &edge_to_faces[&(i.min(j), i.max(j))] {
                    if comp[nf] == usize::MAX {
                        comp[nf] = id;
                        stack.push(nf);
                    }
                }
            }
        }
        shells.push(members);
    }
    shells
}

fn shell_chi(mesh: &SurfaceMesh, faces: &[usize]) -> i64 {
    let mut verts = std::collections::HashSet::new();
    let mut edges = std::collections::HashSet::new();
    for &fi in faces {
        let f = mesh.faces[fi];
        for k in 0..3 {
            verts.insert(f[k]);
            let (i, j) = (f[k], f[(k + 1) % 3]);
            edges.insert((i.min(j), i.max(j)));
        }
    }
    verts.len() as i64 - edges.len() as i64 + faces.len() as i64
}

/// chi = V - E + F and genus = (2 - chi) / 2 of the outermost shell.
///
/// The outermost shell is the one with the largest absolute enclosed volume;
/// interior voids are flagged, not counted.
pub fn euler_characteristic(mesh: &SurfaceMesh) -> Result<EulerReport, MeshError> {
    if mesh.faces.is_empty() {
        return Err(MeshError::Empty);
    }
    mesh.validate_indices()?;
    let bad = manifold_violations(mesh);
    if !bad.is_empty() {
        return Err(MeshError::NonManifold(bad.into_iter().take(16).collect()));
    }

    let shells = shell_face_components(mesh);
    let outer = shells
        .iter()
        .max_by(|a, b| {
            let va = shell_volume(mesh, a).abs();
            let vb = shell_volume(mesh, b).abs();
            va.partial_cmp(&vb).unwrap()
        })
        .expect("non-empty mesh has at least one shell");

    let chi = shell_chi(mesh, outer);
    Ok(EulerReport {
        chi,
        genus: (2 - chi) / 2,
        shell_count: shells.len(),
        has_inner_shells: shells.len() > 1,
    })
}

fn shell_volume(mesh: &SurfaceMesh, faces: &[usize]) -> f64 {
    faces
        .iter()
        .map(|&fi| {
            let [a, b, c] = mesh.triangle(fi);
            a.dot(&b.cross(&c)) / 6.0
        })
        .sum()
}

/// Loop-style 1->4 face split without smoothing; chi is preserved.
pub fn subdivide4(mesh: &SurfaceMesh) -> SurfaceMesh {
    let mut vertices = mesh.vertices.clone();
    let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
    let mut faces = Vec::with_capacity(mesh.faces.len() * 4);
    for &[a, b, c] in &mesh.faces {
        let mut mid = |i: u32, j: u32, vertices: &mut Vec<crate::math::Vec3>| {
            let key = (i.min(j), i.max(j));
            *midpoint.entry(key).or_insert_with(|| {
                let m = (vertices[i as usize] + vertices[j as usize]) * 0.5;
                vertices.push(m);
                (vertices.len() - 1) as u32
            })
        };
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        faces.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    SurfaceMesh {
        vertices,
        faces,
        component_id: mesh.component_id,
    }
}

#[cfg(test)]
mod tests {
    use super::super::primitives::{box_mesh, genus2_fixture, icosphere, torus_mesh};
    use super::*;
    use crate::math::Vec3;

    fn tetrahedron() -> SurfaceMesh {
        SurfaceMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        )
    }

    #[test]
    fn tetrahedron_is_a_sphere() {
        let r = euler_characteristic(&tetrahedron()).unwrap();
        assert_eq!(r.chi, 2);
        assert_eq!(r.genus, 0);
        assert_eq!(r.shell_count, 1);
    }

    #[test]
    fn grid_torus_has_genus_one() {
        let m = torus_mesh(Vec3::zeros(), 1.0, 0.3, 8, 8);
        assert_eq!(m.vertices.len(), 64);
        let r = euler_characteristic(&m).unwrap();
        assert_eq!(r.chi, 0);
        assert_eq!(r.genus, 1);
    }

    #[test]
    fn double_hole_fixture_has_genus_two() {
        let m = genus2_fixture(Vec3::zeros(), 0.01);
        let r = euler_characteristic(&m).unwrap();
        assert_eq!(r.chi, -2);
        assert_eq!(r.genus, 2);
    }

    #[test]
    fn non_manifold_edge_is_reported() {
        let mut m = tetrahedron();
        // Duplicate a face: its edges now have 4 incident faces.
        m.faces.push([0, 2, 1]);
        match euler_characteristic(&m) {
            Err(MeshError::NonManifold(edges)) => {
                assert!(edges.contains(&(0, 1)));
            }
            other => panic!("expected NonManifold, got {:?}", other),
        }
    }

    #[test]
    fn subdivision_preserves_chi() {
        for (mesh, chi) in [
            (icosphere(Vec3::zeros(), 1.0, 1), 2),
            (torus_mesh(Vec3::zeros(), 1.0, 0.3, 12, 8), 0),
            (genus2_fixture(Vec3::zeros(), 1.0), -2),
        ] {
            let sub = subdivide4(&mesh);
            assert_eq!(euler_characteristic(&sub).unwrap().chi, chi);
            assert_eq!(
                euler_characteristic(&sub).unwrap().genus,
                euler_characteristic(&mesh).unwrap().genus
            );
        }
    }

    #[test]
    fn inner_shell_is_ignored_for_genus() {
        // Torus inside a box: the outer box decides, genus 0.
        let mut m = box_mesh(Vec3::zeros(), Vec3::repeat(4.0));
        let t = torus_mesh(Vec3::zeros(), 1.0, 0.3, 8, 8);
        let off = m.vertices.len() as u32;
        m.vertices.extend_from_slice(&t.vertices);
        m.faces
            .extend(t.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
        let r = euler_characteristic(&m).unwrap();
        assert_eq!(r.genus, 0);
        assert!(r.has_inner_shells);
        assert_eq!(r.shell_count, 2);
    }
}
