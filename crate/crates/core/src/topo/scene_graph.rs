//! Segment-level scene graph: components give c, independent cycles give g.

use super::union_find::UnionFind;
use super::{CheckKind, CheckRegion, ConnectivityGraph, TopoConfig, TopoError};
use crate::math::{Real, Vec3};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Component count plus per-component genus, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyLabel {
    pub c: usize,
    pub genera: Vec<usize>,
}

impl TopologyLabel {
    pub fn new(c: usize, mut genera: Vec<usize>) -> Self {
        assert_eq!(c, genera.len());
        genera.sort_unstable();
        TopologyLabel { c, genera }
    }
}

impl std::fmt::Display for TopologyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let g: Vec<String> = self.genera.iter().map(|g| g.to_string()).collect();
        write!(f, "(c={}, g={{{}}})", self.c, g.join(","))
    }
}

/// What applying a confirmed event did to the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventOutcome {
    /// Two components joined: c − 1.
    MergedComponents,
    /// A chord within one component: g + 1.
    Bridged,
    /// A doughnut hole closed completely: contraction, cycles deleted.
    HoleCollapsed,
    /// Material severed: c + 1, or g − 1 when a cycle was opened.
    Split,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentNode {
    pub particles: Vec<u32>,
    pub alive: bool,
}

/// Undirected multigraph over material segments. Each alive node owns a
/// disjoint set of particle indices; chains of segments discretize rolls
/// (open) and doughnuts (closed).
#[derive(Debug, Clone)]
pub struct SceneTopologyGraph {
    nodes: Vec<SegmentNode>,
    /// Edge multiset keyed by ordered endpoint pair.
    edges: BTreeMap<(u32, u32), u32>,
    /// Particle index -> owning node (u32::MAX while unowned).
    owner: Vec<u32>,
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Assigns each point to the nearest of `centers`, returning one particle
/// list per center.
pub fn assign_to_segments(points: &[Vec3], centers: &[Vec3]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); centers.len()];
    for (i, p) in points.iter().enumerate() {
        let best = centers
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - p).norm().partial_cmp(&(*b - p).norm()).unwrap()
            })
            .map(|(s, _)| s)
            .expect("at least one segment center");
        out[best].push(i as u32);
    }
    out
}

impl SceneTopologyGraph {
    pub fn new(n_particles: usize) -> Self {
        SceneTopologyGraph {
            nodes: Vec::new(),
            edges: BTreeMap::new(),
            owner: vec![u32::MAX; n_particles],
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[SegmentNode] {
        &self.nodes
    }

    pub fn owner_of(&self, particle: u32) -> Option<u32> {
        let node = *self.owner.get(particle as usize)?;
        (node != u32::MAX && self.nodes[node as usize].alive).then_some(node)
    }

    /// Total edge multiplicity.
    pub fn edge_count(&self) -> usize {
        self.edges.values().map(|&m| m as usize).sum()
    }

    /// Appends a bare node; mostly useful for tests and custom topologies.
    pub fn add_node(&mut self, particles: Vec<u32>) -> Result<u32, TopoError> {
        for &p in &particles {
            let slot = self
                .owner
                .get_mut(p as usize)
                .ok_or(TopoError::ParticleOutOfRange { particle: p })?;
            if *slot != u32::MAX {
                return Err(TopoError::ParticleAlreadyOwned { particle: p });
            }
            *slot = self.nodes.len() as u32;
        }
        self.nodes.push(SegmentNode { particles, alive: true });
        Ok(self.nodes.len() as u32 - 1)
    }

    /// Adds one undirected edge instance; endpoints must be alive.
    pub fn add_edge(&mut self, a: u32, b: u32) -> Result<(), TopoError> {
        for n in [a, b] {
            if self
                .nodes
                .get(n as usize)
                .is_none_or(|node| !node.alive)
            {
                return Err(TopoError::DeadSegment { node: n });
            }
        }
        *self.edges.entry(ordered(a, b)).or_insert(0) += 1;
        Ok(())
    }

    fn remove_edge_all(&mut self, a: u32, b: u32) {
        self.edges.remove(&ordered(a, b));
    }

    /// Appends a chain of segments (a roll if open, a doughnut if closed).
    /// Returns the new node ids in chain order.
    pub fn add_chain(
        &mut self,
        segments: Vec<Vec<u32>>,
        closed: bool,
    ) -> Result<Vec<u32>, TopoError> {
        if segments.len() < 2 || (closed && segments.len() < 3) {
            return Err(TopoError::ChainTooShort { segments: segments.len() });
        }
        let mut ids = Vec::with_capacity(segments.len());
        for particles in segments {
            ids.push(self.add_node(particles)?);
        }
        for w in ids.windows(2) {
            self.add_edge(w[0], w[1])?;
        }
        if closed {
            self.add_edge(ids[ids.len() - 1], ids[0])?;
        }
        Ok(ids)
    }

    fn alive_ids(&self) -> Vec<u32> {
        (0..self.nodes.len() as u32)
            .filter(|&i| self.nodes[i as usize].alive)
            .collect()
    }

    /// c = components over alive nodes; per-component genus = b1 = E − V + 1.
    pub fn topology_label(&self) -> TopologyLabel {
        let mut uf = UnionFind::new(self.nodes.len());
        for &(a, b) in self.edges.keys() {
            uf.union(a, b);
        }
        let mut verts: BTreeMap<u32, usize> = BTreeMap::new();
        let mut edge_count: BTreeMap<u32, usize> = BTreeMap::new();
        for id in self.alive_ids() {
            *verts.entry(uf.find(id)).or_insert(0) += 1;
        }
        for (&(a, _), &m) in &self.edges {
            *edge_count.entry(uf.find(a)).or_insert(0) += m as usize;
        }
        let genera: Vec<usize> = verts
            .iter()
            .map(|(root, &v)| {
                let e = edge_count.get(root).copied().unwrap_or(0);
                e + 1 - v
            })
            .collect();
        TopologyLabel::new(genera.len(), genera)
    }

    /// Centroid of a node's particles at the given positions.
    fn centroid(&self, node: u32, positions: &[Vec3]) -> Option<Vec3> {
        let parts = &self.nodes[node as usize].particles;
        if parts.is_empty() {
            return None;
        }
        Some(parts.iter().map(|&p| positions[p as usize]).sum::<Vec3>() / parts.len() as Real)
    }

    fn adjacency(&self) -> BTreeMap<u32, BTreeMap<u32, u32>> {
        let mut adj: BTreeMap<u32, BTreeMap<u32, u32>> = BTreeMap::new();
        for (&(a, b), &m) in &self.edges {
            *adj.entry(a).or_default().entry(b).or_insert(0) += m;
            *adj.entry(b).or_default().entry(a).or_insert(0) += m;
        }
        adj
    }

    /// Up to two edge-disjoint augmenting paths from `s` to `t` (undirected
    /// unit-capacity-per-multiplicity max flow, Menger). Returns the node
    /// sets of the paths found.
    fn two_edge_disjoint_paths(&self, s: u32, t: u32) -> Vec<Vec<u32>> {
        let mut residual = self.adjacency();
        let mut paths = Vec::new();
        for _ in 0..2 {
            // BFS over edges with residual capacity.
            let mut parent: BTreeMap<u32, u32> = BTreeMap::new();
            let mut queue = VecDeque::from([s]);
            let mut seen = BTreeSet::from([s]);
            'bfs: while let Some(u) = queue.pop_front() {
                if let Some(nbrs) = residual.get(&u) {
                    for (&v, &cap) in nbrs {
                        if cap > 0 && seen.insert(v) {
                            parent.insert(v, u);
                            if v == t {
                                break 'bfs;
                            }
                            queue.push_back(v);
                        }
                    }
                }
            }
            if !parent.contains_key(&t) {
                break;
            }
            let mut path = vec![t];
            let mut v = t;
            while v != s {
                let u = parent[&v];
                *residual.get_mut(&u).unwrap().get_mut(&v).unwrap() -= 1;
                *residual.get_mut(&v).unwrap().entry(u).or_insert(0) += 1;
                path.push(u);
                v = u;
            }
            path.reverse();
            paths.push(path);
        }
        paths
    }

    /// Replaces all edges of `root`'s component with a BFS spanning tree.
    fn spanning_tree_component(&mut self, root: u32) {
        let adj = self.adjacency();
        let mut tree: Vec<(u32, u32)> = Vec::new();
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            if let Some(nbrs) = adj.get(&u) {
                for &v in nbrs.keys() {
                    if seen.insert(v) {
                        tree.push(ordered(u, v));
                        queue.push_back(v);
                    }
                }
            }
        }
        // Drop every component edge, then restore the tree.
        for &(a, b) in self.edges.keys().cloned().collect::<Vec<_>>().iter() {
            if seen.contains(&a) || seen.contains(&b) {
                self.edges.remove(&(a, b));
            }
        }
        for e in tree {
            self.edges.insert(e, 1);
        }
    }

    /// Folds node `b` into node `a`: particles move, edges reattach
    /// (self-loops dropped), `b` dies.
    fn contract(&mut self, a: u32, b: u32) {
        let moved = std::mem::take(&mut self.nodes[b as usize].particles);
        for &p in &moved {
            self.owner[p as usize] = a;
        }
        self.nodes[a as usize].particles.extend(moved);
        self.nodes[b as usize].alive = false;
        let old: Vec<((u32, u32), u32)> = self
            .edges
            .iter()
            .filter(|((x, y), _)| *x == b || *y == b)
            .map(|(&e, &m)| (e, m))
            .collect();
        for ((x, y), m) in old {
            self.edges.remove(&(x, y));
            let other = if x == b { y } else { x };
            if other != a {
                *self.edges.entry(ordered(a, other)).or_insert(0) += m;
            }
        }
    }

    /// Serializes nodes (id, particle count, alive), the expanded edge list,
    /// and the derived label.
    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| {
                serde_json::json!({
                    "id": id,
                    "particle_count": n.particles.len(),
                    "alive": n.alive,
                })
            })
            .collect();
        let mut edges = Vec::new();
        for (&(a, b), &m) in &self.edges {
            for _ in 0..m {
                edges.push(serde_json::json!([a, b]));
            }
        }
        let label = self.topology_label();
        serde_json::json!({
            "nodes": nodes,
            "edges": edges,
            "c": label.c,
            "genera": label.genera,
        })
    }

    /// Applies a confirmed merge/split event to both graphs.
    ///
    /// Splits sever conn edges crossing the side boundary, drop scene edges
    /// between segments on opposite sides, and remove segments whose material
    /// was displaced to both sides. Merges add conn edges between near
    /// cross-side pairs and either bridge the closest segment pair or, when
    /// the enclosed hole has completely closed (no void cells in the
    /// occupancy test), contract the pair and delete the residual cycles.
    pub fn apply_event(
        &mut self,
        conn: &mut ConnectivityGraph,
        region: &CheckRegion,
        positions: &[Vec3],
        cfg: &TopoConfig,
    ) -> Result<EventOutcome, TopoError> {
        region.validate()?;
        for &p in region.side_a.iter().chain(&region.side_b) {
            if self.owner_of(p).is_none() {
                return Err(TopoError::DeadSegment {
                    node: self.owner.get(p as usize).copied().unwrap_or(u32::MAX),
                });
            }
        }
        match region.kind {
            CheckKind::Split => self.apply_split(conn, region, positions),
            CheckKind::Merge => self.apply_merge(conn, region, positions, cfg),
        }
    }

    fn apply_split(
        &mut self,
        conn: &mut ConnectivityGraph,
        region: &CheckRegion,
        positions: &[Vec3],
    ) -> Result<EventOutcome, TopoError> {
        let mut side = vec![0i8; conn.len()];
        for &p in &region.side_a {
            side[p as usize] = 1;
        }
        for &p in &region.side_b {
            side[p as usize] = -1;
        }

        let mut crossing = Vec::new();
        conn.for_each_active_edge(|a, b| {
            if side[a as usize] as i32 * side[b as usize] as i32 == -1 {
                crossing.push((a, b));
            }
        });
        for (a, b) in crossing {
            conn.sever(a, b);
        }

        // Per-segment side census over the region particles.
        let mut census: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
        for &p in &region.side_a {
            census.entry(self.owner[p as usize]).or_default().0 += 1;
        }
        for &p in &region.side_b {
            census.entry(self.owner[p as usize]).or_default().1 += 1;
        }

        // Segments cut through the middle lost their material to both sides.
        let mut emptied = Vec::new();
        for (&node, &(a, b)) in &census {
            let total = a + b;
            if a.min(b) >= 3.max(total * 3 / 10) {
                emptied.push(node);
            }
        }
        for &node in &emptied {
            self.nodes[node as usize].alive = false;
            let incident: Vec<(u32, u32)> = self
                .edges
                .keys()
                .filter(|(x, y)| *x == node || *y == node)
                .copied()
                .collect();
            for (x, y) in incident {
                self.edges.remove(&(x, y));
            }
        }

        // Re-home the dead segments' particles to the nearest surviving
        // segment, preferring segments on the particle's own region side.
        let centroids: Vec<Option<Vec3>> = (0..self.nodes.len() as u32)
            .map(|n| {
                (self.nodes[n as usize].alive)
                    .then(|| self.centroid(n, positions))
                    .flatten()
            })
            .collect();
        for &node in &emptied {
            let moved = std::mem::take(&mut self.nodes[node as usize].particles);
            for p in moved {
                let want = side[p as usize];
                let mut best: Option<(Real, u32)> = None;
                for (n, c) in centroids.iter().enumerate() {
                    let Some(c) = c else { continue };
                    let sign = census
                        .get(&(n as u32))
                        .map(|&(a, b)| (a as i64 - b as i64).signum())
                        .unwrap_or(0);
                    if want != 0 && sign != 0 && sign != want as i64 {
                        continue;
                    }
                    let d = (positions[p as usize] - c).norm();
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, n as u32));
                    }
                }
                if let Some((_, n)) = best {
                    self.owner[p as usize] = n;
                    self.nodes[n as usize].particles.push(p);
                } else {
                    self.owner[p as usize] = u32::MAX;
                }
            }
        }

        // Drop scene edges whose endpoints ended up on opposite sides.
        let cut: Vec<(u32, u32)> = self
            .edges
            .keys()
            .filter(|&&(x, y)| {
                let sx = census.get(&x).map(|&(a, b)| (a as i64 - b as i64).signum());
                let sy = census.get(&y).map(|&(a, b)| (a as i64 - b as i64).signum());
                matches!((sx, sy), (Some(a), Some(b)) if a * b == -1)
            })
            .copied()
            .collect();
        for (x, y) in cut {
            self.remove_edge_all(x, y);
        }
        Ok(EventOutcome::Split)
    }

    fn apply_merge(
        &mut self,
        conn: &mut ConnectivityGraph,
        region: &CheckRegion,
        positions: &[Vec3],
        cfg: &TopoConfig,
    ) -> Result<EventOutcome, TopoError> {
        // Bond nearest cross-side particle pairs within τ_merge.
        let mut closest: Option<(Real, u32, u32)> = None;
        let mut bond = |from: &[u32], to: &[u32], conn: &mut ConnectivityGraph| {
            for &i in from {
                let mut best: Option<(Real, u32)> = None;
                for &j in to {
                    let d = (positions[i as usize] - positions[j as usize]).norm();
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, j));
                    }
                }
                if let Some((d, j)) = best {
                    if d < cfg.tau_merge {
                        conn.add(i, j);
                    }
                    let (a, b) = if region.side_a.contains(&i) { (i, j) } else { (j, i) };
                    if self.owner[a as usize] != self.owner[b as usize]
                        && closest.is_none_or(|(bd, _, _)| d < bd)
                    {
                        closest = Some((d, a, b));
                    }
                }
            }
        };
        bond(&region.side_a, &region.side_b, conn);
        bond(&region.side_b, &region.side_a, conn);

        let Some((_, pa, pb)) = closest else {
            return Err(TopoError::DegenerateMerge);
        };
        let (sa, sb) = (self.owner[pa as usize], self.owner[pb as usize]);

        let mut uf = UnionFind::new(self.nodes.len());
        for &(a, b) in self.edges.keys() {
            uf.union(a, b);
        }
        if !uf.same(sa, sb) {
            self.add_edge(sa, sb)?;
            return Ok(EventOutcome::MergedComponents);
        }

        // Same component: if the two segments sit on a common cycle whose
        // hole has fully closed, the merge is a collapse, not a bridge.
        let paths = self.two_edge_disjoint_paths(sa, sb);
        if paths.len() == 2 {
            let mut cycle: BTreeSet<u32> = BTreeSet::new();
            for path in &paths {
                cycle.extend(path.iter().copied());
            }
            let hull_points: Vec<Vec3> = cycle
                .iter()
                .filter_map(|&n| self.centroid(n, positions))
                .collect();
            if !hole_has_voids(&hull_points, positions, cfg.dx) {
                self.contract(sa, sb);
                self.spanning_tree_component(sa);
                return Ok(EventOutcome::HoleCollapsed);
            }
        }
        self.add_edge(sa, sb)?;
        Ok(EventOutcome::Bridged)
    }
}

/// Occupancy test for the hole enclosed by a segment cycle: voxelize at
/// `voxel` in the grip plane and look for unoccupied cells strictly inside
/// the convex hull of the cycle centroids.
fn hole_has_voids(hull_points: &[Vec3], positions: &[Vec3], voxel: Real) -> bool {
    let hull = convex_hull_xy(hull_points);
    if hull.len() < 3 {
        return false;
    }
    let (mut lo, mut hi) = ((Real::INFINITY, Real::INFINITY), (-Real::INFINITY, -Real::INFINITY));
    for p in &hull {
        lo = (lo.0.min(p.0), lo.1.min(p.1));
        hi = (hi.0.max(p.0), hi.1.max(p.1));
    }
    let nx = ((hi.0 - lo.0) / voxel).ceil() as usize + 1;
    let ny = ((hi.1 - lo.1) / voxel).ceil() as usize + 1;
    let mut occupied = vec![false; nx * ny];
    for p in positions {
        let ix = ((p.x - lo.0) / voxel).floor();
        let iy = ((p.y - lo.1) / voxel).floor();
        if ix >= 0.0 && iy >= 0.0 && (ix as usize) < nx && (iy as usize) < ny {
            occupied[ix as usize * ny + iy as usize] = true;
        }
    }
    for ix in 0..nx {
        for iy in 0..ny {
            if occupied[ix * ny + iy] {
                continue;
            }
            let cx = lo.0 + (ix as Real + 0.5) * voxel;
            let cy = lo.1 + (iy as Real + 0.5) * voxel;
            if inside_hull_with_margin(&hull, (cx, cy), voxel) {
                return true;
            }
        }
    }
    false
}

/// Monotone-chain convex hull of the xy projection, counter-clockwise.
fn convex_hull_xy(points: &[Vec3]) -> Vec<(Real, Real)> {
    let mut pts: Vec<(Real, Real)> = points.iter().map(|p| (p.x, p.y)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (Real, Real), a: (Real, Real), b: (Real, Real)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    // Monotone chain: the upper pass must never pop below the lower hull.
    let mut hull: Vec<(Real, Real)> = Vec::new();
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// True when the point is at least `margin` inside every hull edge.
fn inside_hull_with_margin(hull: &[(Real, Real)], p: (Real, Real), margin: Real) -> bool {
    let n = hull.len();
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let edge = (b.0 - a.0, b.1 - a.1);
        let len = (edge.0 * edge.0 + edge.1 * edge.1).sqrt();
        if len < 1e-12 {
            continue;
        }
        // Signed distance to the edge line; positive = inside for CCW hulls.
        let d = (edge.0 * (p.1 - a.1) - edge.1 * (p.0 - a.0)) / len;
        if d < margin {
            return false;
        }
    }
    true
}
