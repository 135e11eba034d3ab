//! Rest-frame kNN connectivity over particles with live severed/added edges.

use super::union_find::UnionFind;
use super::TopoError;
use crate::math::{Real, Vec3};
use crate::spatial::PointHash;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Particle connectivity: symmetric kNN edges built at rest, mutated by
/// confirmed split (sever) and merge (add) events. Components are derived
/// from (rest ∪ added) − severed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectivityGraph {
    k: usize,
    rest_positions: Vec<Vec3>,
    rest_edges: Vec<(u32, u32)>,
    severed: BTreeSet<(u32, u32)>,
    added: BTreeSet<(u32, u32)>,
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Symmetric kNN graph of the rest positions.
pub fn build_rest_graph(rest_positions: &[Vec3], k: usize) -> Result<ConnectivityGraph, TopoError> {
    let n = rest_positions.len();
    if n < k + 1 {
        return Err(TopoError::TooFewParticles { needed: k + 1, got: n });
    }
    // Cell size from sampled nearest-neighbor spacing: a bounding-box
    // estimate collapses on flat or collinear clouds.
    let stride = (n / 8).max(1);
    let mut samples: Vec<Real> = (0..n)
        .step_by(stride)
        .map(|i| {
            let mut best = Real::INFINITY;
            for (j, q) in rest_positions.iter().enumerate() {
                if j != i {
                    best = best.min((q - rest_positions[i]).norm());
                }
            }
            best
        })
        .collect();
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cell = samples[samples.len() / 2].max(1e-9);

    let hash = PointHash::build(rest_positions, cell);
    let mut edges = BTreeSet::new();
    let mut scratch: Vec<(Real, usize)> = Vec::new();
    for (i, p) in rest_positions.iter().enumerate() {
        let mut radius = cell;
        loop {
            scratch.clear();
            hash.for_each_within(p, radius, |j, d| {
                if j != i {
                    scratch.push((d, j));
                }
            });
            if let Some(&(_, j)) = scratch.iter().find(|&&(d, _)| d == 0.0) {
                return Err(TopoError::DuplicateRestPositions { a: i, b: j });
            }
            if scratch.len() >= k {
                break;
            }
            radius *= 2.0;
        }
        scratch.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &(_, j) in scratch.iter().take(k) {
            edges.insert(ordered(i as u32, j as u32));
        }
    }
    Ok(ConnectivityGraph {
        k,
        rest_positions: rest_positions.to_vec(),
        rest_edges: edges.into_iter().collect(),
        severed: BTreeSet::new(),
        added: BTreeSet::new(),
    })
}

impl ConnectivityGraph {
    pub fn len(&self) -> usize {
        self.rest_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rest_positions.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rest_positions(&self) -> &[Vec3] {
        &self.rest_positions
    }

    pub fn rest_edges(&self) -> &[(u32, u32)] {
        &self.rest_edges
    }

    /// Severs one edge; a later merge that re-adds it wins over the sever.
    pub fn sever(&mut self, a: u32, b: u32) {
        let e = ordered(a, b);
        self.added.remove(&e);
        self.severed.insert(e);
    }

    /// Adds a merge edge; clears any previous sever of the same pair.
    pub fn add(&mut self, a: u32, b: u32) {
        let e = ordered(a, b);
        self.severed.remove(&e);
        self.added.insert(e);
    }

    pub fn severed_count(&self) -> usize {
        self.severed.len()
    }

    pub fn added_count(&self) -> usize {
        self.added.len()
    }

    /// Calls `f` for every active edge, ascending.
    pub fn for_each_active_edge(&self, mut f: impl FnMut(u32, u32)) {
        for &(a, b) in &self.rest_edges {
            if !self.severed.contains(&(a, b)) {
                f(a, b);
            }
        }
        for &(a, b) in &self.added {
            f(a, b);
        }
    }

    /// Component labels, contiguous from 1 in order of first appearance.
    pub fn labels(&self) -> Vec<u32> {
        let mut uf = UnionFind::new(self.len());
        self.for_each_active_edge(|a, b| {
            uf.union(a, b);
        });
        uf.labels()
    }

    pub fn component_count(&self) -> usize {
        *self.labels().iter().max().unwrap_or(&0) as usize
    }

    fn adjacency(&self) -> Vec<Vec<(u32, Real)>> {
        let mut adj = vec![Vec::new(); self.len()];
        self.for_each_active_edge(|a, b| {
            let w = (self.rest_positions[a as usize] - self.rest_positions[b as usize]).norm();
            adj[a as usize].push((b, w));
            adj[b as usize].push((a, w));
        });
        adj
    }

    /// Shortest rest-space path length from any of `from` to any of `to`
    /// over active edges; infinity if unreachable or beyond `cutoff`.
    pub fn geodesic_distance(&self, from: &[u32], to: &[u32], cutoff: Real) -> Real {
        let adj = self.adjacency();
        let targets: BTreeSet<u32> = to.iter().copied().collect();
        let mut dist = vec![Real::INFINITY; self.len()];
        let mut heap = std::collections::BinaryHeap::new();
        for &s in from {
            dist[s as usize] = 0.0;
            heap.push(HeapEntry { cost: 0.0, node: s });
        }
        while let Some(HeapEntry { cost, node }) = heap.pop() {
            if cost > dist[node as usize] {
                continue;
            }
            if targets.contains(&node) {
                return cost;
            }
            if cost > cutoff {
                return Real::INFINITY;
            }
            for &(next, w) in &adj[node as usize] {
                let nd = cost + w;
                if nd < dist[next as usize] {
                    dist[next as usize] = nd;
                    heap.push(HeapEntry { cost: nd, node: next });
                }
            }
        }
        Real::INFINITY
    }
}

/// Min-heap entry ordered by cost.
#[derive(PartialEq)]
struct HeapEntry {
    cost: Real,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap()
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
