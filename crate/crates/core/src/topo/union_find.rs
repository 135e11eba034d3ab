//! Union-find with path halving and union by size.

pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }

    pub fn same(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }

    /// Labels contiguous from 1, ordered by first appearance.
    pub fn labels(&mut self) -> Vec<u32> {
        let n = self.parent.len();
        let mut map = std::collections::HashMap::new();
        let mut out = vec![0u32; n];
        for i in 0..n as u32 {
            let root = self.find(i);
            let next = map.len() as u32 + 1;
            out[i as usize] = *map.entry(root).or_insert(next);
        }
        out
    }
}
