//! Uniform-cell spatial hash for nearest-neighbor and radius queries.

use crate::math::{Real, Vec3};
use std::collections::HashMap;

pub struct PointHash {
    cell: Real,
    points: Vec<Vec3>,
    buckets: HashMap<(i64, i64, i64), Vec<u32>>,
}

fn key(p: &Vec3, cell: Real) -> (i64, i64, i64) {
    (
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    )
}

impl PointHash {
    pub fn build(points: &[Vec3], cell: Real) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        let mut buckets: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(key(p, cell)).or_default().push(i as u32);
        }
        PointHash {
            cell,
            points: points.to_vec(),
            buckets,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Index and distance of the nearest stored point, by expanding ring
    /// search over cell shells.
    pub fn nearest(&self, p: &Vec3) -> Option<(usize, Real)> {
        if self.points.is_empty() {
            return None;
        }
        let (cx, cy, cz) = key(p, self.cell);
        let mut best: Option<(usize, Real)> = None;
        let mut ring = 0i64;
        loop {
            // Any point in shell `ring` is at least (ring-1)*cell away.
            if let Some((_, d)) = best {
                if (ring - 1) as Real * self.cell > d {
                    return best;
                }
            }
            // Once a shell holds more cells than there are buckets, a flat
            // scan of the stored points is cheaper (and exact).
            if 24 * ring * ring + 2 > self.buckets.len() as i64 {
                for (i, q) in self.points.iter().enumerate() {
                    let d = (q - p).norm();
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((i, d));
                    }
                }
                return best;
            }
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    for dz in -ring..=ring {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                            continue;
                        }
                        if let Some(ids) = self.buckets.get(&(cx + dx, cy + dy, cz + dz)) {
                            for &i in ids {
                                let d = (self.points[i as usize] - p).norm();
                                if best.is_none_or(|(_, bd)| d < bd) {
                                    best = Some((i as usize, d));
                                }
                            }
                        }
                    }
                }
            }
            ring += 1;
        }
    }

    /// Calls `f(index, distance)` for every stored point within `radius`.
    pub fn for_each_within(&self, p: &Vec3, radius: Real, mut f: impl FnMut(usize, Real)) {
        let lo = key(&(p - Vec3::repeat(radius)), self.cell);
        let hi = key(&(p + Vec3::repeat(radius)), self.cell);
        let span = (hi.0 - lo.0 + 1) as i128 * (hi.1 - lo.1 + 1) as i128 * (hi.2 - lo.2 + 1) as i128;
        if span > self.buckets.len() as i128 {
            for (i, q) in self.points.iter().enumerate() {
                let d = (q - p).norm();
                if d <= radius {
                    f(i, d);
                }
            }
            return;
        }
        for x in lo.0..=hi.0 {
            for y in lo.1..=hi.1 {
                for z in lo.2..=hi.2 {
                    if let Some(ids) = self.buckets.get(&(x, y, z)) {
                        for &i in ids {
                            let d = (self.points[i as usize] - p).norm();
                            if d <= radius {
                                f(i as usize, d);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Indices within `radius`, sorted ascending (deterministic order).
    pub fn within(&self, p: &Vec3, radius: Real) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(p, radius, |i, _| out.push(i));
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_cloud(n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::from_fn(|_, _| rng.gen_range(-0.1..0.1)))
            .collect()
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pts = random_cloud(500, 1);
        let hash = PointHash::build(&pts, 0.02);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let q = Vec3::from_fn(|_, _| rng.gen_range(-0.15..0.15));
            let (bi, bd) = pts
                .iter()
                .enumerate()
                .map(|(i, p)| (i, (p - q).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            let (gi, gd) = hash.nearest(&q).unwrap();
            assert_eq!(gi, bi);
            assert!((gd - bd).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_from_far_away_terminates() {
        let pts = random_cloud(50, 3);
        let hash = PointHash::build(&pts, 0.01);
        let q = Vec3::new(5.0, -4.0, 3.0);
        let (_, d) = hash.nearest(&q).unwrap();
        let brute = pts.iter().map(|p| (p - q).norm()).fold(Real::MAX, Real::min);
        assert!((d - brute).abs() < 1e-12);
    }

    #[test]
    fn within_matches_brute_force() {
        let pts = random_cloud(400, 4);
        let hash = PointHash::build(&pts, 0.015);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let q = Vec3::from_fn(|_, _| rng.gen_range(-0.12..0.12));
            let r = rng.gen_range(0.005..0.05);
            let mut brute: Vec<usize> = pts
                .iter()
                .enumerate()
                .filter(|(_, p)| (*p - q).norm() <= r)
                .map(|(i, _)| i)
                .collect();
            brute.sort_unstable();
            assert_eq!(hash.within(&q, r), brute);
        }
    }

    #[test]
    fn empty_hash_returns_none() {
        let hash = PointHash::build(&[], 0.01);
        assert!(hash.nearest(&Vec3::zeros()).is_none());
    }
}
