use super::map::{FeatureMap, Occupancy};
use crate::geom::Cell;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

const NEIGHBORS8: [(i32, i32); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// Connected stretch of free cells bordering unknown space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub id: usize,
    pub cells: Vec<Cell>,
    pub area: usize,
    pub centroid: Cell,
    /// Map cells the tokens were read from, in sampling order.
    pub token_cells: Vec<Cell>,
    #[serde(skip)]
    pub tokens: Vec<Vec<f32>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierParams {
    pub threshold: usize,
    pub tokens: usize,
    pub token_radius: i32,
    /// Width in cells of the band of free cells counted as frontier.
    pub band: i32,
}

/// Free cells within Chebyshev distance `band` of an unknown cell; `band = 1` means an unknown 8-neighbor.
pub fn boundary_mask(map: &FeatureMap, band: i32) -> Vec<bool> {
    let (w, h) = (map.width as usize, map.height as usize);
    let occ = map.occupancy_raw();
    let unknown: Vec<bool> = (0..w * h).map(|i| occ[i] == Occupancy::Unknown).collect();
    let near = dilate(&unknown, w, h, band.max(1) as usize);
    (0..w * h).map(|i| near[i] && occ[i] == Occupancy::Free).collect()
}

/// Chebyshev dilation by `r`, done as a row pass then a column pass.
fn dilate(mask: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    let pass = |src: &[bool], len: usize, lines: usize, at: &dyn Fn(usize, usize) -> usize| {
        let mut out = vec![false; src.len()];
        for line in 0..lines {
            // distance to the most recent set cell, scanning forward and then backward
            let mut last: Option<usize> = None;
            for k in 0..len {
                if src[at(line, k)] {
                    last = Some(k);
                }
                if last.is_some_and(|l| k - l <= r) {
                    out[at(line, k)] = true;
                }
            }
            last = None;
            for k in (0..len).rev() {
                if src[at(line, k)] {
                    last = Some(k);
                }
                if last.is_some_and(|l| l - k <= r) {
                    out[at(line, k)] = true;
                }
            }
        }
        out
    };
    let rows = pass(mask, w, h, &|row, k| row * w + k);
    pass(&rows, h, w, &|col, k| k * w + col)
}

/// 8-connected component labels of `mask` (union-find), as lists of cells in raster order.
pub fn components(mask: &[bool], width: i32, height: i32) -> Vec<Vec<Cell>> {
    let n = mask.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for row in 0..height {
        for col in 0..width {
            let i = (row * width + col) as usize;
            if !mask[i] {
                continue;
            }
            // earlier neighbors in raster order
            for (dr, dc) in [(-1, -1), (-1, 0), (-1, 1), (0, -1)] {
                let (r, c) = (row + dr, col + dc);
                if r < 0 || c < 0 || c >= width {
                    continue;
                }
                let j = (r * width + c) as usize;
                if mask[j] {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut out: Vec<Vec<Cell>> = Vec::new();
    for i in 0..n {
        if mask[i] {
            let root = find(&mut parent, i);
            if slot[root] == usize::MAX {
                slot[root] = out.len();
                out.push(Vec::new());
            }
            out[slot[root]].push(Cell::new(i as i32 / width, i as i32 % width));
        }
    }
    out
}

/// Rounded mean cell.
pub fn centroid(cells: &[Cell]) -> Cell {
    let n = cells.len().max(1) as f64;
    let r = cells.iter().map(|c| c.row as f64).sum::<f64>() / n;
    let c = cells.iter().map(|c| c.col as f64).sum::<f64>() / n;
    Cell::new(r.round() as i32, c.round() as i32)
}

/// Extracts frontiers of at least `threshold` cells, largest first, each with sampled tokens.
pub fn extract_frontiers(map: &FeatureMap, params: FrontierParams) -> Vec<Frontier> {
    let mask = boundary_mask(map, params.band);
    let mut comps: Vec<(Cell, Vec<Cell>)> = components(&mask, map.width, map.height)
        .into_iter()
        .filter(|c| c.len() >= params.threshold.max(1))
        .map(|c| (centroid(&c), c))
        .collect();
    comps.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));

    let pools = token_pools(map, &comps.iter().map(|c| c.1.as_slice()).collect::<Vec<_>>(), params.token_radius);
    comps
        .into_iter()
        .zip(pools)
        .enumerate()
        .map(|(id, ((centroid, cells), pool))| {
            let pool = if pool.is_empty() { cells.clone() } else { pool };
            let token_cells = sample_tokens(&pool, params.tokens, map.timestep(), id);
            let tokens = token_cells.iter().map(|&c| map.feature(c).to_vec()).collect();
            Frontier { id, area: cells.len(), cells, centroid, token_cells, tokens }
        })
        .collect()
}

/// Explored cells within `radius` (Chebyshev) of each component, each assigned to the
/// component that reaches it first in a joint breadth-first sweep.
fn token_pools(map: &FeatureMap, comps: &[&[Cell]], radius: i32) -> Vec<Vec<Cell>> {
    let n = (map.width * map.height) as usize;
    let mut owner = vec![u32::MAX; n];
    let mut dist = vec![0i32; n];
    let mut q = VecDeque::new();
    for (k, cells) in comps.iter().enumerate() {
        for &c in cells.iter() {
            let i = map.index(c);
            if owner[i] == u32::MAX {
                owner[i] = k as u32;
                q.push_back(c);
            }
        }
    }
    let mut pools = vec![Vec::new(); comps.len()];
    while let Some(c) = q.pop_front() {
        let i = map.index(c);
        if map.hit_count(c) > 0 {
            pools[owner[i] as usize].push(c);
        }
        if dist[i] == radius {
            continue;
        }
        for (dr, dc) in NEIGHBORS8 {
            let nb = c.offset(dr, dc);
            if map.in_bounds(nb) {
                let j = map.index(nb);
                if owner[j] == u32::MAX {
                    owner[j] = owner[i];
                    dist[j] = dist[i] + 1;
                    q.push_back(nb);
                }
            }
        }
    }
    for p in &mut pools {
        p.sort();
    }
    pools
}

/// Uniform sample without replacement, padded by cycling through the shuffled pool.
pub fn sample_tokens(pool: &[Cell], count: usize, timestep: usize, id: usize) -> Vec<Cell> {
    if pool.is_empty() {
        return Vec::new();
    }
    let seed = ((timestep as u64) << 32) ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = pool.to_vec();
    order.shuffle(&mut rng);
    (0..count).map(|k| order[k % order.len()]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_find_joins_diagonals() {
        // two diagonal chains that touch only at corners
        let (w, h) = (6, 6);
        let mut mask = vec![false; 36];
        for k in 0..6 {
            mask[k * 6 + k] = true;
        }
        mask[5] = true;
        let comps = components(&mask, w, h);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].len(), 6);
    }

    #[test]
    fn tokens_pad_by_repetition() {
        let pool = vec![Cell::new(0, 0), Cell::new(0, 1), Cell::new(3, 3)];
        let t = sample_tokens(&pool, 32, 4, 1);
        assert_eq!(t.len(), 32);
        assert!(pool.iter().all(|c| t.contains(c)));
        assert_eq!(t, sample_tokens(&pool, 32, 4, 1));
    }

    #[test]
    fn large_pool_without_replacement() {
        let pool: Vec<Cell> = (0..100).map(|k| Cell::new(k / 10, k % 10)).collect();
        let mut t = sample_tokens(&pool, 32, 0, 0);
        t.sort();
        t.dedup();
        assert_eq!(t.len(), 32);
    }

    #[test]
    fn dilation_matches_brute_force() {
        use rand::Rng;
        let (w, h) = (23usize, 17usize);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for r in 1..5 {
            let mask: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.05)).collect();
            let fast = dilate(&mask, w, h, r);
            for i in 0..w * h {
                let (y, x) = ((i / w) as i64, (i % w) as i64);
                let slow = (0..w * h).any(|j| {
                    mask[j] && ((j / w) as i64 - y).abs() <= r as i64 && ((j % w) as i64 - x).abs() <= r as i64
                });
                assert_eq!(fast[i], slow, "r={r} cell {i}");
            }
        }
    }
}
