use crate::featmap::{FeatureMap, Occupancy};
use crate::geom::{Cell, Heading};
use crate::scene::Scene;
use crate::sim::MotionCommand;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no path to the goal")]
pub struct NoPath;

/// Anything that can report per-cell traversability.
pub trait OccupancyGrid {
    fn occupancy_at(&self, c: Cell) -> Occupancy;
}

impl OccupancyGrid for FeatureMap {
    fn occupancy_at(&self, c: Cell) -> Occupancy {
        self.occupancy(c)
    }
}

/// Fully known ground-truth occupancy of a scene.
pub struct TrueOccupancy<'a>(pub &'a Scene);

impl OccupancyGrid for TrueOccupancy<'_> {
    fn occupancy_at(&self, c: Cell) -> Occupancy {
        if self.0.is_free(c) {
            Occupancy::Free
        } else {
            Occupancy::Obstacle
        }
    }
}

/// Search settings: lattice stride, the cost of edges through unknown cells, and
/// edges known to be blocked from failed moves.
#[derive(Debug, Clone, Default)]
pub struct SearchParams {
    pub stride: i32,
    pub unknown_cost: f64,
    pub blocked: HashSet<(Cell, Cell)>,
}

impl SearchParams {
    pub fn new(stride: i32, unknown_cost: f64) -> Self {
        SearchParams { stride, unknown_cost, blocked: HashSet::new() }
    }

    /// Cost of the straight move `from -> to`, or `None` if impassable.
    pub fn edge_cost(&self, grid: &impl OccupancyGrid, from: Cell, dr: i32, dc: i32) -> Option<f64> {
        let to = from.offset(dr * self.stride, dc * self.stride);
        if self.blocked.contains(&(from, to)) {
            return None;
        }
        let mut unknown = false;
        for k in 1..=self.stride {
            match grid.occupancy_at(from.offset(dr * k, dc * k)) {
                Occupancy::Obstacle => return None,
                Occupancy::Unknown => unknown = true,
                Occupancy::Free => {}
            }
        }
        Some(if unknown { self.unknown_cost } else { 1.0 })
    }
}

struct Key(f64);
impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o).is_eq()
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Least-cost lattice path from `start` to any cell in `goals`, inclusive of both ends.
pub fn astar(grid: &impl OccupancyGrid, params: &SearchParams, start: Cell, goals: &[Cell]) -> Result<Vec<Cell>, NoPath> {
    if goals.is_empty() {
        return Err(NoPath);
    }
    let goal_set: HashSet<Cell> = goals.iter().copied().collect();
    let s = params.stride as f64;
    // exact lower bound only for small goal sets; Dijkstra otherwise
    let h = |c: Cell| -> f64 {
        if goals.len() > 64 {
            return 0.0;
        }
        goals.iter().map(|g| c.manhattan(*g) as f64 / s).fold(f64::INFINITY, f64::min).floor()
    };
    let mut dist: HashMap<Cell, f64> = HashMap::from([(start, 0.0)]);
    let mut parent: HashMap<Cell, Cell> = HashMap::new();
    let mut heap = BinaryHeap::new();
    // ties broken by insertion order for determinism
    let mut counter = 0u64;
    heap.push(Reverse((Key(h(start)), counter, start)));
    while let Some(Reverse((_, _, c))) = heap.pop() {
        if goal_set.contains(&c) {
            let mut path = vec![c];
            let mut cur = c;
            while let Some(&p) = parent.get(&cur) {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Ok(path);
        }
        let g = dist[&c];
        for (dr, dc) in [(0, 1), (-1, 0), (0, -1), (1, 0)] {
            let Some(cost) = params.edge_cost(grid, c, dr, dc) else { continue };
            let n = c.offset(dr * params.stride, dc * params.stride);
            let ng = g + cost;
            if dist.get(&n).is_none_or(|&d| ng < d - 1e-12) {
                dist.insert(n, ng);
                parent.insert(n, c);
                counter += 1;
                heap.push(Reverse((Key(ng + h(n)), counter, n)));
            }
        }
    }
    Err(NoPath)
}

/// Motion commands that walk `path` starting with `heading`.
pub fn path_to_commands(path: &[Cell], mut heading: Heading) -> Vec<MotionCommand> {
    let mut out = Vec::new();
    for w in path.windows(2) {
        let want = Heading::toward((w[1].row - w[0].row) as f64, (w[1].col - w[0].col) as f64);
        out.extend(turns(heading, want));
        heading = want;
        out.push(MotionCommand::Forward);
    }
    out
}

/// Shortest rotation sequence from one heading to another.
pub fn turns(from: Heading, to: Heading) -> Vec<MotionCommand> {
    match from.left_turns_to(to) {
        0 => vec![],
        1 => vec![MotionCommand::RotateLeft],
        2 => vec![MotionCommand::RotateLeft, MotionCommand::RotateLeft],
        _ => vec![MotionCommand::RotateRight],
    }
}

/// Plans motion commands from `from` to `to` over known occupancy.
pub fn plan_path(
    grid: &impl OccupancyGrid,
    params: &SearchParams,
    from: Cell,
    heading: Heading,
    to: Cell,
) -> Result<Vec<MotionCommand>, NoPath> {
    let path = astar(grid, params, from, &[to])?;
    Ok(path_to_commands(&path, heading))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::VecDeque;

    struct Grid {
        w: i32,
        h: i32,
        cells: Vec<Occupancy>,
    }

    impl OccupancyGrid for Grid {
        fn occupancy_at(&self, c: Cell) -> Occupancy {
            if c.row < 0 || c.col < 0 || c.row >= self.h || c.col >= self.w {
                Occupancy::Obstacle
            } else {
                self.cells[(c.row * self.w + c.col) as usize]
            }
        }
    }

    fn bfs(g: &Grid, s: Cell, t: Cell) -> Option<usize> {
        let mut d = HashMap::from([(s, 0usize)]);
        let mut q = VecDeque::from([s]);
        while let Some(c) = q.pop_front() {
            if c == t {
                return Some(d[&c]);
            }
            for (dr, dc) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
                let n = c.offset(dr, dc);
                if g.occupancy_at(n) == Occupancy::Free && !d.contains_key(&n) {
                    d.insert(n, d[&c] + 1);
                    q.push_back(n);
                }
            }
        }
        None
    }

    #[test]
    fn corridor_of_ten_cells() {
        let g = Grid { w: 11, h: 1, cells: vec![Occupancy::Free; 11] };
        let p = SearchParams::new(5, 1.5);
        let cmds = plan_path(&g, &p, Cell::new(0, 0), Heading::East, Cell::new(0, 10)).unwrap();
        assert_eq!(cmds, vec![MotionCommand::Forward, MotionCommand::Forward]);
        assert!(plan_path(&g, &p, Cell::new(0, 0), Heading::East, Cell::new(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn matches_bfs_on_random_mazes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = SearchParams::new(1, 1.5);
        for _ in 0..200 {
            let cells = (0..2500).map(|_| if rng.gen_bool(0.3) { Occupancy::Obstacle } else { Occupancy::Free }).collect();
            let mut g = Grid { w: 50, h: 50, cells };
            let (s, t) = (Cell::new(rng.gen_range(0..50), rng.gen_range(0..50)), Cell::new(rng.gen_range(0..50), rng.gen_range(0..50)));
            g.cells[(s.row * 50 + s.col) as usize] = Occupancy::Free;
            g.cells[(t.row * 50 + t.col) as usize] = Occupancy::Free;
            match (astar(&g, &p, s, &[t]), bfs(&g, s, t)) {
                (Ok(path), Some(d)) => {
                    assert_eq!(path.len() - 1, d);
                    assert!(path.windows(2).all(|w| w[0].manhattan(w[1]) == 1));
                }
                (Err(NoPath), None) => {}
                (a, b) => panic!("astar {a:?} vs bfs {b:?}"),
            }
        }
    }

    #[test]
    fn unknown_costs_more() {
        // the top row is two moves shorter but crosses unknown cells
        let mut cells = vec![Occupancy::Free; 8];
        cells[1] = Occupancy::Unknown;
        cells[2] = Occupancy::Unknown;
        let g = Grid { w: 4, h: 2, cells };
        let cheap = astar(&g, &SearchParams::new(1, 1.5), Cell::new(0, 0), &[Cell::new(0, 3)]).unwrap();
        assert_eq!(cheap.len(), 4);
        let dear = astar(&g, &SearchParams::new(1, 3.0), Cell::new(0, 0), &[Cell::new(0, 3)]).unwrap();
        assert!(!dear.contains(&Cell::new(0, 1)) && dear.len() == 6);
    }
}
