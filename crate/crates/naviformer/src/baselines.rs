//! Classical planners: grid A*, a greedy budget-aware route heuristic, and
//! the two-step route-then-path pipeline.
//!
//! A* runs on an occupancy grid inflated by half a cell diagonal, so any
//! continuous point inside a free cell is strictly clear of every obstacle
//! disc. Moves are 8-connected with no corner cutting; costs count straight
//! and diagonal moves as exact integers, making path costs comparable
//! without floating-point ambiguity (`a + b*sqrt(2)` is unique per `(a, b)`).

use std::collections::BinaryHeap;

use crate::nop::{NopInstance, Point, Polyline, Route};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("start cell is blocked")]
    BlockedStart,
    #[error("goal cell is blocked")]
    BlockedGoal,
    #[error("budget {budget} cannot cover the depot-to-depot distance {needed}")]
    InfeasibleBudget { budget: f64, needed: f64 },
    #[error("distance matrix is {got}x{got2}, expected {expected} nodes")]
    BadMatrix { got: usize, got2: usize, expected: usize },
}

/// Square occupancy grid over the unit square.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub resolution: f64,
    pub cells: usize,
    blocked: Vec<bool>,
}

impl GridSpec {
    /// Rasterizes an instance's obstacles, inflating each disc by half a
    /// cell diagonal so free cells are entirely collision-free.
    pub fn from_instance(inst: &NopInstance, resolution: f64) -> GridSpec {
        let cells = (1.0 / resolution).round().max(1.0) as usize;
        let inflation = resolution * SQRT_2 / 2.0;
        let mut blocked = vec![false; cells * cells];
        for iy in 0..cells {
            let cy = (iy as f64 + 0.5) * resolution;
            for ix in 0..cells {
                let cx = (ix as f64 + 0.5) * resolution;
                let p = Point::new(cx, cy);
                if inst
                    .obstacles()
                    .iter()
                    .any(|o| o.center().dist(&p) <= o.radius + inflation)
                {
                    blocked[iy * cells + ix] = true;
                }
            }
        }
        GridSpec {
            resolution,
            cells,
            blocked,
        }
    }

    /// Grid with an explicit occupancy buffer (row-major, `cells x cells`).
    pub fn from_blocked(cells: usize, resolution: f64, blocked: Vec<bool>) -> GridSpec {
        assert_eq!(blocked.len(), cells * cells);
        GridSpec {
            resolution,
            cells,
            blocked,
        }
    }

    pub fn is_blocked(&self, ix: usize, iy: usize) -> bool {
        self.blocked[iy * self.cells + ix]
    }

    pub fn cell_of(&self, p: Point) -> (usize, usize) {
        let clamp = |v: f64| -> usize {
            ((v / self.resolution).floor() as isize).clamp(0, self.cells as isize - 1) as usize
        };
        (clamp(p.x), clamp(p.y))
    }

    pub fn center_of(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            (ix as f64 + 0.5) * self.resolution,
            (iy as f64 + 0.5) * self.resolution,
        )
    }
}

/// A grid path with exact move counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPath {
    /// Visited cells from start to goal inclusive.
    pub cells: Vec<(usize, usize)>,
    pub straight_moves: usize,
    pub diagonal_moves: usize,
}

impl GridPath {
    /// Exact path cost in world units.
    pub fn cost(&self, resolution: f64) -> f64 {
        resolution * (self.straight_moves as f64 + self.diagonal_moves as f64 * SQRT_2)
    }

    /// Cell-center polyline.
    pub fn polyline(&self, grid: &GridSpec) -> Polyline {
        Polyline(
            self.cells
                .iter()
                .map(|&(ix, iy)| grid.center_of(ix, iy))
                .collect(),
        )
    }
}

const NEIGHBORS: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

struct HeapEntry {
    f: f64,
    seq: u64,
    cell: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.seq == other.seq
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap by f, FIFO on ties: deterministic expansion order
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Octile distance in move units.
fn octile(dx: usize, dy: usize) -> f64 {
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    (hi - lo) as f64 + lo as f64 * SQRT_2
}

/// Search with an optional heuristic (A* with octile, Dijkstra with zero).
fn grid_search(
    grid: &GridSpec,
    start: (usize, usize),
    goal: (usize, usize),
    heuristic: bool,
) -> Option<GridPath> {
    let n = grid.cells;
    let idx = |(ix, iy): (usize, usize)| iy * n + ix;
    let mut g_straight = vec![usize::MAX; n * n];
    let mut g_diag = vec![usize::MAX; n * n];
    let mut parent: Vec<u32> = vec![u32::MAX; n * n];
    let mut closed = vec![false; n * n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;

    let g_cost = |s: usize, d: usize| s as f64 + d as f64 * SQRT_2;
    let h = |cell: (usize, usize)| -> f64 {
        if heuristic {
            octile(cell.0.abs_diff(goal.0), cell.1.abs_diff(goal.1))
        } else {
            0.0
        }
    };

    g_straight[idx(start)] = 0;
    g_diag[idx(start)] = 0;
    heap.push(HeapEntry {
        f: h(start),
        seq,
        cell: idx(start),
    });

    while let Some(entry) = heap.pop() {
        let cur = entry.cell;
        if closed[cur] {
            continue;
        }
        closed[cur] = true;
        let (cx, cy) = (cur % n, cur / n);
        if (cx, cy) == goal {
            let mut cells = vec![(cx, cy)];
            let mut at = cur;
            while parent[at] != u32::MAX {
                at = parent[at] as usize;
                cells.push((at % n, at / n));
            }
            cells.reverse();
            return Some(GridPath {
                cells,
                straight_moves: g_straight[cur],
                diagonal_moves: g_diag[cur],
            });
        }
        for (dx, dy) in NEIGHBORS {
            let nx = cx as isize + dx;
            let ny = cy as isize + dy;
            if nx < 0 || ny < 0 || nx >= n as isize || ny >= n as isize {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if grid.is_blocked(nx, ny) {
                continue;
            }
            let diagonal = dx != 0 && dy != 0;
            // no corner cutting: a diagonal move needs both orthogonal
            // neighbors free
            if diagonal && (grid.is_blocked(nx, cy) || grid.is_blocked(cx, ny)) {
                continue;
            }
            let ni = idx((nx, ny));
            if closed[ni] {
                continue;
            }
            let (ns, nd) = if diagonal {
                (g_straight[cur], g_diag[cur] + 1)
            } else {
                (g_straight[cur] + 1, g_diag[cur])
            };
            let new_g = g_cost(ns, nd);
            let old_g = if g_straight[ni] == usize::MAX {
                f64::INFINITY
            } else {
                g_cost(g_straight[ni], g_diag[ni])
            };
            if new_g < old_g {
                g_straight[ni] = ns;
                g_diag[ni] = nd;
                parent[ni] = cur as u32;
                seq += 1;
                heap.push(HeapEntry {
                    f: new_g + h((nx, ny)),
                    seq,
                    cell: ni,
                });
            }
        }
    }
    None
}

/// Optimal 8-connected path between two points' cells; `Ok(None)` when no
/// path exists, errors when an endpoint cell is blocked.
pub fn astar(grid: &GridSpec, start: Point, goal: Point) -> Result<Option<GridPath>, PlanError> {
    let s = grid.cell_of(start);
    let g = grid.cell_of(goal);
    if grid.is_blocked(s.0, s.1) {
        return Err(PlanError::BlockedStart);
    }
    if grid.is_blocked(g.0, g.1) {
        return Err(PlanError::BlockedGoal);
    }
    Ok(grid_search(grid, s, g, true))
}

/// Dijkstra on the same move set; the equality oracle for [`astar`].
pub fn dijkstra(grid: &GridSpec, start: Point, goal: Point) -> Result<Option<GridPath>, PlanError> {
    let s = grid.cell_of(start);
    let g = grid.cell_of(goal);
    if grid.is_blocked(s.0, s.1) {
        return Err(PlanError::BlockedStart);
    }
    if grid.is_blocked(g.0, g.1) {
        return Err(PlanError::BlockedGoal);
    }
    Ok(grid_search(grid, s, g, false))
}

/// Pairwise straight-line distances between all nodes.
pub fn euclidean_matrix(inst: &NopInstance) -> Vec<Vec<f64>> {
    let nodes = inst.nodes();
    nodes
        .iter()
        .map(|a| nodes.iter().map(|b| a.dist(b)).collect())
        .collect()
}

/// Budget-aware greedy route: repeatedly append the unvisited node with the
/// best reward-per-distance ratio whose detour still allows reaching the
/// end depot, then finish at the end depot.
pub fn greedy_route(
    inst: &NopInstance,
    dist: &[Vec<f64>],
    budget: f64,
) -> Result<Route, PlanError> {
    greedy_route_masked(inst, dist, budget, None)
}

/// [`greedy_route`] restricted to an allowed-node mask (used by the
/// two-step pipeline to skip nodes whose grid cells are blocked).
pub fn greedy_route_masked(
    inst: &NopInstance,
    dist: &[Vec<f64>],
    budget: f64,
    allowed: Option<&[bool]>,
) -> Result<Route, PlanError> {
    let n_nodes = inst.nodes().len();
    if dist.len() != n_nodes || dist.iter().any(|row| row.len() != n_nodes) {
        return Err(PlanError::BadMatrix {
            got: dist.len(),
            got2: dist.first().map_or(0, |r| r.len()),
            expected: n_nodes,
        });
    }
    let end = inst.end_depot();
    if dist[0][end] > budget {
        return Err(PlanError::InfeasibleBudget {
            budget,
            needed: dist[0][end],
        });
    }

    let mut route = vec![0usize];
    let mut visited = vec![false; n_nodes];
    visited[0] = true;
    let mut cur = 0usize;
    let mut remaining = budget;

    loop {
        let mut best: Option<(usize, f64)> = None;
        for j in 1..end {
            if visited[j] || inst.rewards()[j] <= 0.0 {
                continue;
            }
            if let Some(mask) = allowed {
                if !mask[j] {
                    continue;
                }
            }
            if dist[cur][j] + dist[j][end] > remaining {
                continue;
            }
            let ratio = inst.rewards()[j] / dist[cur][j].max(1e-12);
            if best.map_or(true, |(_, r)| ratio > r) {
                best = Some((j, ratio));
            }
        }
        match best {
            Some((j, _)) => {
                remaining -= dist[cur][j];
                visited[j] = true;
                route.push(j);
                cur = j;
            }
            None => break,
        }
    }
    route.push(end);
    Ok(Route(route))
}

/// Result of the two-step pipeline.
#[derive(Debug, Clone)]
pub struct TwoStepPlan {
    pub route: Route,
    pub path: Polyline,
}

/// Plans a route with a reduced budget over straight-line distances, then
/// stitches consecutive waypoints with A*. Nodes whose cells are blocked or
/// unreachable are skipped; if the stitched path exceeds the true budget,
/// trailing nodes are dropped and the tail re-stitched straight to the end
/// depot. A remaining budget violation is left for verification to report.
pub fn two_step_plan(
    inst: &NopInstance,
    grid_resolution: f64,
    epsilon: f64,
) -> Result<TwoStepPlan, PlanError> {
    let grid = GridSpec::from_instance(inst, grid_resolution);
    let end = inst.end_depot();

    let start_cell = grid.cell_of(inst.start());
    let end_cell = grid.cell_of(inst.end());
    if grid.is_blocked(start_cell.0, start_cell.1) {
        return Err(PlanError::BlockedStart);
    }
    if grid.is_blocked(end_cell.0, end_cell.1) {
        return Err(PlanError::BlockedGoal);
    }

    let allowed: Vec<bool> = inst
        .nodes()
        .iter()
        .map(|p| {
            let c = grid.cell_of(*p);
            !grid.is_blocked(c.0, c.1)
        })
        .collect();

    let dist = euclidean_matrix(inst);
    let planning_budget = (inst.budget() - epsilon).max(dist[0][end]);
    let mut route = greedy_route_masked(inst, &dist, planning_budget, Some(&allowed))?.0;

    loop {
        match stitch(inst, &grid, &route)? {
            Stitched::Ok(path) => {
                let length = crate::nop::path_length(&path);
                if length <= inst.budget() + crate::nop::BUDGET_EPS || route.len() <= 2 {
                    return Ok(TwoStepPlan {
                        route: Route(route),
                        path,
                    });
                }
                // over budget: drop the last interior node and re-stitch
                route.remove(route.len() - 2);
            }
            Stitched::Unreachable(pos) => {
                if route[pos] == end || route[pos] == 0 {
                    return Err(PlanError::BlockedGoal);
                }
                route.remove(pos);
            }
        }
    }
}

enum Stitched {
    Ok(Polyline),
    /// Index within the route of a node no segment could reach.
    Unreachable(usize),
}

fn stitch(inst: &NopInstance, grid: &GridSpec, route: &[usize]) -> Result<Stitched, PlanError> {
    // exact depot endpoints; interior joints at cell centers
    let mut pts: Vec<Point> = vec![inst.start()];
    for w in route.windows(2) {
        let from = inst.nodes()[w[0]];
        let to = inst.nodes()[w[1]];
        match astar(grid, from, to) {
            Ok(Some(gp)) => {
                let seg = gp.polyline(grid);
                // skip the joint cell already present at the seam
                let skip = usize::from(pts.len() > 1);
                pts.extend(seg.points().iter().skip(skip));
            }
            Ok(None) => {
                let pos = route.iter().position(|&r| r == w[1]).unwrap();
                return Ok(Stitched::Unreachable(pos));
            }
            Err(PlanError::BlockedGoal) => {
                let pos = route.iter().position(|&r| r == w[1]).unwrap();
                return Ok(Stitched::Unreachable(pos));
            }
            Err(e) => return Err(e),
        }
    }
    pts.push(inst.end());
    Ok(Stitched::Ok(Polyline(pts)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate_instance_indexed, GenConfig};
    use crate::nop::{verify_solution, Obstacle};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn empty_grid() -> GridSpec {
        GridSpec::from_blocked(50, 0.02, vec![false; 2500])
    }

    #[test]
    fn straight_line_five_cells() {
        let grid = empty_grid();
        let path = astar(&grid, Point::new(0.0, 0.0), Point::new(0.1, 0.0))
            .unwrap()
            .unwrap();
        assert_eq!(path.straight_moves, 5);
        assert_eq!(path.diagonal_moves, 0);
        assert!((path.cost(0.02) - 0.1).abs() < 1e-12);
        assert_eq!(path.cells.len(), 6);
    }

    #[test]
    fn enclosed_goal_is_infeasible() {
        let mut blocked = vec![false; 2500];
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let ix = (25 + dx) as usize;
                let iy = (25 + dy) as usize;
                blocked[iy * 50 + ix] = true;
            }
        }
        let grid = GridSpec::from_blocked(50, 0.02, blocked);
        let goal = grid.center_of(25, 25);
        let res = astar(&grid, Point::new(0.0, 0.0), goal).unwrap();
        assert!(res.is_none());
    }

    #[test]
    fn blocked_endpoints_are_errors() {
        let mut blocked = vec![false; 2500];
        blocked[0] = true;
        let grid = GridSpec::from_blocked(50, 0.02, blocked);
        assert!(matches!(
            astar(&grid, Point::new(0.0, 0.0), Point::new(0.5, 0.5)),
            Err(PlanError::BlockedStart)
        ));
        assert!(matches!(
            astar(&grid, Point::new(0.5, 0.5), Point::new(0.0, 0.0)),
            Err(PlanError::BlockedGoal)
        ));
    }

    #[test]
    fn astar_matches_dijkstra_on_random_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..25 {
            let blocked: Vec<bool> = (0..2500).map(|_| rng.gen::<f64>() < 0.25).collect();
            let grid = GridSpec::from_blocked(50, 0.02, blocked);
            let start = grid.center_of(rng.gen_range(0..50), rng.gen_range(0..50));
            let goal = grid.center_of(rng.gen_range(0..50), rng.gen_range(0..50));
            let a = astar(&grid, start, goal);
            let d = dijkstra(&grid, start, goal);
            match (a, d) {
                (Ok(Some(pa)), Ok(Some(pd))) => {
                    assert_eq!(
                        (pa.straight_moves, pa.diagonal_moves),
                        (pd.straight_moves, pd.diagonal_moves),
                        "case {case}: cost mismatch"
                    );
                    assert_eq!(pa.cost(0.02), pd.cost(0.02));
                }
                (Ok(None), Ok(None)) => {}
                (Err(_), Err(_)) => {}
                other => panic!("case {case}: asymmetric outcome {other:?}"),
            }
        }
    }

    #[test]
    fn astar_path_avoids_blocked_cells_and_inflated_discs() {
        let inst = NopInstance::new(
            vec![Point::new(0.1, 0.5), Point::new(0.9, 0.5)],
            vec![0.0, 0.0],
            vec![Obstacle::new(0.5, 0.5, 0.15)],
            3.0,
            0.02,
        )
        .unwrap();
        let grid = GridSpec::from_instance(&inst, 0.02);
        let path = astar(&grid, inst.start(), inst.end()).unwrap().unwrap();
        for &(ix, iy) in &path.cells {
            assert!(!grid.is_blocked(ix, iy));
        }
        let poly = path.polyline(&grid);
        for w in poly.points().windows(2) {
            assert!(crate::nop::segment_is_free(w[0], w[1], inst.obstacles()));
        }
    }

    fn line_instance(extra: &[(f64, f64)], budget: f64) -> NopInstance {
        let mut nodes = vec![Point::new(0.1, 0.5)];
        nodes.extend(extra.iter().map(|&(x, y)| Point::new(x, y)));
        nodes.push(Point::new(0.9, 0.5));
        let mut rewards = vec![1.0; nodes.len()];
        rewards[0] = 0.0;
        let last = nodes.len() - 1;
        rewards[last] = 0.0;
        NopInstance::new(nodes, rewards, vec![], budget, 0.02).unwrap()
    }

    #[test]
    fn greedy_route_tight_budget_goes_straight() {
        let inst = line_instance(&[(0.5, 0.9)], 0.8000001);
        let dist = euclidean_matrix(&inst);
        let route = greedy_route(&inst, &dist, 0.8000001).unwrap();
        assert_eq!(route.0, vec![0, 2]);
    }

    #[test]
    fn greedy_route_grabs_free_node_on_the_way() {
        let inst = line_instance(&[(0.5, 0.5)], 2.0);
        let dist = euclidean_matrix(&inst);
        let route = greedy_route(&inst, &dist, 2.0).unwrap();
        assert_eq!(route.0, vec![0, 1, 2]);
    }

    #[test]
    fn greedy_route_infeasible_budget() {
        let inst = line_instance(&[], 0.1);
        let dist = euclidean_matrix(&inst);
        assert!(matches!(
            greedy_route(&inst, &dist, 0.1),
            Err(PlanError::InfeasibleBudget { .. })
        ));
    }

    /// Exhaustive orienteering optimum for tiny instances.
    fn brute_force_best_prize(inst: &NopInstance, dist: &[Vec<f64>], budget: f64) -> f64 {
        let end = inst.end_depot();
        let interior: Vec<usize> = (1..end).collect();
        let mut best = 0.0f64;
        let k = interior.len();
        for mask in 0u32..(1 << k) {
            let subset: Vec<usize> = interior
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask & (1 << i) != 0)
                .map(|(_, &j)| j)
                .collect();
            let mut perm = subset.clone();
            permute_and_check(&mut perm, 0, inst, dist, budget, &mut best);
        }
        best
    }

    fn permute_and_check(
        perm: &mut [usize],
        k: usize,
        inst: &NopInstance,
        dist: &[Vec<f64>],
        budget: f64,
        best: &mut f64,
    ) {
        if k == perm.len() {
            let mut total = 0.0;
            let mut cur = 0usize;
            for &j in perm.iter() {
                total += dist[cur][j];
                cur = j;
            }
            total += dist[cur][inst.end_depot()];
            if total <= budget {
                let prize: f64 = perm.iter().map(|&j| inst.rewards()[j]).sum();
                if prize > *best {
                    *best = prize;
                }
            }
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute_and_check(perm, k + 1, inst, dist, budget, best);
            perm.swap(k, i);
        }
    }

    #[test]
    fn greedy_prize_bounded_by_exhaustive_optimum() {
        for seed in 0..20u64 {
            let cfg = GenConfig {
                n_nodes: 6,
                obstacle_count: (1, 2),
                radius_range: (0.02, 0.05),
                budget: 1.5,
                step_len: 0.02,
                seed,
            };
            let inst = generate_instance_indexed(&cfg, 0).unwrap();
            let dist = euclidean_matrix(&inst);
            let route = greedy_route(&inst, &dist, inst.budget()).unwrap();
            let prize: f64 = route.0.iter().map(|&j| inst.rewards()[j]).sum();
            let optimum = brute_force_best_prize(&inst, &dist, inst.budget());
            assert!(
                prize <= optimum + 1e-9,
                "seed {seed}: greedy beat brute force?"
            );
            assert!(prize >= 0.0);
        }
    }

    #[test]
    fn two_step_plan_passes_verification() {
        for seed in 0..10u64 {
            let cfg = GenConfig {
                n_nodes: 10,
                obstacle_count: (3, 6),
                radius_range: (0.02, 0.12),
                budget: 2.0,
                step_len: 0.02,
                seed: seed + 100,
            };
            let inst = generate_instance_indexed(&cfg, 0).unwrap();
            match two_step_plan(&inst, inst.step_len(), 0.3) {
                Ok(plan) => {
                    let report = verify_solution(&inst, &plan.route, &plan.path).unwrap();
                    assert!(report.collision_free, "seed {seed}: collision");
                    assert!(report.starts_at_depot, "seed {seed}: start");
                    assert!(report.ends_at_depot, "seed {seed}: end");
                    assert!(report.route_continuity, "seed {seed}: continuity");
                }
                Err(PlanError::BlockedStart | PlanError::BlockedGoal) => {
                    // depot boxed in by inflated obstacles: legitimately infeasible
                }
                Err(e) => panic!("seed {seed}: {e}"),
            }
        }
    }

    #[test]
    fn two_step_epsilon_equal_to_slack_goes_straight() {
        let inst = line_instance(&[(0.5, 0.9)], 1.0);
        // epsilon leaves exactly the depot-to-depot distance
        let plan = two_step_plan(&inst, 0.02, 1.0 - 0.8).unwrap();
        assert_eq!(plan.route.0, vec![0, 2]);
        let len = crate::nop::path_length(&plan.path);
        assert!(len <= 1.0 + 1e-9);
    }

    #[test]
    fn two_step_obstacle_free_length_close_to_euclidean() {
        let inst = line_instance(&[(0.5, 0.7)], 2.0);
        let plan = two_step_plan(&inst, 0.02, 0.3).unwrap();
        let stitched = crate::nop::path_length(&plan.path);
        let mut euclid = 0.0;
        let mut cur = 0usize;
        for &j in &plan.route.0[1..] {
            euclid += inst.nodes()[cur].dist(&inst.nodes()[j]);
            cur = j;
        }
        // octile approximation stays within 8.3% of the straight line
        assert!(
            stitched <= euclid * 1.083 + 4.0 * 0.02 * SQRT_2,
            "stitched {stitched} vs euclidean {euclid}"
        );
    }
}
