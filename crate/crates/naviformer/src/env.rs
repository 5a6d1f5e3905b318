//! Episode simulator: direction dynamics, visit detection, collision
//! handling, episode rewards, and agent-centered local maps.
//!
//! The agent moves in steps of fixed length along eight compass directions
//! (index `k` maps to the angle `k * 45°`; diagonal steps keep the same
//! length, i.e. constant speed). A step that crosses an obstacle or leaves
//! the unit square ends the episode as a failure; reaching the end depot
//! ends it as a success; exhausting the step budget first is a timeout.

use serde::{Deserialize, Serialize};

use crate::nop::{segment_hits_obstacle, NopInstance, Point, Polyline, Route};

/// Direction unit vectors for the eight compass headings, exact on the axes.
pub const DIRECTIONS: [(f64, f64); 8] = {
    const D: f64 = std::f64::consts::FRAC_1_SQRT_2;
    [
        (1.0, 0.0),
        (D, D),
        (0.0, 1.0),
        (-D, D),
        (-1.0, 0.0),
        (-D, -D),
        (0.0, -1.0),
        (D, -D),
    ]
};

pub const NUM_DIRECTIONS: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("step applied to a finished episode (outcome {0:?})")]
    EpisodeFinished(Outcome),
    #[error("direction index {0} out of range 0..8")]
    BadDirection(usize),
    #[error("episode reward requested for an unfinished trace")]
    UnfinishedTrace,
    #[error("goal {0} is already visited and is not the end depot")]
    VisitedGoal(usize),
}

/// Terminal status of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    InProgress,
    Success,
    CollisionFail,
    TimeoutFail,
    OutOfBoundsFail,
}

impl Outcome {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, Outcome::InProgress)
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success)
    }
}

/// Simulator knobs. The visit radius defaults to one step length because
/// discrete motion cannot land exactly on continuous coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub visit_radius: f64,
    /// Local maps are `map_cells x map_cells` grids.
    pub map_cells: usize,
    /// Side length of the local map window in world units.
    pub window_side: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            visit_radius: 0.02,
            map_cells: 32,
            window_side: 0.32,
        }
    }
}

/// Mutable agent state within one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub position: Point,
    pub steps_left: usize,
    pub visited: Vec<bool>,
    /// Goal chosen at the previous decision step; the start depot before the
    /// first decision.
    pub last_goal: usize,
    pub outcome: Outcome,
}

impl AgentState {
    pub fn done(&self) -> bool {
        self.outcome.is_terminal()
    }

    pub fn visited_count(&self) -> usize {
        self.visited.iter().filter(|&&v| v).count()
    }

    /// Copy of the state with the active goal replaced; used by rollouts
    /// right before stepping.
    pub fn with_goal(&self, goal: usize) -> AgentState {
        let mut s = self.clone();
        s.last_goal = goal;
        s
    }
}

/// Starts an episode at the start depot with the full step budget.
///
/// Interior nodes with zero reward are treated as padding and start out
/// visited, which permanently masks them from goal selection.
pub fn reset(inst: &NopInstance) -> AgentState {
    let mut visited = vec![false; inst.nodes().len()];
    visited[0] = true;
    for i in 1..inst.end_depot() {
        if inst.rewards()[i] == 0.0 {
            visited[i] = true;
        }
    }
    let steps_left = inst.max_steps();
    AgentState {
        position: inst.start(),
        steps_left,
        visited,
        last_goal: 0,
        // a budget below one step length leaves no legal move
        outcome: if steps_left == 0 {
            Outcome::TimeoutFail
        } else {
            Outcome::InProgress
        },
    }
}

/// What changed during one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEffect {
    pub state: AgentState,
    /// Nodes whose visited flag flipped on this step, in index order.
    pub newly_visited: Vec<usize>,
}

/// Advances the agent one step along direction `dir` (0..8).
///
/// The move is applied in full; a collision or boundary exit terminates the
/// episode with the corresponding failure. Otherwise every unvisited node
/// within the visit radius of the new position becomes visited, reaching the
/// end depot succeeds, and running out of steps times out.
pub fn step(
    state: &AgentState,
    inst: &NopInstance,
    dir: usize,
    cfg: &EnvConfig,
) -> Result<StepEffect, EnvError> {
    if state.done() {
        return Err(EnvError::EpisodeFinished(state.outcome));
    }
    if dir >= NUM_DIRECTIONS {
        return Err(EnvError::BadDirection(dir));
    }

    let (dx, dy) = DIRECTIONS[dir];
    let t_s = inst.step_len();
    let from = state.position;
    let to = Point::new(from.x + t_s * dx, from.y + t_s * dy);

    let mut next = state.clone();
    next.position = to;
    next.steps_left -= 1;

    if inst.obstacles().iter().any(|o| segment_hits_obstacle(from, to, o)) {
        next.outcome = Outcome::CollisionFail;
        return Ok(StepEffect {
            state: next,
            newly_visited: Vec::new(),
        });
    }
    if !to.in_unit_square() {
        next.outcome = Outcome::OutOfBoundsFail;
        return Ok(StepEffect {
            state: next,
            newly_visited: Vec::new(),
        });
    }

    let mut newly_visited = Vec::new();
    for (i, node) in inst.nodes().iter().enumerate() {
        if !next.visited[i] && to.dist(node) <= cfg.visit_radius {
            next.visited[i] = true;
            newly_visited.push(i);
        }
    }

    if newly_visited.contains(&inst.end_depot()) {
        next.outcome = Outcome::Success;
    } else if next.steps_left == 0 {
        next.outcome = Outcome::TimeoutFail;
    }

    Ok(StepEffect {
        state: next,
        newly_visited,
    })
}

/// One decision step of a finished or in-flight episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Agent position before the move.
    pub position: [f64; 2],
    pub steps_left: usize,
    pub goal: usize,
    pub dir: usize,
    pub log_prob_goal: f64,
    pub log_prob_dir: f64,
}

/// Reward decomposition for one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Prize term: `PRIZE_WEIGHT * collected / (n / 2)`.
    pub prize: f64,
    /// Distance penalty: `DISTANCE_WEIGHT * sum_t d(position_t, goal_t)`
    /// accumulated over pre-move positions.
    pub distance_penalty: f64,
    /// Terminal bonus on success, penalty otherwise.
    pub terminal: f64,
    pub total: f64,
}

/// Complete record of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub schema: u32,
    pub outcome: Outcome,
    pub steps: Vec<StepRecord>,
    /// Positions including the start; forms the episode polyline.
    pub positions: Vec<[f64; 2]>,
    /// Nodes in visit order (excluding the pre-visited start depot).
    pub visited_order: Vec<usize>,
    pub reward: RewardBreakdown,
}

pub const TRACE_SCHEMA_VERSION: u32 = 1;

impl EpisodeTrace {
    pub fn polyline(&self) -> Polyline {
        Polyline(self.positions.iter().map(|p| Point::new(p[0], p[1])).collect())
    }

    /// Interior nodes visited during the episode.
    pub fn visited_interior(&self, inst: &NopInstance) -> Vec<usize> {
        self.visited_order
            .iter()
            .copied()
            .filter(|&i| inst.is_interior(i))
            .collect()
    }

    /// Route implied by the visit order: start depot, interior visits, end
    /// depot (only when reached).
    pub fn route(&self, inst: &NopInstance) -> Route {
        let mut r = vec![0usize];
        r.extend(self.visited_interior(inst));
        if self.outcome.is_success() {
            r.push(inst.end_depot());
        }
        Route(r)
    }
}

pub const PRIZE_WEIGHT: f64 = 10.0;
pub const DISTANCE_WEIGHT: f64 = 0.3;
pub const SUCCESS_BONUS: f64 = 20.0;
pub const FAILURE_PENALTY: f64 = -10.0;

/// Assembles the reward decomposition from its accumulated ingredients:
/// `PRIZE_WEIGHT * collected / (n/2) - DISTANCE_WEIGHT * dist_sum + terminal`
/// where `n` is the prize-node count and `terminal` is +20 on success and
/// -10 otherwise. Both the trainer (incrementally) and
/// [`episode_reward`] (from a finished trace) feed this same scorer, so the
/// two routes agree bit-exactly.
pub fn score_episode(
    collected: usize,
    dist_sum: f64,
    success: bool,
    inst: &NopInstance,
) -> RewardBreakdown {
    let half_n = inst.prize_node_count() as f64 / 2.0;
    let prize = if half_n > 0.0 {
        PRIZE_WEIGHT * collected as f64 / half_n
    } else {
        0.0
    };
    let distance_penalty = DISTANCE_WEIGHT * dist_sum;
    let terminal = if success { SUCCESS_BONUS } else { FAILURE_PENALTY };
    RewardBreakdown {
        prize,
        distance_penalty,
        terminal,
        total: prize - distance_penalty + terminal,
    }
}

/// Computes the episode reward and its decomposition from a finished trace.
///
/// `collected` counts visited prize-bearing interior nodes and the distance
/// term accumulates the pre-move distance to the active goal at each step.
pub fn episode_reward(trace: &EpisodeTrace, inst: &NopInstance) -> Result<RewardBreakdown, EnvError> {
    if !trace.outcome.is_terminal() {
        return Err(EnvError::UnfinishedTrace);
    }
    let collected = trace
        .visited_order
        .iter()
        .filter(|&&i| inst.is_interior(i) && inst.rewards()[i] > 0.0)
        .count();
    let mut dist_sum = 0.0;
    for rec in &trace.steps {
        let pos = Point::new(rec.position[0], rec.position[1]);
        dist_sum += pos.dist(&inst.nodes()[rec.goal]);
    }
    Ok(score_episode(
        collected,
        dist_sum,
        trace.outcome.is_success(),
        inst,
    ))
}

/// Binary local maps centered on the agent.
///
/// `obstacle` marks cells whose centers lie inside any obstacle disc;
/// `goal` marks the single cell of the active goal, projected onto the
/// window boundary along the agent-to-goal ray when the goal lies outside
/// the window. Rows run south to north, columns west to east.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMaps {
    pub cells: usize,
    pub obstacle: Vec<f32>,
    pub goal: Vec<f32>,
}

/// Quadrant selectors for [`LocalMaps::quadrant_mask`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    North,
    East,
    South,
    West,
}

pub const QUADRANTS: [Quadrant; 4] = [Quadrant::North, Quadrant::East, Quadrant::South, Quadrant::West];

impl LocalMaps {
    fn idx(&self, row: usize, col: usize) -> usize {
        row * self.cells + col
    }

    pub fn obstacle_at(&self, row: usize, col: usize) -> f32 {
        self.obstacle[self.idx(row, col)]
    }

    pub fn goal_at(&self, row: usize, col: usize) -> f32 {
        self.goal[self.idx(row, col)]
    }

    /// Row/column of the (single) active goal cell.
    pub fn goal_cell(&self) -> (usize, usize) {
        let i = self
            .goal
            .iter()
            .position(|&v| v > 0.0)
            .expect("goal map always has one active cell");
        (i / self.cells, i % self.cells)
    }

    /// True iff `(row, col)` belongs to the given half of the window. The
    /// four halves overlap pairwise in the window's quarters.
    pub fn in_quadrant(&self, q: Quadrant, row: usize, col: usize) -> bool {
        let half = self.cells / 2;
        match q {
            Quadrant::North => row >= half,
            Quadrant::South => row < half,
            Quadrant::East => col >= half,
            Quadrant::West => col < half,
        }
    }

    /// The given grid restricted to one half of the window, zero elsewhere.
    pub fn quadrant_view(&self, q: Quadrant, grid: &[f32]) -> Vec<f32> {
        let mut out = vec![0.0f32; grid.len()];
        for row in 0..self.cells {
            for col in 0..self.cells {
                if self.in_quadrant(q, row, col) {
                    let i = self.idx(row, col);
                    out[i] = grid[i];
                }
            }
        }
        out
    }

    /// Stacks the full maps plus the four quadrant views of both grids into
    /// channel-major `(2 + 8) * cells * cells` input for the direction head.
    pub fn to_channels(&self) -> Vec<f32> {
        let hw = self.cells * self.cells;
        let mut out = Vec::with_capacity(10 * hw);
        out.extend_from_slice(&self.obstacle);
        out.extend_from_slice(&self.goal);
        for q in QUADRANTS {
            out.extend(self.quadrant_view(q, &self.obstacle));
            out.extend(self.quadrant_view(q, &self.goal));
        }
        out
    }

    pub const CHANNELS: usize = 10;
}

/// Rasterizes the agent-centered obstacle and goal maps for the given goal.
pub fn rasterize_local_maps(
    state: &AgentState,
    inst: &NopInstance,
    goal: usize,
    cfg: &EnvConfig,
) -> LocalMaps {
    let cells = cfg.map_cells;
    let cell = cfg.window_side / cells as f64;
    let half = cfg.window_side / 2.0;
    let origin_x = state.position.x - half;
    let origin_y = state.position.y - half;

    let mut obstacle = vec![0.0f32; cells * cells];
    for obs in inst.obstacles() {
        // Skip obstacles that cannot reach the window.
        if obs.cx + obs.radius < origin_x
            || obs.cx - obs.radius > origin_x + cfg.window_side
            || obs.cy + obs.radius < origin_y
            || obs.cy - obs.radius > origin_y + cfg.window_side
        {
            continue;
        }
        for row in 0..cells {
            let cy = origin_y + (row as f64 + 0.5) * cell;
            for col in 0..cells {
                let cx = origin_x + (col as f64 + 0.5) * cell;
                if obs.contains(&Point::new(cx, cy)) {
                    obstacle[row * cells + col] = 1.0;
                }
            }
        }
    }

    let mut goal_map = vec![0.0f32; cells * cells];
    let target = inst.nodes()[goal];
    let dx = target.x - state.position.x;
    let dy = target.y - state.position.y;
    let (gx, gy) = if dx.abs() <= half && dy.abs() <= half {
        (dx, dy)
    } else {
        // Project onto the window boundary along the agent-to-goal ray.
        let scale = half / dx.abs().max(dy.abs());
        (dx * scale, dy * scale)
    };
    let col = (((gx + half) / cell).floor() as isize).clamp(0, cells as isize - 1) as usize;
    let row = (((gy + half) / cell).floor() as isize).clamp(0, cells as isize - 1) as usize;
    goal_map[row * cells + col] = 1.0;

    LocalMaps {
        cells,
        obstacle,
        goal: goal_map,
    }
}

/// Serializes a trace as one JSON line.
pub fn serialize_trace(trace: &EpisodeTrace) -> String {
    serde_json::to_string(trace).expect("trace serialization cannot fail")
}

/// Parses one serialized trace line, rejecting unknown schema versions.
pub fn parse_trace(line: &str) -> Result<EpisodeTrace, serde_json::Error> {
    let trace: EpisodeTrace = serde_json::from_str(line)?;
    Ok(trace)
}

/// Writes traces one per line.
pub fn write_traces<W: std::io::Write>(mut w: W, traces: &[EpisodeTrace]) -> std::io::Result<()> {
    for t in traces {
        writeln!(w, "{}", serialize_trace(t))?;
    }
    Ok(())
}

/// Reads a line-delimited trace file.
pub fn read_traces<R: std::io::BufRead>(r: R) -> Result<Vec<EpisodeTrace>, Box<dyn std::error::Error>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t = parse_trace(&line)?;
        if t.schema != TRACE_SCHEMA_VERSION {
            return Err(format!("unsupported trace schema {}", t.schema).into());
        }
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nop::{NopInstance, Obstacle};

    fn inst(obstacles: Vec<Obstacle>) -> NopInstance {
        NopInstance::new(
            vec![
                Point::new(0.5, 0.5),
                Point::new(0.7, 0.5),
                Point::new(0.5, 0.7),
                Point::new(0.9, 0.9),
            ],
            vec![0.0, 1.0, 1.0, 0.0],
            obstacles,
            2.0,
            0.02,
        )
        .unwrap()
    }

    #[test]
    fn reset_contract() {
        let inst = inst(vec![]);
        let s = reset(&inst);
        assert_eq!(s.position, inst.start());
        assert_eq!(s.steps_left, 100);
        assert_eq!(s.visited_count(), 1);
        assert!(s.visited[0]);
        assert_eq!(s.last_goal, 0);
        assert_eq!(s.outcome, Outcome::InProgress);
    }

    #[test]
    fn step_moves_exactly_one_step_length() {
        let inst = inst(vec![]);
        let cfg = EnvConfig::default();
        let s = reset(&inst);
        let e = step(&s, &inst, 0, &cfg).unwrap();
        assert!((e.state.position.x - 0.52).abs() < 1e-15);
        assert!((e.state.position.y - 0.50).abs() < 1e-15);
        let e = step(&s, &inst, 2, &cfg).unwrap();
        assert!((e.state.position.x - 0.50).abs() < 1e-15);
        assert!((e.state.position.y - 0.52).abs() < 1e-15);
        // diagonal step has the same length
        let e = step(&s, &inst, 1, &cfg).unwrap();
        assert!((e.state.position.dist(&s.position) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn collision_terminates() {
        let inst = inst(vec![Obstacle::new(0.3, 0.5, 0.05)]);
        let cfg = EnvConfig::default();
        let mut s = reset(&inst);
        s.position = Point::new(0.36, 0.5);
        // step west ends 0.04 from the obstacle center, inside its radius
        let e = step(&s, &inst, 4, &cfg).unwrap();
        assert_eq!(e.state.outcome, Outcome::CollisionFail);
        assert!(e.state.done());
        assert!(step(&e.state, &inst, 4, &cfg).is_err());
    }

    #[test]
    fn out_of_bounds_terminates() {
        let inst = inst(vec![]);
        let cfg = EnvConfig::default();
        let mut s = reset(&inst);
        s.position = Point::new(0.99, 0.5);
        let e = step(&s, &inst, 0, &cfg).unwrap();
        assert_eq!(e.state.outcome, Outcome::OutOfBoundsFail);
    }

    #[test]
    fn visiting_end_depot_succeeds() {
        let inst = inst(vec![]);
        let cfg = EnvConfig::default();
        let mut s = reset(&inst);
        s.position = Point::new(0.9, 0.884);
        let e = step(&s, &inst, 2, &cfg).unwrap();
        assert!(e.newly_visited.contains(&3));
        assert_eq!(e.state.outcome, Outcome::Success);
    }

    #[test]
    fn timeout_when_steps_exhausted() {
        let inst = inst(vec![]);
        let cfg = EnvConfig::default();
        let mut s = reset(&inst);
        s.steps_left = 1;
        let e = step(&s, &inst, 0, &cfg).unwrap();
        assert_eq!(e.state.outcome, Outcome::TimeoutFail);
    }

    #[test]
    fn visit_monotone_and_deterministic() {
        let inst = inst(vec![]);
        let cfg = EnvConfig::default();
        let mut s = reset(&inst);
        let mut visited_prev = s.visited_count();
        for dir in [0, 0, 2, 1, 3, 2, 0, 1] {
            if s.done() {
                break;
            }
            let a = step(&s, &inst, dir, &cfg).unwrap();
            let b = step(&s, &inst, dir, &cfg).unwrap();
            assert_eq!(a, b);
            assert!(a.state.visited_count() >= visited_prev);
            visited_prev = a.state.visited_count();
            s = a.state;
        }
    }

    #[test]
    fn reward_failed_empty_episode() {
        let inst = inst(vec![]);
        let trace = EpisodeTrace {
            schema: TRACE_SCHEMA_VERSION,
            outcome: Outcome::TimeoutFail,
            steps: vec![],
            positions: vec![[0.5, 0.5]],
            visited_order: vec![],
            reward: RewardBreakdown {
                prize: 0.0,
                distance_penalty: 0.0,
                terminal: 0.0,
                total: 0.0,
            },
        };
        let r = episode_reward(&trace, &inst).unwrap();
        assert_eq!(r.total, -10.0);
        assert_eq!(r.prize, 0.0);
        assert_eq!(r.distance_penalty, 0.0);
    }

    #[test]
    fn reward_success_formula() {
        // n = 2 prize nodes, 1 visited, success: 10*1/(2/2) - 0.3*P + 20
        let inst = inst(vec![]);
        let steps = vec![
            StepRecord {
                position: [0.5, 0.5],
                steps_left: 100,
                goal: 1,
                dir: 0,
                log_prob_goal: 0.0,
                log_prob_dir: 0.0,
            },
            StepRecord {
                position: [0.52, 0.5],
                steps_left: 99,
                goal: 3,
                dir: 0,
                log_prob_goal: 0.0,
                log_prob_dir: 0.0,
            },
        ];
        let p = Point::new(0.5, 0.5).dist(&Point::new(0.7, 0.5))
            + Point::new(0.52, 0.5).dist(&Point::new(0.9, 0.9));
        let trace = EpisodeTrace {
            schema: TRACE_SCHEMA_VERSION,
            outcome: Outcome::Success,
            steps,
            positions: vec![[0.5, 0.5], [0.52, 0.5], [0.54, 0.5]],
            visited_order: vec![1, 3],
            reward: RewardBreakdown {
                prize: 0.0,
                distance_penalty: 0.0,
                terminal: 0.0,
                total: 0.0,
            },
        };
        let r = episode_reward(&trace, &inst).unwrap();
        assert!((r.prize - 10.0).abs() < 1e-12);
        assert!((r.distance_penalty - 0.3 * p).abs() < 1e-12);
        assert_eq!(r.terminal, 20.0);
        assert!((r.total - (10.0 - 0.3 * p + 20.0)).abs() < 1e-12);
    }

    #[test]
    fn reward_extra_node_adds_exactly_prize_quantum() {
        let inst = inst(vec![]);
        let base = EpisodeTrace {
            schema: TRACE_SCHEMA_VERSION,
            outcome: Outcome::TimeoutFail,
            steps: vec![],
            positions: vec![[0.5, 0.5]],
            visited_order: vec![1],
            reward: RewardBreakdown {
                prize: 0.0,
                distance_penalty: 0.0,
                terminal: 0.0,
                total: 0.0,
            },
        };
        let mut more = base.clone();
        more.visited_order = vec![1, 2];
        let a = episode_reward(&base, &inst).unwrap();
        let b = episode_reward(&more, &inst).unwrap();
        let quantum = PRIZE_WEIGHT / (inst.prize_node_count() as f64 / 2.0);
        assert!((b.total - a.total - quantum).abs() < 1e-12);
    }

    #[test]
    fn unfinished_trace_rejected() {
        let inst = inst(vec![]);
        let trace = EpisodeTrace {
            schema: TRACE_SCHEMA_VERSION,
            outcome: Outcome::InProgress,
            steps: vec![],
            positions: vec![[0.5, 0.5]],
            visited_order: vec![],
            reward: RewardBreakdown {
                prize: 0.0,
                distance_penalty: 0.0,
                terminal: 0.0,
                total: 0.0,
            },
        };
        assert!(matches!(episode_reward(&trace, &inst), Err(EnvError::UnfinishedTrace)));
    }

    #[test]
    fn maps_empty_window_is_zero() {
        let inst = inst(vec![Obstacle::new(0.05, 0.05, 0.03)]);
        let cfg = EnvConfig::default();
        let s = reset(&inst);
        let maps = rasterize_local_maps(&s, &inst, 1, &cfg);
        assert!(maps.obstacle.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn goal_at_agent_is_center_cell() {
        let inst = inst(vec![]);
        let cfg = EnvConfig::default();
        let mut s = reset(&inst);
        s.position = inst.nodes()[1];
        let maps = rasterize_local_maps(&s, &inst, 1, &cfg);
        assert_eq!(maps.goal_cell(), (16, 16));
    }

    #[test]
    fn far_goal_projects_to_east_boundary() {
        let inst = NopInstance::new(
            vec![Point::new(0.2, 0.5), Point::new(0.9, 0.5), Point::new(0.9, 0.9)],
            vec![0.0, 1.0, 0.0],
            vec![],
            2.0,
            0.02,
        )
        .unwrap();
        let cfg = EnvConfig::default();
        let s = reset(&inst);
        let maps = rasterize_local_maps(&s, &inst, 1, &cfg);
        assert_eq!(maps.goal_cell(), (16, 31));
    }

    #[test]
    fn maps_translation_covariant() {
        // generic (non-cell-boundary) coordinates so rounding cannot flip a cell
        let make = |shift: f64| {
            let inst = NopInstance::new(
                vec![
                    Point::new(0.3 + shift, 0.3),
                    Point::new(0.4231 + shift, 0.3407),
                    Point::new(0.6 + shift, 0.6),
                ],
                vec![0.0, 1.0, 0.0],
                vec![Obstacle::new(0.3612 + shift, 0.3033, 0.0405)],
                2.0,
                0.02,
            )
            .unwrap();
            let s = reset(&inst);
            rasterize_local_maps(&s, &inst, 1, &EnvConfig::default())
        };
        let a = make(0.0);
        let b = make(0.25);
        assert_eq!(a, b);
    }

    #[test]
    fn quadrant_views_mask_halves() {
        let inst = inst(vec![]);
        let cfg = EnvConfig::default();
        let s = reset(&inst);
        let maps = rasterize_local_maps(&s, &inst, 1, &cfg);
        let north = maps.quadrant_view(Quadrant::North, &maps.goal);
        let south = maps.quadrant_view(Quadrant::South, &maps.goal);
        for row in 0..maps.cells {
            for col in 0..maps.cells {
                let i = row * maps.cells + col;
                if row >= maps.cells / 2 {
                    assert_eq!(north[i], maps.goal[i]);
                    assert_eq!(south[i], 0.0);
                } else {
                    assert_eq!(south[i], maps.goal[i]);
                    assert_eq!(north[i], 0.0);
                }
            }
        }
        assert_eq!(maps.to_channels().len(), 10 * maps.cells * maps.cells);
    }

    #[test]
    fn trace_round_trip() {
        let trace = EpisodeTrace {
            schema: TRACE_SCHEMA_VERSION,
            outcome: Outcome::Success,
            steps: vec![StepRecord {
                position: [0.5, 0.5],
                steps_left: 100,
                goal: 1,
                dir: 3,
                log_prob_goal: -0.5,
                log_prob_dir: -1.25,
            }],
            positions: vec![[0.5, 0.5], [0.48586, 0.51414]],
            visited_order: vec![1],
            reward: RewardBreakdown {
                prize: 10.0,
                distance_penalty: 1.0,
                terminal: 20.0,
                total: 29.0,
            },
        };
        let line = serialize_trace(&trace);
        assert_eq!(parse_trace(&line).unwrap(), trace);
    }
}
