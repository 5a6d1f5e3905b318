//! Instance model, planar geometry, and the constraint verifier.
//!
//! An instance lives on the unit square. Node 0 is the start depot and node
//! `n + 1` the end depot; the `n` interior nodes carry non-negative rewards.
//! Obstacles are closed discs: touching the boundary counts as a collision.
//!
//! [`verify_solution`] checks a (route, path) pair against every feasibility
//! constraint independently of how the pair was produced, so it doubles as a
//! test oracle for the simulator and the classical planners.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{BufRead, Write};

use crate::util::fmt_real;

/// A point in the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }
}

/// A circular obstacle (closed disc).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

impl Obstacle {
    pub fn new(cx: f64, cy: f64, radius: f64) -> Self {
        Obstacle { cx, cy, radius }
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    /// True iff `p` lies in the closed disc.
    pub fn contains(&self, p: &Point) -> bool {
        self.center().dist(p) <= self.radius
    }

    /// True iff `p` lies strictly inside the disc (boundary excluded).
    pub fn contains_strict(&self, p: &Point) -> bool {
        self.center().dist(p) < self.radius
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NopError {
    #[error("instance needs at least the two depots, got {0} nodes")]
    TooFewNodes(usize),
    #[error("rewards length {rewards} does not match node count {nodes}")]
    RewardMismatch { rewards: usize, nodes: usize },
    #[error("depot rewards must be zero (start {start}, end {end})")]
    DepotReward { start: f64, end: f64 },
    #[error("node {0} lies outside the unit square")]
    NodeOutOfBounds(usize),
    #[error("node {node} lies strictly inside obstacle {obstacle}")]
    NodeInsideObstacle { node: usize, obstacle: usize },
    #[error("budget and step length must be positive, got T={budget}, t_s={step}")]
    BadBudget { budget: f64, step: f64 },
    #[error("obstacle {0} has non-positive radius")]
    BadRadius(usize),
    #[error("reward {0} is negative")]
    NegativeReward(usize),
    #[error("route index {index} out of range for {nodes} nodes")]
    RouteIndexOutOfRange { index: usize, nodes: usize },
    #[error("path is empty")]
    EmptyPath,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A problem instance: nodes with rewards, obstacles, and the motion budget.
///
/// `budget` is a distance budget (constant-speed travel makes time and
/// distance interchangeable); discrete motion allows `max_steps()` steps of
/// length `step_len`.
#[derive(Debug, Clone, PartialEq)]
pub struct NopInstance {
    nodes: Vec<Point>,
    rewards: Vec<f64>,
    obstacles: Vec<Obstacle>,
    budget: f64,
    step_len: f64,
}

impl NopInstance {
    pub fn new(
        nodes: Vec<Point>,
        rewards: Vec<f64>,
        obstacles: Vec<Obstacle>,
        budget: f64,
        step_len: f64,
    ) -> Result<Self, NopError> {
        if nodes.len() < 2 {
            return Err(NopError::TooFewNodes(nodes.len()));
        }
        if rewards.len() != nodes.len() {
            return Err(NopError::RewardMismatch {
                rewards: rewards.len(),
                nodes: nodes.len(),
            });
        }
        let end = nodes.len() - 1;
        if rewards[0] != 0.0 || rewards[end] != 0.0 {
            return Err(NopError::DepotReward {
                start: rewards[0],
                end: rewards[end],
            });
        }
        if let Some(i) = rewards.iter().position(|&r| r < 0.0 || !r.is_finite()) {
            return Err(NopError::NegativeReward(i));
        }
        if !(budget > 0.0) || !(step_len > 0.0) {
            return Err(NopError::BadBudget {
                budget,
                step: step_len,
            });
        }
        if let Some(i) = obstacles.iter().position(|o| !(o.radius > 0.0)) {
            return Err(NopError::BadRadius(i));
        }
        for (i, p) in nodes.iter().enumerate() {
            if !p.in_unit_square() {
                return Err(NopError::NodeOutOfBounds(i));
            }
            for (j, o) in obstacles.iter().enumerate() {
                if o.contains_strict(p) {
                    return Err(NopError::NodeInsideObstacle {
                        node: i,
                        obstacle: j,
                    });
                }
            }
        }
        Ok(NopInstance {
            nodes,
            rewards,
            obstacles,
            budget,
            step_len,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn step_len(&self) -> f64 {
        self.step_len
    }

    /// Number of interior (non-depot) nodes.
    pub fn interior_count(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Index of the end depot.
    pub fn end_depot(&self) -> usize {
        self.nodes.len() - 1
    }

    /// True for indices in `1..=n`.
    pub fn is_interior(&self, idx: usize) -> bool {
        idx >= 1 && idx < self.end_depot()
    }

    /// Interior nodes carrying a positive reward. Padding nodes added for
    /// variable-size batching have zero reward and are excluded, so this is
    /// the effective problem size used by reward and node-rate divisors.
    pub fn prize_node_count(&self) -> usize {
        (1..self.end_depot()).filter(|&i| self.rewards[i] > 0.0).count()
    }

    /// Maximum number of discrete steps the budget allows.
    pub fn max_steps(&self) -> usize {
        (self.budget / self.step_len).floor() as usize
    }

    pub fn start(&self) -> Point {
        self.nodes[0]
    }

    pub fn end(&self) -> Point {
        self.nodes[self.end_depot()]
    }
}

/// An ordered list of node indices, starting at the start depot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route(pub Vec<usize>);

impl Route {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

/// An ordered list of points. Simulator traces use segments of exactly one
/// step length; planner output may mix straight and diagonal grid segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline(pub Vec<Point>);

impl Polyline {
    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Total Euclidean length of a polyline; zero for a single point.
pub fn path_length(path: &Polyline) -> f64 {
    path.0.windows(2).map(|w| w[0].dist(&w[1])).sum()
}

/// True iff the closed segment `pq` intersects the closed disc `obs`.
pub fn segment_hits_obstacle(p: Point, q: Point, obs: &Obstacle) -> bool {
    let c = obs.center();
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return obs.contains(&p);
    }
    // Closest point of the segment to the disc center.
    let t = (((c.x - p.x) * dx + (c.y - p.y) * dy) / len2).clamp(0.0, 1.0);
    let closest = Point::new(p.x + t * dx, p.y + t * dy);
    obs.contains(&closest)
}

/// True iff `pq` is collision-free with respect to every obstacle.
pub fn segment_is_free(p: Point, q: Point, obstacles: &[Obstacle]) -> bool {
    obstacles.iter().all(|o| !segment_hits_obstacle(p, q, o))
}

/// Per-constraint verification outcome for a (route, path) pair.
///
/// Each field answers one feasibility question so a failing solution can be
/// attributed precisely. `budget_lower_bound` is informational only: it
/// reports whether the path is at least as long as the straight line between
/// the depots and does not influence `all_pass`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Route and path begin at the start depot.
    pub starts_at_depot: bool,
    /// Route ends at the end depot and the path terminates within the visit
    /// radius of it.
    pub ends_at_depot: bool,
    /// No node appears twice in the route, and the path passes within the
    /// visit radius of every routed node in route order.
    pub route_continuity: bool,
    /// No node is its own immediate successor.
    pub no_immediate_revisit: bool,
    /// Path length does not exceed the budget.
    pub within_budget: bool,
    /// Informational: path length covers the depot-to-depot straight line.
    pub budget_lower_bound: bool,
    /// No path segment intersects any obstacle disc.
    pub collision_free: bool,
    /// Positional orders along the route form a single increasing chain.
    pub no_subtours: bool,
    /// Sum of rewards over routed nodes (depots carry zero).
    pub collected_prize: f64,
    pub path_len: f64,
}

impl VerificationReport {
    /// True iff every enforced constraint holds.
    pub fn all_pass(&self) -> bool {
        self.starts_at_depot
            && self.ends_at_depot
            && self.route_continuity
            && self.no_immediate_revisit
            && self.within_budget
            && self.collision_free
            && self.no_subtours
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.starts_at_depot {
            out.push("start-depot");
        }
        if !self.ends_at_depot {
            out.push("end-depot");
        }
        if !self.route_continuity {
            out.push("route-continuity");
        }
        if !self.no_immediate_revisit {
            out.push("immediate-revisit");
        }
        if !self.within_budget {
            out.push("budget");
        }
        if !self.collision_free {
            out.push("collision");
        }
        if !self.no_subtours {
            out.push("subtour");
        }
        out
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fails = self.failures();
        if fails.is_empty() {
            write!(
                f,
                "feasible (prize {:.3}, length {:.4})",
                self.collected_prize, self.path_len
            )
        } else {
            write!(
                f,
                "infeasible [{}] (prize {:.3}, length {:.4})",
                fails.join(", "),
                self.collected_prize,
                self.path_len
            )
        }
    }
}

/// Slack used for the budget comparison: discrete arithmetic on ~1e2 step
/// sums stays far below this.
pub const BUDGET_EPS: f64 = 1e-9;

/// Verifies a (route, path) pair with the default visit radius of one step
/// length. See [`verify_solution_with`].
pub fn verify_solution(
    inst: &NopInstance,
    route: &Route,
    path: &Polyline,
) -> Result<VerificationReport, NopError> {
    verify_solution_with(inst, route, path, inst.step_len())
}

/// Verifies a (route, path) pair against all feasibility constraints.
///
/// `visit_radius` is the proximity at which a path point counts as visiting
/// a node; it must match whatever produced the pair (the simulator default
/// is one step length). A malformed route (index out of range) or an empty
/// path is a structural error, distinct from a failed constraint.
pub fn verify_solution_with(
    inst: &NopInstance,
    route: &Route,
    path: &Polyline,
    visit_radius: f64,
) -> Result<VerificationReport, NopError> {
    let n_nodes = inst.nodes().len();
    if let Some(&bad) = route.0.iter().find(|&&i| i >= n_nodes) {
        return Err(NopError::RouteIndexOutOfRange {
            index: bad,
            nodes: n_nodes,
        });
    }
    if path.is_empty() {
        return Err(NopError::EmptyPath);
    }

    let end = inst.end_depot();
    let pts = path.points();

    let starts_at_depot = route.0.first() == Some(&0) && pts[0] == inst.start();

    let ends_at_depot = route.0.last() == Some(&end)
        && pts[pts.len() - 1].dist(&inst.end()) <= visit_radius + BUDGET_EPS;

    // No duplicates, and the path must pass each routed node in order.
    let mut seen = vec![false; n_nodes];
    let mut duplicate = false;
    for &idx in &route.0 {
        if seen[idx] {
            duplicate = true;
        }
        seen[idx] = true;
    }
    let mut cursor = 0usize;
    let mut in_order = true;
    for &idx in &route.0 {
        let target = inst.nodes()[idx];
        let mut found = false;
        while cursor < pts.len() {
            if pts[cursor].dist(&target) <= visit_radius + BUDGET_EPS {
                found = true;
                break;
            }
            cursor += 1;
        }
        if !found {
            in_order = false;
            break;
        }
    }
    let route_continuity = !duplicate && in_order;

    let no_immediate_revisit = route.0.windows(2).all(|w| w[0] != w[1]);

    let path_len = path_length(path);
    let within_budget = path_len <= inst.budget() + BUDGET_EPS;
    let budget_lower_bound = path_len + BUDGET_EPS >= inst.start().dist(&inst.end());

    let collision_free = pts
        .windows(2)
        .all(|w| segment_is_free(w[0], w[1], inst.obstacles()))
        && (pts.len() > 1 || segment_is_free(pts[0], pts[0], inst.obstacles()));

    // Subtour elimination over interior nodes: assign each interior route
    // member its positional order u and require u to rise across every
    // interior successor pair. A duplicated node makes u ill-defined, which
    // is itself a subtour violation.
    let no_subtours = !duplicate && {
        let mut order = vec![None; n_nodes];
        let mut next = 1usize;
        for &idx in &route.0 {
            if inst.is_interior(idx) {
                order[idx] = Some(next);
                next += 1;
            }
        }
        let n = inst.interior_count() as i64;
        route.0.windows(2).all(|w| {
            match (order.get(w[0]).copied().flatten(), order.get(w[1]).copied().flatten()) {
                (Some(ui), Some(uj)) => ui as i64 - uj as i64 + n <= n - 1,
                _ => true,
            }
        })
    };

    let collected_prize = {
        let mut marked = vec![false; n_nodes];
        let mut prize = 0.0;
        for &idx in &route.0 {
            if !marked[idx] {
                marked[idx] = true;
                prize += inst.rewards()[idx];
            }
        }
        prize
    };

    Ok(VerificationReport {
        starts_at_depot,
        ends_at_depot,
        route_continuity,
        no_immediate_revisit,
        within_budget,
        budget_lower_bound,
        collision_free,
        no_subtours,
        collected_prize,
        path_len,
    })
}

#[derive(Serialize, Deserialize)]
struct InstanceLine {
    nodes: Vec<[f64; 2]>,
    rewards: Vec<f64>,
    obstacles: Vec<[f64; 3]>,
    #[serde(rename = "budget_T")]
    budget: f64,
    step_len: f64,
}

/// Serializes one instance as a single JSON line with fixed key order and
/// reals printed with 9 significant digits.
pub fn serialize_instance(inst: &NopInstance) -> String {
    let mut s = String::with_capacity(64 * inst.nodes().len());
    s.push_str("{\"nodes\":[");
    for (i, p) in inst.nodes().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push('[');
        s.push_str(&fmt_real(p.x));
        s.push(',');
        s.push_str(&fmt_real(p.y));
        s.push(']');
    }
    s.push_str("],\"rewards\":[");
    for (i, r) in inst.rewards().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&fmt_real(*r));
    }
    s.push_str("],\"obstacles\":[");
    for (i, o) in inst.obstacles().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push('[');
        s.push_str(&fmt_real(o.cx));
        s.push(',');
        s.push_str(&fmt_real(o.cy));
        s.push(',');
        s.push_str(&fmt_real(o.radius));
        s.push(']');
    }
    s.push_str("],\"budget_T\":");
    s.push_str(&fmt_real(inst.budget()));
    s.push_str(",\"step_len\":");
    s.push_str(&fmt_real(inst.step_len()));
    s.push('}');
    s
}

/// Parses one serialized instance line.
pub fn parse_instance(line: &str) -> Result<NopInstance, NopError> {
    parse_instance_at(line, 0)
}

fn parse_instance_at(line: &str, line_no: usize) -> Result<NopInstance, NopError> {
    let raw: InstanceLine = serde_json::from_str(line).map_err(|e| NopError::Parse {
        line: line_no,
        msg: e.to_string(),
    })?;
    NopInstance::new(
        raw.nodes.iter().map(|p| Point::new(p[0], p[1])).collect(),
        raw.rewards,
        raw.obstacles
            .iter()
            .map(|o| Obstacle::new(o[0], o[1], o[2]))
            .collect(),
        raw.budget,
        raw.step_len,
    )
}

/// Writes instances one per line.
pub fn write_instances<W: Write>(mut w: W, instances: &[NopInstance]) -> Result<(), NopError> {
    for inst in instances {
        writeln!(w, "{}", serialize_instance(inst))?;
    }
    Ok(())
}

/// Reads a line-delimited instance file.
pub fn read_instances<R: BufRead>(r: R) -> Result<Vec<NopInstance>, NopError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_instance_at(&line, i + 1)?);
    }
    Ok(out)
}

/// Loads an instance file from disk.
pub fn load_instance_file(path: &std::path::Path) -> Result<Vec<NopInstance>, NopError> {
    let f = std::fs::File::open(path)?;
    read_instances(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst_2x2(obstacles: Vec<Obstacle>) -> NopInstance {
        // start (0.1,0.1), two interior, end (0.9,0.9)
        NopInstance::new(
            vec![
                Point::new(0.1, 0.1),
                Point::new(0.3, 0.1),
                Point::new(0.5, 0.1),
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
    fn segment_hit_point_inside_disc() {
        let obs = Obstacle::new(0.55, 0.5, 0.06);
        let p = Point::new(0.5, 0.5);
        assert!(segment_hits_obstacle(p, p, &obs));
    }

    #[test]
    fn segment_miss_far_away() {
        let obs = Obstacle::new(0.5, 0.5, 0.1);
        assert!(!segment_hits_obstacle(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            &obs
        ));
    }

    #[test]
    fn segment_through_center_hits() {
        let obs = Obstacle::new(0.5, 0.5, 0.1);
        assert!(segment_hits_obstacle(
            Point::new(0.0, 0.5),
            Point::new(1.0, 0.5),
            &obs
        ));
    }

    #[test]
    fn boundary_contact_counts_as_hit() {
        let obs = Obstacle::new(0.5, 0.6, 0.1);
        // Segment along y=0.5 touches the disc at exactly one point.
        assert!(segment_hits_obstacle(
            Point::new(0.0, 0.5),
            Point::new(1.0, 0.5),
            &obs
        ));
    }

    #[test]
    fn path_length_examples() {
        assert_eq!(path_length(&Polyline(vec![Point::new(0.0, 0.0)])), 0.0);
        let two = Polyline(vec![Point::new(0.0, 0.0), Point::new(0.02, 0.0)]);
        assert!((path_length(&two) - 0.02).abs() < 1e-15);
        // 150 steps of 0.02 (zigzag to stay in the unit square) total 3.0
        let pts: Vec<Point> = (0..=150)
            .map(|i| Point::new(if i % 2 == 0 { 0.0 } else { 0.02 }, 0.0))
            .collect();
        assert!((path_length(&Polyline(pts)) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn instance_invariants_enforced() {
        // node strictly inside an obstacle is rejected
        let err = NopInstance::new(
            vec![Point::new(0.5, 0.5), Point::new(0.9, 0.9)],
            vec![0.0, 0.0],
            vec![Obstacle::new(0.5, 0.5, 0.1)],
            1.0,
            0.02,
        );
        assert!(matches!(err, Err(NopError::NodeInsideObstacle { .. })));
        // boundary contact is allowed (0.375 and 0.125 are exact in binary)
        let ok = NopInstance::new(
            vec![Point::new(0.375, 0.5), Point::new(0.9, 0.9)],
            vec![0.0, 0.0],
            vec![Obstacle::new(0.5, 0.5, 0.125)],
            1.0,
            0.02,
        );
        assert!(ok.is_ok());
        // nonzero depot reward is rejected
        let err = NopInstance::new(
            vec![Point::new(0.1, 0.1), Point::new(0.9, 0.9)],
            vec![1.0, 0.0],
            vec![],
            1.0,
            0.02,
        );
        assert!(matches!(err, Err(NopError::DepotReward { .. })));
    }

    #[test]
    fn max_steps_is_floor() {
        let inst = inst_2x2(vec![]);
        assert_eq!(inst.max_steps(), 100);
    }

    #[test]
    fn verify_immediate_revisit_flagged() {
        let inst = inst_2x2(vec![]);
        let route = Route(vec![0, 2, 2, 1, 3]);
        let path = Polyline(vec![inst.start(), inst.end()]);
        let rep = verify_solution(&inst, &route, &path).unwrap();
        assert!(!rep.no_immediate_revisit);
        assert!(!rep.all_pass());
    }

    #[test]
    fn verify_empty_tour_is_feasible() {
        let inst = inst_2x2(vec![]);
        let route = Route(vec![0, 3]);
        // straight path sampled densely enough to register both depots
        let steps = 80usize;
        let pts: Vec<Point> = (0..=steps)
            .map(|i| {
                let t = i as f64 / steps as f64;
                Point::new(0.1 + 0.8 * t, 0.1 + 0.8 * t)
            })
            .collect();
        let rep = verify_solution(&inst, &route, &Polyline(pts)).unwrap();
        assert!(rep.all_pass(), "failures: {:?}", rep.failures());
        assert_eq!(rep.collected_prize, 0.0);
    }

    #[test]
    fn verify_collision_flagged() {
        let inst = inst_2x2(vec![Obstacle::new(0.5, 0.5, 0.05)]);
        let route = Route(vec![0, 3]);
        let pts: Vec<Point> = (0..=80)
            .map(|i| {
                let t = i as f64 / 80.0;
                Point::new(0.1 + 0.8 * t, 0.1 + 0.8 * t)
            })
            .collect();
        let rep = verify_solution(&inst, &route, &Polyline(pts)).unwrap();
        assert!(!rep.collision_free);
        assert!(!rep.all_pass());
    }

    #[test]
    fn verify_route_index_out_of_range_is_structural() {
        let inst = inst_2x2(vec![]);
        let route = Route(vec![0, 9, 3]);
        let path = Polyline(vec![inst.start()]);
        assert!(matches!(
            verify_solution(&inst, &route, &path),
            Err(NopError::RouteIndexOutOfRange { index: 9, .. })
        ));
    }

    #[test]
    fn serialize_round_trip_fixed_instance() {
        let inst = inst_2x2(vec![Obstacle::new(0.5, 0.5, 0.05)]);
        let line = serialize_instance(&inst);
        let back = parse_instance(&line).unwrap();
        assert_eq!(inst, back);
        // field order is fixed
        let npos = line.find("\"nodes\"").unwrap();
        let rpos = line.find("\"rewards\"").unwrap();
        let opos = line.find("\"obstacles\"").unwrap();
        let bpos = line.find("\"budget_T\"").unwrap();
        let spos = line.find("\"step_len\"").unwrap();
        assert!(npos < rpos && rpos < opos && opos < bpos && bpos < spos);
    }

    proptest! {
        #[test]
        fn segment_hit_symmetric(
            px in 0.0..1.0f64, py in 0.0..1.0f64,
            qx in 0.0..1.0f64, qy in 0.0..1.0f64,
            cx in 0.0..1.0f64, cy in 0.0..1.0f64,
            r in 0.01..0.3f64,
        ) {
            let p = Point::new(px, py);
            let q = Point::new(qx, qy);
            let obs = Obstacle::new(cx, cy, r);
            prop_assert_eq!(
                segment_hits_obstacle(p, q, &obs),
                segment_hits_obstacle(q, p, &obs)
            );
        }

        #[test]
        fn segment_hit_monotone_in_radius(
            px in 0.0..1.0f64, py in 0.0..1.0f64,
            qx in 0.0..1.0f64, qy in 0.0..1.0f64,
            cx in 0.0..1.0f64, cy in 0.0..1.0f64,
            r in 0.01..0.2f64, grow in 0.0..0.2f64,
        ) {
            let p = Point::new(px, py);
            let q = Point::new(qx, qy);
            if segment_hits_obstacle(p, q, &Obstacle::new(cx, cy, r)) {
                prop_assert!(segment_hits_obstacle(p, q, &Obstacle::new(cx, cy, r + grow)));
            }
        }

        #[test]
        fn path_length_reversal_invariant(pts in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..40)) {
            let fwd = Polyline(pts.iter().map(|&(x, y)| Point::new(x, y)).collect());
            let rev = Polyline(pts.iter().rev().map(|&(x, y)| Point::new(x, y)).collect());
            prop_assert!((path_length(&fwd) - path_length(&rev)).abs() < 1e-12);
        }
    }
}
