//! Drive the simulator with scripted directions and inspect the trace,
//! reward decomposition, and local maps.
//!
//! ```bash
//! cargo run --example simulate_episode
//! ```

use naviformer::env::{
    self, EnvConfig, EpisodeTrace, Outcome, RewardBreakdown, StepRecord, TRACE_SCHEMA_VERSION,
};
use naviformer::nop::{NopInstance, Obstacle, Point};

fn main() -> anyhow::Result<()> {
    let inst = NopInstance::new(
        vec![
            Point::new(0.2, 0.5),
            Point::new(0.4, 0.5),
            Point::new(0.6, 0.5),
            Point::new(0.8, 0.5),
        ],
        vec![0.0, 1.0, 1.0, 0.0],
        vec![Obstacle::new(0.5, 0.62, 0.06)],
        1.2,
        0.02,
    )?;
    let cfg = EnvConfig::default();

    let mut state = env::reset(&inst);
    println!(
        "reset: position ({:.2}, {:.2}), {} steps, visited {:?}",
        state.position.x,
        state.position.y,
        state.steps_left,
        state.visited
    );

    // march east along y = 0.5, sweeping over both prize nodes and into the
    // end depot; goal bookkeeping mimics a policy that always aims at the
    // next unvisited node
    let mut steps = Vec::new();
    let mut positions = vec![[state.position.x, state.position.y]];
    let mut visited_order = Vec::new();
    let mut dist_sum = 0.0;
    let mut collected = 0;
    while !state.done() {
        let goal = (1..inst.nodes().len())
            .find(|&i| !state.visited[i])
            .unwrap_or(inst.end_depot());
        dist_sum += state.position.dist(&inst.nodes()[goal]);
        steps.push(StepRecord {
            position: [state.position.x, state.position.y],
            steps_left: state.steps_left,
            goal,
            dir: 0,
            log_prob_goal: 0.0,
            log_prob_dir: 0.0,
        });
        let effect = env::step(&state.with_goal(goal), &inst, 0, &cfg)?;
        for &i in &effect.newly_visited {
            println!(
                "  visited node {i} at ({:.2}, {:.2})",
                effect.state.position.x, effect.state.position.y
            );
            visited_order.push(i);
            if inst.is_interior(i) {
                collected += 1;
            }
        }
        positions.push([effect.state.position.x, effect.state.position.y]);
        state = effect.state;
    }
    println!("outcome: {:?} after {} steps", state.outcome, steps.len());
    assert_eq!(state.outcome, Outcome::Success);

    let trace = EpisodeTrace {
        schema: TRACE_SCHEMA_VERSION,
        outcome: state.outcome,
        steps,
        positions,
        visited_order,
        reward: RewardBreakdown {
            prize: 0.0,
            distance_penalty: 0.0,
            terminal: 0.0,
            total: 0.0,
        },
    };
    let reward = env::episode_reward(&trace, &inst)?;
    println!(
        "reward: prize {:.3} - distance {:.3} + terminal {:.1} = {:.3}",
        reward.prize, reward.distance_penalty, reward.terminal, reward.total
    );
    assert_eq!(collected, 2);

    // the trace of a successful episode passes the standalone verifier
    let report = naviformer::nop::verify_solution(&inst, &trace.route(&inst), &trace.polyline())?;
    println!("verifier: {report}");
    assert!(report.all_pass());

    // local maps around the start, aiming at node 1
    let maps = env::rasterize_local_maps(&env::reset(&inst), &inst, 1, &cfg);
    let (row, col) = maps.goal_cell();
    println!("goal cell in the local window: row {row}, col {col}");
    Ok(())
}
