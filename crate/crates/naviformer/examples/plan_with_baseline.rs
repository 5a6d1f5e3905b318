//! Plan one instance with grid A* and the two-step pipeline, verify the
//! result, and render the scene as SVG.
//!
//! ```bash
//! cargo run --example plan_with_baseline
//! ```

use naviformer::baselines::{astar, euclidean_matrix, greedy_route, two_step_plan, GridSpec};
use naviformer::bench::render_scenario_svg;
use naviformer::gen::{generate_instance_indexed, GenConfig};
use naviformer::nop::{path_length, verify_solution};

fn main() -> anyhow::Result<()> {
    let cfg = GenConfig {
        n_nodes: 10,
        obstacle_count: (4, 6),
        radius_range: (0.03, 0.1),
        budget: 2.0,
        step_len: 0.02,
        seed: 11,
    };
    let inst = generate_instance_indexed(&cfg, 0)?;
    println!(
        "instance: {} nodes, {} obstacles, budget {}",
        inst.nodes().len(),
        inst.obstacles().len(),
        inst.budget()
    );

    // a bare A* query between the depots
    let grid = GridSpec::from_instance(&inst, inst.step_len());
    if let Some(path) = astar(&grid, inst.start(), inst.end())? {
        println!(
            "depot-to-depot A*: {} straight + {} diagonal moves, length {:.3}",
            path.straight_moves,
            path.diagonal_moves,
            path.cost(grid.resolution)
        );
    }

    // the greedy route planner on straight-line distances
    let dist = euclidean_matrix(&inst);
    let route = greedy_route(&inst, &dist, inst.budget() - 0.3)?;
    println!("greedy route (budget slack 0.3): {:?}", route.indices());

    // the full two-step pipeline, checked by the verifier
    let plan = two_step_plan(&inst, inst.step_len(), 0.3)?;
    let report = verify_solution(&inst, &plan.route, &plan.path)?;
    println!(
        "two-step plan: route {:?}, stitched length {:.3}",
        plan.route.indices(),
        path_length(&plan.path)
    );
    println!("verification: {report}");

    let svg = render_scenario_svg(&inst, &[("two-step-greedy-astar", &plan.path)]);
    let out = std::env::temp_dir().join("naviformer-example-plan.svg");
    std::fs::write(&out, svg)?;
    println!("scene rendered to {}", out.display());
    Ok(())
}
