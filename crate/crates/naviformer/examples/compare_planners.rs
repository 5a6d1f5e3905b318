//! Run the comparison harness over a small dataset: the (untrained) policy
//! against the two-step baseline, with tables and plots on disk.
//!
//! ```bash
//! cargo run --release --example compare_planners
//! ```

use naviformer::bench::{compare, Algorithm};
use naviformer::env::EnvConfig;
use naviformer::gen::{generate_batch, GenConfig};
use naviformer::model::{Model, ModelConfig};

fn main() -> anyhow::Result<()> {
    let gen_cfg = GenConfig {
        n_nodes: 8,
        obstacle_count: (3, 6),
        radius_range: (0.02, 0.1),
        budget: 2.0,
        step_len: 0.02,
        seed: 21,
    };
    let instances = generate_batch(&gen_cfg, 0, 40)?;

    let out_dir = std::env::temp_dir().join("naviformer-example-compare");
    std::fs::create_dir_all(&out_dir)?;

    // an untrained checkpoint stands in for a trained one here; `naviformer
    // train` produces the real thing
    let env_cfg = EnvConfig {
        visit_radius: 0.02,
        map_cells: 16,
        window_side: 0.32,
    };
    let model = Model::<f32>::new(ModelConfig::micro(16, 2, 1, 16), 5)?;
    let ckpt = out_dir.join("untrained.nfcp");
    model.save(&ckpt, &env_cfg)?;

    let algos = vec![
        Algorithm::Policy { checkpoint: ckpt },
        Algorithm::TwoStepGreedyAstar { epsilon: 0.3 },
    ];
    let cmp = compare(&algos, &instances, &out_dir, 0)?;

    println!("{}", cmp.table_csv.trim_end());
    println!();
    for row in &cmp.rows {
        println!(
            "{:<24} success {:.3} ± {:.3}   node rate {:.3} ± {:.3}   {:.1} ms/instance",
            row.algorithm,
            row.success.value,
            row.success.stderr,
            row.node.value,
            row.node.stderr,
            row.mean_seconds * 1e3
        );
    }
    println!();
    println!("artifacts in {}:", out_dir.display());
    for name in [
        "comparison.csv",
        "timing.csv",
        "breakdown.csv",
        "success_vs_obstacles.svg",
        "node_rate_vs_obstacles.svg",
    ] {
        println!("  {name}");
    }
    Ok(())
}
