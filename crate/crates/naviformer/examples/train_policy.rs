//! Train a small policy for a handful of iterations and watch the reward
//! climb. The full CPU-scale run lives behind `naviformer train`.
//!
//! ```bash
//! cargo run --release --example train_policy
//! ```

use naviformer::env::EnvConfig;
use naviformer::gen::GenConfig;
use naviformer::model::ModelConfig;
use naviformer::train::{train, TrainConfig};

fn main() -> anyhow::Result<()> {
    let cfg = TrainConfig {
        batch: 32,
        iters: 30,
        lr: 1e-3,
        seed: 0,
        gen: GenConfig {
            n_nodes: 6,
            obstacle_count: (2, 4),
            radius_range: (0.02, 0.1),
            budget: 1.5,
            step_len: 0.02,
            seed: 0,
        },
        model: ModelConfig::micro(16, 2, 1, 16),
        env: EnvConfig {
            visit_radius: 0.02,
            map_cells: 16,
            window_side: 0.32,
        },
        out_dir: Some(std::env::temp_dir().join("naviformer-example-train")),
        ..TrainConfig::default()
    };

    println!("training {} iterations of batch {}...", cfg.iters, cfg.batch);
    let (_model, report) = train::<f32>(&cfg)?;
    for r in report.records.iter().step_by(5) {
        println!(
            "iter {:>3}: reward {:>7.3}  success {:.2}  nodes {:.2}  critic loss {:>8.2}",
            r.iter, r.mean_reward, r.success_rate, r.node_rate, r.critic_loss
        );
    }
    let first = &report.records[0];
    let last = report.records.last().unwrap();
    println!(
        "mean reward moved {:.3} -> {:.3} over {} iterations",
        first.mean_reward,
        last.mean_reward,
        report.records.len()
    );
    if let Some(ckpt) = &report.final_checkpoint {
        println!("checkpoint: {}", ckpt.display());
    }
    Ok(())
}
