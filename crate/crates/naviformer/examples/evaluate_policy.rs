//! Evaluate greedy decoding on held-out instances, before and after a short
//! training burst.
//!
//! ```bash
//! cargo run --release --example evaluate_policy
//! ```

use naviformer::bench::{node_rate, success_rate};
use naviformer::env::EnvConfig;
use naviformer::gen::{generate_batch, GenConfig};
use naviformer::model::{Model, ModelConfig};
use naviformer::train::{rollout_batch, train, RolloutMode, TrainConfig};

fn main() -> anyhow::Result<()> {
    let cfg = TrainConfig {
        batch: 32,
        iters: 40,
        lr: 1e-3,
        seed: 3,
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
        ..TrainConfig::default()
    };

    // held-out instances come from a different stream than training
    let holdout_cfg = GenConfig {
        seed: 999_999,
        ..cfg.gen.clone()
    };
    let holdout = generate_batch(&holdout_cfg, 0, 64)?;

    let untrained = Model::<f32>::new(cfg.model.clone(), 1)?;
    let traces = rollout_batch(&untrained, &holdout, &cfg.env, RolloutMode::Greedy, 0)?;
    let s0 = success_rate(&traces)?;
    let n0 = node_rate(&traces, &holdout)?;
    println!(
        "untrained: success {:.3} ± {:.3}, node rate {:.3} ± {:.3}",
        s0.value, s0.stderr, n0.value, n0.stderr
    );

    println!("training {} iterations...", cfg.iters);
    let (model, _) = train::<f32>(&cfg)?;
    let traces = rollout_batch(&model, &holdout, &cfg.env, RolloutMode::Greedy, 0)?;
    let s1 = success_rate(&traces)?;
    let n1 = node_rate(&traces, &holdout)?;
    println!(
        "trained:   success {:.3} ± {:.3}, node rate {:.3} ± {:.3}",
        s1.value, s1.stderr, n1.value, n1.stderr
    );
    println!("(a short burst; the CPU-scale run uses 2000 iterations of batch 128)");
    Ok(())
}
