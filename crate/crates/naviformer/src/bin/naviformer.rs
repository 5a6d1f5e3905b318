//! Command-line front end. Each subcommand is a thin wrapper over the
//! library; the runnable examples cover the same ground with more
//! commentary.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

use naviformer::baselines;
use naviformer::bench::{self, Algorithm};
use naviformer::gen::{self, GenConfig};
use naviformer::model::{Model, ModelConfig};
use naviformer::nop;
use naviformer::train::{self, RolloutMode, TrainConfig};

#[derive(Parser)]
#[command(
    name = "naviformer",
    about = "Joint route and path planning on the navigation orienteering problem",
    after_help = "Set NAVIFORMER_WORKERS to cap the worker thread count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance dataset (one JSON instance per line).
    Generate {
        /// Interior node count.
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Distance budget; standard pairs are (20, 2), (50, 3), (100, 4).
        #[arg(long, default_value_t = 2.0)]
        budget: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        obstacles_min: usize,
        #[arg(long, default_value_t = 20)]
        obstacles_max: usize,
        #[arg(long, default_value_t = 0.02)]
        radius_min: f64,
        #[arg(long, default_value_t = 0.12)]
        radius_max: f64,
        #[arg(long, default_value_t = 0.02)]
        step_len: f64,
    },
    /// Train the policy (defaults to the CPU-scale configuration).
    Train {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 128)]
        batch: usize,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 3e-3)]
        lr: f64,
        #[arg(long, default_value_t = 2.0)]
        budget: f64,
        #[arg(long, default_value_t = 3)]
        obstacles_min: usize,
        #[arg(long, default_value_t = 6)]
        obstacles_max: usize,
        /// Network width (must be divisible by --heads).
        #[arg(long, default_value_t = 32)]
        hidden: usize,
        #[arg(long, default_value_t = 4)]
        heads: usize,
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        #[arg(long, default_value_t = 16)]
        map_cells: usize,
        #[arg(long, default_value_t = 0.0)]
        entropy: f64,
        #[arg(long, default_value_t = 0)]
        ckpt_every: usize,
        #[arg(long, default_value_t = false)]
        advantage_norm: bool,
        #[arg(long, default_value_t = 1.0)]
        critic_weight: f64,
    },
    /// Evaluate a checkpoint on a dataset and print the metrics.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        instances: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Export the episode traces here (one JSON line each).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sample actions instead of greedy decoding.
        #[arg(long, default_value_t = false)]
        sample: bool,
    },
    /// Plan each instance with one algorithm and export traces.
    Plan {
        /// `naviformer` or `two-step-greedy-astar`.
        #[arg(long)]
        algo: String,
        #[arg(long)]
        instance_file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Render the first instances as SVG scenes.
        #[arg(long, default_value_t = 0)]
        render: usize,
    },
    /// Run several planners over one dataset and emit comparison tables.
    Compare {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Checkpoint for the policy row; omit to compare baselines only.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
        /// Extra rows from external trace files, as `name=path`.
        #[arg(long)]
        external: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn init_workers() -> Result<()> {
    if let Ok(v) = std::env::var("NAVIFORMER_WORKERS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("NAVIFORMER_WORKERS must be a number, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("worker pool already initialized")?;
    }
    Ok(())
}

fn main() -> Result<()> {
    init_workers()?;
    let cli = Cli::parse();
    match cli.command {
        Command::Generate {
            n,
            count,
            budget,
            seed,
            out,
            obstacles_min,
            obstacles_max,
            radius_min,
            radius_max,
            step_len,
        } => {
            let cfg = GenConfig {
                n_nodes: n,
                obstacle_count: (obstacles_min, obstacles_max),
                radius_range: (radius_min, radius_max),
                budget,
                step_len,
                seed,
            };
            let summary = gen::generate_dataset(&cfg, count, &out)?;
            println!(
                "wrote {} instances (seed {}) to {}",
                summary.count, summary.seed, summary.path
            );
        }
        Command::Train {
            n,
            batch,
            iters,
            seed,
            out_dir,
            lr,
            budget,
            obstacles_min,
            obstacles_max,
            hidden,
            heads,
            blocks,
            map_cells,
            entropy,
            ckpt_every,
            advantage_norm,
            critic_weight,
        } => {
            let mut cfg = TrainConfig::desk(seed);
            cfg.critic_weight = critic_weight;
            cfg.batch = batch;
            cfg.iters = iters;
            cfg.lr = lr;
            cfg.entropy_weight = entropy;
            cfg.ckpt_every = ckpt_every;
            cfg.advantage_norm = advantage_norm;
            cfg.gen.n_nodes = n;
            cfg.gen.budget = budget;
            cfg.gen.obstacle_count = (obstacles_min, obstacles_max);
            cfg.model = ModelConfig::micro(hidden, heads, blocks, map_cells);
            cfg.env.map_cells = map_cells;
            cfg.out_dir = Some(out_dir.clone());
            let (_, report) = train::train::<f32>(&cfg)?;
            if let Some(last) = report.records.last() {
                println!(
                    "trained {} iterations; last mean reward {:.3}, success rate {:.3}, node rate {:.3}",
                    report.records.len(),
                    last.mean_reward,
                    last.success_rate,
                    last.node_rate
                );
            }
            if let Some(ckpt) = &report.final_checkpoint {
                println!("checkpoint: {}", ckpt.display());
            }
            println!("report: {}", out_dir.join("report.csv").display());
        }
        Command::Eval {
            checkpoint,
            instances,
            seed,
            out,
            sample,
        } => {
            let dataset = nop::load_instance_file(&instances)?;
            let (model, env_cfg) = Model::<f32>::load(&checkpoint)?;
            let mode = if sample {
                RolloutMode::Sample
            } else {
                RolloutMode::Greedy
            };
            let traces = train::rollout_batch(&model, &dataset, &env_cfg, mode, seed)?;
            let success = bench::success_rate(&traces)?;
            let node = bench::node_rate(&traces, &dataset)?;
            println!(
                "episodes {}  success_rate {:.3} ± {:.3}  node_rate {:.3} ± {:.3}",
                traces.len(),
                success.value,
                success.stderr,
                node.value,
                node.stderr
            );
            if let Some(out) = out {
                let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
                naviformer::env::write_traces(&mut f, &traces)?;
                println!("traces: {}", out.display());
            }
        }
        Command::Plan {
            algo,
            instance_file,
            out,
            checkpoint,
            epsilon,
            seed,
            render,
        } => {
            let dataset = nop::load_instance_file(&instance_file)?;
            std::fs::create_dir_all(&out)?;
            let traces = match algo.as_str() {
                "naviformer" => {
                    let ckpt =
                        checkpoint.context("--checkpoint is required for --algo naviformer")?;
                    let (model, env_cfg) = Model::<f32>::load(&ckpt)?;
                    train::rollout_batch(&model, &dataset, &env_cfg, RolloutMode::Greedy, seed)?
                }
                "two-step-greedy-astar" => dataset
                    .iter()
                    .map(|inst| {
                        bench::plan_to_trace(
                            inst,
                            baselines::two_step_plan(inst, inst.step_len(), epsilon),
                        )
                    })
                    .collect(),
                other => {
                    bail!("unknown --algo {other:?}; expected naviformer or two-step-greedy-astar")
                }
            };
            let trace_path = out.join("traces.jsonl");
            let mut f = std::io::BufWriter::new(std::fs::File::create(&trace_path)?);
            naviformer::env::write_traces(&mut f, &traces)?;
            drop(f);
            for (i, (inst, trace)) in dataset.iter().zip(&traces).take(render).enumerate() {
                let poly = trace.polyline();
                let svg = bench::render_scenario_svg(inst, &[(algo.as_str(), &poly)]);
                std::fs::write(out.join(format!("scene-{i:03}.svg")), svg)?;
            }
            let success = bench::success_rate(&traces)?;
            println!(
                "planned {} instances with {algo}: success rate {:.3}",
                traces.len(),
                success.value
            );
            println!("traces: {}", trace_path.display());
        }
        Command::Compare {
            instances,
            out_dir,
            checkpoint,
            epsilon,
            external,
            seed,
        } => {
            let dataset = nop::load_instance_file(&instances)?;
            let mut algos = Vec::new();
            if let Some(ckpt) = checkpoint {
                algos.push(Algorithm::Policy { checkpoint: ckpt });
            }
            algos.push(Algorithm::TwoStepGreedyAstar { epsilon });
            for spec in &external {
                let (name, path) = spec
                    .split_once('=')
                    .with_context(|| format!("--external needs name=path, got {spec:?}"))?;
                algos.push(Algorithm::External {
                    name: name.to_string(),
                    path: PathBuf::from(path),
                });
            }
            let cmp = bench::compare(&algos, &dataset, &out_dir, seed)?;
            print!("{}", cmp.table_csv);
            println!("tables and plots in {}", out_dir.display());
        }
    }
    Ok(())
}
