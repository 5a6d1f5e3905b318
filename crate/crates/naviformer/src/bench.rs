//! Evaluation metrics, the comparison harness, and plot emission.
//!
//! Metrics are pure functions of episode traces, so recomputing them from
//! exported trace files reproduces a comparison table bit-exactly. Wall
//! times live in a separate table because they can never be reproducible.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::baselines::{self, PlanError, TwoStepPlan};
use crate::env::{self, EnvConfig, EpisodeTrace, Outcome};
use crate::model::{Model, ModelError};
use crate::nop::{NopInstance, Polyline};
use crate::train::{self, RolloutMode, TrainError};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("no traces to aggregate")]
    Empty,
    #[error("got {traces} traces for {instances} instances")]
    LengthMismatch { traces: usize, instances: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("trace file error: {0}")]
    TraceFile(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

type Result<V> = std::result::Result<V, BenchError>;

/// A rate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub value: f64,
    pub stderr: f64,
}

/// Fraction of episodes that reached the end depot in time without
/// colliding; binomial standard error.
pub fn success_rate(traces: &[EpisodeTrace]) -> Result<Stat> {
    if traces.is_empty() {
        return Err(BenchError::Empty);
    }
    let m = traces.len() as f64;
    let p = traces.iter().filter(|t| t.outcome.is_success()).count() as f64 / m;
    Ok(Stat {
        value: p,
        stderr: (p * (1.0 - p) / m).sqrt(),
    })
}

/// Mean over episodes of interior nodes visited divided by `n/2`; may
/// exceed 1. Standard error of the mean.
pub fn node_rate(traces: &[EpisodeTrace], instances: &[NopInstance]) -> Result<Stat> {
    if traces.is_empty() {
        return Err(BenchError::Empty);
    }
    if traces.len() != instances.len() {
        return Err(BenchError::LengthMismatch {
            traces: traces.len(),
            instances: instances.len(),
        });
    }
    let rates: Vec<f64> = traces
        .iter()
        .zip(instances)
        .map(|(t, inst)| {
            t.visited_interior(inst).len() as f64 / (inst.prize_node_count() as f64 / 2.0)
        })
        .collect();
    let m = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / m;
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / m;
    Ok(Stat {
        value: mean,
        stderr: (var / m).sqrt(),
    })
}

/// A planner entry in a comparison run.
#[derive(Debug, Clone)]
pub enum Algorithm {
    /// Greedy decoding from a trained checkpoint.
    Policy { checkpoint: PathBuf },
    /// Greedy route over straight-line distances with budget slack, stitched
    /// by grid A*.
    TwoStepGreedyAstar { epsilon: f64 },
    /// Pre-computed results in the trace schema, one line per instance.
    External { name: String, path: PathBuf },
}

impl Algorithm {
    pub fn id(&self) -> String {
        match self {
            Algorithm::Policy { .. } => "naviformer".to_string(),
            Algorithm::TwoStepGreedyAstar { .. } => "two-step-greedy-astar".to_string(),
            Algorithm::External { name, .. } => format!("external:{name}"),
        }
    }
}

/// One table row: rates plus mean per-instance planning time.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub algorithm: String,
    pub success: Stat,
    pub node: Stat,
    pub mean_seconds: f64,
}

/// Per-obstacle-count rates for one algorithm.
#[derive(Debug, Clone, Serialize)]
pub struct BreakdownRow {
    pub algorithm: String,
    pub obstacles: usize,
    pub episodes: usize,
    pub success_rate: f64,
    pub node_rate: f64,
}

/// Full comparison output.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<MetricsRow>,
    pub breakdown: Vec<BreakdownRow>,
    /// Bit-reproducible metrics table.
    pub table_csv: String,
    /// Wall-clock table (separate file: inherently non-reproducible).
    pub timing_csv: String,
}

/// Greedy policy evaluation with per-instance planning time. Model and
/// checkpoint loading stay outside the timed region.
pub fn evaluate_policy(
    model: &Model<f32>,
    env_cfg: &EnvConfig,
    instances: &[NopInstance],
    seed: u64,
) -> Result<(Vec<EpisodeTrace>, Vec<f64>)> {
    let results: Vec<(EpisodeTrace, f64)> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| -> Result<(EpisodeTrace, f64)> {
            let started = Instant::now();
            let traces = train::rollout_batch(
                model,
                std::slice::from_ref(inst),
                env_cfg,
                RolloutMode::Greedy,
                crate::util::mix_seed(seed, i as u64),
            )?;
            let dt = started.elapsed().as_secs_f64();
            Ok((traces.into_iter().next().unwrap(), dt))
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().unzip())
}

/// Converts a two-step plan (or its failure) into the trace schema so the
/// same metric functions apply. Planner traces carry no step records and a
/// zero distance term in the reward.
pub fn plan_to_trace(inst: &NopInstance, plan: std::result::Result<TwoStepPlan, PlanError>) -> EpisodeTrace {
    let (outcome, positions, visited_order) = match plan {
        Ok(plan) => {
            let report = crate::nop::verify_solution(inst, &plan.route, &plan.path)
                .expect("planner routes are structurally valid");
            let outcome = if report.all_pass() {
                Outcome::Success
            } else if !report.collision_free {
                Outcome::CollisionFail
            } else {
                Outcome::TimeoutFail
            };
            let mut visited: Vec<usize> = plan
                .route
                .indices()
                .iter()
                .copied()
                .filter(|&i| inst.is_interior(i))
                .collect();
            if outcome.is_success() {
                visited.push(inst.end_depot());
            }
            let positions = plan.path.points().iter().map(|p| [p.x, p.y]).collect();
            (outcome, positions, visited)
        }
        Err(_) => (
            Outcome::TimeoutFail,
            vec![[inst.start().x, inst.start().y]],
            vec![],
        ),
    };
    let collected = visited_order
        .iter()
        .filter(|&&i| inst.is_interior(i) && inst.rewards()[i] > 0.0)
        .count();
    let reward = env::score_episode(collected, 0.0, outcome.is_success(), inst);
    EpisodeTrace {
        schema: env::TRACE_SCHEMA_VERSION,
        outcome,
        steps: vec![],
        positions,
        visited_order,
        reward,
    }
}

/// Runs the two-step planner over a dataset with per-instance timing.
pub fn evaluate_two_step(
    instances: &[NopInstance],
    epsilon: f64,
) -> (Vec<EpisodeTrace>, Vec<f64>) {
    instances
        .par_iter()
        .map(|inst| {
            let started = Instant::now();
            let plan = baselines::two_step_plan(inst, inst.step_len(), epsilon);
            let dt = started.elapsed().as_secs_f64();
            (plan_to_trace(inst, plan), dt)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .unzip()
}

fn load_external(path: &Path, instances: &[NopInstance]) -> Result<Vec<EpisodeTrace>> {
    let file = std::fs::File::open(path)?;
    let traces = env::read_traces(std::io::BufReader::new(file))
        .map_err(|e| BenchError::TraceFile(e.to_string()))?;
    if traces.len() != instances.len() {
        return Err(BenchError::LengthMismatch {
            traces: traces.len(),
            instances: instances.len(),
        });
    }
    Ok(traces)
}

/// Runs every algorithm over the dataset and writes the comparison tables,
/// per-obstacle breakdown, trace exports, and plots into `out_dir`.
pub fn compare(
    algorithms: &[Algorithm],
    instances: &[NopInstance],
    out_dir: &Path,
    seed: u64,
) -> Result<Comparison> {
    if instances.is_empty() {
        return Err(BenchError::Empty);
    }
    std::fs::create_dir_all(out_dir)?;

    let mut rows = Vec::new();
    let mut breakdown = Vec::new();
    let mut timing_lines = vec!["algorithm,mean_seconds,stderr_seconds".to_string()];

    for algo in algorithms {
        let id = algo.id();
        let (traces, seconds) = match algo {
            Algorithm::Policy { checkpoint } => {
                let (model, env_cfg) = Model::<f32>::load(checkpoint)?;
                evaluate_policy(&model, &env_cfg, instances, seed)?
            }
            Algorithm::TwoStepGreedyAstar { epsilon } => evaluate_two_step(instances, *epsilon),
            Algorithm::External { path, .. } => {
                let traces = load_external(path, instances)?;
                let zeros = vec![0.0; traces.len()];
                (traces, zeros)
            }
        };

        // trace export: the metric functions recompute the table from these
        let trace_path = out_dir.join(format!("traces-{}.jsonl", id.replace(':', "-")));
        let mut f = std::io::BufWriter::new(std::fs::File::create(&trace_path)?);
        env::write_traces(&mut f, &traces)?;
        f.flush()?;

        let success = success_rate(&traces)?;
        let node = node_rate(&traces, instances)?;
        let m = seconds.len() as f64;
        let mean_s = seconds.iter().sum::<f64>() / m;
        let var_s = seconds.iter().map(|s| (s - mean_s) * (s - mean_s)).sum::<f64>() / m;
        timing_lines.push(format!("{id},{mean_s},{}", (var_s / m).sqrt()));

        breakdown.extend(breakdown_rows(&id, &traces, instances));
        rows.push(MetricsRow {
            algorithm: id,
            success,
            node,
            mean_seconds: mean_s,
        });
    }

    let table_csv = render_table_csv(&rows);
    let timing_csv = timing_lines.join("\n") + "\n";

    std::fs::write(out_dir.join("comparison.csv"), &table_csv)?;
    std::fs::write(out_dir.join("timing.csv"), &timing_csv)?;
    write_breakdown_csv(&out_dir.join("breakdown.csv"), &breakdown)?;

    let success_svg = rates_vs_obstacles_svg(&breakdown, Metric::Success);
    let node_svg = rates_vs_obstacles_svg(&breakdown, Metric::NodeRate);
    std::fs::write(out_dir.join("success_vs_obstacles.svg"), success_svg)?;
    std::fs::write(out_dir.join("node_rate_vs_obstacles.svg"), node_svg)?;

    Ok(Comparison {
        rows,
        breakdown,
        table_csv,
        timing_csv,
    })
}

/// The reproducible metrics table (rates only; timings live separately).
pub fn render_table_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("algorithm,success_rate,success_stderr,node_rate,node_stderr\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.algorithm, r.success.value, r.success.stderr, r.node.value, r.node.stderr
        ));
    }
    out
}

fn breakdown_rows(
    algorithm: &str,
    traces: &[EpisodeTrace],
    instances: &[NopInstance],
) -> Vec<BreakdownRow> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        groups.entry(inst.obstacles().len()).or_default().push(i);
    }
    groups
        .into_iter()
        .map(|(obstacles, idxs)| {
            let m = idxs.len() as f64;
            let succ = idxs
                .iter()
                .filter(|&&i| traces[i].outcome.is_success())
                .count() as f64
                / m;
            let node = idxs
                .iter()
                .map(|&i| {
                    traces[i].visited_interior(&instances[i]).len() as f64
                        / (instances[i].prize_node_count() as f64 / 2.0)
                })
                .sum::<f64>()
                / m;
            BreakdownRow {
                algorithm: algorithm.to_string(),
                obstacles,
                episodes: idxs.len(),
                success_rate: succ,
                node_rate: node,
            }
        })
        .collect()
}

fn write_breakdown_csv(path: &Path, rows: &[BreakdownRow]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "algorithm,obstacles,episodes,success_rate,node_rate")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{}",
            r.algorithm, r.obstacles, r.episodes, r.success_rate, r.node_rate
        )?;
    }
    f.flush()
}

enum Metric {
    Success,
    NodeRate,
}

/// Simple standalone SVG line chart of a rate versus obstacle count, one
/// polyline per algorithm.
fn rates_vs_obstacles_svg(rows: &[BreakdownRow], metric: Metric) -> String {
    const W: f64 = 640.0;
    const H: f64 = 440.0;
    const ML: f64 = 60.0;
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 50.0;
    let title = match metric {
        Metric::Success => "Success rate vs obstacle count",
        Metric::NodeRate => "Node rate vs obstacle count",
    };

    let mut series: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    let mut x_max: f64 = 1.0;
    let mut y_max: f64 = 1.0;
    for r in rows {
        let y = match metric {
            Metric::Success => r.success_rate,
            Metric::NodeRate => r.node_rate,
        };
        x_max = x_max.max(r.obstacles as f64);
        y_max = y_max.max(y);
        series
            .entry(r.algorithm.as_str())
            .or_default()
            .push((r.obstacles as f64, y));
    }
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;
    let sx = |x: f64| ML + x / x_max * plot_w;
    let sy = |y: f64| MT + (1.0 - y / y_max) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\" font-family=\"sans-serif\">{title}</text>\n",
        W / 2.0
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    ));
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));
    // y ticks at 0, 0.25, 0.5, 0.75, 1.0 of the max
    for k in 0..=4 {
        let yv = y_max * k as f64 / 4.0;
        let y = sy(yv);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{ML}\" y2=\"{y}\" stroke=\"black\"/>\n",
            ML - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">{yv:.2}</text>\n",
            ML - 8.0,
            y + 4.0
        ));
    }
    // x ticks per integer obstacle count present
    let mut xs: Vec<usize> = rows.iter().map(|r| r.obstacles).collect();
    xs.sort_unstable();
    xs.dedup();
    for &x in &xs {
        let px = sx(x as f64);
        svg.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">{x}</text>\n",
            H - MB + 18.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">obstacles</text>\n",
        ML + plot_w / 2.0,
        H - 12.0
    ));

    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    for (si, (name, mut pts)) in series.into_iter().enumerate() {
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let color = COLORS[si % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", sx(x), sy(y))).collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        for &(x, y) in &pts {
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        let ly = MT + 16.0 * si as f64;
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            W - MR - 180.0,
            ly
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\">{name}</text>\n",
            W - MR - 165.0,
            ly + 9.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Renders an instance (and optionally a path) as a standalone SVG.
pub fn render_scenario_svg(inst: &NopInstance, paths: &[(&str, &Polyline)]) -> String {
    const S: f64 = 600.0;
    const M: f64 = 20.0;
    let world = |v: f64| M + v * (S - 2.0 * M);
    let flip = |v: f64| S - world(v); // y grows upward in world space

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{S}\" height=\"{S}\" viewBox=\"0 0 {S} {S}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>\n",
        S - 2.0 * M,
        S - 2.0 * M
    ));
    for o in inst.obstacles() {
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#444\" fill-opacity=\"0.6\"/>\n",
            world(o.cx),
            flip(o.cy),
            o.radius * (S - 2.0 * M)
        ));
    }
    const PATH_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"];
    for (i, (name, path)) in paths.iter().enumerate() {
        let color = PATH_COLORS[i % PATH_COLORS.len()];
        let pts: Vec<String> = path
            .points()
            .iter()
            .map(|p| format!("{},{}", world(p.x), flip(p.y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\" font-family=\"sans-serif\">{name}</text>\n",
            M + 8.0,
            M + 16.0 + 14.0 * i as f64
        ));
    }
    for (i, p) in inst.nodes().iter().enumerate() {
        let (color, r) = if i == 0 {
            ("#00bcd4", 6.0)
        } else if i == inst.end_depot() {
            ("#d62728", 6.0)
        } else {
            ("#9467bd", 4.0)
        };
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{r}\" fill=\"{color}\"/>\n",
            world(p.x),
            flip(p.y)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
