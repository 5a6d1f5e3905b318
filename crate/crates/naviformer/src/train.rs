//! Actor-critic training with batched rollouts.
//!
//! Every iteration samples a fresh batch of instances, rolls out one
//! episode per instance with sampled actions, and applies one Adam step.
//! The per-episode loss is
//! `-(reward - value) * sum_t log pi(a_t) + critic_weight * (value - reward)^2`
//! with the advantage treated as a constant (the sum is the joint
//! log-likelihood of the episode's action sequence). Episode gradients are computed
//! inside rollout workers and summed by a single coordinator; fixed chunk
//! boundaries and per-episode RNG streams keep runs bit-reproducible
//! regardless of worker count (wall-clock columns excepted).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::autodiff::optim::clip_grad_norm;
use crate::autodiff::{Adam, Scalar, Var};
use crate::env::{self, EnvConfig, EpisodeTrace, StepRecord};
use crate::gen::{self, GenConfig};
use crate::model::{ActMode, Model, ModelConfig, ModelError, Session};
use crate::nop::{NopInstance, Point};
use crate::util::mix_seed;

const SEED_TAG_MODEL: u64 = 1;
const SEED_TAG_INSTANCES: u64 = 2;
const SEED_TAG_ACTIONS: u64 = 3;

/// Episodes per worker chunk. Fixed (not derived from the thread count) so
/// gradient summation order never depends on parallelism.
const CHUNK: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("environment error: {0}")]
    Env(#[from] env::EnvError),
    #[error("generation error: {0}")]
    Gen(#[from] gen::GenError),
    #[error("non-finite loss at iteration {iter} (actor {actor}, critic {critic}); diagnostics dumped")]
    NonFinite { iter: usize, actor: f64, critic: f64 },
    #[error("empty batch")]
    EmptyBatch,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

type Result<V> = std::result::Result<V, TrainError>;

/// Training hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch: usize,
    pub iters: usize,
    pub lr: f64,
    pub entropy_weight: f64,
    pub seed: u64,
    /// Checkpoint cadence in iterations; 0 disables periodic checkpoints.
    pub ckpt_every: usize,
    pub gen: GenConfig,
    pub model: ModelConfig,
    pub env: EnvConfig,
    /// Normalize advantages per batch (off by default).
    pub advantage_norm: bool,
    pub grad_clip: f64,
    pub critic_weight: f64,
    /// Where reports and checkpoints go; `None` keeps everything in memory.
    pub out_dir: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch: 128,
            iters: 100,
            lr: 1e-4,
            entropy_weight: 0.0,
            seed: 0,
            ckpt_every: 0,
            gen: GenConfig::default(),
            model: ModelConfig::default(),
            env: EnvConfig::default(),
            advantage_norm: false,
            grad_clip: 1.0,
            critic_weight: 1.0,
            out_dir: None,
        }
    }
}

impl TrainConfig {
    /// CPU-scale configuration that trains in well under two hours on a
    /// small machine: 10 nodes, 3-6 obstacles, compact network, local maps
    /// whose cells match the step length.
    pub fn desk(seed: u64) -> Self {
        TrainConfig {
            batch: 128,
            iters: 2000,
            lr: 3e-3,
            seed,
            gen: GenConfig {
                n_nodes: 10,
                obstacle_count: (3, 6),
                radius_range: (0.02, 0.12),
                budget: 2.0,
                step_len: 0.02,
                seed: 0,
            },
            model: ModelConfig::micro(32, 4, 1, 16),
            env: EnvConfig {
                visit_radius: 0.02,
                map_cells: 16,
                window_side: 0.32,
            },
            ..TrainConfig::default()
        }
    }

    /// Instance distribution with the trainer-derived stream seed.
    pub fn instance_stream(&self) -> GenConfig {
        GenConfig {
            seed: mix_seed(self.seed, SEED_TAG_INSTANCES),
            ..self.gen.clone()
        }
    }
}

/// One training iteration's aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub mean_reward: f64,
    pub success_rate: f64,
    pub node_rate: f64,
    pub actor_loss: f64,
    pub critic_loss: f64,
    /// Wall-clock seconds; excluded from determinism comparisons.
    pub wall_secs: f64,
}

/// Full training output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub records: Vec<IterRecord>,
    pub final_checkpoint: Option<PathBuf>,
}

impl TrainReport {
    /// Field-wise equality ignoring wall-clock columns.
    pub fn same_results(&self, other: &TrainReport) -> bool {
        self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.iter == b.iter
                    && a.mean_reward == b.mean_reward
                    && a.success_rate == b.success_rate
                    && a.node_rate == b.node_rate
                    && a.actor_loss == b.actor_loss
                    && a.critic_loss == b.critic_loss
            })
    }
}

/// Writes the per-iteration table as comma-separated text.
pub fn write_report_csv(path: &Path, records: &[IterRecord]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "iter,mean_reward,success_rate,node_rate,actor_loss,critic_loss,wall_secs"
    )?;
    for r in records {
        writeln!(
            f,
            "{},{},{},{},{},{},{:.3}",
            r.iter,
            r.mean_reward,
            r.success_rate,
            r.node_rate,
            r.actor_loss,
            r.critic_loss,
            r.wall_secs
        )?;
    }
    f.flush()
}

/// Action selection for rollouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutMode {
    Sample,
    Greedy,
}

/// A finished episode with its tape still alive, ready for a gradient.
pub struct TrainRollout<'m, T: Scalar> {
    pub trace: EpisodeTrace,
    session: Session<'m, T>,
    logp_sum: Option<Var>,
    value: Var,
    pub value_f64: f64,
    entropy_sum: Option<Var>,
}

impl<'m, T: Scalar> TrainRollout<'m, T> {
    pub fn reward(&self) -> f64 {
        self.trace.reward.total
    }
}

/// Rolls out one episode. The trace carries the trainer-side reward,
/// accumulated incrementally during the episode; it must agree exactly with
/// [`env::episode_reward`] recomputed from the trace.
pub fn rollout_one<'m, T: Scalar>(
    model: &'m Model<T>,
    inst: &NopInstance,
    env_cfg: &EnvConfig,
    mode: RolloutMode,
    rng: &mut ChaCha8Rng,
    want_entropy: bool,
) -> Result<TrainRollout<'m, T>> {
    let mut session = model.session();
    let enc = session.encode(inst)?;
    let value = session.critic_value(&enc)?;
    let value_f64 = session.tape().value(value).first().to_f64();

    let mut state = env::reset(inst);
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut positions = vec![[state.position.x, state.position.y]];
    let mut visited_order: Vec<usize> = Vec::new();
    let mut logps: Vec<Var> = Vec::new();
    let mut entropies: Vec<Var> = Vec::new();
    let mut dist_sum = 0.0f64;
    let mut collected = 0usize;

    while !state.done() {
        let act_mode = match mode {
            RolloutMode::Sample => ActMode::Sample(rng),
            RolloutMode::Greedy => ActMode::Greedy,
        };
        let sample = session.act(&state, inst, &enc, env_cfg, act_mode)?;

        dist_sum += state.position.dist(&inst.nodes()[sample.goal]);
        steps.push(StepRecord {
            position: [state.position.x, state.position.y],
            steps_left: state.steps_left,
            goal: sample.goal,
            dir: sample.dir,
            log_prob_goal: sample.log_prob_goal_value,
            log_prob_dir: sample.log_prob_dir_value,
        });

        let joint = session
            .tape_mut()
            .add(sample.log_prob_goal, sample.log_prob_dir)
            .map_err(ModelError::from)?;
        logps.push(joint);
        if want_entropy {
            let h_goal = masked_entropy(&mut session, sample.goal_dist, &sample.goal_probs)?;
            let h_dir = masked_entropy(&mut session, sample.dir_dist, &sample.dir_probs)?;
            let h = session
                .tape_mut()
                .add(h_goal, h_dir)
                .map_err(ModelError::from)?;
            entropies.push(h);
        }

        let effect = env::step(&state.with_goal(sample.goal), inst, sample.dir, env_cfg)?;
        for &i in &effect.newly_visited {
            visited_order.push(i);
            if inst.is_interior(i) && inst.rewards()[i] > 0.0 {
                collected += 1;
            }
        }
        positions.push([effect.state.position.x, effect.state.position.y]);
        state = effect.state;
    }

    let reward = env::score_episode(collected, dist_sum, state.outcome.is_success(), inst);

    let trace = EpisodeTrace {
        schema: env::TRACE_SCHEMA_VERSION,
        outcome: state.outcome,
        steps,
        positions,
        visited_order,
        reward,
    };

    // joint log-likelihood of the episode's action sequence
    let logp_sum = if logps.is_empty() {
        None
    } else {
        let row = session
            .tape_mut()
            .concat(&logps, 1)
            .map_err(ModelError::from)?;
        let mean = session.tape_mut().mean_all(row);
        let count = T::from_f64(logps.len() as f64);
        Some(session.tape_mut().scale(mean, count))
    };
    let entropy_sum = if entropies.is_empty() {
        None
    } else {
        let row = session
            .tape_mut()
            .concat(&entropies, 1)
            .map_err(ModelError::from)?;
        let mean = session.tape_mut().mean_all(row);
        let count = T::from_f64(entropies.len() as f64);
        Some(session.tape_mut().scale(mean, count))
    };

    Ok(TrainRollout {
        trace,
        session,
        logp_sum,
        value,
        value_f64,
        entropy_sum,
    })
}

/// Entropy of a distribution that may contain exact zeros: contributions
/// from zero-probability entries are exactly zero.
fn masked_entropy<T: Scalar>(
    session: &mut Session<'_, T>,
    dist: Var,
    probs: &[f64],
) -> Result<Var> {
    let zero_mask: Vec<bool> = probs.iter().map(|&p| p == 0.0).collect();
    let tape = session.tape_mut();
    let logp = tape.log(dist);
    let logp = tape
        .masked_fill(logp, &zero_mask, T::zero())
        .map_err(ModelError::from)?;
    let plogp = tape.mul(dist, logp).map_err(ModelError::from)?;
    let mean = tape.mean_all(plogp);
    let neg_len = T::from_f64(-(probs.len() as f64));
    Ok(tape.scale(mean, neg_len))
}

/// Greedy or sampled evaluation rollouts, instance-parallel, one RNG stream
/// per episode index; results in input order.
pub fn rollout_batch<T: Scalar>(
    model: &Model<T>,
    instances: &[NopInstance],
    env_cfg: &EnvConfig,
    mode: RolloutMode,
    seed: u64,
) -> Result<Vec<EpisodeTrace>> {
    instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, SEED_TAG_ACTIONS));
            rng.set_stream(i as u64);
            rollout_one(model, inst, env_cfg, mode, &mut rng, false).map(|r| r.trace)
        })
        .collect()
}

/// One episode's contribution to an update.
#[derive(Debug, Clone)]
pub struct EpisodeGrad<T> {
    pub grads: Vec<T>,
    pub actor_loss: f64,
    pub critic_loss: f64,
}

/// Consumes a rollout and produces the gradient of its loss under a fixed
/// advantage. The advantage multiplies the episode's joint log-likelihood
/// as a constant: no gradient flows through the reward or the baseline in
/// the actor term.
pub fn episode_gradient<T: Scalar>(
    mut rollout: TrainRollout<'_, T>,
    advantage: f64,
    critic_weight: f64,
    entropy_weight: f64,
) -> Result<EpisodeGrad<T>> {
    let reward = rollout.reward();
    let value = rollout.value;
    let critic_loss = {
        let v = rollout.value_f64 - reward;
        v * v
    };

    let session = &mut rollout.session;
    let mut actor_loss = 0.0;
    let mut loss = {
        let tape = session.tape_mut();
        let r_leaf = tape.scalar(T::from_f64(reward));
        let err = tape.sub(value, r_leaf).map_err(ModelError::from)?;
        let sq = tape.mul(err, err).map_err(ModelError::from)?;
        tape.scale(sq, T::from_f64(critic_weight))
    };

    if let Some(logp_sum) = rollout.logp_sum {
        let tape = session.tape_mut();
        actor_loss = -advantage * tape.value(logp_sum).first().to_f64();
        let actor = tape.scale(logp_sum, T::from_f64(-advantage));
        loss = tape.add(actor, loss).map_err(ModelError::from)?;
    }
    if entropy_weight != 0.0 {
        if let Some(h) = rollout.entropy_sum {
            let tape = session.tape_mut();
            let bonus = tape.scale(h, T::from_f64(-entropy_weight));
            loss = tape.add(loss, bonus).map_err(ModelError::from)?;
        }
    }

    let grads = session.grad_of(loss)?;
    Ok(EpisodeGrad {
        grads,
        actor_loss,
        critic_loss,
    })
}

/// Per-update loss aggregates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub grad_norm: f64,
}

/// Averages episode gradients, clips the global norm, and applies one Adam
/// step.
pub fn apply_gradients<T: Scalar>(
    model: &mut Model<T>,
    opt: &mut Adam<T>,
    episodes: &[EpisodeGrad<T>],
    grad_clip: f64,
) -> Result<UpdateStats> {
    if episodes.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let mut sum = vec![T::zero(); model.param_count()];
    let mut actor = 0.0;
    let mut critic = 0.0;
    for e in episodes {
        for (s, g) in sum.iter_mut().zip(&e.grads) {
            *s += *g;
        }
        actor += e.actor_loss;
        critic += e.critic_loss;
    }
    Ok(finish_update(
        model,
        opt,
        sum,
        episodes.len(),
        actor,
        critic,
        grad_clip,
    ))
}

fn finish_update<T: Scalar>(
    model: &mut Model<T>,
    opt: &mut Adam<T>,
    mut grad_sum: Vec<T>,
    count: usize,
    actor_sum: f64,
    critic_sum: f64,
    grad_clip: f64,
) -> UpdateStats {
    let inv = T::from_f64(1.0 / count as f64);
    for g in grad_sum.iter_mut() {
        *g *= inv;
    }
    let norm = clip_grad_norm(&mut grad_sum, T::from_f64(grad_clip));
    opt.step_store(model.params_mut(), &grad_sum);
    UpdateStats {
        actor_loss: actor_sum / count as f64,
        critic_loss: critic_sum / count as f64,
        grad_norm: norm.to_f64(),
    }
}

/// Advantages from (reward, value) pairs; optional zero-mean unit-variance
/// normalization across the batch.
pub fn compute_advantages(pairs: &[(f64, f64)], normalize: bool) -> Vec<f64> {
    let mut adv: Vec<f64> = pairs.iter().map(|&(r, v)| r - v).collect();
    if normalize && adv.len() > 1 {
        let mean = adv.iter().sum::<f64>() / adv.len() as f64;
        let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / adv.len() as f64;
        let std = var.sqrt().max(1e-8);
        for a in adv.iter_mut() {
            *a = (*a - mean) / std;
        }
    }
    adv
}

struct ChunkResult<T> {
    grad_sum: Vec<T>,
    actor_sum: f64,
    critic_sum: f64,
    reward_sum: f64,
    success: usize,
    node_rate_sum: f64,
}

struct IterOutcome {
    stats: UpdateStats,
    mean_reward: f64,
    success_rate: f64,
    node_rate: f64,
}

/// One rollout-and-update step over a fresh instance batch.
fn train_iteration<T: Scalar>(
    model: &mut Model<T>,
    opt: &mut Adam<T>,
    cfg: &TrainConfig,
    iter: usize,
) -> Result<IterOutcome> {
    if cfg.batch == 0 {
        return Err(TrainError::EmptyBatch);
    }
    let gen_cfg = cfg.instance_stream();
    let base = (iter * cfg.batch) as u64;
    let instances = gen::generate_batch(&gen_cfg, base, cfg.batch)?;

    let action_seed = mix_seed(cfg.seed, SEED_TAG_ACTIONS);
    let want_entropy = cfg.entropy_weight != 0.0;

    // Advantage normalization needs all (reward, value) pairs before any
    // gradient, so it re-rolls the same episodes (same RNG streams) in a
    // second pass. The default path does everything in one pass.
    let pre_advantages: Option<Vec<f64>> = if cfg.advantage_norm {
        let model_ref: &Model<T> = model;
        let pairs: Vec<(f64, f64)> = instances
            .par_iter()
            .enumerate()
            .map(|(e, inst)| {
                let mut rng = ChaCha8Rng::seed_from_u64(action_seed);
                rng.set_stream(base + e as u64);
                rollout_one(model_ref, inst, &cfg.env, RolloutMode::Sample, &mut rng, false)
                    .map(|r| (r.reward(), r.value_f64))
            })
            .collect::<Result<_>>()?;
        Some(compute_advantages(&pairs, true))
    } else {
        None
    };

    let model_ref: &Model<T> = model;
    let chunk_results: Vec<ChunkResult<T>> = instances
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk_idx, chunk)| -> Result<ChunkResult<T>> {
            let mut out = ChunkResult {
                grad_sum: vec![T::zero(); model_ref.param_count()],
                actor_sum: 0.0,
                critic_sum: 0.0,
                reward_sum: 0.0,
                success: 0,
                node_rate_sum: 0.0,
            };
            for (k, inst) in chunk.iter().enumerate() {
                let e = chunk_idx * CHUNK + k;
                let mut rng = ChaCha8Rng::seed_from_u64(action_seed);
                rng.set_stream(base + e as u64);
                let rollout = rollout_one(
                    model_ref,
                    inst,
                    &cfg.env,
                    RolloutMode::Sample,
                    &mut rng,
                    want_entropy,
                )?;
                let adv = match &pre_advantages {
                    Some(a) => a[e],
                    None => rollout.reward() - rollout.value_f64,
                };
                out.reward_sum += rollout.reward();
                if rollout.trace.outcome.is_success() {
                    out.success += 1;
                }
                let visited = rollout.trace.visited_interior(inst).len();
                out.node_rate_sum += visited as f64 / (inst.prize_node_count() as f64 / 2.0);
                let eg = episode_gradient(rollout, adv, cfg.critic_weight, cfg.entropy_weight)?;
                for (s, g) in out.grad_sum.iter_mut().zip(&eg.grads) {
                    *s += *g;
                }
                out.actor_sum += eg.actor_loss;
                out.critic_sum += eg.critic_loss;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut grad_sum = vec![T::zero(); model.param_count()];
    let mut actor = 0.0;
    let mut critic = 0.0;
    let mut reward_sum = 0.0;
    let mut success = 0usize;
    let mut node_rate_sum = 0.0;
    for c in chunk_results {
        for (s, g) in grad_sum.iter_mut().zip(&c.grad_sum) {
            *s += *g;
        }
        actor += c.actor_sum;
        critic += c.critic_sum;
        reward_sum += c.reward_sum;
        success += c.success;
        node_rate_sum += c.node_rate_sum;
    }

    let stats = finish_update(model, opt, grad_sum, cfg.batch, actor, critic, cfg.grad_clip);
    Ok(IterOutcome {
        stats,
        mean_reward: reward_sum / cfg.batch as f64,
        success_rate: success as f64 / cfg.batch as f64,
        node_rate: node_rate_sum / cfg.batch as f64,
    })
}

/// Runs the full training loop: one report row per iteration, checkpoints
/// at the configured cadence, deterministic under a fixed seed (wall-clock
/// aside). A non-finite loss aborts with the report written so far.
pub fn train<T: Scalar>(cfg: &TrainConfig) -> Result<(Model<T>, TrainReport)> {
    let mut model = Model::<T>::new(cfg.model.clone(), mix_seed(cfg.seed, SEED_TAG_MODEL))?;
    let mut opt = Adam::new(model.param_count(), cfg.lr);
    let mut records = Vec::with_capacity(cfg.iters);

    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        model.save(&dir.join("checkpoint-initial.nfcp"), &cfg.env)?;
    }

    for iter in 0..cfg.iters {
        let started = Instant::now();
        let out = train_iteration(&mut model, &mut opt, cfg, iter)?;
        let rec = IterRecord {
            iter,
            mean_reward: out.mean_reward,
            success_rate: out.success_rate,
            node_rate: out.node_rate,
            actor_loss: out.stats.actor_loss,
            critic_loss: out.stats.critic_loss,
            wall_secs: started.elapsed().as_secs_f64(),
        };
        let finite = rec.mean_reward.is_finite()
            && rec.actor_loss.is_finite()
            && rec.critic_loss.is_finite();
        records.push(rec);
        if !finite {
            let (actor, critic) = {
                let r = records.last().unwrap();
                (r.actor_loss, r.critic_loss)
            };
            if let Some(dir) = &cfg.out_dir {
                let _ = write_report_csv(&dir.join("report.csv"), &records);
                let _ = std::fs::write(
                    dir.join("train-abort.txt"),
                    format!(
                        "non-finite loss at iteration {iter}: actor {actor} critic {critic}\n"
                    ),
                );
            }
            return Err(TrainError::NonFinite { iter, actor, critic });
        }
        if let Some(dir) = &cfg.out_dir {
            if cfg.ckpt_every > 0 && (iter + 1) % cfg.ckpt_every == 0 {
                model.save(&dir.join(format!("checkpoint-{:05}.nfcp", iter + 1)), &cfg.env)?;
            }
            // keep the on-disk report current during long runs
            if (iter + 1) % 50 == 0 {
                write_report_csv(&dir.join("report.csv"), &records)?;
            }
        }
    }

    let final_checkpoint = if let Some(dir) = &cfg.out_dir {
        let path = dir.join("model.nfcp");
        model.save(&path, &cfg.env)?;
        write_report_csv(&dir.join("report.csv"), &records)?;
        Some(path)
    } else {
        None
    };

    Ok((
        model,
        TrainReport {
            records,
            final_checkpoint,
        },
    ))
}

/// Appends zero-reward padding nodes (at the start depot's position) so a
/// batch of mixed sizes can share one network width. Padding nodes start
/// out visited, which masks them from goal selection permanently, and they
/// never count toward rewards or rates.
pub fn pad_instance(inst: &NopInstance, target_interior: usize) -> NopInstance {
    let n = inst.interior_count();
    if n >= target_interior {
        return inst.clone();
    }
    let mut nodes: Vec<Point> = inst.nodes()[..inst.end_depot()].to_vec();
    let mut rewards: Vec<f64> = inst.rewards()[..inst.end_depot()].to_vec();
    for _ in n..target_interior {
        nodes.push(inst.start());
        rewards.push(0.0);
    }
    nodes.push(inst.end());
    rewards.push(0.0);
    NopInstance::new(
        nodes,
        rewards,
        inst.obstacles().to_vec(),
        inst.budget(),
        inst.step_len(),
    )
    .expect("padding preserves instance invariants")
}
