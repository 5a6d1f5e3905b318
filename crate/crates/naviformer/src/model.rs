//! The policy network.
//!
//! The encoder embeds nodes `(x, y, reward)` and obstacles
//! `(cx, cy, radius)` into a shared feature space and mixes them with a
//! combined attention block: per block, node self-attention `h11` and
//! node-to-obstacle cross attention `h12` merge into the node stream
//! `h1 = A(h11, h12, h12)`, while the obstacle stream mirrors it with
//! `h21`/`h22`/`h2`. Each stream then gets the usual residual + norm +
//! feed-forward treatment. The last block only needs the node stream, whose
//! output is the graph embedding.
//!
//! At each step the decoder builds a state embedding (agent position,
//! normalized steps left, clearances to the nearest obstacles, and the graph
//! embedding of the previous goal plus the pooled graph context), attends
//! over the graph with visited nodes masked out, and scores goals with a
//! clipped-tanh pointer layer. Visited nodes get exactly zero probability;
//! the end depot is never masked. A small CNN over the agent-centered local
//! maps (full obstacle/goal grids plus their four half-window views as
//! channels) yields the direction distribution, and a two-layer head over
//! the pooled graph embedding yields the critic value.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::autodiff::checkpoint::{self, CheckpointError};
use crate::autodiff::params::{bind_params, extract_grads, ParamId};
use crate::autodiff::{AutodiffError, Data, ParamStore, Scalar, Tape, Var};
use crate::env::{self, AgentState, EnvConfig, LocalMaps, NUM_DIRECTIONS};
use crate::nop::NopInstance;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("encoder requires at least one obstacle")]
    NoObstacles,
    #[error("local maps are {got} cells but the model expects {expected}")]
    MapSize { expected: usize, got: usize },
    #[error("visited mask has {got} entries for {expected} nodes")]
    MaskLen { expected: usize, got: usize },
    #[error("no selectable goal (every node masked)")]
    AllMasked,
    #[error("hidden size {hidden} is not divisible by {heads} heads")]
    BadHeads { hidden: usize, heads: usize },
    #[error("checkpoint error: {0}")]
    Checkpoint(#[from] CheckpointError),
    #[error("checkpoint manifest is not valid model config json: {0}")]
    BadManifest(String),
}

type Result<V> = std::result::Result<V, ModelError>;

/// Network hyperparameters. The defaults are the full-scale settings;
/// desk-scale training shrinks them via the train configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Feature width of every embedding.
    pub hidden: usize,
    pub heads: usize,
    /// Number of stacked combined-attention encoder blocks.
    pub blocks: usize,
    /// Pointer logits are `clip * tanh(score)`.
    pub tanh_clip: f64,
    /// Feed-forward expansion width inside encoder blocks.
    pub ff_hidden: usize,
    /// The state embedding sees clearances to this many nearest obstacles
    /// (zero padded when fewer exist).
    pub k_obstacles: usize,
    /// Expected side length of the local maps.
    pub map_cells: usize,
    /// Channel widths of the two direction-head convolutions.
    pub conv_channels: (usize, usize),
    /// Strides of the two direction-head convolutions. The product sets the
    /// spatial resolution left for direction decisions: a total stride of 2
    /// keeps half-window bearing detail near the agent.
    pub conv_strides: (usize, usize),
    /// Width of the direction head's dense layer.
    pub dir_hidden: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 128,
            heads: 8,
            blocks: 3,
            tanh_clip: 10.0,
            ff_hidden: 512,
            k_obstacles: 20,
            map_cells: 32,
            conv_channels: (8, 16),
            conv_strides: (2, 2),
            dir_hidden: 64,
        }
    }
}

impl ModelConfig {
    /// Compact configuration for CPU-scale experiments and tests.
    pub fn micro(hidden: usize, heads: usize, blocks: usize, map_cells: usize) -> Self {
        ModelConfig {
            hidden,
            heads,
            blocks,
            ff_hidden: hidden * 4,
            map_cells,
            k_obstacles: 6,
            conv_channels: (4, 8),
            conv_strides: (2, 1),
            dir_hidden: 32,
            ..ModelConfig::default()
        }
    }

    fn head_dim(&self) -> usize {
        self.hidden / self.heads
    }

    /// Spatial size after the two convolutions.
    fn conv_out_side(&self) -> usize {
        let after1 = (self.map_cells + 2 - 3) / self.conv_strides.0 + 1;
        (after1 + 2 - 3) / self.conv_strides.1 + 1
    }

    fn flat_conv_len(&self) -> usize {
        self.conv_channels.1 * self.conv_out_side() * self.conv_out_side()
    }
}

#[derive(Debug, Clone, Copy)]
struct Linear {
    w: ParamId,
    b: ParamId,
}

#[derive(Debug, Clone, Copy)]
struct Mha {
    wq: Linear,
    wk: Linear,
    wv: Linear,
    wo: Linear,
}

#[derive(Debug, Clone, Copy)]
struct LayerNormParams {
    gain: ParamId,
    bias: ParamId,
}

#[derive(Debug, Clone, Copy)]
struct Stream {
    ln_attn: LayerNormParams,
    ff1: Linear,
    ff2: Linear,
    ln_ff: LayerNormParams,
}

#[derive(Debug, Clone)]
struct Block {
    node_self: Mha,
    node_cross: Mha,
    node_merge: Mha,
    node_stream: Stream,
    /// Absent in the final block: the graph embedding only needs the node
    /// stream there.
    obstacle: Option<(Mha, Mha, Mha, Stream)>,
}

#[derive(Debug, Clone, Copy)]
struct ConvLayer {
    w: ParamId,
    b: ParamId,
}

/// The policy network: parameters plus the registration layout.
#[derive(Debug, Clone)]
pub struct Model<T: Scalar> {
    cfg: ModelConfig,
    store: ParamStore<T>,
    node_proj: Linear,
    obs_proj: Linear,
    blocks: Vec<Block>,
    state_proj: Linear,
    ctx_proj: Linear,
    dec_mha: Mha,
    ptr_q: Linear,
    ptr_k: Linear,
    critic1: Linear,
    critic2: Linear,
    conv1: ConvLayer,
    conv2: ConvLayer,
    fc1: Linear,
    fc2: Linear,
}

struct Builder<'s, T: Scalar> {
    store: &'s mut ParamStore<T>,
}

impl<'s, T: Scalar> Builder<'s, T> {
    fn linear(&mut self, name: &str, fan_in: usize, fan_out: usize) -> Linear {
        Linear {
            w: self.store.add(&format!("{name}.w"), &[fan_in, fan_out], fan_in),
            b: self.store.add(&format!("{name}.b"), &[1, fan_out], fan_in),
        }
    }

    fn mha(&mut self, name: &str, hidden: usize) -> Mha {
        Mha {
            wq: self.linear(&format!("{name}.q"), hidden, hidden),
            wk: self.linear(&format!("{name}.k"), hidden, hidden),
            wv: self.linear(&format!("{name}.v"), hidden, hidden),
            wo: self.linear(&format!("{name}.out"), hidden, hidden),
        }
    }

    fn layer_norm(&mut self, name: &str, width: usize) -> LayerNormParams {
        LayerNormParams {
            gain: self
                .store
                .add_const(&format!("{name}.gain"), &[1, width], T::one()),
            bias: self
                .store
                .add_const(&format!("{name}.bias"), &[1, width], T::zero()),
        }
    }

    fn stream(&mut self, name: &str, hidden: usize, ff_hidden: usize) -> Stream {
        Stream {
            ln_attn: self.layer_norm(&format!("{name}.ln_attn"), hidden),
            ff1: self.linear(&format!("{name}.ff1"), hidden, ff_hidden),
            ff2: self.linear(&format!("{name}.ff2"), ff_hidden, hidden),
            ln_ff: self.layer_norm(&format!("{name}.ln_ff"), hidden),
        }
    }

    fn conv(&mut self, name: &str, c_in: usize, c_out: usize, k: usize) -> ConvLayer {
        ConvLayer {
            w: self
                .store
                .add(&format!("{name}.w"), &[c_out, c_in, k, k], c_in * k * k),
            b: self.store.add(&format!("{name}.b"), &[c_out], c_in * k * k),
        }
    }
}

impl<T: Scalar> Model<T> {
    pub fn new(cfg: ModelConfig, seed: u64) -> Result<Self> {
        if cfg.hidden % cfg.heads != 0 {
            return Err(ModelError::BadHeads {
                hidden: cfg.hidden,
                heads: cfg.heads,
            });
        }
        let mut store = ParamStore::new(seed);
        let mut b = Builder { store: &mut store };
        let h = cfg.hidden;

        let node_proj = b.linear("enc.node_proj", 3, h);
        let obs_proj = b.linear("enc.obs_proj", 3, h);
        let mut blocks = Vec::with_capacity(cfg.blocks);
        for i in 0..cfg.blocks {
            let last = i + 1 == cfg.blocks;
            let p = format!("enc.block{i}");
            let node_self = b.mha(&format!("{p}.node_self"), h);
            let node_cross = b.mha(&format!("{p}.node_cross"), h);
            let node_merge = b.mha(&format!("{p}.node_merge"), h);
            let node_stream = b.stream(&format!("{p}.node"), h, cfg.ff_hidden);
            let obstacle = if last {
                None
            } else {
                let obs_cross = b.mha(&format!("{p}.obs_cross"), h);
                let obs_self = b.mha(&format!("{p}.obs_self"), h);
                let obs_merge = b.mha(&format!("{p}.obs_merge"), h);
                let obs_stream = b.stream(&format!("{p}.obs"), h, cfg.ff_hidden);
                Some((obs_cross, obs_self, obs_merge, obs_stream))
            };
            blocks.push(Block {
                node_self,
                node_cross,
                node_merge,
                node_stream,
                obstacle,
            });
        }

        let state_in = 3 + cfg.k_obstacles + h;
        let state_proj = b.linear("dec.state_proj", state_in, h);
        let ctx_proj = b.linear("dec.ctx_proj", h, h);
        let dec_mha = b.mha("dec.mha", h);
        let ptr_q = b.linear("dec.ptr_q", h, h);
        let ptr_k = b.linear("dec.ptr_k", h, h);
        let critic1 = b.linear("critic.l1", h, h);
        let critic2 = b.linear("critic.l2", h, 1);

        let (c1, c2) = cfg.conv_channels;
        let conv1 = b.conv("dir.conv1", LocalMaps::CHANNELS, c1, 3);
        let conv2 = b.conv("dir.conv2", c1, c2, 3);
        let fc1 = b.linear("dir.fc1", cfg.flat_conv_len(), cfg.dir_hidden);
        let fc2 = b.linear("dir.fc2", cfg.dir_hidden, NUM_DIRECTIONS);

        Ok(Model {
            cfg,
            store,
            node_proj,
            obs_proj,
            blocks,
            state_proj,
            ctx_proj,
            dec_mha,
            ptr_q,
            ptr_k,
            critic1,
            critic2,
            conv1,
            conv2,
            fc1,
            fc2,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.store
    }

    pub fn param_count(&self) -> usize {
        self.store.total_len()
    }

    /// JSON manifest embedded in checkpoints so they are self-describing:
    /// the network configuration plus the simulator settings it was trained
    /// against.
    pub fn manifest(&self, env: &EnvConfig) -> String {
        serde_json::to_string(&Manifest {
            model: self.cfg.clone(),
            env: *env,
        })
        .expect("config serializes")
    }

    pub fn save(&self, path: &Path, env: &EnvConfig) -> Result<()> {
        checkpoint::save_store(path, &self.manifest(env), &self.store)?;
        Ok(())
    }

    /// Rebuilds a model and its simulator settings from a checkpoint.
    pub fn load(path: &Path) -> Result<(Self, EnvConfig)> {
        let meta = checkpoint::load_meta(path)?;
        let manifest: Manifest =
            serde_json::from_str(&meta).map_err(|e| ModelError::BadManifest(e.to_string()))?;
        let mut model = Model::new(manifest.model, 0)?;
        checkpoint::load_store(path, &mut model.store)?;
        Ok((model, manifest.env))
    }

    /// Opens a forward session: a fresh tape with all parameters bound.
    pub fn session(&self) -> Session<'_, T> {
        let mut tape = Tape::new();
        let bound = bind_params(&mut tape, &self.store);
        Session {
            model: self,
            tape,
            bound,
        }
    }
}

/// Checkpoint manifest: everything needed to reuse a trained model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub model: ModelConfig,
    pub env: EnvConfig,
}

/// Static per-instance encoder output.
pub struct Encoded {
    /// `(n + 2) x hidden` per-node embedding.
    pub h_graph: Var,
    /// `1 x hidden` mean over nodes.
    pub h_mean: Var,
    pub n_nodes: usize,
}

/// Output of one policy decision.
#[derive(Debug, Clone)]
pub struct PolicySample {
    pub goal: usize,
    pub dir: usize,
    pub goal_probs: Vec<f64>,
    pub dir_probs: Vec<f64>,
    /// Full distributions as tape nodes (for entropy bonuses).
    pub goal_dist: Var,
    pub dir_dist: Var,
    /// `log pi(goal)` as a tape node, for the policy-gradient loss.
    pub log_prob_goal: Var,
    pub log_prob_dir: Var,
    pub log_prob_goal_value: f64,
    pub log_prob_dir_value: f64,
}

impl PolicySample {
    /// Joint log-probability of the factored action.
    pub fn log_prob(&self) -> f64 {
        self.log_prob_goal_value + self.log_prob_dir_value
    }
}

/// Action selection mode for [`Session::act`].
pub enum ActMode<'r> {
    /// Draw both actions from their distributions.
    Sample(&'r mut ChaCha8Rng),
    /// Take the argmax of each distribution.
    Greedy,
    /// Evaluate the log-probabilities of fixed actions (replay).
    Forced { goal: usize, dir: usize },
}

/// One forward pass worth of computation over a model's parameters.
pub struct Session<'m, T: Scalar> {
    model: &'m Model<T>,
    tape: Tape<T>,
    bound: Vec<Var>,
}

impl<'m, T: Scalar> Session<'m, T> {
    pub fn tape(&self) -> &Tape<T> {
        &self.tape
    }

    pub fn tape_mut(&mut self) -> &mut Tape<T> {
        &mut self.tape
    }

    fn var(&self, id: ParamId) -> Var {
        self.bound[id.0]
    }

    fn linear(&mut self, lin: Linear, x: Var) -> Result<Var> {
        let w = self.var(lin.w);
        let b = self.var(lin.b);
        let xw = self.tape.matmul(x, w)?;
        Ok(self.tape.add_row(xw, b)?)
    }

    fn ff(&mut self, stream: &Stream, x: Var) -> Result<Var> {
        let h = self.linear(stream.ff1, x)?;
        let h = self.tape.relu(h);
        self.linear(stream.ff2, h)
    }

    fn layer_norm(&mut self, ln: LayerNormParams, x: Var) -> Result<Var> {
        let gain = self.var(ln.gain);
        let bias = self.var(ln.bias);
        Ok(self.tape.layer_norm(x, gain, bias)?)
    }

    /// Multi-head attention; `mask`, when given, hides key positions from
    /// every query row.
    fn mha(
        &mut self,
        p: Mha,
        queries: Var,
        keys_values: Var,
        mask: Option<&[bool]>,
    ) -> Result<Var> {
        let cfg = &self.model.cfg;
        let (heads, dh) = (cfg.heads, cfg.head_dim());
        let scale = T::from_f64(1.0 / (dh as f64).sqrt());
        let q = self.linear(p.wq, queries)?;
        let k = self.linear(p.wk, keys_values)?;
        let v = self.linear(p.wv, keys_values)?;
        let m_rows = self.tape.shape(q)[0];
        let key_rows = self.tape.shape(k)[0];
        let row_mask: Option<Vec<bool>> = mask.map(|m| {
            let mut full = Vec::with_capacity(m_rows * key_rows);
            for _ in 0..m_rows {
                full.extend_from_slice(m);
            }
            full
        });
        let mut head_outs = Vec::with_capacity(heads);
        for h in 0..heads {
            let qh = self.tape.narrow(q, 1, h * dh, dh)?;
            let kh = self.tape.narrow(k, 1, h * dh, dh)?;
            let vh = self.tape.narrow(v, 1, h * dh, dh)?;
            let kt = self.tape.transpose(kh)?;
            let scores = self.tape.matmul(qh, kt)?;
            let scaled = self.tape.scale(scores, scale);
            let masked = match &row_mask {
                Some(m) => self.tape.masked_fill(scaled, m, T::neg_infinity())?,
                None => scaled,
            };
            let att = self.tape.softmax(masked)?;
            head_outs.push(self.tape.matmul(att, vh)?);
        }
        let merged = self.tape.concat(&head_outs, 1)?;
        self.linear(p.wo, merged)
    }

    /// Encodes an instance into its graph embedding.
    pub fn encode(&mut self, inst: &NopInstance) -> Result<Encoded> {
        if inst.obstacles().is_empty() {
            return Err(ModelError::NoObstacles);
        }
        let n_nodes = inst.nodes().len();

        let mut node_feats = Vec::with_capacity(n_nodes * 3);
        for (p, &r) in inst.nodes().iter().zip(inst.rewards()) {
            node_feats.extend_from_slice(&[p.x, p.y, r]);
        }
        let node_in = self
            .tape
            .leaf(Data::from_f64_slice(&[n_nodes, 3], &node_feats));

        let b = inst.obstacles().len();
        let mut obs_feats = Vec::with_capacity(b * 3);
        for o in inst.obstacles() {
            obs_feats.extend_from_slice(&[o.cx, o.cy, o.radius]);
        }
        let obs_in = self.tape.leaf(Data::from_f64_slice(&[b, 3], &obs_feats));

        let mut h_nodes = self.linear(self.model.node_proj, node_in)?;
        let mut h_obs = self.linear(self.model.obs_proj, obs_in)?;

        let blocks = self.model.blocks.clone();
        for block in &blocks {
            let h11 = self.mha(block.node_self, h_nodes, h_nodes, None)?;
            let h12 = self.mha(block.node_cross, h_nodes, h_obs, None)?;
            let h1 = self.mha(block.node_merge, h11, h12, None)?;
            let res = self.tape.add(h_nodes, h1)?;
            let normed = self.layer_norm(block.node_stream.ln_attn, res)?;
            let ff = self.ff(&block.node_stream, normed)?;
            let res2 = self.tape.add(normed, ff)?;
            let next_nodes = self.layer_norm(block.node_stream.ln_ff, res2)?;

            if let Some((obs_cross, obs_self, obs_merge, obs_stream)) = &block.obstacle {
                let h21 = self.mha(*obs_cross, h_obs, h_nodes, None)?;
                let h22 = self.mha(*obs_self, h_obs, h_obs, None)?;
                let h2 = self.mha(*obs_merge, h22, h21, None)?;
                let res_o = self.tape.add(h_obs, h2)?;
                let normed_o = self.layer_norm(obs_stream.ln_attn, res_o)?;
                let ff_o = self.ff(obs_stream, normed_o)?;
                let res2_o = self.tape.add(normed_o, ff_o)?;
                h_obs = self.layer_norm(obs_stream.ln_ff, res2_o)?;
            }
            h_nodes = next_nodes;
        }

        let h_mean = self.tape.mean_rows(h_nodes)?;
        Ok(Encoded {
            h_graph: h_nodes,
            h_mean,
            n_nodes,
        })
    }

    /// State feature vector: position, normalized steps left, clearances to
    /// the nearest obstacles (zero padded to `k_obstacles`).
    fn state_features(&self, state: &AgentState, inst: &NopInstance) -> Vec<f64> {
        let cfg = &self.model.cfg;
        let t_norm = state.steps_left as f64 / inst.max_steps().max(1) as f64;
        let mut feats = vec![state.position.x, state.position.y, t_norm];
        let mut clearances: Vec<f64> = inst
            .obstacles()
            .iter()
            .map(|o| (state.position.dist(&o.center()) - o.radius).max(0.0))
            .collect();
        clearances.sort_by(|a, b| a.partial_cmp(b).unwrap());
        clearances.truncate(cfg.k_obstacles);
        clearances.resize(cfg.k_obstacles, 0.0);
        feats.extend(clearances);
        feats
    }

    /// Embeds the agent state against an encoded instance.
    pub fn embed_state(
        &mut self,
        state: &AgentState,
        inst: &NopInstance,
        enc: &Encoded,
    ) -> Result<Var> {
        let feats = self.state_features(state, inst);
        let feat_leaf = self
            .tape
            .leaf(Data::from_f64_slice(&[1, feats.len()], &feats));
        let prev_goal = self.tape.gather_rows(enc.h_graph, &[state.last_goal])?;
        let full = self.tape.concat(&[feat_leaf, prev_goal], 1)?;
        let projected = self.linear(self.model.state_proj, full)?;
        let ctx = self.linear(self.model.ctx_proj, enc.h_mean)?;
        Ok(self.tape.add(projected, ctx)?)
    }

    /// Goal distribution over all nodes with visited nodes at exactly zero
    /// probability. The end depot is never masked.
    pub fn decode_goal(&mut self, h_state: Var, enc: &Encoded, visited: &[bool]) -> Result<Var> {
        if visited.len() != enc.n_nodes {
            return Err(ModelError::MaskLen {
                expected: enc.n_nodes,
                got: visited.len(),
            });
        }
        let mut mask = visited.to_vec();
        let end = enc.n_nodes - 1;
        mask[end] = false;
        if mask.iter().all(|&m| m) {
            return Err(ModelError::AllMasked);
        }

        let glimpse = self.mha(self.model.dec_mha, h_state, enc.h_graph, Some(&mask))?;
        let q = self.linear(self.model.ptr_q, glimpse)?;
        let k = self.linear(self.model.ptr_k, enc.h_graph)?;
        let kt = self.tape.transpose(k)?;
        let scores = self.tape.matmul(q, kt)?;
        let hidden = self.model.cfg.hidden as f64;
        let scaled = self.tape.scale(scores, T::from_f64(1.0 / hidden.sqrt()));
        let squashed = self.tape.tanh(scaled);
        let clipped = self
            .tape
            .scale(squashed, T::from_f64(self.model.cfg.tanh_clip));
        let masked = self.tape.masked_fill(clipped, &mask, T::neg_infinity())?;
        Ok(self.tape.softmax(masked)?)
    }

    /// Direction distribution from local maps.
    pub fn decode_direction(&mut self, maps: &LocalMaps) -> Result<Var> {
        let cfg = &self.model.cfg;
        if maps.cells != cfg.map_cells {
            return Err(ModelError::MapSize {
                expected: cfg.map_cells,
                got: maps.cells,
            });
        }
        let channels: Vec<f64> = maps.to_channels().iter().map(|&v| v as f64).collect();
        let x = self.tape.leaf(Data::from_f64_slice(
            &[LocalMaps::CHANNELS, maps.cells, maps.cells],
            &channels,
        ));
        let w1 = self.var(self.model.conv1.w);
        let b1 = self.var(self.model.conv1.b);
        let c1 = self.tape.conv2d(x, w1, b1, cfg.conv_strides.0, 1)?;
        let c1 = self.tape.relu(c1);
        let w2 = self.var(self.model.conv2.w);
        let b2 = self.var(self.model.conv2.b);
        let c2 = self.tape.conv2d(c1, w2, b2, cfg.conv_strides.1, 1)?;
        let c2 = self.tape.relu(c2);
        let flat = self.tape.reshape(c2, &[1, cfg.flat_conv_len()])?;
        let h = self.linear(self.model.fc1, flat)?;
        let h = self.tape.relu(h);
        let logits = self.linear(self.model.fc2, h)?;
        Ok(self.tape.softmax(logits)?)
    }

    /// Critic value for an encoded instance.
    pub fn critic_value(&mut self, enc: &Encoded) -> Result<Var> {
        let h = self.linear(self.model.critic1, enc.h_mean)?;
        let h = self.tape.relu(h);
        self.linear(self.model.critic2, h)
    }

    /// One policy decision: goal from the masked pointer, then direction
    /// from the local maps rasterized for that goal.
    pub fn act(
        &mut self,
        state: &AgentState,
        inst: &NopInstance,
        enc: &Encoded,
        env_cfg: &EnvConfig,
        mode: ActMode<'_>,
    ) -> Result<PolicySample> {
        let h_state = self.embed_state(state, inst, enc)?;
        let goal_dist = self.decode_goal(h_state, enc, &state.visited)?;
        let goal_probs = probs_to_f64(self.tape.value(goal_dist).buf());

        let mut mode = mode;
        let goal = match &mut mode {
            ActMode::Sample(rng) => sample_index(&goal_probs, rng),
            ActMode::Greedy => argmax(&goal_probs),
            ActMode::Forced { goal, .. } => *goal,
        };

        let picked_g = self.tape.pick(goal_dist, goal)?;
        let log_prob_goal = self.tape.log(picked_g);

        let maps = env::rasterize_local_maps(state, inst, goal, env_cfg);
        let dir_dist = self.decode_direction(&maps)?;
        let dir_probs = probs_to_f64(self.tape.value(dir_dist).buf());

        let dir = match &mut mode {
            ActMode::Sample(rng) => sample_index(&dir_probs, rng),
            ActMode::Greedy => argmax(&dir_probs),
            ActMode::Forced { dir, .. } => *dir,
        };

        let picked_d = self.tape.pick(dir_dist, dir)?;
        let log_prob_dir = self.tape.log(picked_d);

        Ok(PolicySample {
            goal,
            dir,
            log_prob_goal_value: self.tape.value(log_prob_goal).first().to_f64(),
            log_prob_dir_value: self.tape.value(log_prob_dir).first().to_f64(),
            goal_probs,
            dir_probs,
            goal_dist,
            dir_dist,
            log_prob_goal,
            log_prob_dir,
        })
    }

    /// Runs backward from `loss` and extracts the flat parameter gradient.
    pub fn grad_of(&mut self, loss: Var) -> Result<Vec<T>> {
        self.tape.backward(loss)?;
        Ok(extract_grads(&self.tape, &self.bound, &self.model.store))
    }
}

fn probs_to_f64<T: Scalar>(buf: &[T]) -> Vec<f64> {
    buf.iter().map(|&v| v.to_f64()).collect()
}

/// Deterministic argmax (first maximum wins).
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &p) in probs.iter().enumerate() {
        if p > best_v {
            best_v = p;
            best = i;
        }
    }
    best
}

/// Draws an index from an (approximately normalized) distribution. Exact
/// zeros can never be drawn.
pub fn sample_index(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    use rand::Rng;
    let u: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}
