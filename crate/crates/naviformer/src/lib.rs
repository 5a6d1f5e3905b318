//! Joint route and path planning for the navigation orienteering problem.
//!
//! An agent starts at a depot, collects prizes by passing close to reward
//! nodes, and must reach the end depot within a distance budget while
//! avoiding circular obstacles. Motion is discretized into fixed-length
//! steps along eight compass directions.
//!
//! The crate provides:
//!
//! - [`nop`] — the instance model, planar geometry, and an independent
//!   constraint verifier usable against any (route, path) pair.
//! - [`gen`] — seeded synthetic instance generation and dataset files.
//! - [`env`] — the episode simulator: direction dynamics, visit detection,
//!   collision handling, episode rewards, and agent-centered local maps.
//! - [`autodiff`] — a minimal dense-tensor engine with reverse-mode
//!   differentiation, Adam, and a binary checkpoint container.
//! - [`model`] — the policy network: combined multi-head attention encoder
//!   over nodes and obstacles, masked pointer decoder for goal selection,
//!   convolutional direction head over local maps, and a critic head.
//! - [`train`] — actor-critic training with batched rollouts.
//! - [`baselines`] — grid A*, a greedy budget-aware route heuristic, and
//!   the two-step route-then-path pipeline.
//! - [`bench`] — evaluation metrics, the comparison harness, and SVG plots.
//!
//! Start with the runnable programs under `examples/`; each one exercises a
//! single capability end to end. A thin `naviformer` binary exposes the same
//! entry points as subcommands (`generate`, `train`, `eval`, `plan`,
//! `compare`).

pub mod autodiff;
pub mod baselines;
pub mod bench;
pub mod env;
pub mod gen;
pub mod model;
pub mod nop;
pub mod train;
pub mod util;
