//! Seeded synthetic instance generation and dataset files.
//!
//! Instance `i` of a dataset is drawn from an RNG stream keyed by
//! `(seed, i)`, so datasets are reproducible and generation parallelizes
//! without affecting content. All reals are quantized to 9 significant
//! digits at sampling time, so a serialized dataset round-trips exactly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

use crate::nop::{NopInstance, Obstacle, Point};
use crate::util::quantize_real;

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("could not place node {node} of instance {index} after {tries} tries; obstacles cover too much area")]
    PlacementFailed { index: u64, node: usize, tries: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Sampling distribution for synthetic scenarios.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenConfig {
    /// Number of interior (prize) nodes.
    pub n_nodes: usize,
    /// Inclusive range for the obstacle count.
    pub obstacle_count: (usize, usize),
    /// Obstacle radii are uniform over this range.
    pub radius_range: (f64, f64),
    pub budget: f64,
    pub step_len: f64,
    pub seed: u64,
}

impl GenConfig {
    /// Standard scenario sizes pair the node count with a budget that lets
    /// roughly half the nodes be visited: (20, 2), (50, 3), (100, 4).
    pub fn standard(n_nodes: usize, budget: f64, seed: u64) -> Self {
        GenConfig {
            n_nodes,
            obstacle_count: (5, 20),
            radius_range: (0.02, 0.12),
            budget,
            step_len: 0.02,
            seed,
        }
    }

    fn validate(&self) -> Result<(), GenError> {
        if self.obstacle_count.0 > self.obstacle_count.1 {
            return Err(GenError::BadConfig("empty obstacle count range".into()));
        }
        if self.obstacle_count.0 == 0 {
            return Err(GenError::BadConfig(
                "at least one obstacle is required; the policy is undefined without obstacles".into(),
            ));
        }
        if !(self.radius_range.0 > 0.0) || self.radius_range.0 > self.radius_range.1 {
            return Err(GenError::BadConfig("invalid radius range".into()));
        }
        if !(self.budget > 0.0) || !(self.step_len > 0.0) {
            return Err(GenError::BadConfig("budget and step length must be positive".into()));
        }
        Ok(())
    }
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig::standard(20, 2.0, 0)
    }
}

const PLACEMENT_TRIES: usize = 10_000;

/// Generates the first instance of the configured stream.
pub fn generate_instance(cfg: &GenConfig) -> Result<NopInstance, GenError> {
    generate_instance_indexed(cfg, 0)
}

/// Generates dataset instance `index` deterministically from `(seed, index)`.
pub fn generate_instance_indexed(cfg: &GenConfig, index: u64) -> Result<NopInstance, GenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);

    let count = rng.gen_range(cfg.obstacle_count.0..=cfg.obstacle_count.1);
    let (r_lo, r_hi) = cfg.radius_range;
    let obstacles: Vec<Obstacle> = (0..count)
        .map(|_| {
            let r = if r_lo == r_hi { r_lo } else { rng.gen_range(r_lo..r_hi) };
            Obstacle::new(
                quantize_real(rng.gen_range(0.0..1.0)),
                quantize_real(rng.gen_range(0.0..1.0)),
                quantize_real(r),
            )
        })
        .collect();

    // Depots are sampled like ordinary nodes; any node strictly inside an
    // obstacle disc is resampled so every prize is reachable in principle.
    let total = cfg.n_nodes + 2;
    let mut nodes = Vec::with_capacity(total);
    for node in 0..total {
        let mut placed = None;
        for _ in 0..PLACEMENT_TRIES {
            let p = Point::new(
                quantize_real(rng.gen_range(0.0..1.0)),
                quantize_real(rng.gen_range(0.0..1.0)),
            );
            if obstacles.iter().all(|o| !o.contains_strict(&p)) {
                placed = Some(p);
                break;
            }
        }
        match placed {
            Some(p) => nodes.push(p),
            None => {
                return Err(GenError::PlacementFailed {
                    index,
                    node,
                    tries: PLACEMENT_TRIES,
                })
            }
        }
    }

    let mut rewards = vec![1.0; total];
    rewards[0] = 0.0;
    rewards[total - 1] = 0.0;

    Ok(NopInstance::new(
        nodes,
        rewards,
        obstacles,
        quantize_real(cfg.budget),
        quantize_real(cfg.step_len),
    )
    .expect("generated instances satisfy the instance invariants"))
}

/// Summary of a written dataset.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DatasetSummary {
    pub count: usize,
    pub seed: u64,
    pub path: String,
}

/// Generates `count` instances and writes them one per line to `path`.
///
/// Instances are generated in parallel and written in index order.
pub fn generate_dataset(cfg: &GenConfig, count: usize, path: &Path) -> Result<DatasetSummary, GenError> {
    cfg.validate()?;
    let lines: Vec<String> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            generate_instance_indexed(cfg, i).map(|inst| crate::nop::serialize_instance(&inst))
        })
        .collect::<Result<_, _>>()?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for line in &lines {
        writeln!(file, "{line}")?;
    }
    file.flush()?;
    Ok(DatasetSummary {
        count,
        seed: cfg.seed,
        path: path.display().to_string(),
    })
}

/// Generates `count` instances in memory (index order).
pub fn generate_batch(cfg: &GenConfig, start_index: u64, count: usize) -> Result<Vec<NopInstance>, GenError> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| generate_instance_indexed(cfg, start_index + i))
        .collect()
}
