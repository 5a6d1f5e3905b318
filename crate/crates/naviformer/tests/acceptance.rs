//! Acceptance suite: every release-gating property in one sequential run,
//! one PASS/FAIL line per criterion.
//!
//! ```bash
//! cargo test --test acceptance -- --nocapture
//! ```
//!
//! The desk-scale learning criterion trains a policy from scratch (2000
//! iterations of batch 128) and dominates the runtime; expect roughly an
//! hour on two cores.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

use naviformer::autodiff::gradcheck::{finite_difference, max_rel_error};
use naviformer::autodiff::{Data, Tape, Var};
use naviformer::baselines::{astar, dijkstra, GridSpec};
use naviformer::bench;
use naviformer::env::{self, EnvConfig};
use naviformer::gen::{self, GenConfig};
use naviformer::model::{ActMode, Model, ModelConfig};
use naviformer::nop;
use naviformer::train::{self, RolloutMode, TrainConfig};

struct Criterion {
    pass: bool,
    detail: String,
}

fn run<F: FnOnce() -> (bool, String)>(name: &'static str, f: F) -> Criterion {
    let started = Instant::now();
    let (pass, detail) = f();
    let seconds = started.elapsed().as_secs_f64();
    let line = if pass { "PASS" } else { "FAIL" };
    println!("[{line}] {name} ({seconds:.1}s): {detail}");
    Criterion { pass, detail }
}

#[test]
fn criterion_gradient_suite() {
    let c = run("gradient suite", gradient_suite);
    assert!(c.pass, "{}", c.detail);
}

#[test]
fn criterion_mask_constraint_suite() {
    let c = run("mask/constraint suite", mask_constraint_suite);
    assert!(c.pass, "{}", c.detail);
}

#[test]
fn criterion_symmetry_suite() {
    let c = run("symmetry suite", symmetry_suite);
    assert!(c.pass, "{}", c.detail);
}

#[test]
fn criterion_astar_oracle() {
    let c = run("astar oracle", astar_oracle);
    assert!(c.pass, "{}", c.detail);
}

#[test]
fn criterion_reward_oracle() {
    let c = run("reward oracle", reward_oracle);
    assert!(c.pass, "{}", c.detail);
}

/// Criteria six and seven share the trained checkpoint, so they run as one
/// sequential test: the desk-scale learning run, then the comparison
/// harness over the same held-out instances.
#[test]
fn criterion_desk_learning_and_comparison() {
    let ckpt_dir = tempfile::tempdir().expect("tempdir");
    let ckpt_path = ckpt_dir.path().to_path_buf();
    let holdout = desk_holdout();
    let learn = {
        let path = ckpt_path.clone();
        let holdout = holdout.clone();
        run("desk-scale learning", move || {
            desk_scale_learning(&path, &holdout)
        })
    };
    let cmp = {
        let path = ckpt_path.clone();
        run("comparison harness", move || {
            comparison_harness(&path, &holdout)
        })
    };
    assert!(learn.pass, "desk-scale learning: {}", learn.detail);
    assert!(cmp.pass, "comparison harness: {}", cmp.detail);
}

#[test]
fn criterion_generator_statistics() {
    let c = run("generator statistics", generator_statistics);
    assert!(c.pass, "{}", c.detail);
}

// ---------------------------------------------------------------- gradients

/// Builds each operation with random inputs, projects the output onto a
/// random direction, and compares the analytic gradient against central
/// finite differences (wide precision, 1e-3 perturbation, < 1e-4 relative
/// error, at least 50 cases per operation).
fn gradient_suite() -> (bool, String) {
    const CASES: usize = 60;
    const TOL: f64 = 1e-4;
    let started = Instant::now();
    let mut worst: (f64, &'static str) = (0.0, "none");
    let mut failures = Vec::new();

    type Builder = Box<dyn Fn(&mut Tape<f64>, Var) -> Var>;

    let mut check = |name: &'static str, make: &mut dyn FnMut(&mut ChaCha8Rng) -> (Data<f64>, Builder)| {
        let mut op_worst = 0.0f64;
        for case in 0..CASES {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + case as u64);
            let (input, build) = make(&mut rng);
            // analytic pass; output shape fixes the projection
            let mut tape = Tape::<f64>::new();
            let x = tape.leaf(input.clone());
            let out = build(&mut tape, x);
            let out_shape = tape.shape(out).to_vec();
            let out_len: usize = out_shape.iter().product();
            let proj: Vec<f64> = (0..out_len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = tape.leaf(Data::from_vec(&out_shape, proj.clone()));
            let p = tape.mul(out, w).unwrap();
            let loss = tape.mean_all(p);
            tape.backward(loss).unwrap();
            let analytic = match tape.grad(x) {
                Some(g) => g.buf().to_vec(),
                None => vec![0.0; input.len()],
            };

            let shape = input.shape().to_vec();
            let f = |vals: &[f64]| -> f64 {
                let mut tape = Tape::<f64>::new();
                let x = tape.leaf(Data::from_vec(&shape, vals.to_vec()));
                let out = build(&mut tape, x);
                let w = tape.leaf(Data::from_vec(&out_shape, proj.clone()));
                let p = tape.mul(out, w).unwrap();
                let loss = tape.mean_all(p);
                tape.value(loss).first()
            };
            let numeric = finite_difference(f, input.buf(), 1e-3);
            let outcome = max_rel_error(&analytic, &numeric);
            op_worst = op_worst.max(outcome.max_rel);
        }
        if op_worst > worst.0 {
            worst = (op_worst, name);
        }
        if op_worst >= TOL {
            failures.push(format!("{name} rel {op_worst:.2e}"));
        }
    };

    let rand_data = |rng: &mut ChaCha8Rng, shape: &[usize], lo: f64, hi: f64| -> Data<f64> {
        let len = shape.iter().product();
        Data::from_vec(shape, (0..len).map(|_| rng.gen_range(lo..hi)).collect())
    };

    check("matmul-lhs", &mut |rng| {
        let b = rand_data(rng, &[3, 4], -1.0, 1.0);
        (
            rand_data(rng, &[2, 3], -1.0, 1.0),
            Box::new(move |t, x| {
                let vb = t.leaf(b.clone());
                t.matmul(x, vb).unwrap()
            }),
        )
    });
    check("matmul-rhs", &mut |rng| {
        let a = rand_data(rng, &[2, 3], -1.0, 1.0);
        (
            rand_data(rng, &[3, 4], -1.0, 1.0),
            Box::new(move |t, x| {
                let va = t.leaf(a.clone());
                t.matmul(va, x).unwrap()
            }),
        )
    });
    check("add", &mut |rng| {
        let b = rand_data(rng, &[3, 3], -1.0, 1.0);
        (
            rand_data(rng, &[3, 3], -1.0, 1.0),
            Box::new(move |t, x| {
                let vb = t.leaf(b.clone());
                t.add(x, vb).unwrap()
            }),
        )
    });
    check("sub", &mut |rng| {
        let b = rand_data(rng, &[3, 3], -1.0, 1.0);
        (
            rand_data(rng, &[3, 3], -1.0, 1.0),
            Box::new(move |t, x| {
                let vb = t.leaf(b.clone());
                t.sub(vb, x).unwrap()
            }),
        )
    });
    check("mul", &mut |rng| {
        let b = rand_data(rng, &[3, 3], -1.0, 1.0);
        (
            rand_data(rng, &[3, 3], -1.0, 1.0),
            Box::new(move |t, x| {
                let vb = t.leaf(b.clone());
                t.mul(x, vb).unwrap()
            }),
        )
    });
    check("add_row-matrix", &mut |rng| {
        let b = rand_data(rng, &[1, 4], -1.0, 1.0);
        (
            rand_data(rng, &[3, 4], -1.0, 1.0),
            Box::new(move |t, x| {
                let vb = t.leaf(b.clone());
                t.add_row(x, vb).unwrap()
            }),
        )
    });
    check("add_row-vector", &mut |rng| {
        let a = rand_data(rng, &[3, 4], -1.0, 1.0);
        (
            rand_data(rng, &[1, 4], -1.0, 1.0),
            Box::new(move |t, x| {
                let va = t.leaf(a.clone());
                t.add_row(va, x).unwrap()
            }),
        )
    });
    check("scale", &mut |rng| {
        let c = rng.gen_range(-2.0..2.0);
        (
            rand_data(rng, &[2, 5], -1.0, 1.0),
            Box::new(move |t, x| t.scale(x, c)),
        )
    });
    check("transpose", &mut |rng| {
        (
            rand_data(rng, &[3, 5], -1.0, 1.0),
            Box::new(|t, x| t.transpose(x).unwrap()),
        )
    });
    check("concat-cols", &mut |rng| {
        let b = rand_data(rng, &[2, 3], -1.0, 1.0);
        (
            rand_data(rng, &[2, 4], -1.0, 1.0),
            Box::new(move |t, x| {
                let vb = t.leaf(b.clone());
                t.concat(&[x, vb, x], 1).unwrap()
            }),
        )
    });
    check("concat-rows", &mut |rng| {
        let b = rand_data(rng, &[2, 4], -1.0, 1.0);
        (
            rand_data(rng, &[3, 4], -1.0, 1.0),
            Box::new(move |t, x| {
                let vb = t.leaf(b.clone());
                t.concat(&[vb, x], 0).unwrap()
            }),
        )
    });
    check("narrow", &mut |rng| {
        (
            rand_data(rng, &[4, 6], -1.0, 1.0),
            Box::new(|t, x| t.narrow(x, 1, 2, 3).unwrap()),
        )
    });
    check("reshape", &mut |rng| {
        (
            rand_data(rng, &[4, 6], -1.0, 1.0),
            Box::new(|t, x| t.reshape(x, &[2, 12]).unwrap()),
        )
    });
    check("softmax", &mut |rng| {
        (
            rand_data(rng, &[3, 6], -3.0, 3.0),
            Box::new(|t, x| t.softmax(x).unwrap()),
        )
    });
    check("softmax-masked", &mut |rng| {
        let mask: Vec<bool> = (0..18).map(|_| rng.gen_bool(0.3)).collect();
        let mut mask = mask;
        // keep at least one live entry per row
        for r in 0..3 {
            mask[r * 6] = false;
        }
        (
            rand_data(rng, &[3, 6], -3.0, 3.0),
            Box::new(move |t, x| {
                let m = t.masked_fill(x, &mask, f64::NEG_INFINITY).unwrap();
                t.softmax(m).unwrap()
            }),
        )
    });
    check("tanh", &mut |rng| {
        (
            rand_data(rng, &[2, 6], -2.0, 2.0),
            Box::new(|t, x| t.tanh(x)),
        )
    });
    check("relu", &mut |rng| {
        (
            rand_data(rng, &[2, 6], -1.0, 1.0),
            Box::new(|t, x| t.relu(x)),
        )
    });
    check("log", &mut |rng| {
        (
            rand_data(rng, &[2, 6], 0.1, 2.0),
            Box::new(|t, x| t.log(x)),
        )
    });
    check("mean_rows", &mut |rng| {
        (
            rand_data(rng, &[5, 4], -1.0, 1.0),
            Box::new(|t, x| t.mean_rows(x).unwrap()),
        )
    });
    check("mean_all", &mut |rng| {
        (
            rand_data(rng, &[3, 4], -1.0, 1.0),
            Box::new(|t, x| t.mean_all(x)),
        )
    });
    check("pick", &mut |rng| {
        let idx = rng.gen_range(0..12);
        (
            rand_data(rng, &[3, 4], -1.0, 1.0),
            Box::new(move |t, x| t.pick(x, idx).unwrap()),
        )
    });
    check("gather_rows", &mut |rng| {
        let indices: Vec<usize> = (0..6).map(|_| rng.gen_range(0..4)).collect();
        (
            rand_data(rng, &[4, 3], -1.0, 1.0),
            Box::new(move |t, x| t.gather_rows(x, &indices).unwrap()),
        )
    });
    check("masked_fill", &mut |rng| {
        let mask: Vec<bool> = (0..12).map(|_| rng.gen_bool(0.4)).collect();
        (
            rand_data(rng, &[3, 4], -1.0, 1.0),
            Box::new(move |t, x| t.masked_fill(x, &mask, 0.5).unwrap()),
        )
    });
    // rows with a guaranteed spread: a near-constant row makes the inverse
    // standard deviation huge, and the finite-difference truncation error
    // (which scales with the third derivative) would swamp the comparison
    let spread_rows = |rng: &mut ChaCha8Rng| -> Data<f64> {
        let mut buf = Vec::with_capacity(18);
        for _ in 0..3 {
            for j in 0..6 {
                let base = -1.5 + 0.6 * j as f64;
                buf.push(base + rng.gen_range(-0.25..0.25));
            }
        }
        Data::from_vec(&[3, 6], buf)
    };
    check("layer_norm-input", &mut |rng| {
        let gain = rand_data(rng, &[1, 6], 0.5, 1.5);
        let bias = rand_data(rng, &[1, 6], -0.5, 0.5);
        (
            spread_rows(rng),
            Box::new(move |t, x| {
                let g = t.leaf(gain.clone());
                let b = t.leaf(bias.clone());
                t.layer_norm(x, g, b).unwrap()
            }),
        )
    });
    check("layer_norm-gain", &mut |rng| {
        let input = spread_rows(rng);
        let bias = rand_data(rng, &[1, 6], -0.5, 0.5);
        (
            rand_data(rng, &[1, 6], 0.5, 1.5),
            Box::new(move |t, x| {
                let i = t.leaf(input.clone());
                let b = t.leaf(bias.clone());
                t.layer_norm(i, x, b).unwrap()
            }),
        )
    });
    check("layer_norm-bias", &mut |rng| {
        let input = spread_rows(rng);
        let gain = rand_data(rng, &[1, 6], 0.5, 1.5);
        (
            rand_data(rng, &[1, 6], -0.5, 0.5),
            Box::new(move |t, x| {
                let i = t.leaf(input.clone());
                let g = t.leaf(gain.clone());
                t.layer_norm(i, g, x).unwrap()
            }),
        )
    });
    check("conv2d-input", &mut |rng| {
        let w = rand_data(rng, &[3, 2, 3, 3], -0.5, 0.5);
        let b = rand_data(rng, &[3], -0.2, 0.2);
        (
            rand_data(rng, &[2, 6, 6], -1.0, 1.0),
            Box::new(move |t, x| {
                let vw = t.leaf(w.clone());
                let vb = t.leaf(b.clone());
                t.conv2d(x, vw, vb, 2, 1).unwrap()
            }),
        )
    });
    check("conv2d-weight", &mut |rng| {
        let input = rand_data(rng, &[2, 6, 6], -1.0, 1.0);
        let b = rand_data(rng, &[3], -0.2, 0.2);
        (
            rand_data(rng, &[3, 2, 3, 3], -0.5, 0.5),
            Box::new(move |t, x| {
                let vi = t.leaf(input.clone());
                let vb = t.leaf(b.clone());
                t.conv2d(vi, x, vb, 1, 1).unwrap()
            }),
        )
    });
    check("conv2d-bias", &mut |rng| {
        let input = rand_data(rng, &[2, 6, 6], -1.0, 1.0);
        let w = rand_data(rng, &[3, 2, 3, 3], -0.5, 0.5);
        (
            rand_data(rng, &[3], -0.2, 0.2),
            Box::new(move |t, x| {
                let vi = t.leaf(input.clone());
                let vw = t.leaf(w.clone());
                t.conv2d(vi, vw, x, 2, 1).unwrap()
            }),
        )
    });

    // full model on a micro configuration: loss touches the pointer head,
    // the direction head, and the critic at once
    let full_model_worst = full_model_gradcheck();
    if full_model_worst >= 1e-3 {
        failures.push(format!("full-model rel {full_model_worst:.2e}"));
    }

    let elapsed = started.elapsed().as_secs_f64();
    let pass = failures.is_empty() && elapsed < 300.0;
    let detail = format!(
        "worst op {} at {:.2e}; full model {:.2e}; {:.1}s{}",
        worst.1,
        worst.0,
        full_model_worst,
        elapsed,
        if failures.is_empty() {
            String::new()
        } else {
            format!("; failures: {failures:?}")
        }
    );
    (pass, detail)
}

fn full_model_gradcheck() -> f64 {
    let mut worst = 0.0f64;
    for seed in 0..3u64 {
        let cfg = ModelConfig::micro(8, 2, 1, 8);
        let env_cfg = EnvConfig {
            visit_radius: 0.02,
            map_cells: 8,
            window_side: 0.32,
        };
        let gen_cfg = GenConfig {
            n_nodes: 4,
            obstacle_count: (2, 3),
            radius_range: (0.03, 0.08),
            budget: 1.0,
            step_len: 0.02,
            seed: 900 + seed,
        };
        let inst = gen::generate_instance_indexed(&gen_cfg, 0).unwrap();
        let model = Model::<f64>::new(cfg.clone(), seed).unwrap();
        let state = env::reset(&inst);

        // actions fixed up front so the loss surface is smooth in the
        // parameters
        let (goal, dir) = {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut session = model.session();
            let enc = session.encode(&inst).unwrap();
            let s = session
                .act(&state, &inst, &enc, &env_cfg, ActMode::Sample(&mut rng))
                .unwrap();
            (s.goal, s.dir)
        };

        let loss_of = |m: &Model<f64>| -> (f64, Option<Vec<f64>>) {
            let mut session = m.session();
            let enc = session.encode(&inst).unwrap();
            let v = session.critic_value(&enc).unwrap();
            let s = session
                .act(&state, &inst, &enc, &env_cfg, ActMode::Forced { goal, dir })
                .unwrap();
            let t = session.tape_mut();
            let lp = t.add(s.log_prob_goal, s.log_prob_dir).unwrap();
            let loss = t.add(lp, v).unwrap();
            let value = t.value(loss).first();
            let grads = session.grad_of(loss).unwrap();
            (value, Some(grads))
        };

        let (_, analytic) = loss_of(&model);
        let analytic = analytic.unwrap();

        let flat = model.params().to_flat();
        let f = |vals: &[f64]| -> f64 {
            let mut probe = model.clone();
            probe.params_mut().load_flat(vals);
            let mut session = probe.session();
            let enc = session.encode(&inst).unwrap();
            let v = session.critic_value(&enc).unwrap();
            let s = session
                .act(&state, &inst, &enc, &env_cfg, ActMode::Forced { goal, dir })
                .unwrap();
            let t = session.tape_mut();
            let lp = t.add(s.log_prob_goal, s.log_prob_dir).unwrap();
            let loss = t.add(lp, v).unwrap();
            t.value(loss).first()
        };
        let numeric = finite_difference(f, &flat, 1e-4);
        let outcome = max_rel_error(&analytic, &numeric);
        worst = worst.max(outcome.max_rel);
    }
    worst
}

// ------------------------------------------------------------ mask suite

/// 1000 sampled rollouts with a random-weight policy: goals never target
/// visited nodes, masked probabilities are exactly zero at every step, no
/// interior node is visited twice, and every successful trace passes the
/// standalone verifier on all constraints.
fn mask_constraint_suite() -> (bool, String) {
    use rayon::prelude::*;
    let started = Instant::now();
    let cfg = ModelConfig::micro(16, 2, 1, 16);
    let env_cfg = EnvConfig {
        visit_radius: 0.02,
        map_cells: 16,
        window_side: 0.32,
    };
    let model = Model::<f32>::new(cfg, 12345).unwrap();

    let errors: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|i| {
            let gen_cfg = GenConfig {
                n_nodes: 4 + (i % 7) as usize,
                obstacle_count: (1, 6),
                radius_range: (0.02, 0.1),
                budget: 1.5,
                step_len: 0.02,
                seed: 0xACC0 + i,
            };
            let inst = gen::generate_instance_indexed(&gen_cfg, 0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let mut session = model.session();
            let enc = session.encode(&inst).unwrap();
            let mut state = env::reset(&inst);
            let mut visited_order: Vec<usize> = Vec::new();
            let mut positions = vec![state.position];
            while !state.done() {
                let s = session
                    .act(&state, &inst, &enc, &env_cfg, ActMode::Sample(&mut rng))
                    .unwrap();
                // masked means exactly zero, and sampling respects it
                for (idx, &v) in state.visited.iter().enumerate() {
                    if v && s.goal_probs[idx] != 0.0 {
                        return Some(format!(
                            "episode {i}: visited node {idx} has probability {}",
                            s.goal_probs[idx]
                        ));
                    }
                }
                if state.visited[s.goal] {
                    return Some(format!("episode {i}: goal {} already visited", s.goal));
                }
                let eff = env::step(&state.with_goal(s.goal), &inst, s.dir, &env_cfg).unwrap();
                visited_order.extend(&eff.newly_visited);
                positions.push(eff.state.position);
                state = eff.state;
            }
            // no interior node appears twice
            let interior: Vec<usize> = visited_order
                .iter()
                .copied()
                .filter(|&n| inst.is_interior(n))
                .collect();
            let mut dedup = interior.clone();
            dedup.sort_unstable();
            dedup.dedup();
            if dedup.len() != interior.len() {
                return Some(format!("episode {i}: revisited an interior node"));
            }
            // successful traces satisfy every constraint
            if state.outcome.is_success() {
                let mut route = vec![0usize];
                route.extend(&interior);
                route.push(inst.end_depot());
                let path = nop::Polyline(positions);
                let report = nop::verify_solution_with(
                    &inst,
                    &nop::Route(route),
                    &path,
                    env_cfg.visit_radius,
                )
                .unwrap();
                if !report.all_pass() {
                    return Some(format!(
                        "episode {i}: successful trace failed constraints {:?}",
                        report.failures()
                    ));
                }
            }
            None
        })
        .collect();

    let elapsed = started.elapsed().as_secs_f64();
    let pass = errors.is_empty() && elapsed < 300.0;
    let detail = if errors.is_empty() {
        format!("1000 rollouts clean; {elapsed:.1}s")
    } else {
        format!("{} violations, first: {}", errors.len(), errors[0])
    };
    (pass, detail)
}

// --------------------------------------------------------------- symmetry

/// Node-permutation equivariance and obstacle-permutation invariance of the
/// goal distribution, elementwise within 1e-5, over 100 random instances.
fn symmetry_suite() -> (bool, String) {
    let model = Model::<f64>::new(ModelConfig::micro(16, 2, 2, 16), 777).unwrap();
    let mut worst_node = 0.0f64;
    let mut worst_obs = 0.0f64;

    for seed in 0..100u64 {
        let gen_cfg = GenConfig {
            n_nodes: 5 + (seed % 5) as usize,
            obstacle_count: (2, 6),
            radius_range: (0.02, 0.1),
            budget: 2.0,
            step_len: 0.02,
            seed: 0x513 + seed,
        };
        let inst = gen::generate_instance_indexed(&gen_cfg, 0).unwrap();
        let n = inst.interior_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let goal_dist = |inst: &nop::NopInstance| -> Vec<f64> {
            let state = env::reset(inst);
            let mut session = model.session();
            let enc = session.encode(inst).unwrap();
            let h = session.embed_state(&state, inst, &enc).unwrap();
            let d = session.decode_goal(h, &enc, &state.visited).unwrap();
            session.tape().value(d).buf().to_vec()
        };
        let base = goal_dist(&inst);

        // random interior permutation
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut nodes = inst.nodes().to_vec();
        let mut rewards = inst.rewards().to_vec();
        for (i, &p) in perm.iter().enumerate() {
            nodes[1 + p] = inst.nodes()[1 + i];
            rewards[1 + p] = inst.rewards()[1 + i];
        }
        let permuted = nop::NopInstance::new(
            nodes,
            rewards,
            inst.obstacles().to_vec(),
            inst.budget(),
            inst.step_len(),
        )
        .unwrap();
        let moved = goal_dist(&permuted);
        for i in 0..n {
            worst_node = worst_node.max((base[1 + i] - moved[1 + perm[i]]).abs());
        }
        worst_node = worst_node.max((base[0] - moved[0]).abs());
        worst_node =
            worst_node.max((base[inst.end_depot()] - moved[inst.end_depot()]).abs());

        // the greedy argmax maps through the permutation
        let base_argmax = naviformer::model::argmax(&base);
        let moved_argmax = naviformer::model::argmax(&moved);
        let expected = if inst.is_interior(base_argmax) {
            1 + perm[base_argmax - 1]
        } else {
            base_argmax
        };
        if moved_argmax != expected {
            return (
                false,
                format!("seed {seed}: argmax {base_argmax} moved to {moved_argmax}, expected {expected}"),
            );
        }

        // random obstacle rotation
        let mut obstacles = inst.obstacles().to_vec();
        let count = obstacles.len();
        let k = rng.gen_range(1..count.max(2));
        obstacles.rotate_left(k % count);
        let ob_permuted = nop::NopInstance::new(
            inst.nodes().to_vec(),
            inst.rewards().to_vec(),
            obstacles,
            inst.budget(),
            inst.step_len(),
        )
        .unwrap();
        let ob_moved = goal_dist(&ob_permuted);
        for (a, b) in base.iter().zip(&ob_moved) {
            worst_obs = worst_obs.max((a - b).abs());
        }
    }

    let pass = worst_node <= 1e-5 && worst_obs <= 1e-5;
    (
        pass,
        format!("node equivariance {worst_node:.2e}, obstacle invariance {worst_obs:.2e} (tol 1e-5)"),
    )
}

// ------------------------------------------------------------ astar oracle

/// A* cost equals Dijkstra cost exactly (integer move counts) on 100 random
/// 50x50 grids, and no returned path cell is blocked.
fn astar_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA57A);
    let mut feasible = 0;
    for case in 0..100 {
        let blocked: Vec<bool> = (0..2500).map(|_| rng.gen::<f64>() < 0.25).collect();
        let grid = GridSpec::from_blocked(50, 0.02, blocked);
        let start = grid.center_of(rng.gen_range(0..50), rng.gen_range(0..50));
        let goal = grid.center_of(rng.gen_range(0..50), rng.gen_range(0..50));
        match (astar(&grid, start, goal), dijkstra(&grid, start, goal)) {
            (Ok(Some(a)), Ok(Some(d))) => {
                if (a.straight_moves, a.diagonal_moves) != (d.straight_moves, d.diagonal_moves) {
                    return (
                        false,
                        format!(
                            "case {case}: astar ({}, {}) vs dijkstra ({}, {})",
                            a.straight_moves, a.diagonal_moves, d.straight_moves, d.diagonal_moves
                        ),
                    );
                }
                if a.cost(0.02) != d.cost(0.02) {
                    return (false, format!("case {case}: float costs differ"));
                }
                for &(ix, iy) in &a.cells {
                    if grid.is_blocked(ix, iy) {
                        return (false, format!("case {case}: path enters a blocked cell"));
                    }
                }
                feasible += 1;
            }
            (Ok(None), Ok(None)) => {}
            (Err(_), Err(_)) => {}
            _ => return (false, format!("case {case}: feasibility disagreement")),
        }
    }
    (
        true,
        format!("100 grids, {feasible} feasible, costs exactly equal"),
    )
}

// ------------------------------------------------------------ reward oracle

/// The trainer-side reward (accumulated during the rollout) equals the
/// environment-side recomputation from the finished trace, bit-exactly, on
/// 1000 traces.
fn reward_oracle() -> (bool, String) {
    let cfg = ModelConfig::micro(16, 2, 1, 16);
    let env_cfg = EnvConfig {
        visit_radius: 0.02,
        map_cells: 16,
        window_side: 0.32,
    };
    let model = Model::<f32>::new(cfg, 31337).unwrap();
    let gen_cfg = GenConfig {
        n_nodes: 8,
        obstacle_count: (2, 6),
        radius_range: (0.02, 0.1),
        budget: 1.5,
        step_len: 0.02,
        seed: 0x09AC,
    };
    let instances = gen::generate_batch(&gen_cfg, 0, 1000).unwrap();
    let traces = train::rollout_batch(&model, &instances, &env_cfg, RolloutMode::Sample, 5).unwrap();
    let mut mismatches = 0;
    for (t, inst) in traces.iter().zip(&instances) {
        let recomputed = env::episode_reward(t, inst).unwrap();
        if recomputed != t.reward {
            mismatches += 1;
        }
    }
    (
        mismatches == 0,
        format!("{} traces, {} mismatches", traces.len(), mismatches),
    )
}

// ------------------------------------------------------- desk-scale training

fn desk_holdout() -> Vec<nop::NopInstance> {
    let holdout_cfg = GenConfig {
        n_nodes: 10,
        obstacle_count: (3, 6),
        radius_range: (0.02, 0.12),
        budget: 2.0,
        step_len: 0.02,
        seed: 0x601D,
    };
    gen::generate_batch(&holdout_cfg, 0, 200).unwrap()
}

/// Trains the desk-scale configuration (10 nodes, 3-6 obstacles, batch 128,
/// 2000 iterations) in under two hours and checks that the final
/// 100-iteration mean reward beats the first by at least 10 units and that
/// greedy decoding reaches success and node rates of at least 0.5 on 200
/// held-out instances. The untrained baseline is measured alongside.
fn desk_scale_learning(ckpt_dir: &std::path::Path, holdout: &[nop::NopInstance]) -> (bool, String) {
    let started = Instant::now();
    let mut cfg = TrainConfig::desk(0);
    cfg.out_dir = Some(ckpt_dir.to_path_buf());

    // untrained baseline, reported alongside
    let untrained = Model::<f32>::new(cfg.model.clone(), 1).unwrap();
    let base_traces =
        train::rollout_batch(&untrained, holdout, &cfg.env, RolloutMode::Greedy, 0).unwrap();
    let base_success = bench::success_rate(&base_traces).unwrap();
    let base_node = bench::node_rate(&base_traces, holdout).unwrap();

    let (model, report) = train::train::<f32>(&cfg).unwrap();
    let wall_hours = started.elapsed().as_secs_f64() / 3600.0;

    let first100: f64 = report.records[..100].iter().map(|r| r.mean_reward).sum::<f64>() / 100.0;
    let last100: f64 = report.records[report.records.len() - 100..]
        .iter()
        .map(|r| r.mean_reward)
        .sum::<f64>()
        / 100.0;
    let improvement = last100 - first100;

    let traces = train::rollout_batch(&model, holdout, &cfg.env, RolloutMode::Greedy, 0).unwrap();
    let success = bench::success_rate(&traces).unwrap();
    let node = bench::node_rate(&traces, holdout).unwrap();

    let pass = improvement >= 10.0
        && success.value >= 0.5
        && node.value >= 0.5
        && wall_hours < 2.0;
    let detail = format!(
        "reward {first100:.2} -> {last100:.2} (gain {improvement:.2}, need >= 10); \
         held-out success {:.3} (untrained {:.3}), node rate {:.3} (untrained {:.3}); {:.2}h",
        success.value, base_success.value, node.value, base_node.value, wall_hours
    );
    (pass, detail)
}

// -------------------------------------------------------- comparison harness

/// The comparison harness emits the metrics table for the trained policy and
/// the two-step baseline with per-instance timing, and re-running with the
/// same seed reproduces the metrics table bit-exactly.
fn comparison_harness(ckpt_dir: &std::path::Path, holdout: &[nop::NopInstance]) -> (bool, String) {
    let checkpoint = ckpt_dir.join("model.nfcp");
    if !checkpoint.exists() {
        return (false, "trained checkpoint missing (training failed?)".into());
    }
    let algos = vec![
        bench::Algorithm::Policy {
            checkpoint: checkpoint.clone(),
        },
        bench::Algorithm::TwoStepGreedyAstar { epsilon: 0.3 },
    ];
    let out_a = ckpt_dir.join("cmp-a");
    let out_b = ckpt_dir.join("cmp-b");
    let a = bench::compare(&algos, holdout, &out_a, 9).unwrap();
    let _rerun = bench::compare(&algos, holdout, &out_b, 9).unwrap();

    let bytes_a = std::fs::read(out_a.join("comparison.csv")).unwrap();
    let bytes_b = std::fs::read(out_b.join("comparison.csv")).unwrap();
    let reproducible = bytes_a == bytes_b;
    let has_rows = a.rows.len() == 2
        && a.rows.iter().any(|r| r.algorithm == "naviformer")
        && a.rows.iter().any(|r| r.algorithm == "two-step-greedy-astar");
    let timing_present = a.rows.iter().all(|r| r.mean_seconds > 0.0)
        && out_a.join("timing.csv").exists();
    let plots_present = out_a.join("success_vs_obstacles.svg").exists()
        && out_a.join("node_rate_vs_obstacles.svg").exists();

    let policy = a.rows.iter().find(|r| r.algorithm == "naviformer").unwrap();
    let two_step = a
        .rows
        .iter()
        .find(|r| r.algorithm == "two-step-greedy-astar")
        .unwrap();
    let pass = reproducible && has_rows && timing_present && plots_present;
    let detail = format!(
        "table reproducible: {reproducible}; policy success {:.3}/node {:.3} vs two-step {:.3}/{:.3}; \
         policy {:.1} ms/inst, two-step {:.1} ms/inst",
        policy.success.value,
        policy.node.value,
        two_step.success.value,
        two_step.node.value,
        policy.mean_seconds * 1e3,
        two_step.mean_seconds * 1e3,
    );
    (pass, detail)
}

// ------------------------------------------------------- generator statistics

/// Over 10000 instances: obstacle count mean within 12.5 ± 0.2 and radius
/// mean within 0.07 ± 0.002.
fn generator_statistics() -> (bool, String) {
    let cfg = GenConfig::standard(5, 2.0, 0x57A7);
    let instances = gen::generate_batch(&cfg, 0, 10_000).unwrap();
    let count_mean = instances
        .iter()
        .map(|i| i.obstacles().len() as f64)
        .sum::<f64>()
        / instances.len() as f64;
    let radii: Vec<f64> = instances
        .iter()
        .flat_map(|i| i.obstacles().iter().map(|o| o.radius))
        .collect();
    let radius_mean = radii.iter().sum::<f64>() / radii.len() as f64;
    let pass = (count_mean - 12.5).abs() < 0.2 && (radius_mean - 0.07).abs() < 0.002;
    (
        pass,
        format!("obstacle count mean {count_mean:.3} (12.5 ± 0.2), radius mean {radius_mean:.4} (0.07 ± 0.002)"),
    )
}
