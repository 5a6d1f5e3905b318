//! Spot-check analytic gradients against central finite differences in
//! wide (f64) precision.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use naviformer::autodiff::gradcheck::{finite_difference, max_rel_error};
use naviformer::autodiff::{Data, Tape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // softmax of a masked logit row, projected onto a random direction
    let x0: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let proj: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mask = [false, true, false, false, true, false];

    let forward = |x: &[f64]| -> f64 {
        let mut tape = Tape::<f64>::new();
        let v = tape.leaf(Data::row_vec(x));
        let m = tape.masked_fill(v, &mask, f64::NEG_INFINITY).unwrap();
        let s = tape.softmax(m).unwrap();
        let w = tape.leaf(Data::row_vec(&proj));
        let p = tape.mul(s, w).unwrap();
        let mean = tape.mean_all(p);
        tape.value(mean).first()
    };

    let mut tape = Tape::<f64>::new();
    let v = tape.leaf(Data::row_vec(&x0));
    let m = tape.masked_fill(v, &mask, f64::NEG_INFINITY)?;
    let s = tape.softmax(m)?;
    let w = tape.leaf(Data::row_vec(&proj));
    let p = tape.mul(s, w)?;
    let mean = tape.mean_all(p);
    tape.backward(mean)?;
    let analytic = tape.grad(v).unwrap().buf().to_vec();
    let numeric = finite_difference(forward, &x0, 1e-3);
    let outcome = max_rel_error(&analytic, &numeric);
    println!("masked softmax: max relative error {:.3e}", outcome.max_rel);
    assert!(outcome.max_rel < 1e-4);

    // masked entries receive exactly zero probability and zero gradient
    let masked_prob = tape.value(s).buf()[1];
    println!("masked probability: {masked_prob} (exact zero)");
    assert_eq!(masked_prob, 0.0);
    assert_eq!(analytic[1], 0.0);

    // a small matmul chain
    let a0: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let forward_mm = |a: &[f64]| -> f64 {
        let mut tape = Tape::<f64>::new();
        let va = tape.leaf(Data::from_vec(&[2, 3], a.to_vec()));
        let vb = tape.leaf(Data::from_vec(&[3, 4], b.clone()));
        let c = tape.matmul(va, vb).unwrap();
        let t = tape.tanh(c);
        let mean = tape.mean_all(t);
        tape.value(mean).first()
    };
    let mut tape = Tape::<f64>::new();
    let va = tape.leaf(Data::from_vec(&[2, 3], a0.clone()));
    let vb = tape.leaf(Data::from_vec(&[3, 4], b.clone()));
    let c = tape.matmul(va, vb)?;
    let t = tape.tanh(c);
    let mean = tape.mean_all(t);
    tape.backward(mean)?;
    let analytic = tape.grad(va).unwrap().buf().to_vec();
    let numeric = finite_difference(forward_mm, &a0, 1e-3);
    let outcome = max_rel_error(&analytic, &numeric);
    println!("matmul + tanh:  max relative error {:.3e}", outcome.max_rel);
    assert!(outcome.max_rel < 1e-4);

    println!("the acceptance suite runs this check across every operation");
    Ok(())
}
