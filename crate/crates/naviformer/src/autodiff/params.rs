//! Named parameter storage shared read-only across rollout workers.
//!
//! Each worker copies parameter values onto its own tape as leaves, runs
//! forward/backward, and extracts a flat gradient aligned with the store's
//! registration order. A single coordinator applies updates.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::Data;
use super::scalar::Scalar;
use super::{Tape, Var};

#[derive(Debug, Clone)]
pub struct ParamEntry<T> {
    pub name: String,
    pub data: Data<T>,
}

/// Ordered collection of named parameter tensors.
#[derive(Debug, Clone)]
pub struct ParamStore<T: Scalar> {
    entries: Vec<ParamEntry<T>>,
    rng: ChaCha8Rng,
}

/// Index of a parameter within its store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(pub usize);

impl<T: Scalar> ParamStore<T> {
    pub fn new(seed: u64) -> Self {
        ParamStore {
            entries: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Registers a tensor initialized uniformly in `±1/sqrt(fan_in)`.
    pub fn add(&mut self, name: &str, shape: &[usize], fan_in: usize) -> ParamId {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let len: usize = shape.iter().product();
        let buf = (0..len)
            .map(|_| T::from_f64(self.rng.gen_range(-bound..bound)))
            .collect();
        self.entries.push(ParamEntry {
            name: name.to_string(),
            data: Data::from_vec(shape, buf),
        });
        ParamId(self.entries.len() - 1)
    }

    /// Registers a tensor with an explicit constant value.
    pub fn add_const(&mut self, name: &str, shape: &[usize], value: T) -> ParamId {
        let len: usize = shape.iter().product();
        self.entries.push(ParamEntry {
            name: name.to_string(),
            data: Data::from_vec(shape, vec![value; len]),
        });
        ParamId(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ParamEntry<T>] {
        &self.entries
    }

    pub fn get(&self, id: ParamId) -> &Data<T> {
        &self.entries[id.0].data
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Data<T> {
        &mut self.entries[id.0].data
    }

    pub fn by_name(&self, name: &str) -> Option<&Data<T>> {
        self.entries.iter().find(|e| e.name == name).map(|e| &e.data)
    }

    /// Total number of scalar parameters.
    pub fn total_len(&self) -> usize {
        self.entries.iter().map(|e| e.data.len()).sum()
    }

    /// Concatenates all parameters in registration order.
    pub fn to_flat(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.total_len());
        for e in &self.entries {
            out.extend_from_slice(e.data.buf());
        }
        out
    }

    /// Overwrites all parameters from a flat buffer in registration order.
    pub fn load_flat(&mut self, flat: &[T]) {
        assert_eq!(flat.len(), self.total_len(), "flat buffer length mismatch");
        let mut off = 0;
        for e in &mut self.entries {
            let len = e.data.len();
            e.data.buf_mut().copy_from_slice(&flat[off..off + len]);
            off += len;
        }
    }

    /// Replaces entry values from another store with identical layout.
    pub fn copy_values_from(&mut self, other: &ParamStore<T>) {
        assert_eq!(self.entries.len(), other.entries.len());
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            assert_eq!(a.name, b.name);
            a.data = b.data.clone();
        }
    }
}

/// Registers every parameter as a tape leaf, in registration order.
pub fn bind_params<T: Scalar>(tape: &mut Tape<T>, store: &ParamStore<T>) -> Vec<Var> {
    store
        .entries()
        .iter()
        .map(|e| tape.leaf(e.data.clone()))
        .collect()
}

/// Extracts the flat gradient for previously bound parameters; entries with
/// no gradient contribute zeros.
pub fn extract_grads<T: Scalar>(tape: &Tape<T>, bound: &[Var], store: &ParamStore<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(store.total_len());
    for (var, entry) in bound.iter().zip(store.entries()) {
        match tape.grad(*var) {
            Some(g) => out.extend_from_slice(g.buf()),
            None => out.extend(std::iter::repeat(T::zero()).take(entry.data.len())),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_round_trip() {
        let mut store = ParamStore::<f64>::new(1);
        store.add("w", &[2, 3], 3);
        store.add("b", &[1, 3], 3);
        let flat = store.to_flat();
        assert_eq!(flat.len(), 9);
        let mut other = ParamStore::<f64>::new(2);
        other.add("w", &[2, 3], 3);
        other.add("b", &[1, 3], 3);
        other.load_flat(&flat);
        assert_eq!(other.to_flat(), flat);
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let mut store = ParamStore::<f64>::new(3);
        store.add("w", &[64, 64], 64);
        let bound = 1.0 / 8.0;
        assert!(store
            .get(ParamId(0))
            .buf()
            .iter()
            .all(|&v| v.abs() <= bound));
    }

    #[test]
    fn bind_and_extract_align() {
        let mut store = ParamStore::<f64>::new(4);
        let w = store.add("w", &[1, 2], 2);
        store.add("unused", &[1, 2], 2);
        let mut tape = Tape::new();
        let bound = bind_params(&mut tape, &store);
        let loss = tape.mean_all(bound[w.0]);
        tape.backward(loss).unwrap();
        let grads = extract_grads(&tape, &bound, &store);
        assert_eq!(grads.len(), 4);
        assert!((grads[0] - 0.5).abs() < 1e-15);
        assert!((grads[1] - 0.5).abs() < 1e-15);
        assert_eq!(grads[2], 0.0);
        assert_eq!(grads[3], 0.0);
    }
}
