//! Minimal dense-tensor engine with reverse-mode differentiation.
//!
//! A [`Tape`] records operations as they execute; [`Tape::backward`] walks
//! the record in reverse and accumulates gradients into every differentiable
//! parent. Handles ([`Var`]) are plain indices, so a tape is single-owner
//! and cheap to drop after the gradient has been extracted. Parameter values
//! live outside the tape in a [`ParamStore`] and are copied in as leaves,
//! which keeps stores shareable read-only across rollout workers.
//!
//! Broadcasting is deliberately limited to adding a row vector across rows
//! ([`Tape::add_row`]); everything else requires explicit shapes.

mod data;
mod scalar;

pub mod checkpoint;
pub mod gradcheck;
pub mod optim;
pub mod params;

pub use data::Data;
pub use optim::Adam;
pub use params::ParamStore;
pub use scalar::{Dtype, Scalar};

#[derive(Debug, thiserror::Error)]
pub enum AutodiffError {
    #[error("{op}: incompatible shapes {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("{op}: expected rank {expected}, got shape {shape:?}")]
    BadRank {
        op: &'static str,
        expected: usize,
        shape: Vec<usize>,
    },
    #[error("{op}: axis {axis} out of range for shape {shape:?}")]
    BadAxis {
        op: &'static str,
        axis: usize,
        shape: Vec<usize>,
    },
    #[error("{op}: index {index} out of range {len}")]
    BadIndex {
        op: &'static str,
        index: usize,
        len: usize,
    },
    #[error("{op}: mask length {mask} does not match value length {len}")]
    MaskLength {
        op: &'static str,
        mask: usize,
        len: usize,
    },
    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("concat requires at least one input")]
    EmptyConcat,
}

type Result<V> = std::result::Result<V, AutodiffError>;

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

enum Op<T: Scalar> {
    Leaf,
    Matmul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Scale(Var, T),
    Transpose(Var),
    Concat {
        parts: Vec<Var>,
        axis: usize,
    },
    Narrow {
        input: Var,
        axis: usize,
        start: usize,
    },
    Reshape(Var),
    Softmax(Var),
    Tanh(Var),
    Relu(Var),
    Log(Var),
    MeanRows(Var),
    MeanAll(Var),
    Pick(Var, usize),
    GatherRows {
        input: Var,
        indices: Vec<usize>,
    },
    MaskedFill {
        input: Var,
        mask: Vec<bool>,
    },
    LayerNorm {
        input: Var,
        gain: Var,
        bias: Var,
        eps: T,
    },
    Conv2d {
        input: Var,
        weight: Var,
        bias: Var,
        stride: usize,
        pad: usize,
    },
}

struct Node<T: Scalar> {
    value: Data<T>,
    grad: Option<Data<T>>,
    op: Op<T>,
}

/// Records a forward computation and differentiates it in reverse.
pub struct Tape<T: Scalar> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Tape { nodes: Vec::with_capacity(1024) }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Data<T>, op: Op<T>) -> Var {
        self.nodes.push(Node {
            value,
            grad: None,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    /// Registers an input tensor. Leaves participate in gradient
    /// accumulation like any other node; trainability is a concern of the
    /// parameter store, not the tape.
    pub fn leaf(&mut self, value: Data<T>) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn scalar(&mut self, v: T) -> Var {
        self.leaf(Data::scalar(v))
    }

    pub fn value(&self, v: Var) -> &Data<T> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    /// Accumulated gradient of a leaf; interior nodes never retain one.
    pub fn grad(&self, v: Var) -> Option<&Data<T>> {
        self.nodes[v.0].grad.as_ref()
    }

    pub fn zero_grads(&mut self) {
        for n in &mut self.nodes {
            n.grad = None;
        }
    }

    // ---- ops ----------------------------------------------------------

    /// `(m x k) * (k x n)`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(AutodiffError::ShapeMismatch {
                op: "matmul",
                lhs: sa,
                rhs: sb,
            });
        }
        let value = self.nodes[a.0].value.mm(&self.nodes[b.0].value);
        Ok(self.push(value, Op::Matmul(a, b)))
    }

    fn elementwise(&mut self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(AutodiffError::ShapeMismatch {
                op,
                lhs: self.shape(a).to_vec(),
                rhs: self.shape(b).to_vec(),
            });
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise("add", a, b)?;
        let mut value = self.nodes[a.0].value.clone();
        value.add_assign(&self.nodes[b.0].value);
        Ok(self.push(value, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise("sub", a, b)?;
        let va = &self.nodes[a.0].value;
        let vb = &self.nodes[b.0].value;
        let buf = va
            .buf()
            .iter()
            .zip(vb.buf())
            .map(|(&x, &y)| x - y)
            .collect();
        let value = Data::from_vec(va.shape(), buf);
        Ok(self.push(value, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise("mul", a, b)?;
        let va = &self.nodes[a.0].value;
        let vb = &self.nodes[b.0].value;
        let buf = va
            .buf()
            .iter()
            .zip(vb.buf())
            .map(|(&x, &y)| x * y)
            .collect();
        let value = Data::from_vec(va.shape(), buf);
        Ok(self.push(value, Op::Mul(a, b)))
    }

    /// Adds a `1 x n` row vector to every row of an `m x n` matrix.
    pub fn add_row(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        if sa.len() != 2 || sb.len() != 2 || sb[0] != 1 || sa[1] != sb[1] {
            return Err(AutodiffError::ShapeMismatch {
                op: "add_row",
                lhs: sa,
                rhs: sb,
            });
        }
        let va = &self.nodes[a.0].value;
        let vb = &self.nodes[b.0].value;
        let n = sa[1];
        let mut buf = va.buf().to_vec();
        for row in buf.chunks_mut(n) {
            for (x, &y) in row.iter_mut().zip(vb.buf()) {
                *x += y;
            }
        }
        let value = Data::from_vec(&sa, buf);
        Ok(self.push(value, Op::AddRow(a, b)))
    }

    pub fn scale(&mut self, a: Var, c: T) -> Var {
        let value = self.nodes[a.0].value.map(|v| v * c);
        self.push(value, Op::Scale(a, c))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        if self.shape(a).len() != 2 {
            return Err(AutodiffError::BadRank {
                op: "transpose",
                expected: 2,
                shape: self.shape(a).to_vec(),
            });
        }
        let value = self.nodes[a.0].value.transposed();
        Ok(self.push(value, Op::Transpose(a)))
    }

    /// Concatenates rank-2 inputs along `axis` (0 = rows, 1 = cols).
    pub fn concat(&mut self, parts: &[Var], axis: usize) -> Result<Var> {
        if parts.is_empty() {
            return Err(AutodiffError::EmptyConcat);
        }
        let first = self.shape(parts[0]).to_vec();
        if first.len() != 2 || axis > 1 {
            return Err(AutodiffError::BadAxis {
                op: "concat",
                axis,
                shape: first,
            });
        }
        let other_axis = 1 - axis;
        for &p in parts {
            let s = self.shape(p);
            if s.len() != 2 || s[other_axis] != first[other_axis] {
                return Err(AutodiffError::ShapeMismatch {
                    op: "concat",
                    lhs: first,
                    rhs: s.to_vec(),
                });
            }
        }
        let total: usize = parts.iter().map(|&p| self.shape(p)[axis]).sum();
        let mut shape = first.clone();
        shape[axis] = total;
        let mut out = Data::zeros(&shape);
        if axis == 0 {
            let mut row0 = 0;
            for &p in parts {
                let v = &self.nodes[p.0].value;
                for r in 0..v.rows() {
                    out.row_mut(row0 + r).copy_from_slice(v.row(r));
                }
                row0 += v.rows();
            }
        } else {
            let rows = shape[0];
            let mut col0 = 0;
            for &p in parts {
                let v = &self.nodes[p.0].value;
                let w = v.cols();
                for r in 0..rows {
                    out.row_mut(r)[col0..col0 + w].copy_from_slice(v.row(r));
                }
                col0 += w;
            }
        }
        Ok(self.push(
            out,
            Op::Concat {
                parts: parts.to_vec(),
                axis,
            },
        ))
    }

    /// Contiguous slice `start..start+len` along `axis` of a rank-2 input.
    pub fn narrow(&mut self, input: Var, axis: usize, start: usize, len: usize) -> Result<Var> {
        let s = self.shape(input).to_vec();
        if s.len() != 2 || axis > 1 {
            return Err(AutodiffError::BadAxis {
                op: "narrow",
                axis,
                shape: s,
            });
        }
        if start + len > s[axis] {
            return Err(AutodiffError::BadIndex {
                op: "narrow",
                index: start + len,
                len: s[axis],
            });
        }
        let v = &self.nodes[input.0].value;
        let value = if axis == 0 {
            let mut out = Data::zeros(&[len, s[1]]);
            for r in 0..len {
                out.row_mut(r).copy_from_slice(v.row(start + r));
            }
            out
        } else {
            let mut out = Data::zeros(&[s[0], len]);
            for r in 0..s[0] {
                out.row_mut(r).copy_from_slice(&v.row(r)[start..start + len]);
            }
            out
        };
        Ok(self.push(value, Op::Narrow { input, axis, start }))
    }

    pub fn reshape(&mut self, input: Var, shape: &[usize]) -> Result<Var> {
        let len: usize = shape.iter().product();
        if len != self.nodes[input.0].value.len() {
            return Err(AutodiffError::ShapeMismatch {
                op: "reshape",
                lhs: self.shape(input).to_vec(),
                rhs: shape.to_vec(),
            });
        }
        let value = self.nodes[input.0].value.reshaped(shape);
        Ok(self.push(value, Op::Reshape(input)))
    }

    /// Row-wise softmax over the last dimension of a rank-2 input.
    ///
    /// `-inf` logits map to exactly zero probability.
    pub fn softmax(&mut self, input: Var) -> Result<Var> {
        if self.shape(input).len() != 2 {
            return Err(AutodiffError::BadRank {
                op: "softmax",
                expected: 2,
                shape: self.shape(input).to_vec(),
            });
        }
        let v = &self.nodes[input.0].value;
        let mut out = v.clone();
        for r in 0..v.rows() {
            let row = out.row_mut(r);
            let max = row.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
            let mut sum = T::zero();
            for x in row.iter_mut() {
                *x = (*x - max).exp();
                sum += *x;
            }
            for x in row.iter_mut() {
                *x = *x / sum;
            }
        }
        Ok(self.push(out, Op::Softmax(input)))
    }

    pub fn tanh(&mut self, input: Var) -> Var {
        let value = self.nodes[input.0].value.map(|v| v.tanh());
        self.push(value, Op::Tanh(input))
    }

    pub fn relu(&mut self, input: Var) -> Var {
        let value = self.nodes[input.0].value.map(|v| v.max(T::zero()));
        self.push(value, Op::Relu(input))
    }

    pub fn log(&mut self, input: Var) -> Var {
        let value = self.nodes[input.0].value.map(|v| v.ln());
        self.push(value, Op::Log(input))
    }

    /// Mean over rows of an `m x n` input, returning `1 x n`.
    pub fn mean_rows(&mut self, input: Var) -> Result<Var> {
        let s = self.shape(input).to_vec();
        if s.len() != 2 {
            return Err(AutodiffError::BadRank {
                op: "mean_rows",
                expected: 2,
                shape: s,
            });
        }
        let v = &self.nodes[input.0].value;
        let inv = T::one() / T::from_f64(s[0] as f64);
        let mut out = Data::zeros(&[1, s[1]]);
        for r in 0..s[0] {
            for (o, &x) in out.row_mut(0).iter_mut().zip(v.row(r)) {
                *o += x * inv;
            }
        }
        Ok(self.push(out, Op::MeanRows(input)))
    }

    /// Mean over all elements, returning a `1 x 1` scalar.
    pub fn mean_all(&mut self, input: Var) -> Var {
        let v = &self.nodes[input.0].value;
        let inv = T::one() / T::from_f64(v.len() as f64);
        let mut acc = T::zero();
        for &x in v.buf() {
            acc += x * inv;
        }
        self.push(Data::scalar(acc), Op::MeanAll(input))
    }

    /// Selects one element (flat index) as a `1 x 1` scalar.
    pub fn pick(&mut self, input: Var, index: usize) -> Result<Var> {
        let v = &self.nodes[input.0].value;
        if index >= v.len() {
            return Err(AutodiffError::BadIndex {
                op: "pick",
                index,
                len: v.len(),
            });
        }
        let value = Data::scalar(v.buf()[index]);
        Ok(self.push(value, Op::Pick(input, index)))
    }

    /// Row lookup: output row `i` is input row `indices[i]`.
    pub fn gather_rows(&mut self, input: Var, indices: &[usize]) -> Result<Var> {
        let s = self.shape(input).to_vec();
        if s.len() != 2 {
            return Err(AutodiffError::BadRank {
                op: "gather_rows",
                expected: 2,
                shape: s,
            });
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= s[0]) {
            return Err(AutodiffError::BadIndex {
                op: "gather_rows",
                index: bad,
                len: s[0],
            });
        }
        let v = &self.nodes[input.0].value;
        let mut out = Data::zeros(&[indices.len(), s[1]]);
        for (r, &i) in indices.iter().enumerate() {
            out.row_mut(r).copy_from_slice(v.row(i));
        }
        Ok(self.push(
            out,
            Op::GatherRows {
                input,
                indices: indices.to_vec(),
            },
        ))
    }

    /// Replaces elements where `mask` is true with `fill`. Gradients do not
    /// flow through masked positions.
    pub fn masked_fill(&mut self, input: Var, mask: &[bool], fill: T) -> Result<Var> {
        let v = &self.nodes[input.0].value;
        if mask.len() != v.len() {
            return Err(AutodiffError::MaskLength {
                op: "masked_fill",
                mask: mask.len(),
                len: v.len(),
            });
        }
        let buf = v
            .buf()
            .iter()
            .zip(mask)
            .map(|(&x, &m)| if m { fill } else { x })
            .collect();
        let value = Data::from_vec(v.shape(), buf);
        Ok(self.push(
            value,
            Op::MaskedFill {
                input,
                mask: mask.to_vec(),
            },
        ))
    }

    /// Row-wise layer normalization with learned per-feature gain and bias
    /// (`1 x n` each). Batch-independent: each row normalizes on its own.
    pub fn layer_norm(&mut self, input: Var, gain: Var, bias: Var) -> Result<Var> {
        let s = self.shape(input).to_vec();
        let n = s[1];
        for (name, v) in [("gain", gain), ("bias", bias)] {
            let sv = self.shape(v);
            if sv != [1, n] {
                let _ = name;
                return Err(AutodiffError::ShapeMismatch {
                    op: "layer_norm",
                    lhs: s.to_vec(),
                    rhs: sv.to_vec(),
                });
            }
        }
        let eps = T::from_f64(1e-5);
        let x = &self.nodes[input.0].value;
        let g = self.nodes[gain.0].value.clone();
        let b = self.nodes[bias.0].value.clone();
        let mut out = Data::zeros(&s);
        let inv_n = T::one() / T::from_f64(n as f64);
        for r in 0..s[0] {
            let row = x.row(r);
            let mut mean = T::zero();
            for &v in row {
                mean += v * inv_n;
            }
            let mut var = T::zero();
            for &v in row {
                let d = v - mean;
                var += d * d * inv_n;
            }
            let inv_std = T::one() / (var + eps).sqrt();
            for (j, o) in out.row_mut(r).iter_mut().enumerate() {
                *o = (row[j] - mean) * inv_std * g.buf()[j] + b.buf()[j];
            }
        }
        Ok(self.push(
            out,
            Op::LayerNorm {
                input,
                gain,
                bias,
                eps,
            },
        ))
    }

    /// 2D convolution: input `(C, H, W)`, weight `(O, C, KH, KW)`, bias
    /// `(O)`; zero padding `pad`, square stride.
    pub fn conv2d(&mut self, input: Var, weight: Var, bias: Var, stride: usize, pad: usize) -> Result<Var> {
        let si = self.shape(input).to_vec();
        let sw = self.shape(weight).to_vec();
        let sb = self.shape(bias).to_vec();
        if si.len() != 3 || sw.len() != 4 || si[0] != sw[1] {
            return Err(AutodiffError::ShapeMismatch {
                op: "conv2d",
                lhs: si,
                rhs: sw,
            });
        }
        if sb != [sw[0]] {
            return Err(AutodiffError::ShapeMismatch {
                op: "conv2d",
                lhs: sw,
                rhs: sb,
            });
        }
        let (c_in, h, w) = (si[0], si[1], si[2]);
        let (c_out, kh, kw) = (sw[0], sw[2], sw[3]);
        let h_out = (h + 2 * pad - kh) / stride + 1;
        let w_out = (w + 2 * pad - kw) / stride + 1;
        let x = &self.nodes[input.0].value;
        let wt = &self.nodes[weight.0].value;
        let bs = &self.nodes[bias.0].value;
        let mut out = Data::zeros(&[c_out, h_out, w_out]);
        {
            let ob = out.buf_mut();
            for o in 0..c_out {
                for oy in 0..h_out {
                    for ox in 0..w_out {
                        let mut acc = bs.buf()[o];
                        for c in 0..c_in {
                            for ky in 0..kh {
                                let iy = (oy * stride + ky) as isize - pad as isize;
                                if iy < 0 || iy >= h as isize {
                                    continue;
                                }
                                for kx in 0..kw {
                                    let ix = (ox * stride + kx) as isize - pad as isize;
                                    if ix < 0 || ix >= w as isize {
                                        continue;
                                    }
                                    let xi = (c * h + iy as usize) * w + ix as usize;
                                    let wi = ((o * c_in + c) * kh + ky) * kw + kx;
                                    acc += x.buf()[xi] * wt.buf()[wi];
                                }
                            }
                        }
                        ob[(o * h_out + oy) * w_out + ox] = acc;
                    }
                }
            }
        }
        Ok(self.push(
            out,
            Op::Conv2d {
                input,
                weight,
                bias,
                stride,
                pad,
            },
        ))
    }

    // ---- backward -----------------------------------------------------

    /// Walks the tape in reverse from `loss`, accumulating `d(loss)/d(leaf)`
    /// into the persistent gradient of every reachable leaf. Intermediate
    /// adjoints live only for the duration of the call, so repeated calls
    /// add another full gradient (until [`Tape::zero_grads`]).
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.nodes[loss.0].value.len() != 1 {
            return Err(AutodiffError::NonScalarLoss(self.shape(loss).to_vec()));
        }
        let mut adjoint: Vec<Option<Data<T>>> = Vec::new();
        adjoint.resize_with(loss.0 + 1, || None);
        adjoint[loss.0] = Some(Data::from_vec(self.shape(loss), vec![T::one()]));

        let accumulate = |adjoint: &mut Vec<Option<Data<T>>>, v: Var, delta: Data<T>| {
            match &mut adjoint[v.0] {
                Some(g) => g.add_assign(&delta),
                slot @ None => *slot = Some(delta),
            }
        };

        for id in (0..=loss.0).rev() {
            let Some(g) = adjoint[id].take() else {
                continue;
            };
            if matches!(self.nodes[id].op, Op::Leaf) {
                match &mut self.nodes[id].grad {
                    Some(total) => total.add_assign(&g),
                    slot @ None => *slot = Some(g),
                }
                continue;
            }
            match &self.nodes[id].op {
                Op::Leaf => unreachable!(),
                Op::Matmul(a, b) => {
                    let (a, b) = (*a, *b);
                    let da = Data::mm_transpose_other(&g, &self.nodes[b.0].value);
                    let db = self.nodes[a.0].value.mm_transpose_self(&g);
                    accumulate(&mut adjoint, a, da);
                    accumulate(&mut adjoint, b, db);
                }
                Op::Add(a, b) => {
                    let (a, b) = (*a, *b);
                    accumulate(&mut adjoint, a, g.clone());
                    accumulate(&mut adjoint, b, g);
                }
                Op::Sub(a, b) => {
                    let (a, b) = (*a, *b);
                    accumulate(&mut adjoint, a, g.clone());
                    accumulate(&mut adjoint, b, g.map(|v| -v));
                }
                Op::Mul(a, b) => {
                    let (a, b) = (*a, *b);
                    let da = {
                        let vb = &self.nodes[b.0].value;
                        let buf = g.buf().iter().zip(vb.buf()).map(|(&x, &y)| x * y).collect();
                        Data::from_vec(g.shape(), buf)
                    };
                    let db = {
                        let va = &self.nodes[a.0].value;
                        let buf = g.buf().iter().zip(va.buf()).map(|(&x, &y)| x * y).collect();
                        Data::from_vec(g.shape(), buf)
                    };
                    accumulate(&mut adjoint, a, da);
                    accumulate(&mut adjoint, b, db);
                }
                Op::AddRow(a, b) => {
                    let (a, b) = (*a, *b);
                    let n = g.cols();
                    let mut db = Data::zeros(&[1, n]);
                    for r in 0..g.rows() {
                        for (o, &x) in db.row_mut(0).iter_mut().zip(g.row(r)) {
                            *o += x;
                        }
                    }
                    accumulate(&mut adjoint, a, g);
                    accumulate(&mut adjoint, b, db);
                }
                Op::Scale(a, c) => {
                    let (a, c) = (*a, *c);
                    accumulate(&mut adjoint, a, g.map(|v| v * c));
                }
                Op::Transpose(a) => {
                    let a = *a;
                    accumulate(&mut adjoint, a, g.transposed());
                }
                Op::Concat { parts, axis } => {
                    let parts = parts.clone();
                    let axis = *axis;
                    let mut offset = 0;
                    for p in parts {
                        let extent = self.shape(p)[axis];
                        let dp = if axis == 0 {
                            let cols = g.cols();
                            let mut out = Data::zeros(&[extent, cols]);
                            for r in 0..extent {
                                out.row_mut(r).copy_from_slice(g.row(offset + r));
                            }
                            out
                        } else {
                            let rows = g.rows();
                            let mut out = Data::zeros(&[rows, extent]);
                            for r in 0..rows {
                                out.row_mut(r)
                                    .copy_from_slice(&g.row(r)[offset..offset + extent]);
                            }
                            out
                        };
                        offset += extent;
                        accumulate(&mut adjoint, p, dp);
                    }
                }
                Op::Narrow { input, axis, start } => {
                    let (input, axis, start) = (*input, *axis, *start);
                    let mut dp = Data::zeros(self.shape(input));
                    if axis == 0 {
                        for r in 0..g.rows() {
                            dp.row_mut(start + r).copy_from_slice(g.row(r));
                        }
                    } else {
                        let len = g.cols();
                        for r in 0..g.rows() {
                            dp.row_mut(r)[start..start + len].copy_from_slice(g.row(r));
                        }
                    }
                    accumulate(&mut adjoint, input, dp);
                }
                Op::Reshape(a) => {
                    let a = *a;
                    let dp = g.reshaped(self.shape(a));
                    accumulate(&mut adjoint, a, dp);
                }
                Op::Softmax(a) => {
                    let a = *a;
                    let y = &self.nodes[id].value;
                    let mut dp = Data::zeros(y.shape());
                    for r in 0..y.rows() {
                        let yr = y.row(r);
                        let gr = g.row(r);
                        let mut dot = T::zero();
                        for (&yi, &gi) in yr.iter().zip(gr) {
                            dot += yi * gi;
                        }
                        for (j, o) in dp.row_mut(r).iter_mut().enumerate() {
                            *o = yr[j] * (gr[j] - dot);
                        }
                    }
                    accumulate(&mut adjoint, a, dp);
                }
                Op::Tanh(a) => {
                    let a = *a;
                    let y = &self.nodes[id].value;
                    let buf = g
                        .buf()
                        .iter()
                        .zip(y.buf())
                        .map(|(&gi, &yi)| gi * (T::one() - yi * yi))
                        .collect();
                    let dp = Data::from_vec(g.shape(), buf);
                    accumulate(&mut adjoint, a, dp);
                }
                Op::Relu(a) => {
                    let a = *a;
                    let x = &self.nodes[a.0].value;
                    let buf = g
                        .buf()
                        .iter()
                        .zip(x.buf())
                        .map(|(&gi, &xi)| if xi > T::zero() { gi } else { T::zero() })
                        .collect();
                    let dp = Data::from_vec(g.shape(), buf);
                    accumulate(&mut adjoint, a, dp);
                }
                Op::Log(a) => {
                    let a = *a;
                    let x = &self.nodes[a.0].value;
                    let buf = g
                        .buf()
                        .iter()
                        .zip(x.buf())
                        .map(|(&gi, &xi)| gi / xi)
                        .collect();
                    let dp = Data::from_vec(g.shape(), buf);
                    accumulate(&mut adjoint, a, dp);
                }
                Op::MeanRows(a) => {
                    let a = *a;
                    let shape = self.shape(a).to_vec();
                    let inv = T::one() / T::from_f64(shape[0] as f64);
                    let mut dp = Data::zeros(&shape);
                    for r in 0..shape[0] {
                        for (o, &x) in dp.row_mut(r).iter_mut().zip(g.row(0)) {
                            *o = x * inv;
                        }
                    }
                    accumulate(&mut adjoint, a, dp);
                }
                Op::MeanAll(a) => {
                    let a = *a;
                    let shape = self.shape(a).to_vec();
                    let len: usize = shape.iter().product();
                    let v = g.first() / T::from_f64(len as f64);
                    let dp = Data::from_vec(&shape, vec![v; len]);
                    accumulate(&mut adjoint, a, dp);
                }
                Op::Pick(a, index) => {
                    let (a, index) = (*a, *index);
                    let mut dp = Data::zeros(self.shape(a));
                    dp.buf_mut()[index] = g.first();
                    accumulate(&mut adjoint, a, dp);
                }
                Op::GatherRows { input, indices } => {
                    let input = *input;
                    let indices = indices.clone();
                    let mut dp = Data::zeros(self.shape(input));
                    for (r, &i) in indices.iter().enumerate() {
                        for (o, &x) in dp.row_mut(i).iter_mut().zip(g.row(r)) {
                            *o += x;
                        }
                    }
                    accumulate(&mut adjoint, input, dp);
                }
                Op::MaskedFill { input, mask } => {
                    let input = *input;
                    let mask = mask.clone();
                    let buf = g
                        .buf()
                        .iter()
                        .zip(&mask)
                        .map(|(&gi, &m)| if m { T::zero() } else { gi })
                        .collect();
                    let dp = Data::from_vec(g.shape(), buf);
                    accumulate(&mut adjoint, input, dp);
                }
                Op::LayerNorm {
                    input,
                    gain,
                    bias,
                    eps,
                } => {
                    let (input, gain, bias, eps) = (*input, *gain, *bias, *eps);
                    let x = self.nodes[input.0].value.clone();
                    let gn = self.nodes[gain.0].value.clone();
                    let (rows, n) = (x.rows(), x.cols());
                    let inv_n = T::one() / T::from_f64(n as f64);
                    let mut dx = Data::zeros(x.shape());
                    let mut dgain = Data::zeros(&[1, n]);
                    let mut dbias = Data::zeros(&[1, n]);
                    for r in 0..rows {
                        let row = x.row(r);
                        let gr = g.row(r);
                        let mut mean = T::zero();
                        for &v in row {
                            mean += v * inv_n;
                        }
                        let mut var = T::zero();
                        for &v in row {
                            let d = v - mean;
                            var += d * d * inv_n;
                        }
                        let inv_std = T::one() / (var + eps).sqrt();
                        // xhat and dxhat
                        let xhat: Vec<T> = row.iter().map(|&v| (v - mean) * inv_std).collect();
                        let dxhat: Vec<T> = gr
                            .iter()
                            .zip(gn.buf())
                            .map(|(&gi, &gg)| gi * gg)
                            .collect();
                        let mut mean_dxhat = T::zero();
                        let mut mean_dxhat_xhat = T::zero();
                        for j in 0..n {
                            mean_dxhat += dxhat[j] * inv_n;
                            mean_dxhat_xhat += dxhat[j] * xhat[j] * inv_n;
                        }
                        for j in 0..n {
                            dx.row_mut(r)[j] =
                                inv_std * (dxhat[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
                            dgain.row_mut(0)[j] += gr[j] * xhat[j];
                            dbias.row_mut(0)[j] += gr[j];
                        }
                    }
                    accumulate(&mut adjoint, input, dx);
                    accumulate(&mut adjoint, gain, dgain);
                    accumulate(&mut adjoint, bias, dbias);
                }
                Op::Conv2d {
                    input,
                    weight,
                    bias,
                    stride,
                    pad,
                } => {
                    let (input, weight, bias) = (*input, *weight, *bias);
                    let (stride, pad) = (*stride, *pad);
                    let x = self.nodes[input.0].value.clone();
                    let wt = self.nodes[weight.0].value.clone();
                    let (c_in, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2]);
                    let (c_out, kh, kw) = (wt.shape()[0], wt.shape()[2], wt.shape()[3]);
                    let (h_out, w_out) = (g.shape()[1], g.shape()[2]);
                    let mut dx = Data::zeros(x.shape());
                    let mut dw = Data::zeros(wt.shape());
                    let mut db = Data::zeros(&[c_out]);
                    for o in 0..c_out {
                        for oy in 0..h_out {
                            for ox in 0..w_out {
                                let gi = g.buf()[(o * h_out + oy) * w_out + ox];
                                db.buf_mut()[o] += gi;
                                for c in 0..c_in {
                                    for ky in 0..kh {
                                        let iy = (oy * stride + ky) as isize - pad as isize;
                                        if iy < 0 || iy >= h as isize {
                                            continue;
                                        }
                                        for kx in 0..kw {
                                            let ix = (ox * stride + kx) as isize - pad as isize;
                                            if ix < 0 || ix >= w as isize {
                                                continue;
                                            }
                                            let xi = (c * h + iy as usize) * w + ix as usize;
                                            let wi = ((o * c_in + c) * kh + ky) * kw + kx;
                                            dx.buf_mut()[xi] += gi * wt.buf()[wi];
                                            dw.buf_mut()[wi] += gi * x.buf()[xi];
                                        }
                                    }
                                }
                            }
                        }
                    }
                    accumulate(&mut adjoint, input, dx);
                    accumulate(&mut adjoint, weight, dw);
                    accumulate(&mut adjoint, bias, db);
                }
            }
        }
        Ok(())
    }
}
