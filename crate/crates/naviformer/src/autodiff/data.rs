//! Dense row-major buffers with the handful of kernels the tape needs.

use super::scalar::Scalar;

/// A dense n-dimensional array in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Data<T> {
    shape: Vec<usize>,
    buf: Vec<T>,
}

impl<T: Scalar> Data<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Data {
            shape: shape.to_vec(),
            buf: vec![T::zero(); len],
        }
    }

    pub fn from_vec(shape: &[usize], buf: Vec<T>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            buf.len(),
            "buffer length must match shape"
        );
        Data {
            shape: shape.to_vec(),
            buf,
        }
    }

    pub fn scalar(v: T) -> Self {
        Data {
            shape: vec![1, 1],
            buf: vec![v],
        }
    }

    /// A 1 x n row vector.
    pub fn row_vec(values: &[T]) -> Self {
        Data {
            shape: vec![1, values.len()],
            buf: values.to_vec(),
        }
    }

    pub fn from_f64_slice(shape: &[usize], values: &[f64]) -> Self {
        Data::from_vec(shape, values.iter().map(|&v| T::from_f64(v)).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn buf(&self) -> &[T] {
        &self.buf
    }

    pub fn buf_mut(&mut self) -> &mut [T] {
        &mut self.buf
    }

    pub fn into_buf(self) -> Vec<T> {
        self.buf
    }

    /// Rows of a rank-2 array.
    pub fn rows(&self) -> usize {
        debug_assert_eq!(self.rank(), 2);
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        debug_assert_eq!(self.rank(), 2);
        self.shape[1]
    }

    pub fn row(&self, i: usize) -> &[T] {
        let n = self.cols();
        &self.buf[i * n..(i + 1) * n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        let n = self.cols();
        &mut self.buf[i * n..(i + 1) * n]
    }

    pub fn first(&self) -> T {
        self.buf[0]
    }

    pub fn reshaped(&self, shape: &[usize]) -> Data<T> {
        Data::from_vec(shape, self.buf.clone())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Data<T> {
        Data {
            shape: self.shape.clone(),
            buf: self.buf.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self (m x k) * b (k x n)`.
    pub fn mm(&self, b: &Data<T>) -> Data<T> {
        let (m, k) = (self.shape[0], self.shape[1]);
        let n = b.shape[1];
        debug_assert_eq!(k, b.shape[0]);
        let mut out = vec![T::zero(); m * n];
        for i in 0..m {
            let a_row = &self.buf[i * k..(i + 1) * k];
            let o_row = &mut out[i * n..(i + 1) * n];
            for (kk, &a) in a_row.iter().enumerate() {
                let b_row = &b.buf[kk * n..(kk + 1) * n];
                for j in 0..n {
                    o_row[j] += a * b_row[j];
                }
            }
        }
        Data::from_vec(&[m, n], out)
    }

    /// `self^T (k x m)^T=(m x k)... self is (m x k); returns self^T * g = (k x n)`
    /// for `g (m x n)`.
    pub fn mm_transpose_self(&self, g: &Data<T>) -> Data<T> {
        let (m, k) = (self.shape[0], self.shape[1]);
        let n = g.shape[1];
        debug_assert_eq!(m, g.shape[0]);
        let mut out = vec![T::zero(); k * n];
        for i in 0..m {
            let a_row = &self.buf[i * k..(i + 1) * k];
            let g_row = &g.buf[i * n..(i + 1) * n];
            for (kk, &a) in a_row.iter().enumerate() {
                let o_row = &mut out[kk * n..(kk + 1) * n];
                for j in 0..n {
                    o_row[j] += a * g_row[j];
                }
            }
        }
        Data::from_vec(&[k, n], out)
    }

    /// `g (m x n) * b^T` for `b (k x n)`; returns `(m x k)`.
    pub fn mm_transpose_other(g: &Data<T>, b: &Data<T>) -> Data<T> {
        let (m, n) = (g.shape[0], g.shape[1]);
        let k = b.shape[0];
        debug_assert_eq!(n, b.shape[1]);
        let mut out = vec![T::zero(); m * k];
        for i in 0..m {
            let g_row = &g.buf[i * n..(i + 1) * n];
            let o_row = &mut out[i * k..(i + 1) * k];
            for (kk, o) in o_row.iter_mut().enumerate() {
                let b_row = &b.buf[kk * n..(kk + 1) * n];
                let mut acc = T::zero();
                for j in 0..n {
                    acc += g_row[j] * b_row[j];
                }
                *o = acc;
            }
        }
        Data::from_vec(&[m, k], out)
    }

    pub fn transposed(&self) -> Data<T> {
        let (m, n) = (self.shape[0], self.shape[1]);
        let mut out = vec![T::zero(); m * n];
        for i in 0..m {
            for j in 0..n {
                out[j * m + i] = self.buf[i * n + j];
            }
        }
        Data::from_vec(&[n, m], out)
    }

    pub fn add_assign(&mut self, other: &Data<T>) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, &b) in self.buf.iter_mut().zip(other.buf.iter()) {
            *a += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_shapes_and_values() {
        let a = Data::<f64>::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = Data::<f64>::from_vec(&[3, 2], vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = a.mm(&b);
        assert_eq!(c.shape(), &[2, 2]);
        assert_eq!(c.buf(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn transpose_variants_agree_with_explicit_transpose() {
        let a = Data::<f64>::from_vec(&[2, 3], vec![1.0, -2.0, 3.0, 0.5, 5.0, -6.0]);
        let g = Data::<f64>::from_vec(&[2, 4], vec![1.0, 0.0, 2.0, -1.0, 3.0, 1.0, 0.0, 2.0]);
        let expect = a.transposed().mm(&g);
        assert_eq!(a.mm_transpose_self(&g), expect);

        let b = Data::<f64>::from_vec(&[4, 3], vec![1.0; 12]);
        let g2 = Data::<f64>::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let expect2 = g2.mm(&b.transposed());
        assert_eq!(Data::mm_transpose_other(&g2, &b), expect2);
    }
}
