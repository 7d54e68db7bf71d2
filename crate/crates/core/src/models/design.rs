//! Feature matrix stored as a per-column base value plus sparse deviations.
//!
//! Standardized one-hot columns take only two distinct values, so after
//! subtracting each column's most frequent value most entries vanish. Matrix
//! products then cost `O(nnz)` instead of `O(n p)`.

use ndarray::Array2;

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Design<T> {
    n: usize,
    p: usize,
    base: Vec<T>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<T>,
}

fn column_mode<T: Scalar>(mut col: Vec<T>) -> T {
    col.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let (mut best, mut best_len) = (T::zero(), 0usize);
    let mut i = 0;
    while i < col.len() {
        let mut j = i + 1;
        while j < col.len() && col[j] == col[i] {
            j += 1;
        }
        if j - i > best_len {
            best = col[i];
            best_len = j - i;
        }
        i = j;
    }
    best
}

impl<T: Scalar> Design<T> {
    pub fn new(x: &Array2<T>) -> Self {
        let (n, p) = x.dim();
        let base: Vec<T> = (0..p).map(|j| column_mode(x.column(j).to_vec())).collect();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in x.rows() {
            for (j, (&v, &b)) in row.iter().zip(&base).enumerate() {
                if v != b {
                    cols.push(j as u32);
                    vals.push(v - b);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            p,
            base,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn row(&self, i: usize) -> (&[u32], &[T]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    /// `out_i = x_i . w + offset`
    pub fn matvec(&self, w: &[T], offset: T, out: &mut [T]) {
        let base_dot: T = self.base.iter().zip(w).map(|(&b, &w)| b * w).sum::<T>() + offset;
        for (i, o) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = base_dot;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * w[c as usize];
            }
            *o = acc;
        }
    }

    /// `out_j = sum_i g_i x_ij`
    pub fn tmatvec(&self, g: &[T], out: &mut [T]) {
        let total: T = g.iter().copied().sum();
        for (o, &b) in out.iter_mut().zip(&self.base) {
            *o = b * total;
        }
        for (i, &gi) in g.iter().enumerate() {
            if gi == T::zero() {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c as usize] += gi * v;
            }
        }
    }

    /// Hidden pre-activations: `out[i*h + k] = sum_j w[k*p + j] x_ij + bias[k]`
    /// for a row-major `h x p` weight matrix.
    pub fn matmul(&self, w: &[T], bias: &[T], h: usize, out: &mut [T]) {
        let p = self.p;
        // transpose so that each input column is contiguous
        let mut wt = vec![T::zero(); p * h];
        for k in 0..h {
            for j in 0..p {
                wt[j * h + k] = w[k * p + j];
            }
        }
        let mut base_row = bias.to_vec();
        for (j, &b) in self.base.iter().enumerate() {
            if b != T::zero() {
                for (acc, &wv) in base_row.iter_mut().zip(&wt[j * h..(j + 1) * h]) {
                    *acc += b * wv;
                }
            }
        }
        for i in 0..self.n {
            let dst = &mut out[i * h..(i + 1) * h];
            dst.copy_from_slice(&base_row);
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let col = &wt[c as usize * h..(c as usize + 1) * h];
                for (acc, &wv) in dst.iter_mut().zip(col) {
                    *acc += v * wv;
                }
            }
        }
    }

    /// `out[k*p + j] = sum_i delta[i*h + k] x_ij`, the weight gradient of [`Design::matmul`].
    pub fn tmatmul(&self, delta: &[T], h: usize, out: &mut [T]) {
        let p = self.p;
        let mut totals = vec![T::zero(); h];
        let mut acc_t = vec![T::zero(); p * h];
        for i in 0..self.n {
            let d = &delta[i * h..(i + 1) * h];
            for (t, &dv) in totals.iter_mut().zip(d) {
                *t += dv;
            }
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let dst = &mut acc_t[c as usize * h..(c as usize + 1) * h];
                for (a, &dv) in dst.iter_mut().zip(d) {
                    *a += v * dv;
                }
            }
        }
        for k in 0..h {
            for j in 0..p {
                out[k * p + j] = acc_t[j * h + k] + self.base[j] * totals[k];
            }
        }
    }
}
