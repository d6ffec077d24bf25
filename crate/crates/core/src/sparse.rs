//! Compressed sparse row matrices, just enough for the coupling operators.

use rayon::prelude::*;

/// Rows below this count are multiplied sequentially.
const PAR_ROWS: usize = 8192;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indptr[r + 1] += 1;
            indices.push(c as u32);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        };
        m.drop_zeros();
        m
    }

    /// Builds directly from per-row entry lists already sorted by column.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        indptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for row in &rows {
            for &(c, v) in row {
                debug_assert!((c as usize) < cols);
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            rows: rows.len(),
            cols,
            indptr,
            indices,
            values,
        }
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != 0.0 {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, val) = self.row(r);
        match idx.binary_search(&(c as u32)) {
            Ok(k) => val[k],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0u32; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k] as usize;
                let slot = next[c];
                indices[slot] = r as u32;
                values[slot] = self.values[k];
                next[c] += 1;
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
        }
    }

    #[inline]
    fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in self.indptr[r]..self.indptr[r + 1] {
            acc += self.values[k] * x[self.indices[k] as usize];
        }
        acc
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        if self.rows >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, out)| *out = self.row_dot(r, x));
        } else {
            for (r, out) in y.iter_mut().enumerate() {
                *out = self.row_dot(r, x);
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `y += s · A x`.
    pub fn matvec_add(&self, s: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        if self.rows >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, out)| *out += s * self.row_dot(r, x));
        } else {
            for (r, out) in y.iter_mut().enumerate() {
                *out += s * self.row_dot(r, x);
            }
        }
    }

    /// Sparse product `A B`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut rows = Vec::with_capacity(self.rows);
        let mut acc = vec![0.0; other.cols];
        let mut touched: Vec<u32> = Vec::new();
        let mut seen = vec![false; other.cols];
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let mid = self.indices[k] as usize;
                let a = self.values[k];
                let (idx, val) = other.row(mid);
                for (&c, &b) in idx.iter().zip(val) {
                    if !seen[c as usize] {
                        seen[c as usize] = true;
                        touched.push(c);
                    }
                    acc[c as usize] += a * b;
                }
            }
            touched.sort_unstable();
            let mut row = Vec::with_capacity(touched.len());
            for &c in &touched {
                let v = acc[c as usize];
                if v != 0.0 {
                    row.push((c, v));
                }
                acc[c as usize] = 0.0;
                seen[c as usize] = false;
            }
            touched.clear();
            rows.push(row);
        }
        Self::from_rows(other.cols, rows)
    }

    /// Σ_c |a_rc| per row.
    pub fn row_abs_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).1.iter().map(|v| v.abs()).sum())
            .collect()
    }

    /// Σ_r |a_rc| per column.
    pub fn col_abs_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (&c, &v) in self.indices.iter().zip(&self.values) {
            out[c as usize] += v.abs();
        }
        out
    }

    /// Scales row `r` by `s[r]` in place.
    pub fn scale_rows(&mut self, s: &[f64]) {
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                self.values[k] *= s[r];
            }
        }
    }

    /// Scales column `c` by `s[c]` in place.
    pub fn scale_cols(&mut self, s: &[f64]) {
        for (c, v) in self.indices.iter().zip(self.values.iter_mut()) {
            *v *= s[*c as usize];
        }
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let rows = keep
            .iter()
            .map(|&r| {
                let (idx, val) = self.row(r);
                idx.iter().copied().zip(val.iter().copied()).collect()
            })
            .collect();
        Self::from_rows(self.cols, rows)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (r, row) in out.iter_mut().enumerate() {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                row[c as usize] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_transpose() {
        let m = SparseMatrix::from_triplets(
            2,
            3,
            vec![(0, 2, 1.0), (1, 0, 2.0), (0, 2, 3.0), (1, 1, 0.0), (0, 0, -1.0)],
        );
        assert_eq!(m.to_dense(), vec![vec![-1.0, 0.0, 4.0], vec![2.0, 0.0, 0.0]]);
        assert_eq!(m.nnz(), 3);
        let t = m.transpose();
        assert_eq!(t.to_dense(), vec![vec![-1.0, 2.0], vec![0.0, 0.0], vec![4.0, 0.0]]);
        assert_eq!(m.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 2.0]);
        assert_eq!(t.matvec(&[1.0, 1.0]), vec![1.0, 0.0, 4.0]);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]);
        let b = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 4.0), (1, 0, -2.0), (1, 1, 1.0)]);
        assert_eq!(a.matmul(&b).to_dense(), vec![vec![0.0, 2.0], vec![-6.0, 3.0]]);
        assert_eq!(a.matmul(&b).nnz(), 3);
    }

    #[test]
    fn abs_sums_and_selection() {
        let a = SparseMatrix::from_triplets(3, 2, vec![(0, 0, -1.0), (1, 1, 2.0), (2, 0, 3.0)]);
        assert_eq!(a.row_abs_sums(), vec![1.0, 2.0, 3.0]);
        assert_eq!(a.col_abs_sums(), vec![4.0, 2.0]);
        assert_eq!(a.select_rows(&[2, 0]).to_dense(), vec![vec![3.0, 0.0], vec![-1.0, 0.0]]);
    }
}
