//! Compressed sparse row matrices.

/// Row-major compressed sparse matrix. Column indices within a row are
/// sorted and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix { n_rows, n_cols, indptr: vec![0; n_rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix { n_rows: n, n_cols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), values: vec![1.0; n] }
    }

    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut b = CsrBuilder::new(n_cols);
        let mut row = 0;
        let mut it = triplets.into_iter().peekable();
        while row < n_rows {
            while let Some(&(r, c, _)) = it.peek() {
                if r != row {
                    break;
                }
                let mut v = 0.0;
                while let Some(&(r2, c2, v2)) = it.peek() {
                    if r2 == r && c2 == c {
                        v += v2;
                        it.next();
                    } else {
                        break;
                    }
                }
                b.push(c, v);
            }
            b.finish_row();
            row += 1;
        }
        b.build()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut b = CsrBuilder::new(n_cols);
        for row in rows {
            for (c, &v) in row.iter().enumerate() {
                b.push(c, v);
            }
            b.finish_row();
        }
        b.build()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        out
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.indptr[r + 1] - self.indptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(i) => self.values[span.start + i],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[i] * x[self.indices[i]];
            }
            *out = acc;
        }
    }

    /// y = xᵀ A, i.e. Aᵀ x.
    pub fn mul_vec_transposed(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_rows);
        debug_assert_eq!(y.len(), self.n_cols);
        y.fill(0.0);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for i in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[i]] += self.values[i] * xr;
            }
        }
    }

    /// Multiplies row r by `scale[r]`.
    pub fn scale_rows(&mut self, scale: &[f64]) {
        for (r, &s) in scale.iter().enumerate().take(self.n_rows) {
            for v in &mut self.values[self.indptr[r]..self.indptr[r + 1]] {
                *v *= s;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                trip.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.n_cols, self.n_rows, trip)
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        self.diagonal().iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Incremental row-by-row construction.
#[derive(Debug)]
pub struct CsrBuilder {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrBuilder {
    pub fn new(n_cols: usize) -> Self {
        CsrBuilder { n_cols, indptr: vec![0], indices: Vec::new(), values: Vec::new() }
    }

    pub fn with_capacity(n_cols: usize, rows: usize, nnz: usize) -> Self {
        let mut indptr = Vec::with_capacity(rows + 1);
        indptr.push(0);
        CsrBuilder { n_cols, indptr, indices: Vec::with_capacity(nnz), values: Vec::with_capacity(nnz) }
    }

    /// Columns must be pushed in increasing order within a row; zeros are skipped.
    pub fn push(&mut self, col: usize, value: f64) {
        if value != 0.0 {
            debug_assert!(col < self.n_cols);
            self.indices.push(col);
            self.values.push(value);
        }
    }

    pub fn finish_row(&mut self) {
        self.indptr.push(self.indices.len());
    }

    pub fn build(self) -> CsrMatrix {
        CsrMatrix {
            n_rows: self.indptr.len() - 1,
            n_cols: self.n_cols,
            indptr: self.indptr,
            indices: self.indices,
            values: self.values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 1, 2.0), (1, 2, 0.5), (0, 0, 0.0)]);
        assert_eq!(m.to_dense(), vec![vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 1.5]]);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn products() {
        let d = vec![vec![1.0, 2.0], vec![0.0, 3.0], vec![4.0, 0.0]];
        let m = CsrMatrix::from_dense(&d);
        let mut y = vec![0.0; 3];
        m.mul_vec(&[1.0, -1.0], &mut y);
        assert_eq!(y, vec![-1.0, -3.0, 4.0]);
        let mut z = vec![0.0; 2];
        m.mul_vec_transposed(&[1.0, 1.0, 1.0], &mut z);
        assert_eq!(z, vec![5.0, 5.0]);
        assert_eq!(m.transpose().to_dense(), vec![vec![1.0, 0.0, 4.0], vec![2.0, 3.0, 0.0]]);
    }
}
