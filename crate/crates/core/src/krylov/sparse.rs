//! Compressed sparse row matrices.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Coordinate-format accumulator. Duplicates are summed on conversion.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Triplets { nrows, ncols, ..Default::default() }
    }

    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        self.rows.push(r);
        self.cols.push(c);
        self.vals.push(v);
    }

    pub fn append(&mut self, other: &mut Triplets) {
        self.rows.append(&mut other.rows);
        self.cols.append(&mut other.cols);
        self.vals.append(&mut other.vals);
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_matrix(&vec![1.0; n])
    }

    pub fn diagonal_matrix(d: &[f64]) -> Self {
        let n = d.len();
        CsrMatrix { nrows: n, ncols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), data: d.to_vec() }
    }

    /// Builds a matrix whose entries are summed in insertion order, so the
    /// result does not depend on anything but the order of the triplets.
    /// Exact zeros that survive summation are kept as structural entries.
    pub fn from_triplets(t: &Triplets) -> Self {
        let n = t.len();
        // stable counting sort by row
        let mut count = vec![0usize; t.nrows + 1];
        for &r in &t.rows {
            count[r + 1] += 1;
        }
        for i in 0..t.nrows {
            count[i + 1] += count[i];
        }
        let mut order = vec![0usize; n];
        let mut next = count.clone();
        for (k, &r) in t.rows.iter().enumerate() {
            order[next[r]] = k;
            next[r] += 1;
        }
        let mut indptr = vec![0usize; t.nrows + 1];
        let mut indices = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n);
        let mut row_buf: Vec<usize> = Vec::new();
        for r in 0..t.nrows {
            row_buf.clear();
            row_buf.extend_from_slice(&order[count[r]..count[r + 1]]);
            row_buf.sort_by_key(|&k| t.cols[k]);
            let mut last = usize::MAX;
            for &k in &row_buf {
                if t.cols[k] == last {
                    *data.last_mut().unwrap() += t.vals[k];
                } else {
                    last = t.cols[k];
                    indices.push(last);
                    data.push(t.vals[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        CsrMatrix { nrows: t.nrows, ncols: t.ncols, indptr, indices, data }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let mut t = Triplets::new(rows.len(), rows.first().map_or(0, Vec::len));
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push(i, j, v);
                }
            }
        }
        t.to_csr()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out[i][self.indices[k]] += self.data[k];
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, val) = self.row(i);
        match idx.binary_search(&j) {
            Ok(k) => val[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            *yi = s;
        }
    }

    /// `y += alpha A x`.
    pub fn matvec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            *yi += alpha * s;
        }
    }

    /// `y += alpha A^T x`.
    pub fn matvec_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for i in 0..self.nrows {
            let xi = alpha * x[i];
            if xi != 0.0 {
                for k in self.indptr[i]..self.indptr[i + 1] {
                    y[self.indices[k]] += self.data[k] * xi;
                }
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let mut next = count.clone();
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                indices[next[j]] = i;
                data[next[j]] = self.data[k];
                next[j] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, indptr: count, indices, data }
    }

    /// Sparse product `A B`.
    pub fn matmul(&self, b: &CsrMatrix) -> Result<CsrMatrix> {
        if self.ncols != b.nrows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.nrows, self.ncols, b.nrows, b.ncols
            )));
        }
        let mut acc = vec![0.0; b.ncols];
        let mut mark = vec![usize::MAX; b.ncols];
        let mut cols: Vec<usize> = Vec::new();
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for i in 0..self.nrows {
            cols.clear();
            for k in self.indptr[i]..self.indptr[i + 1] {
                let (a, r) = (self.data[k], self.indices[k]);
                for m in b.indptr[r]..b.indptr[r + 1] {
                    let j = b.indices[m];
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        cols.push(j);
                    }
                    acc[j] += a * b.data[m];
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                indices.push(j);
                data.push(acc[j]);
            }
            indptr[i + 1] = indices.len();
        }
        Ok(CsrMatrix { nrows: self.nrows, ncols: b.ncols, indptr, indices, data })
    }

    /// `alpha A + beta B` for equally sized matrices.
    pub fn add(&self, alpha: f64, b: &CsrMatrix, beta: f64) -> Result<CsrMatrix> {
        if self.nrows != b.nrows || self.ncols != b.ncols {
            return Err(Error::DimensionMismatch("matrix sum".into()));
        }
        let mut t = Triplets::new(self.nrows, self.ncols);
        for (m, s) in [(self, alpha), (b, beta)] {
            for i in 0..m.nrows {
                for k in m.indptr[i]..m.indptr[i + 1] {
                    t.push(i, m.indices[k], s * m.data[k]);
                }
            }
        }
        Ok(t.to_csr())
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    /// Scales row `i` by `r[i]` and column `j` by `c[j]`.
    pub fn scale_rows_cols(&mut self, r: &[f64], c: &[f64]) {
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                self.data[k] *= r[i] * c[self.indices[k]];
            }
        }
    }

    /// Zeroes the masked rows.
    pub fn zero_rows(&mut self, rows: &[bool]) {
        for i in 0..self.nrows {
            if rows[i] {
                self.data[self.indptr[i]..self.indptr[i + 1]].fill(0.0);
            }
        }
    }

    /// Zeroes the masked columns.
    pub fn zero_cols(&mut self, cols: &[bool]) {
        for k in 0..self.nnz() {
            if cols[self.indices[k]] {
                self.data[k] = 0.0;
            }
        }
    }

    /// Sets the diagonal entries of the masked rows, inserting them if absent.
    pub fn set_diagonal(&mut self, rows: &[bool], value: f64) {
        let mut t = Triplets::new(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                if !(rows[i] && i == j) {
                    t.push(i, j, self.data[k]);
                }
            }
            if rows[i] {
                t.push(i, i, value);
            }
        }
        *self = t.to_csr();
    }

    /// Drops explicitly stored zeros.
    pub fn prune(&mut self) {
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut w = 0;
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                if self.data[k] != 0.0 {
                    self.indices[w] = self.indices[k];
                    self.data[w] = self.data[k];
                    w += 1;
                }
            }
            indptr[i + 1] = w;
        }
        self.indices.truncate(w);
        self.data.truncate(w);
        self.indptr = indptr;
    }

    /// Rows and columns selected by the given index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut t = Triplets::new(rows.len(), cols.len());
        for (ri, &r) in rows.iter().enumerate() {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = col_map[self.indices[k]];
                if c != usize::MAX {
                    t.push(ri, c, self.data[k]);
                }
            }
        }
        t.to_csr()
    }

    /// Stacks blocks given as `(row offset, col offset, matrix, factor)`.
    pub fn from_blocks(nrows: usize, ncols: usize, blocks: &[(usize, usize, &CsrMatrix, f64)]) -> Self {
        let mut t = Triplets::new(nrows, ncols);
        for &(r0, c0, m, s) in blocks {
            for i in 0..m.nrows {
                for k in m.indptr[i]..m.indptr[i + 1] {
                    t.push(r0 + i, c0 + m.indices[k], s * m.data[k]);
                }
            }
        }
        t.to_csr()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.nrows).all(|i| {
            let (idx, val) = self.row(i);
            idx.iter().zip(val).all(|(&j, &v)| j == i || v == 0.0)
        })
    }

    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let file = std::fs::File::create(path).map_err(io)?;
        let mut w = std::io::BufWriter::new(file);
        writeln!(w, "%%MatrixMarket matrix coordinate real general").map_err(io)?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz()).map_err(io)?;
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                writeln!(w, "{} {} {:.17e}", i + 1, self.indices[k] + 1, self.data[k]).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_summed() {
        let mut t = Triplets::new(2, 3);
        t.push(1, 2, 1.0);
        t.push(0, 1, 2.0);
        t.push(1, 2, 3.0);
        t.push(1, 0, -1.0);
        let a = t.to_csr();
        assert_eq!(a.to_dense(), vec![vec![0.0, 2.0, 0.0], vec![-1.0, 0.0, 4.0]]);
        assert_eq!(a.indices, vec![1, 0, 2]);
    }

    #[test]
    fn transpose_and_products() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 4.0]]);
        let at = a.transpose();
        assert_eq!(at.to_dense(), vec![vec![1.0, 0.0], vec![2.0, 3.0], vec![0.0, 4.0]]);
        let p = a.matmul(&at).unwrap();
        assert_eq!(p.to_dense(), vec![vec![5.0, 6.0], vec![6.0, 25.0]]);
        let mut y = vec![1.0; 3];
        a.matvec_transpose_add(2.0, &[1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 11.0, 9.0]);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn diagonal_replacement() {
        let mut a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 3.0]]);
        a.zero_rows(&[false, true]);
        a.set_diagonal(&[false, true], 7.0);
        assert_eq!(a.to_dense(), vec![vec![1.0, 2.0], vec![0.0, 7.0]]);
        let s = a.submatrix(&[1], &[0, 1]);
        assert_eq!(s.to_dense(), vec![vec![0.0, 7.0]]);
    }

    proptest! {
        #[test]
        fn triplet_order_only_changes_summation_order(
            entries in proptest::collection::vec((0usize..6, 0usize..5, -10i32..10), 0..40)
        ) {
            let mut t = Triplets::new(6, 5);
            let mut dense = vec![vec![0.0; 5]; 6];
            for &(r, c, v) in &entries {
                t.push(r, c, v as f64);
                dense[r][c] += v as f64;
            }
            let a = t.to_csr();
            // integer data sums exactly in any order
            prop_assert_eq!(a.to_dense(), dense);
            let x: Vec<f64> = (0..5).map(|i| i as f64 - 2.0).collect();
            let y = a.mul_vec(&x);
            for i in 0..6 {
                let want: f64 = (0..5).map(|j| a.to_dense()[i][j] * x[j]).sum();
                prop_assert!((y[i] - want).abs() < 1e-12);
            }
            prop_assert_eq!(a.transpose().transpose(), a);
        }
    }
}
