//! Minimal CSR matrix plus the faer-backed shifted factorization.

use faer::linalg::solvers::Solve;
use faer::sparse::{linalg::solvers::Lu, SparseColMat, Triplet};
use faer::MatMut;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from rows of `(column, value)` entries; duplicates are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

/// LU factorization of `A - shift·I`.
pub(crate) struct ShiftedSolver {
    lu: Lu<usize, f64>,
    n: usize,
}

impl ShiftedSolver {
    pub fn new(a: &CsrMatrix, shift: f64) -> Result<Self> {
        let mut triplets = Vec::with_capacity(a.nnz() + a.n);
        for r in 0..a.n {
            let mut has_diag = false;
            for k in a.row_ptr[r]..a.row_ptr[r + 1] {
                let c = a.col_idx[k];
                let mut v = a.values[k];
                if c == r {
                    v -= shift;
                    has_diag = true;
                }
                triplets.push(Triplet::new(r, c, v));
            }
            if !has_diag {
                triplets.push(Triplet::new(r, r, -shift));
            }
        }
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(a.n, a.n, &triplets)
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let lu = m
            .sp_lu()
            .map_err(|e| Error::LinearSolver(format!("LU factorization failed: {e:?}")))?;
        Ok(Self { lu, n: a.n })
    }

    /// Overwrites `x` with `(A - shift·I)⁻¹ x`.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        let n = self.n;
        self.lu
            .solve_in_place(MatMut::from_column_major_slice_mut(x, n, 1));
    }
}
