use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Compressed sparse row matrix of `f64`.
///
/// Column indices are sorted within each row and all values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        offsets: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if offsets.len() != nrows + 1 || offsets[0] != 0 {
            return Err(Error::DimensionMismatch {
                what: "CSR offsets",
                expected: nrows + 1,
                got: offsets.len(),
            });
        }
        if indices.len() != values.len() || *offsets.last().unwrap() != indices.len() {
            return Err(Error::DimensionMismatch {
                what: "CSR nonzeros",
                expected: *offsets.last().unwrap(),
                got: indices.len(),
            });
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::config("CSR offsets must be monotone"));
        }
        for r in 0..nrows {
            let row = &indices[offsets[r]..offsets[r + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config(format!("CSR row {r} has unsorted or repeated columns")));
            }
            if let Some(&c) = row.last() {
                if c >= ncols {
                    return Err(Error::NodeOutOfRange { node: c, num_nodes: ncols });
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("CSR values must be finite"));
        }
        Ok(SparseMatrix { nrows, ncols, offsets, indices, values })
    }

    /// Keeps every entry of `m` that is not exactly zero.
    pub fn from_dense(m: ArrayView2<'_, f64>) -> Result<Self> {
        let mut offsets = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for row in m.rows() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        Self::from_csr(m.nrows(), m.ncols(), offsets, indices, values)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.offsets[r]..self.offsets[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[[r, c]] = v;
            }
        }
        out
    }

    /// `y = M x` for a vector.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_cols(x.len())?;
        Ok((0..self.nrows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect())
    }

    /// `Y = M X` for a dense matrix, one output row at a time.
    pub fn mul_dense(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_cols(x.nrows())?;
        let mut out = Array2::zeros((self.nrows, x.ncols()));
        // Rows of X are short (often one entry per class), so per-row view
        // overhead dominates; contiguous inputs take a plain slice loop.
        if let (Some(xs), Some(os)) = (x.as_slice(), out.as_slice_mut()) {
            let w = x.ncols();
            for r in 0..self.nrows {
                let (cols, vals) = self.row(r);
                let dst = &mut os[r * w..(r + 1) * w];
                for (&c, &v) in cols.iter().zip(vals) {
                    for (d, s) in dst.iter_mut().zip(&xs[c * w..(c + 1) * w]) {
                        *d += v * s;
                    }
                }
            }
            return Ok(out);
        }
        for (r, mut out_row) in out.rows_mut().into_iter().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out_row.scaled_add(v, &x.row(c));
            }
        }
        Ok(out)
    }

    /// `x^T M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        if self.nrows != self.ncols {
            return Err(Error::DimensionMismatch {
                what: "quadratic form needs a square matrix",
                expected: self.nrows,
                got: self.ncols,
            });
        }
        let mx = self.spmv(x)?;
        Ok(x.iter().zip(&mx).map(|(a, b)| a * b).sum())
    }

    fn check_cols(&self, got: usize) -> Result<()> {
        if got != self.ncols {
            return Err(Error::DimensionMismatch { what: "sparse operand rows", expected: self.ncols, got });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn two_node() -> SparseMatrix {
        SparseMatrix::from_dense(array![[1.0, -1.0], [-1.0, 1.0]].view()).unwrap()
    }

    #[test]
    fn identity_pattern_is_identity() {
        let eye = SparseMatrix::from_dense(Array2::<f64>::eye(4).view()).unwrap();
        let x = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0]];
        assert_eq!(eye.mul_dense(x.view()).unwrap(), x);
        assert_eq!(eye.spmv(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![1.0, -2.0, 3.0, 0.5]);
    }

    #[test]
    fn constant_vector_in_two_node_nullspace() {
        assert_eq!(two_node().spmv(&[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn two_node_quadratic_form() {
        assert_eq!(two_node().quadratic_form(&[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let m = two_node();
        assert!(matches!(m.spmv(&[1.0; 3]), Err(Error::DimensionMismatch { .. })));
        assert!(m.mul_dense(Array2::zeros((3, 2)).view()).is_err());
        assert!(m.quadratic_form(&[1.0]).is_err());
    }

    #[test]
    fn strided_and_contiguous_inputs_agree() {
        let m = SparseMatrix::from_dense(array![[0.0, 2.0, 0.0], [1.0, 0.0, -1.0], [0.5, 0.0, 0.0]].view())
            .unwrap();
        let x = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        let strided = m.mul_dense(x.t()).unwrap();
        let contiguous = m.mul_dense(x.t().as_standard_layout().view()).unwrap();
        assert_eq!(strided, contiguous);
        assert_eq!(strided, m.to_dense().dot(&x.t()));
    }

    #[test]
    fn rejects_unsorted_rows() {
        let bad = SparseMatrix::from_csr(1, 3, vec![0, 2], vec![2, 0], vec![1.0, 1.0]);
        assert!(bad.is_err());
        let bad = SparseMatrix::from_csr(1, 3, vec![0, 1], vec![0], vec![f64::NAN]);
        assert!(bad.is_err());
    }
}
