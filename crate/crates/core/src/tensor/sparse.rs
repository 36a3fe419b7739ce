use super::Tensor;
use crate::error::{Error, Result};

/// Compressed sparse row layout of an `n × n` matrix without values.
///
/// Values live next to the pattern (normalized adjacency entries, learnable
/// edge weights), indexed by position `0..nnz` in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparsePattern {
    /// `rows[i]` lists the column indices of row `i`; they are sorted and
    /// deduplicated here.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut cols in rows {
            cols.sort_unstable();
            cols.dedup();
            if let Some(&c) = cols.last() {
                if c >= n {
                    return Err(Error::Argument(format!(
                        "column {c} out of range for {n} nodes"
                    )));
                }
            }
            col_idx.extend(cols);
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Positions `start..end` of row `i` into the value arrays.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_range(i)]
    }

    pub fn col(&self, p: usize) -> usize {
        self.col_idx[p]
    }

    /// Position of entry `(i, j)`, if stored.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let range = self.row_range(i);
        self.col_idx[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|k| range.start + k)
    }

    /// `out = M · h` where `M` has this pattern and the given values.
    pub fn multiply(&self, values: &[f64], h: &Tensor) -> Result<Tensor> {
        if values.len() != self.nnz() {
            return Err(Error::State(format!(
                "{} edge values for a pattern with {} entries",
                values.len(),
                self.nnz()
            )));
        }
        if h.rows() != self.n {
            return Err(Error::dim(
                "sparse multiply",
                format!("{} nodes vs {} rows", self.n, h.rows()),
            ));
        }
        let k = h.cols();
        let mut out = Tensor::zeros(self.n, k);
        for i in 0..self.n {
            let dst = out.row_mut(i);
            for p in self.row_range(i) {
                let w = values[p];
                let src = h.row(self.col_idx[p]);
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
        Ok(out)
    }

    /// Dense `n × n` copy, for tests and small diagnostics.
    pub fn to_dense(&self, values: &[f64]) -> Tensor {
        let mut out = Tensor::zeros(self.n, self.n);
        for i in 0..self.n {
            for p in self.row_range(i) {
                out.set(i, self.col_idx[p], values[p]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_sorted_and_deduplicated() {
        let p = SparsePattern::from_rows(vec![vec![1, 0, 1], vec![], vec![2]]).unwrap();
        assert_eq!(p.nnz(), 3);
        assert_eq!(p.row_cols(0), &[0, 1]);
        assert_eq!(p.position(2, 2), Some(2));
        assert_eq!(p.position(1, 0), None);
    }

    #[test]
    fn out_of_range_column_rejected() {
        assert!(SparsePattern::from_rows(vec![vec![3], vec![0]]).is_err());
    }

    #[test]
    fn multiply_matches_dense() {
        let p = SparsePattern::from_rows(vec![vec![0, 2], vec![1], vec![0, 1, 2]]).unwrap();
        let vals = [0.5, -1.0, 2.0, 0.25, 3.0, -0.5];
        let h = Tensor::from_rows(&[[1.0, 2.0], [3.0, -4.0], [0.5, 0.0]]);
        let got = p.multiply(&vals, &h).unwrap();
        let want = p.to_dense(&vals).matmul(&h).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn misaligned_values_are_a_state_error() {
        let p = SparsePattern::from_rows(vec![vec![0]]).unwrap();
        let h = Tensor::zeros(1, 1);
        assert!(matches!(p.multiply(&[1.0, 2.0], &h), Err(Error::State(_))));
    }
}
