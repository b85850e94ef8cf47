//! Row-major f64 matrix with the three matmul variants backprop needs.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Concatenates columns: `[self | other]`, row counts must match.
    pub fn hcat(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hcat row mismatch");
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            out.row_mut(r)[..self.cols].copy_from_slice(self.row(r));
            out.row_mut(r)[self.cols..].copy_from_slice(other.row(r));
        }
        out
    }

    /// `self (n x k) * w^T (k x m)` where `w` is `m x k`: the forward pass of
    /// a linear layer whose weight rows are output units.
    pub fn matmul_nt(&self, w: &Matrix) -> Matrix {
        assert_eq!(self.cols, w.cols, "matmul_nt inner dim");
        let mut out = Matrix::zeros(self.rows, w.rows);
        for r in 0..self.rows {
            let x = self.row(r);
            let out_row = out.row_mut(r);
            for (m, o) in out_row.iter_mut().enumerate() {
                let wrow = w.row(m);
                let mut acc = 0.0;
                for k in 0..x.len() {
                    acc += x[k] * wrow[k];
                }
                *o = acc;
            }
        }
        out
    }

    /// `self (n x k) * b (k x m)`: used for propagating output deltas back
    /// through a layer's weights.
    pub fn matmul_nn(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.cols, b.rows, "matmul_nn inner dim");
        let mut out = Matrix::zeros(self.rows, b.cols);
        for r in 0..self.rows {
            let a_row = self.row(r);
            let out_row = out.row_mut(r);
            for (k, &a) in a_row.iter().enumerate() {
                let b_row = b.row(k);
                for (o, &bv) in out_row.iter_mut().zip(b_row) {
                    *o += a * bv;
                }
            }
        }
        out
    }

    /// `self^T (k x n) * b (n x m)` accumulated over the batch dimension:
    /// the weight-gradient product.
    pub fn matmul_tn(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.rows, b.rows, "matmul_tn batch dim");
        let mut out = Matrix::zeros(self.cols, b.cols);
        for n in 0..self.rows {
            let a_row = self.row(n);
            let b_row = b.row(n);
            for (k, &a) in a_row.iter().enumerate() {
                let out_row = out.row_mut(k);
                for (o, &bv) in out_row.iter_mut().zip(b_row) {
                    *o += a * bv;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_variants_agree_with_hand_results() {
        // a = [[1,2],[3,4]], w = [[1,0],[1,1],[0,2]] (3 outputs of 2 inputs)
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let w = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 2.0]]);
        let y = a.matmul_nt(&w);
        assert_eq!(y.data(), &[1.0, 3.0, 4.0, 3.0, 7.0, 8.0]);

        // nn: delta (2x3) * w (3x2)
        let back = y.matmul_nn(&w);
        assert_eq!(back.rows(), 2);
        assert_eq!(back.cols(), 2);
        assert_eq!(back.get(0, 0), 1.0 * 1.0 + 3.0 * 1.0 + 4.0 * 0.0);
        assert_eq!(back.get(0, 1), 1.0 * 0.0 + 3.0 * 1.0 + 4.0 * 2.0);

        // tn: y^T (3x2) * a (2x2)
        let grad = y.matmul_tn(&a);
        assert_eq!(grad.rows(), 3);
        assert_eq!(grad.cols(), 2);
        assert_eq!(grad.get(0, 0), 1.0 * 1.0 + 3.0 * 3.0);
        assert_eq!(grad.get(2, 1), 4.0 * 2.0 + 8.0 * 4.0);
    }

    #[test]
    fn hcat_concatenates_columns() {
        let a = Matrix::from_rows(&[vec![1.0], vec![2.0]]);
        let b = Matrix::from_rows(&[vec![3.0, 4.0], vec![5.0, 6.0]]);
        let c = a.hcat(&b);
        assert_eq!(c.row(0), &[1.0, 3.0, 4.0]);
        assert_eq!(c.row(1), &[2.0, 5.0, 6.0]);
    }
}
