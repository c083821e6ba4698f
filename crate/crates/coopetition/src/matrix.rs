//! Dense row-major matrices.
//!
//! Payoff matrices in this domain are tiny (the largest built-in game is
//! 12x12), so a flat `Vec` with bounds-checked indexing is all we need.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<S>>", into = "Vec<Vec<S>>")]
#[serde(bound(
    serialize = "S: Real",
    deserialize = "S: Real + serde::de::DeserializeOwned"
))]
pub struct Matrix<S: Real> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Real> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, String> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err("matrix must have at least one row and one column".into());
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err("ragged rows in matrix".into());
        }
        let r = rows.len();
        let data: Vec<S> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err("matrix entries must be finite".into());
        }
        Ok(Self { rows: r, cols, data })
    }

    /// Convenience constructor from `f64` literals, for fixtures and tests.
    pub fn from_rows_f64(rows: &[&[f64]]) -> Self {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| S::of(v)).collect()).collect())
            .expect("bad literal matrix")
    }

    pub fn filled(rows: usize, cols: usize, value: S) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    /// Build from a function of (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        assert!(r < self.rows && c < self.cols, "matrix index out of bounds");
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        assert!(r < self.rows && c < self.cols, "matrix index out of bounds");
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn set_row(&mut self, r: usize, values: &[S]) {
        assert_eq!(values.len(), self.cols);
        self.data[r * self.cols..(r + 1) * self.cols].copy_from_slice(values);
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// Entrywise infinity norm of `self - other`: `max |a_ij - b_ij|`.
    pub fn inf_norm_diff(&self, other: &Self) -> Option<S> {
        if !self.same_shape(other) {
            return None;
        }
        let mut m = S::zero();
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            let d = (*a - *b).abs();
            if d > m {
                m = d;
            }
        }
        Some(m)
    }

    pub fn min_entry(&self) -> S {
        self.data.iter().copied().fold(S::infinity(), S::min)
    }

    pub fn max_entry(&self) -> S {
        self.data.iter().copied().fold(S::neg_infinity(), S::max)
    }

    /// `row . v` for a probability-vector-like `v` of length `cols`.
    pub fn row_dot(&self, r: usize, v: &[S]) -> S {
        assert_eq!(v.len(), self.cols);
        self.row(r).iter().zip(v).map(|(&a, &b)| a * b).sum()
    }

    /// `u^T M v`.
    pub fn bilinear(&self, u: &[S], v: &[S]) -> S {
        assert_eq!(u.len(), self.rows);
        (0..self.rows).map(|r| u[r] * self.row_dot(r, v)).sum()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }
}

impl<S: Real> std::fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl<S: Real> From<Matrix<S>> for Vec<Vec<S>> {
    fn from(m: Matrix<S>) -> Self {
        (0..m.rows).map(|r| m.row(r).to_vec()).collect()
    }
}

impl<S: Real> TryFrom<Vec<Vec<S>>> for Matrix<S> {
    type Error = String;

    fn try_from(rows: Vec<Vec<S>>) -> Result<Self, Self::Error> {
        Matrix::from_rows(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inf_norm_diff_max_abs_entry() {
        let a: Matrix<f64> = Matrix::from_rows_f64(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b: Matrix<f64> = Matrix::from_rows_f64(&[&[1.5, 2.0], &[3.0, 1.0]]);
        assert_eq!(a.inf_norm_diff(&b), Some(3.0));
        let c: Matrix<f64> = Matrix::zeros(2, 3);
        assert_eq!(a.inf_norm_diff(&c), None);
    }

    #[test]
    fn bilinear_matches_manual_sum() {
        let m: Matrix<f64> = Matrix::from_rows_f64(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let v = m.bilinear(&[0.25, 0.75], &[0.5, 0.5]);
        assert!((v - (0.25 * 1.5 + 0.75 * 3.5)).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        let m: Matrix<f64> = Matrix::from_rows_f64(&[&[1.0, -2.5], &[0.0, 4.0]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,-2.5],[0.0,4.0]]");
        let back: Matrix<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
        assert!(serde_json::from_str::<Matrix<f64>>("[[1.0],[2.0,3.0]]").is_err());
    }
}
