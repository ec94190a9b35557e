//! Dense least squares by Householder QR.
//!
//! Columns are equilibrated to unit 2-norm before factorization, so the
//! reported condition estimate reflects the geometry of the basis rather than
//! the scale of individual columns. Normal equations are never formed.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.data.chunks(self.cols).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    /// `‖A x − b‖₂`.
    pub residual_norm: f64,
    /// `max |R_ii| / min |R_ii|` of the equilibrated factor; a lower bound on
    /// the 2-norm condition number.
    pub condition: f64,
}

/// Minimizes `‖A x − b‖₂` for `A` with at least as many rows as columns.
///
/// Returns [`Error::Singular`] for a zero column or an exactly rank-deficient
/// factor; near-deficiency is left to the caller through `condition`.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<LeastSquares> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        return Err(Error::InvalidArgument(format!("rhs has {} rows, matrix {m}", b.len())));
    }
    if m < n || n == 0 {
        return Err(Error::InvalidArgument(format!("least squares needs rows >= cols > 0, got {m}x{n}")));
    }

    // column-major working copy, equilibrated
    let mut q: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut scale = vec![0.0; n];
    for (j, col) in q.iter_mut().enumerate() {
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Singular(format!("column {j} has norm {norm}")));
        }
        col.iter_mut().for_each(|v| *v /= norm);
        scale[j] = norm;
    }
    let mut rhs = b.to_vec();
    let mut diag = vec![0.0; n];

    for k in 0..n {
        let alpha = q[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha == 0.0 {
            return Err(Error::Singular(format!("rank deficient at column {k}")));
        }
        let alpha = if q[k][k] > 0.0 { -alpha } else { alpha };
        // v = x - alpha e_1, stored in place of column k
        q[k][k] -= alpha;
        let vnorm2 = q[k][k..].iter().map(|v| v * v).sum::<f64>();
        diag[k] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let (head, tail) = q.split_at_mut(k + 1);
        let v = &head[k][k..];
        for col in tail.iter_mut() {
            let s = 2.0 * v.iter().zip(&col[k..]).map(|(a, b)| a * b).sum::<f64>() / vnorm2;
            col[k..].iter_mut().zip(v).for_each(|(c, vi)| *c -= s * vi);
        }
        let s = 2.0 * v.iter().zip(&rhs[k..]).map(|(a, b)| a * b).sum::<f64>() / vnorm2;
        rhs[k..].iter_mut().zip(v).for_each(|(c, vi)| *c -= s * vi);
    }

    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for (j, xj) in x.iter().enumerate().skip(k + 1) {
            s -= q[j][k] * xj;
        }
        x[k] = s / diag[k];
    }
    let residual_norm = rhs[n..].iter().map(|v| v * v).sum::<f64>().sqrt();
    let max = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    let min = diag.iter().fold(f64::INFINITY, |acc, d| acc.min(d.abs()));
    x.iter_mut().zip(&scale).for_each(|(xi, s)| *xi /= s);

    Ok(LeastSquares { solution: x, residual_norm, condition: max / min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_system() {
        let a = Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]);
        let ls = solve(&a, &[3.0, 5.0]).unwrap();
        assert!((ls.solution[0] - 0.8).abs() < 1e-14);
        assert!((ls.solution[1] - 1.4).abs() < 1e-14);
        assert!(ls.residual_norm < 1e-14);
    }

    #[test]
    fn line_fit() {
        // y = 1 + 2x with symmetric noise: exact fit recovered
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let noise = [0.1, -0.1, 0.0, -0.1, 0.1];
        let a = Matrix::from_rows(xs.iter().map(|&x| vec![1.0, x]).collect());
        let b: Vec<f64> = xs.iter().zip(noise).map(|(x, e)| 1.0 + 2.0 * x + e).collect();
        let ls = solve(&a, &b).unwrap();
        assert!((ls.solution[1] - 2.0).abs() < 1e-14);
        assert!((ls.solution[0] - 1.0).abs() < 1e-14);
        assert!((ls.residual_norm - 0.2).abs() < 1e-14);
    }

    #[test]
    fn badly_scaled_columns_are_fine() {
        let a = Matrix::from_rows(vec![vec![1.0, 1e-40], vec![1.0, 2e-40], vec![1.0, 3e-40]]);
        let ls = solve(&a, &[1.0, 2.0, 3.0]).unwrap();
        assert!((ls.solution[0]).abs() < 1e-13);
        assert!((ls.solution[1] * 1e-40 - 1.0).abs() < 1e-13);
        assert!(ls.condition < 10.0);
    }

    #[test]
    fn errors() {
        let a = Matrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(solve(&a, &[1.0, 1.0]), Err(Error::Singular(_))));
        let a = Matrix::from_rows(vec![vec![1.0, 2.0]]);
        assert!(matches!(solve(&a, &[1.0]), Err(Error::InvalidArgument(_))));
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        let r = solve(&a, &[1.0, 1.0]);
        assert!(matches!(r, Err(Error::Singular(_))) || r.unwrap().condition > 1e14);
    }

    proptest! {
        #[test]
        fn residual_is_orthogonal_to_columns(
            entries in proptest::collection::vec(-1.0f64..1.0, 24),
            rhs in proptest::collection::vec(-1.0f64..1.0, 8),
        ) {
            let a = Matrix::from_rows(entries.chunks(3).map(|c| c.to_vec()).collect());
            let Ok(ls) = solve(&a, &rhs) else { return Ok(()) };
            prop_assume!(ls.condition < 1e6);
            let ax = a.mul_vec(&ls.solution);
            let r: Vec<f64> = ax.iter().zip(&rhs).map(|(p, q)| p - q).collect();
            for j in 0..3 {
                let dot: f64 = a.column(j).iter().zip(&r).map(|(p, q)| p * q).sum();
                prop_assert!(dot.abs() < 1e-10);
            }
            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((rn - ls.residual_norm).abs() < 1e-10);
        }
    }
}
