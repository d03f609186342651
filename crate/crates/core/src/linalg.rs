//! Small dense linear algebra: a generic row-major matrix, Gaussian
//! elimination with partial pivoting, and one-sided Jacobi singular values.

use std::fmt::Debug;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use num_traits::{Num, NumAssign, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};

/// Row-major dense matrix over any scalar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(CertError::Argument("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn map<U: Clone>(&self, mut f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(&mut f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T: Clone + num_traits::Zero + num_traits::One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Matrix<f64> {
    pub fn matmul(&self, other: &Matrix<f64>) -> Result<Matrix<f64>> {
        if self.cols != other.rows {
            return Err(CertError::Argument(format!(
                "shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |r, c| {
            (0..self.cols).map(|k| self[(r, k)] * other[(k, c)]).sum()
        }))
    }
}

/// Field elements that partial pivoting can rank by magnitude.
pub trait Pivot: Copy + NumAssign + Debug {
    fn magnitude(&self) -> f64;
}

impl Pivot for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Pivot for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Solution of a square system together with its elimination pivots.
#[derive(Debug, Clone)]
pub struct Solved<T> {
    pub solution: Vec<T>,
    pub min_pivot: f64,
    pub max_pivot: f64,
}

impl<T> Solved<T> {
    /// Smallest over largest pivot magnitude; 0 for a singular elimination.
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }
}

/// Gaussian elimination with partial pivoting. An exactly zero pivot column
/// is reported as [`CertError::Degenerate`].
pub fn solve<T: Pivot>(a: &Matrix<T>, b: &[T]) -> Result<Solved<T>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(CertError::Argument(format!(
            "solve needs a square system, got {}x{} with rhs {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot: f64 = 0.0;
    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|r| (r, m[(r, col)].magnitude()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag == 0.0 {
            return Err(CertError::Degenerate(format!("singular matrix at column {col}")));
        }
        min_pivot = min_pivot.min(mag);
        max_pivot = max_pivot.max(mag);
        if piv != col {
            for c in 0..n {
                let tmp = m[(col, c)];
                m[(col, c)] = m[(piv, c)];
                m[(piv, c)] = tmp;
            }
            rhs.swap(col, piv);
        }
        let p = m[(col, col)];
        for r in col + 1..n {
            let factor = m[(r, col)] / p;
            if factor == T::zero() {
                continue;
            }
            for c in col..n {
                let v = m[(col, c)];
                m[(r, c)] -= factor * v;
            }
            let v = rhs[col];
            rhs[r] -= factor * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in r + 1..n {
            acc -= m[(r, c)] * x[c];
        }
        x[r] = acc / m[(r, r)];
    }
    if n == 0 {
        min_pivot = 0.0;
    }
    Ok(Solved {
        solution: x,
        min_pivot,
        max_pivot,
    })
}

/// Determinant by elimination; works for floats and for exact rationals.
pub fn determinant<T>(m: &Matrix<T>) -> Result<T>
where
    T: Clone + Num + Signed + PartialOrd,
{
    if !m.is_square() {
        return Err(CertError::Argument("determinant of a non-square matrix".into()));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut det = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| {
                a[(x, col)]
                    .abs()
                    .partial_cmp(&a[(y, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[(piv, col)].is_zero() {
            return Ok(T::zero());
        }
        if piv != col {
            for c in 0..n {
                let tmp = a[(col, c)].clone();
                a[(col, c)] = a[(piv, c)].clone();
                a[(piv, c)] = tmp;
            }
            det = -det;
        }
        let p = a[(col, col)].clone();
        det = det * p.clone();
        for r in col + 1..n {
            let factor = a[(r, col)].clone() / p.clone();
            if factor.is_zero() {
                continue;
            }
            for c in col..n {
                let v = a[(col, c)].clone();
                a[(r, c)] = a[(r, c)].clone() - factor.clone() * v;
            }
        }
    }
    Ok(det)
}

/// Inverse of a square real matrix, column by column.
pub fn inverse(m: &Matrix<f64>) -> Result<Matrix<f64>> {
    let n = m.rows();
    if !m.is_square() {
        return Err(CertError::Argument("inverse of a non-square matrix".into()));
    }
    let mut inv = Matrix::filled(n, n, 0.0);
    for c in 0..n {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        let col = solve(m, &e)?.solution;
        for (r, v) in col.into_iter().enumerate() {
            inv[(r, c)] = v;
        }
    }
    Ok(inv)
}

/// Default number of Jacobi sweeps.
pub const JACOBI_SWEEPS: usize = 20;

/// Singular values (descending) by one-sided Jacobi rotations, at most
/// `sweeps` passes over all column pairs.
pub fn singular_values(m: &Matrix<f64>, sweeps: usize) -> Vec<f64> {
    // Work on the orientation with at least as many rows as columns.
    let a = if m.rows() >= m.cols() { m.clone() } else { m.transpose() };
    let (rows, cols) = (a.rows(), a.cols());
    let mut colv: Vec<Vec<f64>> = (0..cols).map(|c| a.column(c)).collect();
    for _ in 0..sweeps {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha: f64 = colv[i].iter().map(|v| v * v).sum();
                let beta: f64 = colv[j].iter().map(|v| v * v).sum();
                let gamma: f64 = colv[i].iter().zip(&colv[j]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let x = colv[i][k];
                    let y = colv[j][k];
                    colv[i][k] = c * x - s * y;
                    colv[j][k] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = colv
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Ratio of extreme singular values; infinite for a rank-deficient matrix.
pub fn condition_number(m: &Matrix<f64>) -> f64 {
    let sv = singular_values(m, JACOBI_SWEEPS);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 0.0,
    }
}

/// Real 2n x 2n embedding [[Re, -Im], [Im, Re]] of a complex matrix; it has
/// the singular values of the original, each repeated twice.
pub fn realify(m: &Matrix<Complex64>) -> Matrix<f64> {
    let (r, c) = (m.rows(), m.cols());
    Matrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn solve_small_system() {
        let a = Matrix::from_rows(vec![vec![1.0, 1.0], vec![2.0, 1.0]]).unwrap();
        let s = solve(&a, &[5.0, 8.0]).unwrap();
        assert!((s.solution[0] - 3.0).abs() < 1e-14);
        assert!((s.solution[1] - 2.0).abs() < 1e-14);
        assert!(s.pivot_ratio() > 0.0);
    }

    #[test]
    fn singular_system_is_degenerate() {
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(solve(&a, &[1.0, 2.0]), Err(CertError::Degenerate(_))));
    }

    #[test]
    fn determinant_float_and_rational_agree() {
        let rows = [vec![2, 3, 1], vec![4, 5, 7], vec![1, -1, 3]];
        let f = Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect()).unwrap();
        let q = Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
                .collect(),
        )
        .unwrap();
        let exact = determinant(&q).unwrap();
        assert_eq!(exact, BigRational::from_integer(20.into()));
        assert!((determinant(&f).unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_singular_values_of_diagonal() {
        let m = Matrix::from_rows(vec![vec![3.0, 0.0], vec![0.0, -4.0], vec![0.0, 0.0]]).unwrap();
        let sv = singular_values(&m, JACOBI_SWEEPS);
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
        assert!((condition_number(&m) - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn realification_doubles_singular_values() {
        let m = Matrix::from_rows(vec![
            vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0)],
            vec![Complex64::new(0.5, 0.0), Complex64::new(-1.0, 0.3)],
        ])
        .unwrap();
        let sv = singular_values(&realify(&m), JACOBI_SWEEPS);
        assert_eq!(sv.len(), 4);
        assert!((sv[0] - sv[1]).abs() < 1e-12 && (sv[2] - sv[3]).abs() < 1e-12);
    }
}
