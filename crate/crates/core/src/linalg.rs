//! Small dense real/complex matrices.
//!
//! Everything here is sized for desk-scale problems (a few hundred rows at
//! most): determinants go through LU with partial pivoting and singular
//! values through one-sided Jacobi rotations, which are accurate to working
//! precision for the tiny, well-scaled matrices the pipeline produces.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

/// Scalar field the matrices are defined over.
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    /// Squared modulus.
    fn norm_sqr(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        libm::fabs(self)
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        libm::hypot(self.re, self.im)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RMatrix = Matrix<f64>;
pub type CMatrix = Matrix<Complex64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// Largest entry modulus; zero for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    /// Submatrix on the given row and column index lists (in that order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Contiguous block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Determinant by LU with partial pivoting. The empty matrix has determinant one.
    pub fn determinant(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = T::one();
        for col in 0..n {
            let (piv, best) =
                (col..n)
                    .map(|r| (r, a[r * n + col].modulus()))
                    .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                return T::zero();
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det = det * d;
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f == T::zero() {
                    continue;
                }
                for j in col + 1..n {
                    let v = a[col * n + j];
                    a[r * n + j] = a[r * n + j] - f * v;
                }
            }
        }
        det
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows < self.cols {
            return self.adjoint().singular_values();
        }
        let (m, n) = (self.rows, self.cols);
        // Column-major working copy: one-sided Jacobi orthogonalizes columns.
        let mut cols: Vec<Vec<T>> = (0..n).map(|j| (0..m).map(|i| self[(i, j)]).collect()).collect();
        for _sweep in 0..60 {
            let mut rotated = false;
            for i in 0..n {
                for j in i + 1..n {
                    let alpha: f64 = cols[i].iter().map(|x| x.norm_sqr()).sum();
                    let beta: f64 = cols[j].iter().map(|x| x.norm_sqr()).sum();
                    let mut gamma = T::zero();
                    for (a, b) in cols[i].iter().zip(&cols[j]) {
                        gamma += a.conj() * *b;
                    }
                    let g = gamma.modulus();
                    if g == 0.0 || g <= 1e-15 * libm::sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                    let c = 1.0 / libm::sqrt(1.0 + t * t);
                    let s = c * t;
                    // Rotate (a_i, a_j·conj(phase)) so that a_i^H a_j becomes real.
                    let phase_conj = gamma.conj() / T::from_real(g);
                    let (head, tail) = cols.split_at_mut(j);
                    for (xi, xj) in head[i].iter_mut().zip(tail[0].iter_mut()) {
                        let ai = *xi;
                        let aj = *xj * phase_conj;
                        *xi = T::from_real(c) * ai - T::from_real(s) * aj;
                        *xj = T::from_real(s) * ai + T::from_real(c) * aj;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<f64> = cols.iter().map(|c| libm::sqrt(c.iter().map(|x| x.norm_sqr()).sum())).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Number of singular values above `threshold`.
    pub fn rank_above(&self, threshold: f64) -> usize {
        self.singular_values().into_iter().filter(|&s| s > threshold).count()
    }

    /// Numerical rank with a threshold relative to this matrix's largest singular value.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let sv = self.singular_values();
        match sv.first() {
            Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s > rel_tol * smax).count(),
            _ => 0,
        }
    }
}

impl RMatrix {
    pub fn to_complex(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| Complex64::new(self[(i, j)], 0.0))
    }

    /// Solve `self · X = rhs` for square nonsingular `self` (Gaussian elimination, partial pivoting).
    pub fn solve(&self, rhs: &RMatrix) -> Option<RMatrix> {
        assert!(self.is_square() && self.rows == rhs.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| libm::fabs(a[(x, col)]).total_cmp(&libm::fabs(a[(y, col)])))?;
            if a[(piv, col)] == 0.0 {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(col * n + j, piv * n + j);
                }
                for j in 0..b.cols {
                    b.data.swap(col * b.cols + j, piv * b.cols + j);
                }
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)] / a[(col, col)];
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[(r, j)] -= f * a[(col, j)];
                }
                for j in 0..b.cols {
                    b[(r, j)] -= f * b[(col, j)];
                }
            }
        }
        for r in 0..n {
            let d = a[(r, r)];
            for j in 0..b.cols {
                b[(r, j)] /= d;
            }
        }
        Some(b)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_determinant_is_one() {
        assert_eq!(RMatrix::zeros(0, 0).determinant(), 1.0);
    }

    #[test]
    fn determinant_with_pivoting() {
        let m = RMatrix::from_fn(3, 3, |i, j| [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]][i][j]);
        // expansion along the first row: 0 - 2*(1-0) + 1*(0-3) = -5
        assert_relative_eq!(m.determinant(), -5.0, epsilon = 1e-14);
    }

    #[test]
    fn complex_determinant() {
        let i = Complex64::new(0.0, 1.0);
        let m = CMatrix::from_fn(2, 2, |r, c| [[Complex64::new(1.0, 0.0), i], [i, Complex64::new(1.0, 0.0)]][r][c]);
        let d = m.determinant();
        assert_relative_eq!(d.re, 2.0, epsilon = 1e-14);
        assert_relative_eq!(d.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_values_of_diagonal_and_rank() {
        let m = RMatrix::from_fn(4, 3, |i, j| if i == j { [3.0, -1.0, 0.0][i] } else { 0.0 });
        let sv = m.singular_values();
        assert_relative_eq!(sv[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(sv[1], 1.0, epsilon = 1e-14);
        assert_eq!(sv[2], 0.0);
        assert_eq!(m.rank(1e-9), 2);
        assert_eq!(m.transpose().rank(1e-9), 2);
    }

    #[test]
    fn complex_singular_values_match_gram_eigenvalues() {
        // [[1, i], [0, 1]]: M^H M = [[1, i], [-i, 2]], eigenvalues (3 ± √5)/2
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let m = CMatrix::from_fn(2, 2, |r, c| [[one, i], [z, one]][r][c]);
        let sv = m.singular_values();
        let r5 = libm::sqrt(5.0);
        assert_relative_eq!(sv[0] * sv[0], (3.0 + r5) / 2.0, epsilon = 1e-13);
        assert_relative_eq!(sv[1] * sv[1], (3.0 - r5) / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn solve_recovers_rhs() {
        let a = RMatrix::from_fn(3, 3, |i, j| [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]][i][j]);
        let x = RMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64 - 1.5);
        let b = a.matmul(&x);
        let y = a.solve(&b).unwrap();
        assert!(y.sub(&x).max_abs() < 1e-13);
    }
}
