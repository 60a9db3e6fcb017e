//! Dense complex matrices.

use std::fmt;
use std::ops::{Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default relative rank threshold.
pub const RANK_RTOL: f64 = 1e-10;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<C64>]) -> Self {
        assert!(cols.iter().all(|c| c.len() == rows), "column length mismatch");
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| C64::new(values[i * cols + j], 0.0))
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

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = *x;
        }
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &ComplexMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)])
    }

    pub fn hstack(&self, other: &ComplexMatrix) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> C64 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = ONE;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a[x * n + k].norm().total_cmp(&a[y * n + k].norm()))
                .unwrap();
            if a[p * n + k] == ZERO {
                return ZERO;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let piv = a[k * n + k];
            det *= piv;
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                if f != ZERO {
                    for j in k + 1..n {
                        let t = a[k * n + j];
                        a[i * n + j] -= f * t;
                    }
                }
            }
        }
        det
    }

    /// Solves `self * X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::Singular("dimension mismatch in solve".into()));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a[(x, k)].norm().total_cmp(&a[(y, k)].norm()))
                .unwrap();
            if a[(p, k)].norm() <= 1e-14 * scale {
                return Err(Error::Singular(format!("pivot {k} vanishes")));
            }
            a.swap_rows(k, p);
            b.swap_rows(k, p);
            let piv = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / piv;
                if f == ZERO {
                    continue;
                }
                for j in k..n {
                    let t = a[(k, j)];
                    a[(i, j)] -= f * t;
                }
                for j in 0..m {
                    let t = b[(k, j)];
                    b[(i, j)] -= f * t;
                }
            }
        }
        let mut x = ComplexMatrix::zeros(n, m);
        for c in 0..m {
            for i in (0..n).rev() {
                let mut s = b[(i, c)];
                for j in i + 1..n {
                    s -= a[(i, j)] * x[(j, c)];
                }
                x[(i, c)] = s / a[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.solve(&ComplexMatrix::identity(self.rows))
    }

    fn swap_rows(&mut self, i: usize, k: usize) {
        if i != k {
            for j in 0..self.cols {
                self.data.swap(i * self.cols + j, k * self.cols + j);
            }
        }
    }

    /// Indices of a maximal independent set of columns, chosen by column-pivoted
    /// Gram-Schmidt (largest residual first). Threshold is `rtol` times the
    /// largest column norm.
    pub fn pivot_columns(&self, rtol: f64) -> Vec<usize> {
        self.independent_columns(&(0..self.cols).collect::<Vec<_>>(), rtol, true)
    }

    /// Greedy independent columns scanned in the given order.
    pub fn pivot_columns_in_order(&self, order: &[usize], rtol: f64) -> Vec<usize> {
        self.independent_columns(order, rtol, false)
    }

    pub fn rank(&self, rtol: f64) -> usize {
        self.pivot_columns(rtol).len()
    }

    fn independent_columns(&self, order: &[usize], rtol: f64, largest_first: bool) -> Vec<usize> {
        let mut res: Vec<Vec<C64>> = order.iter().map(|&j| self.column(j)).collect();
        let norm0 = res.iter().map(|c| norm(c)).fold(0.0, f64::max);
        if norm0 == 0.0 {
            return Vec::new();
        }
        let tol = rtol * norm0;
        let mut basis: Vec<Vec<C64>> = Vec::new();
        let mut chosen = Vec::new();
        let mut open: Vec<usize> = (0..order.len()).collect();
        loop {
            let pick = if largest_first {
                open.iter()
                    .copied()
                    .max_by(|&x, &y| norm(&res[x]).total_cmp(&norm(&res[y])))
            } else {
                open.iter().copied().find(|&x| norm(&res[x]) > tol)
            };
            let Some(k) = pick else { break };
            let nk = norm(&res[k]);
            if nk <= tol {
                break;
            }
            open.retain(|&x| x != k);
            let q: Vec<C64> = res[k].iter().map(|x| x / nk).collect();
            for &o in &open {
                let c = dot(&q, &res[o]);
                for (r, qi) in res[o].iter_mut().zip(&q) {
                    *r -= c * qi;
                }
            }
            basis.push(q);
            chosen.push(order[k]);
            if basis.len() == self.rows {
                break;
            }
        }
        chosen
    }
}

/// Euclidean norm.
pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product, conjugate-linear in `a`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}
