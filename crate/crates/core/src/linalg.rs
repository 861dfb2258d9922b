//! Small dense linear algebra used by the solvers and the ellipsoid method.
//! Sizes here are tiny (tens to a few hundred), so everything is plain
//! row-major `Vec` storage.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Panics if rows are ragged.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// `v vᵀ`.
    pub fn outer(v: &[T]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j];
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Lower Cholesky factor `L` with `self = L Lᵀ`; `None` unless symmetric
    /// positive definite.
    pub fn cholesky(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(l)
    }

    /// Lower-triangular `L` with positive diagonal and `L Lᵀ = self selfᵀ`,
    /// from a Householder QR of `selfᵀ`; `None` if `self` is singular.
    pub fn lower_root(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.transpose();
        for k in 0..n {
            let norm = (k..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<T>().sqrt();
            if !(norm > T::zero()) {
                return None;
            }
            let alpha = if a[(k, k)] > T::zero() { -norm } else { norm };
            let mut v: Vec<T> = (k..n).map(|i| a[(i, k)]).collect();
            v[0] -= alpha;
            let vv = dot(&v, &v);
            if vv > T::zero() {
                for j in k..n {
                    let s = (k..n).map(|i| v[i - k] * a[(i, j)]).sum::<T>() * T::c(2.0) / vv;
                    for i in k..n {
                        a[(i, j)] -= s * v[i - k];
                    }
                }
            }
        }
        let mut l = Self::zeros(n, n);
        for i in 0..n {
            let sign = if a[(i, i)] < T::zero() { -T::one() } else { T::one() };
            for j in i..n {
                l[(j, i)] = sign * a[(i, j)];
            }
        }
        Some(l)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Cholesky-based helpers for SPD matrices.
pub struct Cholesky<T> {
    l: Mat<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn new(a: &Mat<T>) -> Option<Self> {
        a.cholesky().map(|l| Self { l })
    }

    pub fn factor(&self) -> &Mat<T> {
        &self.l
    }

    /// `log det A = 2 Σ log L_ii`.
    pub fn log_det(&self) -> T {
        (0..self.l.rows()).map(|i| self.l[(i, i)].ln()).sum::<T>() * T::c(2.0)
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.rows();
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[(i, k)];
                let yk = y[k];
                y[i] -= lik * yk;
            }
            y[i] /= self.l[(i, i)];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let lki = self.l[(k, i)];
                let yk = y[k];
                y[i] -= lki * yk;
            }
            y[i] /= self.l[(i, i)];
        }
        y
    }

    /// `xᵀ A⁻¹ x`.
    pub fn inv_quad(&self, x: &[T]) -> T {
        let n = self.l.rows();
        let mut y = x.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[(i, k)];
                let yk = y[k];
                y[i] -= lik * yk;
            }
            y[i] /= self.l[(i, i)];
        }
        dot(&y, &y)
    }

    pub fn inverse(&self) -> Mat<T> {
        let n = self.l.rows();
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn dist2<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

/// Least-squares solution of `min ‖A x − b‖₂` for a tall matrix given by
/// columns, via Householder QR. Returns `None` when `A` is numerically
/// rank deficient.
pub fn lstsq_columns<T: Real>(cols: &[&[T]], b: &[T]) -> Option<Vec<T>> {
    let mut work = Lstsq::default();
    let mut x = Vec::new();
    work.solve(cols.len(), |j| cols[j], b, &mut x).then_some(x)
}

/// Reusable buffers for repeated small least-squares solves.
#[derive(Debug, Clone, Default)]
pub struct Lstsq<T> {
    a: Vec<T>,
    rhs: Vec<T>,
}

impl<T: Real> Lstsq<T> {
    /// Room for `k` columns of length `m` without reallocating.
    pub fn with_capacity(m: usize, k: usize) -> Self {
        Self {
            a: Vec::with_capacity(m * k),
            rhs: Vec::with_capacity(m),
        }
    }

    /// As [`lstsq_columns`] with column `j` given by `col(j)`; writes the
    /// solution to `x` and returns false when rank deficient.
    pub fn solve<'c>(&mut self, k: usize, col: impl Fn(usize) -> &'c [T], b: &[T], x: &mut Vec<T>) -> bool
    where
        T: 'c,
    {
        let m = b.len();
        x.clear();
        if k == 0 {
            return true;
        }
        if k > m {
            return false;
        }
        // Column-major working copy.
        self.a.clear();
        for j in 0..k {
            let c = col(j);
            assert_eq!(c.len(), m, "column length");
            self.a.extend_from_slice(c);
        }
        self.rhs.clear();
        self.rhs.extend_from_slice(b);
        let (a, rhs) = (&mut self.a, &mut self.rhs);
        let scale = a.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
        if scale == T::zero() {
            return false;
        }
        let rank_tol = scale * T::epsilon() * T::c((m.max(k) * 16) as f64);
        for j in 0..k {
            let (done, rest) = a.split_at_mut((j + 1) * m);
            let cj = &mut done[j * m..];
            let norm = cj[j..].iter().map(|&x| x * x).sum::<T>().sqrt();
            if norm <= rank_tol {
                return false;
            }
            let alpha = if cj[j] > T::zero() { -norm } else { norm };
            // v = x − alpha e1, held in place of column j from row j down.
            cj[j] -= alpha;
            let v = &cj[j..];
            let vnorm2: T = v.iter().map(|&x| x * x).sum();
            if vnorm2 > T::zero() {
                for c in rest.chunks_exact_mut(m) {
                    let s = dot(v, &c[j..]) * T::c(2.0) / vnorm2;
                    for (c, &vi) in c[j..].iter_mut().zip(v) {
                        *c -= s * vi;
                    }
                }
                let s = dot(v, &rhs[j..]) * T::c(2.0) / vnorm2;
                for (r, &vi) in rhs[j..].iter_mut().zip(v) {
                    *r -= s * vi;
                }
            }
            cj[j] = alpha;
        }
        x.resize(k, T::zero());
        for i in (0..k).rev() {
            let mut s = rhs[i];
            for j in i + 1..k {
                s -= a[j * m + i] * x[j];
            }
            x[i] = s / a[i * m + i];
        }
        true
    }
}
