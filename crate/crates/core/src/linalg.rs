//! Small dense linear algebra over a generic scalar.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::{Num, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<E> {
    n: usize,
    data: Vec<E>,
}

pub type ComplexMatrix<T> = Matrix<Complex<T>>;

impl<E: Clone + Num> Matrix<E> {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![E::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m.data[k * n + k] = E::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Matrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: E) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[E]> {
        self.data.chunks(self.n.max(1)).take(self.n)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.data[j * self.n + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn scale(&self, c: &E) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn map<F, R>(&self, f: F) -> Matrix<R>
    where
        F: FnMut(&E) -> R,
    {
        Matrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.n * other.n;
        let mut out = Self::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..other.n {
                    for l in 0..other.n {
                        out.data[(i * other.n + k) * n + j * other.n + l] =
                            self.get(i, j).clone() * other.get(k, l).clone();
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[E]) -> Vec<E> {
        self.rows()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(E::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }
}

impl<E: Clone + Num> Mul for &Matrix<E> {
    type Output = Matrix<E>;

    fn mul(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        let n = self.n;
        let mut out: Matrix<E> = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * n + j] = out.data[i * n + j].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }
}

impl<E: Clone + Num> Add for &Matrix<E> {
    type Output = Matrix<E>;

    fn add(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<E: Clone + Num> Sub for &Matrix<E> {
    type Output = Matrix<E>;

    fn sub(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn adjoint(&self) -> Self {
        self.transpose().map(|z| z.conj())
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    /// `self² = I`.
    pub fn is_involution(&self) -> bool {
        self * self == Self::identity(self.n)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self * other == other * self
    }

    /// `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn projector(v: &[Complex<T>]) -> Self {
        let norm = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = (v[i].clone() * v[j].conj()).unscale(norm.clone());
            }
        }
        m
    }

    /// `±I` when the matrix is a signed identity.
    pub fn identity_sign(&self) -> Option<i8> {
        let id = Self::identity(self.n);
        if *self == id {
            Some(1)
        } else if *self == id.scale(&-Complex::<T>::one()) {
            Some(-1)
        } else {
            None
        }
    }
}

/// Solves `a x = b` by Gaussian elimination with largest-magnitude pivoting.
/// Returns `None` for singular systems.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let mut rows: Vec<Vec<T>> = a
        .rows()
        .zip(b)
        .map(|(r, bi)| {
            r.iter()
                .cloned()
                .chain(std::iter::once(bi.clone()))
                .collect()
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !rows[r][col].is_negligible())
            .max_by(|&x, &y| {
                rows[x][col]
                    .magnitude()
                    .partial_cmp(&rows[y][col].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(y.cmp(&x))
            })?;
        rows.swap(col, pivot);
        let inv = T::one() / rows[col][col].clone();
        for v in rows[col][col..].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                if !p.is_zero() {
                    *v = v.clone() - factor.clone() * p.clone();
                }
            }
        }
    }
    Some(rows.into_iter().map(|r| r[n].clone()).collect())
}

/// Stationary row vector `π P = π`, `Σ π = 1` of an irreducible stochastic
/// matrix `p`. `None` when the balance system is singular.
pub fn stationary<T: Scalar>(p: &Matrix<T>) -> Option<Vec<T>> {
    let n = p.dim();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut a = p.transpose();
    for k in 0..n {
        let d = a.get(k, k).clone() - T::one();
        a.set(k, k, d);
    }
    for j in 0..n {
        a.set(n - 1, j, T::one());
    }
    let mut b = vec![T::zero(); n];
    b[n - 1] = T::one();
    solve(&a, &b)
}
