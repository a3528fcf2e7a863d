//! Dense linear algebra kernel: Hermitian Gram products, lower Cholesky
//! factorization, lower-triangular inversion and Hermitian positive-definite
//! solves. All routines work over [`Scalar`], i.e. `f64` or `Complex<f64>`.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Result, SvarError};
use crate::scalar::Scalar;

/// Relative tolerance for the Hermitian precondition of [`cholesky_lower`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Pivot `j` of a Cholesky factorization at or below
/// `PIVOT_EPS * max(h[j][j], reference)` is treated as zero. Judging each
/// pivot against its own diagonal entry keeps the test invariant under
/// diagonal rescaling of the data; `reference` defaults to zero.
pub const PIVOT_EPS: f64 = 1e-12;

/// Row-major dense matrix over a real or complex field.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
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

    /// Builds a matrix from row-major data, rejecting empty shapes,
    /// length mismatches and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(SvarError::DimensionMismatch(format!(
                "matrix shape {rows}x{cols} must be positive"
            )));
        }
        if data.len() != rows * cols {
            return Err(SvarError::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(SvarError::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(SvarError::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_vec(rows.len(), cols, data)
    }

    /// Column vector from a slice.
    pub fn column_vector(values: &[T]) -> Result<Self> {
        Self::from_vec(values.len(), 1, values.to_vec())
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        self.map(|v| v.scale(f))
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                out[(j, i)] = v.conj();
            }
        }
        out
    }

    /// Transpose without conjugation.
    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Copy of the `nrows x ncols` block starting at `(r0, c0)` (0-based).
    pub fn block(&self, r0: usize, c0: usize, nrows: usize, ncols: usize) -> Self {
        assert!(r0 + nrows <= self.rows && c0 + ncols <= self.cols, "block out of range");
        let mut out = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            out.row_mut(i).copy_from_slice(&self.row(r0 + i)[c0..c0 + ncols]);
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Self) {
        assert!(
            r0 + src.rows <= self.rows && c0 + src.cols <= self.cols,
            "block out of range"
        );
        for i in 0..src.rows {
            self.row_mut(r0 + i)[c0..c0 + src.cols].copy_from_slice(src.row(i));
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(SvarError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · rhsᴴ` without materializing the adjoint.
    pub fn mul_adjoint(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.cols {
            return Err(SvarError::DimensionMismatch(format!(
                "cannot form {}x{} times adjoint of {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..rhs.rows {
                out[(i, j)] = dot_conj(a, rhs.row(j));
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(SvarError::DimensionMismatch(format!(
                "shapes {:?} and {:?} differ",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs_sq()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Largest real part on the diagonal of a square matrix.
    pub fn max_diagonal(&self) -> f64 {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].re())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| self.row(i)[(i + 1).min(self.cols)..].iter().all(|v| *v == T::zero()))
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// `Σ a_k · conj(b_k)`.
#[inline]
fn dot_conj<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y.conj())
}

/// Lower-triangular matrix with a strictly positive real diagonal.
///
/// Houses Cholesky factors and their inverses. The positive-diagonal
/// convention makes the Cholesky factor of a Hermitian positive-definite
/// matrix unique, so factors obtained along different routes can be
/// compared entrywise rather than up to a diagonal sign.
#[derive(Clone, PartialEq, Debug)]
pub struct LowerTriangularFactor<T> {
    inner: DenseMatrix<T>,
}

impl<T: Scalar> LowerTriangularFactor<T> {
    /// Validates the zero upper triangle and the real positive diagonal.
    pub fn new(m: DenseMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(SvarError::InvalidFactor(format!(
                "factor must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        if !m.is_lower_triangular() {
            return Err(SvarError::InvalidFactor("nonzero entry above the diagonal".into()));
        }
        for i in 0..m.rows {
            let d = m[(i, i)];
            if d.im() != 0.0 || !d.is_finite() || d.re() <= 0.0 {
                return Err(SvarError::InvalidFactor(format!(
                    "diagonal entry {i} is not real and strictly positive"
                )));
            }
        }
        Ok(Self { inner: m })
    }

    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn as_matrix(&self) -> &DenseMatrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> DenseMatrix<T> {
        self.inner
    }

    /// Solves `self · y = rhs` for a single column by forward substitution.
    pub fn solve_lower(&self, rhs: &mut [T]) {
        let c = &self.inner;
        for i in 0..c.rows {
            let row = c.row(i);
            let mut acc = rhs[i];
            for k in 0..i {
                acc -= row[k] * rhs[k];
            }
            rhs[i] = acc / row[i];
        }
    }

    /// Solves `selfᴴ · y = rhs` for a single column by back substitution.
    pub fn solve_upper_adjoint(&self, rhs: &mut [T]) {
        let c = &self.inner;
        for i in (0..c.rows).rev() {
            let mut acc = rhs[i];
            for k in i + 1..c.rows {
                acc -= c[(k, i)].conj() * rhs[k];
            }
            rhs[i] = acc / c[(i, i)];
        }
    }
}

/// Returns `a · aᴴ`.
///
/// Only the lower triangle is accumulated; the upper triangle is its exact
/// conjugate mirror and the diagonal is exactly real.
pub fn gram_hermitian<T: Scalar>(a: &DenseMatrix<T>) -> DenseMatrix<T> {
    let n = a.rows;
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let ri = a.row(i);
        for j in 0..i {
            let v = dot_conj(ri, a.row(j));
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
        let d: f64 = ri.iter().map(|v| v.abs_sq()).sum();
        out[(i, i)] = T::from_real(d);
    }
    out
}

/// Lower Cholesky factor `C` with `C·Cᴴ = h` and a positive real diagonal.
pub fn cholesky_lower<T: Scalar>(h: &DenseMatrix<T>) -> Result<LowerTriangularFactor<T>> {
    cholesky_lower_with_reference(h, 0.0)
}

/// Same as [`cholesky_lower`], but pivots are judged against at least
/// `PIVOT_EPS * reference`.
///
/// A caller that knows the energy of the data behind `h` passes it here so
/// that a Gram matrix which is uniformly tiny relative to that data (for
/// example the residual Gram of an exact fit) is reported as singular.
pub fn cholesky_lower_with_reference<T: Scalar>(
    h: &DenseMatrix<T>,
    reference: f64,
) -> Result<LowerTriangularFactor<T>> {
    if !h.is_square() {
        return Err(SvarError::DimensionMismatch(format!(
            "Cholesky needs a square matrix, got {}x{}",
            h.rows, h.cols
        )));
    }
    check_hermitian(h)?;
    let n = h.rows;
    let mut c = DenseMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let threshold = PIVOT_EPS * reference.max(h[(j, j)].re()).max(0.0);
        let pivot = h[(j, j)].re() - c.row(j)[..j].iter().map(|v| v.abs_sq()).sum::<f64>();
        if pivot.is_nan() || pivot <= threshold {
            return Err(SvarError::NotPositiveDefinite {
                pivot: j,
                value: pivot,
                threshold,
            });
        }
        let d = pivot.sqrt();
        c[(j, j)] = T::from_real(d);
        let inv_d = 1.0 / d;
        for i in j + 1..n {
            let s = dot_conj(&c.row(i)[..j], &c.row(j)[..j]);
            c[(i, j)] = (h[(i, j)] - s).scale(inv_d);
        }
    }
    Ok(LowerTriangularFactor { inner: c })
}

fn check_hermitian<T: Scalar>(h: &DenseMatrix<T>) -> Result<()> {
    let tol = HERMITIAN_TOL * h.max_abs();
    for i in 0..h.rows {
        for j in 0..=i {
            if (h[(i, j)] - h[(j, i)].conj()).abs() > tol {
                return Err(SvarError::NotHermitian { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Inverse of a lower-triangular factor; the result is again lower
/// triangular with a positive real diagonal.
pub fn invert_lower<T: Scalar>(c: &LowerTriangularFactor<T>) -> LowerTriangularFactor<T> {
    let c = &c.inner;
    let n = c.rows;
    let mut u = DenseMatrix::<T>::zeros(n, n);
    // Row i of U from rows 0..i: U[i][j] = -(Σ_{k=j}^{i-1} C[i][k] U[k][j]) / C[i][i].
    for i in 0..n {
        let inv_d = 1.0 / c[(i, i)].re();
        u[(i, i)] = T::from_real(inv_d);
        let ci = c.row(i);
        for j in 0..i {
            let mut acc = T::zero();
            for k in j..i {
                acc += ci[k] * u[(k, j)];
            }
            u[(i, j)] = (-acc).scale(inv_d);
        }
    }
    LowerTriangularFactor { inner: u }
}

/// Solves `y · h = b` for `y` by factoring `h = C·Cᴴ` (right division).
pub fn solve_hpd<T: Scalar>(h: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    solve_hpd_with_reference(h, b, 0.0)
}

pub(crate) fn solve_hpd_with_reference<T: Scalar>(
    h: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    reference: f64,
) -> Result<DenseMatrix<T>> {
    if b.cols != h.rows {
        return Err(SvarError::DimensionMismatch(format!(
            "right-hand side has {} columns, system has dimension {}",
            b.cols, h.rows
        )));
    }
    let c = cholesky_lower_with_reference(h, reference)?;
    let mut y = DenseMatrix::zeros(b.rows, b.cols);
    let mut work = vec![T::zero(); b.cols];
    for r in 0..b.rows {
        // h yᴴ = bᴴ since h is Hermitian.
        for (w, &v) in work.iter_mut().zip(b.row(r)) {
            *w = v.conj();
        }
        c.solve_lower(&mut work);
        c.solve_upper_adjoint(&mut work);
        for (o, &w) in y.row_mut(r).iter_mut().zip(&work) {
            *o = w.conj();
        }
    }
    Ok(y)
}
