//! Signals, SVAR/RVAR coefficient sets, the stacked regressor matrices and
//! residual diagnostics.
//!
//! Sample indices in the docs are 1-based: column `n - 1` of a
//! [`SignalMatrix`] holds `x(n)`.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Result, SvarError};
use crate::linalg::{gram_hermitian, invert_lower, DenseMatrix, LowerTriangularFactor};
use crate::scalar::Scalar;

/// `M` signal branches by `N` samples; column `n - 1` is `x(n)`.
#[derive(Clone, PartialEq, Debug)]
pub struct SignalMatrix<T> {
    data: DenseMatrix<T>,
}

impl<T: Scalar> SignalMatrix<T> {
    /// Wraps an `M x N` matrix (branches by samples).
    pub fn new(data: DenseMatrix<T>) -> Result<Self> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(SvarError::DimensionMismatch("empty signal".into()));
        }
        if let Some(pos) = data.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(SvarError::NonFinite {
                row: pos / data.cols(),
                col: pos % data.cols(),
            });
        }
        Ok(Self { data })
    }

    /// Builds a signal from time-major rows (one row per sample), the
    /// layout of the CSV files read by the CLI.
    pub fn from_time_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        Self::new(DenseMatrix::from_rows(rows)?.transpose())
    }

    pub fn branches(&self) -> usize {
        self.data.rows()
    }

    pub fn samples(&self) -> usize {
        self.data.cols()
    }

    pub fn data(&self) -> &DenseMatrix<T> {
        &self.data
    }

    /// `x(n)` for 1-based `n`.
    pub fn sample(&self, n: usize) -> Vec<T> {
        self.data.column(n - 1)
    }

    /// Columns `first..first + len` (0-based) as an `M x len` matrix.
    pub fn window(&self, first: usize, len: usize) -> DenseMatrix<T> {
        self.data.block(0, first, self.branches(), len)
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            data: self.data.scaled(f),
        }
    }
}

/// Autoregressive order `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelOrder(pub usize);

impl ModelOrder {
    pub fn get(self) -> usize {
        self.0
    }
}

impl From<usize> for ModelOrder {
    fn from(k: usize) -> Self {
        Self(k)
    }
}

/// Coefficients of `L x(n) = t + Σ R_i x(n-i) + w(n)`.
#[derive(Clone, PartialEq, Debug)]
pub struct SvarCoefficients<T> {
    l: LowerTriangularFactor<T>,
    r: Vec<DenseMatrix<T>>,
    t: Vec<T>,
}

impl<T: Scalar> SvarCoefficients<T> {
    /// `l` must be lower triangular with a positive real diagonal; every
    /// `R_i` must be `M x M` and `t` of length `M`.
    pub fn new(l: DenseMatrix<T>, r: Vec<DenseMatrix<T>>, t: Vec<T>) -> Result<Self> {
        let l = LowerTriangularFactor::new(l)?;
        let m = l.dim();
        if r.iter().any(|ri| ri.shape() != (m, m)) {
            return Err(SvarError::DimensionMismatch(format!("every R_i must be {m}x{m}")));
        }
        if t.len() != m {
            return Err(SvarError::DimensionMismatch(format!(
                "intercept has length {}, expected {m}",
                t.len()
            )));
        }
        Ok(Self { l, r, t })
    }

    pub fn branches(&self) -> usize {
        self.l.dim()
    }

    pub fn order(&self) -> ModelOrder {
        ModelOrder(self.r.len())
    }

    pub fn l(&self) -> &DenseMatrix<T> {
        self.l.as_matrix()
    }

    pub fn l_factor(&self) -> &LowerTriangularFactor<T> {
        &self.l
    }

    /// `R_1 … R_K`; `r()[i - 1]` is `R_i`.
    pub fn r(&self) -> &[DenseMatrix<T>] {
        &self.r
    }

    pub fn t(&self) -> &[T] {
        &self.t
    }

    /// Multiplies every coefficient by `f > 0`. With the unnormalized
    /// whitening convention (`Σ w wᴴ = I`), a fit over `N - K` samples of
    /// unit-variance shocks estimates the generating model scaled by
    /// `1/√(N-K)`; `scaled(√(N-K))` undoes that.
    pub fn scaled(&self, f: f64) -> Self {
        assert!(f > 0.0, "scale factor must be positive");
        Self {
            l: LowerTriangularFactor::new(self.l.as_matrix().scaled(f))
                .expect("positive scaling keeps the factor valid"),
            r: self.r.iter().map(|ri| ri.scaled(f)).collect(),
            t: self.t.iter().map(|&v| v.scale(f)).collect(),
        }
    }

    /// The reduced form `A_i = L⁻¹ R_i`, `c = L⁻¹ t`, without residuals.
    pub fn to_reduced(&self) -> RvarCoefficients<T> {
        let l_inv = invert_lower(&self.l);
        let li = l_inv.as_matrix();
        let a = self.r.iter().map(|ri| li.matmul(ri).expect("square blocks")).collect();
        let mut c = self.t.clone();
        self.l.solve_lower(&mut c);
        RvarCoefficients::new(c, a).expect("dimensions inherited from a valid model")
    }
}

/// Coefficients of `x(n) = c + Σ A_i x(n-i) + v(n)` and, after fitting, the
/// residual matrix `V`.
#[derive(Clone, PartialEq, Debug)]
pub struct RvarCoefficients<T> {
    c: Vec<T>,
    a: Vec<DenseMatrix<T>>,
    v: Option<DenseMatrix<T>>,
    reference_energy: f64,
}

impl<T: Scalar> RvarCoefficients<T> {
    pub fn new(c: Vec<T>, a: Vec<DenseMatrix<T>>) -> Result<Self> {
        let m = c.len();
        if m == 0 {
            return Err(SvarError::DimensionMismatch("empty intercept".into()));
        }
        if a.iter().any(|ai| ai.shape() != (m, m)) {
            return Err(SvarError::DimensionMismatch(format!("every A_i must be {m}x{m}")));
        }
        Ok(Self {
            c,
            a,
            v: None,
            reference_energy: 0.0,
        })
    }

    /// Attaches residuals `V` (`M x (N-K)`).
    pub fn with_residuals(mut self, v: DenseMatrix<T>) -> Result<Self> {
        if v.rows() != self.c.len() {
            return Err(SvarError::DimensionMismatch(format!(
                "residuals have {} rows, model has {} branches",
                v.rows(),
                self.c.len()
            )));
        }
        self.v = Some(v);
        Ok(self)
    }

    /// Energy scale of the data the residuals came from (largest diagonal
    /// entry of `X Xᴴ`). Residual Gram pivots are judged against it when
    /// whitening, so an exact fit is reported as singular.
    pub(crate) fn with_reference_energy(mut self, e: f64) -> Self {
        self.reference_energy = e;
        self
    }

    pub(crate) fn reference_energy(&self) -> f64 {
        self.reference_energy
    }

    pub fn branches(&self) -> usize {
        self.c.len()
    }

    pub fn order(&self) -> ModelOrder {
        ModelOrder(self.a.len())
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    /// `A_1 … A_K`; `a()[i - 1]` is `A_i`.
    pub fn a(&self) -> &[DenseMatrix<T>] {
        &self.a
    }

    pub fn v(&self) -> Option<&DenseMatrix<T>> {
        self.v.as_ref()
    }
}

fn check_order<T: Scalar>(x: &SignalMatrix<T>, k: ModelOrder) -> Result<()> {
    if x.samples() <= k.0 {
        return Err(SvarError::OrderTooLarge {
            order: k.0,
            samples: x.samples(),
        });
    }
    Ok(())
}

/// `S`, `(MK+1) x (N-K)`: a ones row, then lag blocks 1..K. Lag block `j`
/// holds `x(K+1-j) … x(N-j)`.
pub fn build_regressor_s<T: Scalar>(x: &SignalMatrix<T>, k: ModelOrder) -> Result<DenseMatrix<T>> {
    check_order(x, k)?;
    let (m, k, cols) = (x.branches(), k.0, x.samples() - k.0);
    let mut s = DenseMatrix::zeros(m * k + 1, cols);
    s.row_mut(0).fill(T::one());
    for lag in 1..=k {
        s.set_block(1 + (lag - 1) * m, 0, &x.window(k - lag, cols));
    }
    Ok(s)
}

/// `T`, `(M(K+1)+1) x (N-K)`: a ones row, then K+1 blocks where block `j`
/// (1-based) holds `x(j) … x(N-K+j-1)`. Block `j` carries lag `K+1-j`, so the
/// final block is `X = [x(K+1) … x(N)]`.
pub fn build_regressor_t<T: Scalar>(x: &SignalMatrix<T>, k: ModelOrder) -> Result<DenseMatrix<T>> {
    check_order(x, k)?;
    let (m, k, cols) = (x.branches(), k.0, x.samples() - k.0);
    let mut t = DenseMatrix::zeros(m * (k + 1) + 1, cols);
    t.row_mut(0).fill(T::one());
    for j in 0..=k {
        t.set_block(1 + j * m, 0, &x.window(j, cols));
    }
    Ok(t)
}

/// `X = [x(K+1) … x(N)]`.
pub fn build_regressand<T: Scalar>(x: &SignalMatrix<T>, k: ModelOrder) -> Result<DenseMatrix<T>> {
    check_order(x, k)?;
    Ok(x.window(k.0, x.samples() - k.0))
}

fn residuals_with<T: Scalar>(
    lead: Option<&DenseMatrix<T>>,
    intercept: &[T],
    lags: &[DenseMatrix<T>],
    x: &SignalMatrix<T>,
) -> Result<DenseMatrix<T>> {
    if x.branches() != intercept.len() {
        return Err(SvarError::DimensionMismatch(format!(
            "signal has {} branches, model has {}",
            x.branches(),
            intercept.len()
        )));
    }
    let k = ModelOrder(lags.len());
    let current = build_regressand(x, k)?;
    let cols = current.cols();
    let mut w = match lead {
        Some(l) => l.matmul(&current)?,
        None => current,
    };
    for (i, ai) in lags.iter().enumerate() {
        let lagged = x.window(k.0 - (i + 1), cols);
        w = w.sub(&ai.matmul(&lagged)?)?;
    }
    for (r, &ti) in intercept.iter().enumerate() {
        for v in w.row_mut(r) {
            *v -= ti;
        }
    }
    Ok(w)
}

/// Structural residuals `w(n) = L x(n) - t - Σ R_i x(n-i)` for
/// `n = K+1 … N`, as an `M x (N-K)` matrix.
pub fn svar_residuals<T: Scalar>(m: &SvarCoefficients<T>, x: &SignalMatrix<T>) -> Result<DenseMatrix<T>> {
    residuals_with(Some(m.l()), m.t(), m.r(), x)
}

/// Reduced-form residuals `V = X - A S`.
pub fn rvar_residuals<T: Scalar>(m: &RvarCoefficients<T>, x: &SignalMatrix<T>) -> Result<DenseMatrix<T>> {
    residuals_with(None, m.c(), m.a(), x)
}

/// `‖Σ_n w(n) w(n)ᴴ - I‖_F`.
pub fn whitening_error<T: Scalar>(w: &DenseMatrix<T>) -> f64 {
    gram_hermitian(w)
        .sub(&DenseMatrix::identity(w.rows()))
        .expect("square Gram")
        .frobenius_norm()
}

/// Models that imply a reduced-form lag polynomial `A_1 … A_K`.
pub trait CompanionForm<T: Scalar> {
    fn implied_lags(&self) -> Vec<DenseMatrix<T>>;
}

impl<T: Scalar> CompanionForm<T> for RvarCoefficients<T> {
    fn implied_lags(&self) -> Vec<DenseMatrix<T>> {
        self.a.clone()
    }
}

impl<T: Scalar> CompanionForm<T> for SvarCoefficients<T> {
    fn implied_lags(&self) -> Vec<DenseMatrix<T>> {
        self.to_reduced().a
    }
}

/// Spectral radius of the `MK x MK` companion matrix of the implied reduced
/// form; 0 for `K = 0`.
pub fn companion_spectral_radius<T: Scalar, C: CompanionForm<T>>(model: &C) -> f64 {
    spectral_radius_of_lags(&model.implied_lags())
}

pub(crate) fn spectral_radius_of_lags<T: Scalar>(lags: &[DenseMatrix<T>]) -> f64 {
    let Some(first) = lags.first() else {
        return 0.0;
    };
    let m = first.rows();
    let dim = m * lags.len();
    let mut comp = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, ai) in lags.iter().enumerate() {
        for r in 0..m {
            for c in 0..m {
                comp[(r, i * m + c)] = ai[(r, c)].to_complex();
            }
        }
    }
    for r in m..dim {
        comp[(r, r - m)] = Complex64::new(1.0, 0.0);
    }
    if comp.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return 0.0;
    }
    match Schur::try_new(comp.clone(), 1e-14, 10_000) {
        Some(schur) => {
            let (_, tri) = schur.unpack();
            (0..dim).map(|i| tri[(i, i)].norm()).fold(0.0, f64::max)
        }
        None => gelfand_radius(comp),
    }
}

/// `lim ‖Cᵖ‖^(1/p)` by repeated normalized squaring.
fn gelfand_radius(mut c: DMatrix<Complex64>) -> f64 {
    let mut log_radius = 0.0;
    let mut weight = 1.0;
    for _ in 0..48 {
        let n = c.norm();
        if n == 0.0 {
            return 0.0;
        }
        log_radius += weight * n.ln();
        c /= Complex64::new(n, 0.0);
        c = &c * &c;
        weight *= 0.5;
    }
    log_radius.exp()
}
