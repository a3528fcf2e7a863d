//! Structural vector autoregression (SVAR) coefficient estimation.
//!
//! Given an `M`-branch series `x(1) … x(N)`, estimates `L`, `R_1 … R_K` and
//! `t` in
//!
//! ```text
//! L x(n) = t + Σ_{i=1..K} R_i x(n-i) + w(n),    Σ_n w(n) w(n)ᴴ = I_M
//! ```
//!
//! by two routes that agree to rounding error:
//!
//! * [`fit_svar_ls`]: least-squares reduced-form fit followed by whitening
//!   with the inverse Cholesky factor of the residual Gram matrix;
//! * [`fit_svar_lic`]: one Cholesky factorization of the Gram matrix of the
//!   stacked regressor `T`, reading every coefficient off the last `M` rows
//!   of its inverse.
//!
//! `L` always has a strictly positive real diagonal, which makes the
//! estimate unique (without it, `L` is only determined up to a diagonal
//! unitary factor). The whitening is unnormalized: the fitted residuals have
//! Gram matrix `I_M`, not sample covariance `I_M`.
//!
//! [`complexity`] models the multiply counts of both routes.

pub mod complexity;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod synthetic;

pub use complexity::{lic_multiply_count, ls_multiply_count, savings_ratio, MultiplyCount};
pub use error::{Result, SvarError};
pub use estimators::{
    coefficient_discrepancy, fit_both, fit_rvar_ls, fit_svar, fit_svar_lic, fit_svar_ls, rvar_to_svar, BothFits,
    Method, EQUIVALENCE_TOL,
};
pub use linalg::{cholesky_lower, gram_hermitian, invert_lower, solve_hpd, DenseMatrix, LowerTriangularFactor};
pub use model::{
    build_regressand, build_regressor_s, build_regressor_t, companion_spectral_radius, rvar_residuals, svar_residuals,
    whitening_error, CompanionForm, ModelOrder, RvarCoefficients, SignalMatrix, SvarCoefficients,
};
pub use num_complex::Complex64;
pub use scalar::Scalar;
pub use synthetic::{default_burn_in, random_stable_svar, simulate_series, simulate_series_with_noise};
