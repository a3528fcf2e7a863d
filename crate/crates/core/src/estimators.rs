//! The two SVAR estimation pipelines.
//!
//! * Least squares: fit the reduced form `X = A S + V`, then whiten with the
//!   inverse Cholesky factor of `V Vᴴ`, which is `L`.
//! * Large inverse Cholesky: factor `T Tᴴ` once and read `L`, `R_i` and `t`
//!   directly from the last `M` rows of the inverse factor `U`.
//!
//! Both share the same Cholesky kernel and the positive-diagonal convention,
//! so in exact arithmetic they return identical coefficients.

use crate::error::{Result, SvarError};
use crate::linalg::{
    cholesky_lower, cholesky_lower_with_reference, gram_hermitian, invert_lower, solve_hpd_with_reference, DenseMatrix,
};
use crate::model::{
    build_regressand, build_regressor_s, build_regressor_t, rvar_residuals, ModelOrder, RvarCoefficients, SignalMatrix,
    SvarCoefficients,
};
use crate::scalar::Scalar;

/// Discrepancy above which [`fit_both`] results should be treated as disagreeing.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

/// Which estimation route to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    LeastSquares,
    LargeInverseCholesky,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LeastSquares => "ls",
            Method::LargeInverseCholesky => "lic",
        }
    }
}

/// Output of [`fit_both`].
#[derive(Clone, Debug, PartialEq)]
pub struct BothFits<T> {
    pub ls: SvarCoefficients<T>,
    pub lic: SvarCoefficients<T>,
    pub discrepancy: f64,
}

fn check_samples<T: Scalar>(x: &SignalMatrix<T>, k: ModelOrder, needed: usize, method: &'static str) -> Result<()> {
    if x.samples() <= k.0 {
        return Err(SvarError::OrderTooLarge {
            order: k.0,
            samples: x.samples(),
        });
    }
    let available = x.samples() - k.0;
    if available < needed {
        return Err(SvarError::InsufficientSamples {
            method,
            needed,
            available,
        });
    }
    Ok(())
}

fn max_row_energy<T: Scalar>(x: &DenseMatrix<T>) -> f64 {
    (0..x.rows())
        .map(|i| x.row(i).iter().map(|v| v.abs_sq()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Least-squares reduced-form fit: `A = X Sᴴ (S Sᴴ)⁻¹`, `V = X - A S`.
///
/// `(S Sᴴ)⁻¹` is never formed; the normal equations are solved through the
/// Cholesky factor of `S Sᴴ`.
pub fn fit_rvar_ls<T: Scalar>(x: &SignalMatrix<T>, k: ModelOrder) -> Result<RvarCoefficients<T>> {
    let m = x.branches();
    check_samples(x, k, m * k.0 + 1, "least squares")?;
    let s = build_regressor_s(x, k)?;
    let xs = build_regressand(x, k)?;
    let gram = gram_hermitian(&s);
    let rhs = xs.mul_adjoint(&s)?;
    let a = solve_hpd_with_reference(&gram, &rhs, 0.0).map_err(|e| match e {
        SvarError::NotPositiveDefinite { .. } => SvarError::RankDeficient { gram: "SS^H" },
        other => other,
    })?;

    let c = a.column(0);
    let lags = (0..k.0).map(|i| a.block(0, 1 + i * m, m, m)).collect();
    let model = RvarCoefficients::new(c, lags)?;
    let v = rvar_residuals(&model, x)?;
    model
        .with_residuals(v)
        .map(|fit| fit.with_reference_energy(max_row_energy(&xs)))
}

/// Whitens a fitted reduced form: `L` is the inverse of the lower Cholesky
/// factor of `V Vᴴ`, then `R_i = L A_i` and `t = L c`.
pub fn rvar_to_svar<T: Scalar>(m: &RvarCoefficients<T>) -> Result<SvarCoefficients<T>> {
    let v = m
        .v()
        .ok_or_else(|| SvarError::InvalidArgument("reduced-form model carries no residuals".into()))?;
    let chol = cholesky_lower_with_reference(&gram_hermitian(v), m.reference_energy())?;
    let l = invert_lower(&chol).into_matrix();
    let r = m.a().iter().map(|ai| l.matmul(ai)).collect::<Result<Vec<_>>>()?;
    let t = l.matmul(&DenseMatrix::column_vector(m.c())?)?.into_vec();
    SvarCoefficients::new(l, r, t)
}

/// `rvar_to_svar ∘ fit_rvar_ls`, reporting a singular residual Gram as
/// [`SvarError::RankDeficient`].
pub fn fit_svar_ls<T: Scalar>(x: &SignalMatrix<T>, k: ModelOrder) -> Result<SvarCoefficients<T>> {
    let reduced = fit_rvar_ls(x, k)?;
    rvar_to_svar(&reduced).map_err(|e| match e {
        SvarError::NotPositiveDefinite { .. } => SvarError::RankDeficient { gram: "VV^H" },
        other => other,
    })
}

/// Large inverse Cholesky fit.
///
/// With `U` the inverse of the lower Cholesky factor of `T Tᴴ` and 1-based
/// index sets `α = MK+2 … M(K+1)+1`, `β_j = (j-1)M+2 … jM+1`:
/// `L = U(α, α)`, `R_i = -U(α, β_{K-i+1})`, `t = -U(α, 1)`.
pub fn fit_svar_lic<T: Scalar>(x: &SignalMatrix<T>, k: ModelOrder) -> Result<SvarCoefficients<T>> {
    let m = x.branches();
    let kk = k.0;
    check_samples(x, k, m * (kk + 1) + 1, "large inverse Cholesky")?;
    let t = build_regressor_t(x, k)?;
    let chol = cholesky_lower(&gram_hermitian(&t)).map_err(|e| match e {
        SvarError::NotPositiveDefinite { .. } => SvarError::RankDeficient { gram: "TT^H" },
        other => other,
    })?;
    let u = invert_lower(&chol).into_matrix();

    // 0-based: α starts at row/col 1 + MK, β_j at col 1 + (j-1)M.
    let alpha = 1 + m * kk;
    let l = u.block(alpha, alpha, m, m);
    let r = (1..=kk)
        .map(|i| {
            let j = kk - i + 1;
            u.block(alpha, 1 + (j - 1) * m, m, m).neg()
        })
        .collect();
    let intercept = (0..m).map(|row| -u[(alpha + row, 0)]).collect();
    SvarCoefficients::new(l, r, intercept)
}

/// Fits with the chosen method.
pub fn fit_svar<T: Scalar>(x: &SignalMatrix<T>, k: ModelOrder, method: Method) -> Result<SvarCoefficients<T>> {
    match method {
        Method::LeastSquares => fit_svar_ls(x, k),
        Method::LargeInverseCholesky => fit_svar_lic(x, k),
    }
}

/// Maximum over `L`, each `R_i` and `t` of `‖a - b‖_F / max(‖a‖_F, 1)`.
pub fn coefficient_discrepancy<T: Scalar>(a: &SvarCoefficients<T>, b: &SvarCoefficients<T>) -> Result<f64> {
    if a.branches() != b.branches() || a.order() != b.order() {
        return Err(SvarError::DimensionMismatch("models have different shapes".into()));
    }
    let rel = |x: &DenseMatrix<T>, y: &DenseMatrix<T>| -> Result<f64> {
        Ok(x.sub(y)?.frobenius_norm() / x.frobenius_norm().max(1.0))
    };
    let mut worst = rel(a.l(), b.l())?;
    for (ra, rb) in a.r().iter().zip(b.r()) {
        worst = worst.max(rel(ra, rb)?);
    }
    let ta = DenseMatrix::column_vector(a.t())?;
    let tb = DenseMatrix::column_vector(b.t())?;
    Ok(worst.max(rel(&ta, &tb)?))
}

/// Runs both routes and reports their [`coefficient_discrepancy`].
pub fn fit_both<T: Scalar>(x: &SignalMatrix<T>, k: ModelOrder) -> Result<BothFits<T>> {
    let ls = fit_svar_ls(x, k)?;
    let lic = fit_svar_lic(x, k)?;
    let discrepancy = coefficient_discrepancy(&ls, &lic)?;
    Ok(BothFits { ls, lic, discrepancy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{svar_residuals, whitening_error};
    use crate::synthetic::{random_stable_svar, simulate_series};
    use num_complex::Complex64;

    fn series(rows: &[&[f64]]) -> SignalMatrix<f64> {
        SignalMatrix::new(DenseMatrix::from_rows(rows).unwrap()).unwrap()
    }

    fn ramp(n: usize) -> SignalMatrix<f64> {
        let v: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        series(&[&v])
    }

    fn stable_series<T: Scalar>(m: usize, k: usize, n: usize, seed: u64) -> (SvarCoefficients<T>, SignalMatrix<T>) {
        let model = random_stable_svar::<T>(m, k, seed, 0.9).unwrap();
        let x = simulate_series(&model, n, seed.wrapping_add(1000), 10 * m * k).unwrap();
        (model, x)
    }

    #[test]
    fn exact_ar1_interpolation() {
        // x(n) = 1 + 0.5 x(n-1), x(1) = 0: noise-free, distinct samples.
        let mut v = vec![0.0];
        for _ in 1..20 {
            v.push(1.0 + 0.5 * v.last().unwrap());
        }
        let x = series(&[&v]);
        let fit = fit_rvar_ls(&x, ModelOrder(1)).unwrap();
        assert!((fit.a()[0][(0, 0)] - 0.5).abs() < 1e-10);
        assert!((fit.c()[0] - 1.0).abs() < 1e-10);
        assert!(fit.v().unwrap().max_abs() < 1e-10);
        assert!(matches!(rvar_to_svar(&fit), Err(SvarError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn ramp_is_rank_deficient() {
        let x = ramp(50);
        let fit = fit_rvar_ls(&x, ModelOrder(1)).unwrap();
        assert!(fit.v().unwrap().max_abs() < 1e-9);
        assert!(matches!(rvar_to_svar(&fit), Err(SvarError::NotPositiveDefinite { .. })));
        assert_eq!(
            fit_svar_ls(&x, ModelOrder(1)),
            Err(SvarError::RankDeficient { gram: "VV^H" })
        );
        assert_eq!(
            fit_svar_lic(&x, ModelOrder(1)),
            Err(SvarError::RankDeficient { gram: "TT^H" })
        );
        assert!(fit_both(&x, ModelOrder(1)).is_err());
    }

    #[test]
    fn constant_branch_is_rank_deficient_for_ls() {
        let (_, x) = stable_series::<f64>(1, 1, 64, 3);
        let mut rows = vec![x.data().row(0).to_vec(), vec![2.0; 64]];
        rows[1][0] = 2.0;
        let x = SignalMatrix::new(DenseMatrix::from_rows(&rows).unwrap()).unwrap();
        assert_eq!(
            fit_rvar_ls(&x, ModelOrder(1)),
            Err(SvarError::RankDeficient { gram: "SS^H" })
        );
        assert_eq!(
            fit_svar_lic(&x, ModelOrder(1)),
            Err(SvarError::RankDeficient { gram: "TT^H" })
        );
    }

    #[test]
    fn sample_requirements() {
        let (_, x) = stable_series::<f64>(2, 1, 6, 1);
        // LS needs N-K >= 3, LIC needs N-K >= 5 for M=2, K=1.
        assert!(fit_rvar_ls(&x, ModelOrder(1)).is_ok());
        assert_eq!(
            fit_svar_lic(&x, ModelOrder(2)),
            Err(SvarError::InsufficientSamples {
                method: "large inverse Cholesky",
                needed: 7,
                available: 4
            })
        );
        let short = x.window(0, 3);
        let short = SignalMatrix::new(short).unwrap();
        assert!(matches!(
            fit_rvar_ls(&short, ModelOrder(1)),
            Err(SvarError::InsufficientSamples {
                needed: 3,
                available: 2,
                ..
            })
        ));
        assert!(matches!(
            fit_svar_lic(&short, ModelOrder(3)),
            Err(SvarError::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn reconstruction_identity() {
        let (_, x) = stable_series::<f64>(3, 2, 300, 11);
        let fit = fit_rvar_ls(&x, ModelOrder(2)).unwrap();
        let s = build_regressor_s(&x, ModelOrder(2)).unwrap();
        let xs = build_regressand(&x, ModelOrder(2)).unwrap();
        let mut a = DenseMatrix::zeros(3, 7);
        a.set_block(0, 0, &DenseMatrix::column_vector(fit.c()).unwrap());
        for (i, ai) in fit.a().iter().enumerate() {
            a.set_block(0, 1 + 3 * i, ai);
        }
        let back = a.matmul(&s).unwrap().add(fit.v().unwrap()).unwrap();
        assert!(back.sub(&xs).unwrap().frobenius_norm() <= 1e-10 * xs.frobenius_norm());

        // Normal equations: V ⟂ S.
        let vs = fit.v().unwrap().mul_adjoint(&s).unwrap();
        assert!(vs.frobenius_norm() <= 1e-8 * xs.frobenius_norm() * s.frobenius_norm());
        assert_eq!(fit.v().unwrap(), &rvar_residuals(&fit, &x).unwrap());
    }

    #[test]
    fn white_residuals_leave_coefficients_unchanged() {
        let v = DenseMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let a1 = DenseMatrix::from_rows(&[[0.3, -0.1], [0.2, 0.4]]).unwrap();
        let m = RvarCoefficients::new(vec![1.5, -2.0], vec![a1.clone()])
            .unwrap()
            .with_residuals(v)
            .unwrap();
        let s = rvar_to_svar(&m).unwrap();
        assert_eq!(s.l(), &DenseMatrix::identity(2));
        assert_eq!(s.r()[0], a1);
        assert_eq!(s.t(), &[1.5, -2.0]);
    }

    #[test]
    fn scalar_whitening_closed_form() {
        let v = DenseMatrix::from_rows(&[[1.0, -2.0, 0.5]]).unwrap();
        let vv: f64 = 1.0 + 4.0 + 0.25;
        let m = RvarCoefficients::new(vec![0.7], vec![DenseMatrix::from_rows(&[[0.4]]).unwrap()])
            .unwrap()
            .with_residuals(v)
            .unwrap();
        let s = rvar_to_svar(&m).unwrap();
        let l = 1.0 / vv.sqrt();
        assert!((s.l()[(0, 0)] - l).abs() < 1e-15);
        assert!((s.r()[0][(0, 0)] - 0.4 * l).abs() < 1e-15);
        assert!((s.t()[0] - 0.7 * l).abs() < 1e-15);
    }

    #[test]
    fn rvar_to_svar_requires_residuals() {
        let m = RvarCoefficients::new(vec![0.0], vec![]).unwrap();
        assert!(matches!(rvar_to_svar(&m), Err(SvarError::InvalidArgument(_))));
    }

    #[test]
    fn whitening_identity_on_fitted_model() {
        let (_, x) = stable_series::<f64>(3, 2, 400, 5);
        let reduced = fit_rvar_ls(&x, ModelOrder(2)).unwrap();
        let s = rvar_to_svar(&reduced).unwrap();
        let vv = gram_hermitian(reduced.v().unwrap());
        let white = s.l().matmul(&vv).unwrap().mul_adjoint(s.l()).unwrap();
        assert!(white.sub(&DenseMatrix::identity(3)).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn lic_matches_ls_scalar_ar1() {
        let (_, x) = stable_series::<f64>(1, 1, 512, 42);
        let ls = fit_svar_ls(&x, ModelOrder(1)).unwrap();
        let lic = fit_svar_lic(&x, ModelOrder(1)).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs();
        assert!(rel(ls.l()[(0, 0)], lic.l()[(0, 0)]) < 1e-8);
        assert!(rel(ls.r()[0][(0, 0)], lic.r()[0][(0, 0)]) < 1e-8);
        assert!(rel(ls.t()[0], lic.t()[0]) < 1e-8);
    }

    #[test]
    fn both_paths_whiten_residuals() {
        for (m, k, seed) in [(1, 0, 1u64), (2, 1, 2), (3, 3, 3), (4, 2, 4)] {
            let (_, x) = stable_series::<f64>(m, k, 64 * (m * (k + 1) + 1), seed);
            let both = fit_both(&x, ModelOrder(k)).unwrap();
            assert!(both.discrepancy < EQUIVALENCE_TOL, "discrepancy {}", both.discrepancy);
            for fit in [&both.ls, &both.lic] {
                let w = svar_residuals(fit, &x).unwrap();
                assert!(whitening_error(&w) < 1e-8);
            }
        }
    }

    #[test]
    fn complex_field_paths_agree() {
        for (m, k, seed) in [(1, 1, 7u64), (2, 2, 8), (3, 1, 9)] {
            let (_, x) = stable_series::<Complex64>(m, k, 64 * (m * (k + 1) + 1), seed);
            let both = fit_both(&x, ModelOrder(k)).unwrap();
            assert!(both.discrepancy < EQUIVALENCE_TOL, "discrepancy {}", both.discrepancy);
            let w = svar_residuals(&both.lic, &x).unwrap();
            assert!(whitening_error(&w) < 1e-8);
            // L keeps a real positive diagonal in the complex field.
            for i in 0..m {
                assert_eq!(both.lic.l()[(i, i)].im, 0.0);
                assert!(both.lic.l()[(i, i)].re > 0.0);
            }
        }
    }

    #[test]
    fn lic_l_is_lower_triangular() {
        let (_, x) = stable_series::<f64>(4, 2, 1000, 21);
        let fit = fit_svar_lic(&x, ModelOrder(2)).unwrap();
        for i in 0..4 {
            assert!(fit.l()[(i, i)] > 0.0);
            for j in i + 1..4 {
                assert_eq!(fit.l()[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn scale_equivariance() {
        let (_, x) = stable_series::<f64>(2, 2, 600, 17);
        let gamma = 3.7;
        let base = fit_svar_lic(&x, ModelOrder(2)).unwrap();
        let scaled = fit_svar_lic(&x.scaled(gamma), ModelOrder(2)).unwrap();
        let rel = |a: &DenseMatrix<f64>, b: &DenseMatrix<f64>| a.sub(b).unwrap().frobenius_norm() / a.frobenius_norm();
        assert!(rel(&base.l().scaled(1.0 / gamma), scaled.l()) < 1e-9);
        for (rb, rs) in base.r().iter().zip(scaled.r()) {
            assert!(rel(&rb.scaled(1.0 / gamma), rs) < 1e-9);
        }
        let tb = DenseMatrix::column_vector(base.t()).unwrap();
        let ts = DenseMatrix::column_vector(scaled.t()).unwrap();
        assert!(rel(&tb, &ts) < 1e-9);
    }

    #[test]
    fn fit_both_is_deterministic() {
        let (_, x) = stable_series::<f64>(2, 1, 300, 99);
        let a = fit_both(&x, ModelOrder(1)).unwrap();
        let b = fit_both(&x, ModelOrder(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn near_singular_input_never_disagrees_silently() {
        let (_, x) = stable_series::<f64>(1, 1, 400, 5);
        let base = x.data().row(0).to_vec();
        for eps in [1e-3, 1e-6, 1e-9, 1e-12] {
            let twin: Vec<f64> = base
                .iter()
                .enumerate()
                .map(|(i, v)| v + eps * ((i as f64) * 0.7).sin())
                .collect();
            let x2 = SignalMatrix::new(DenseMatrix::from_rows(&[base.clone(), twin]).unwrap()).unwrap();
            match fit_both(&x2, ModelOrder(1)) {
                Ok(both) => {
                    let recomputed = coefficient_discrepancy(&both.ls, &both.lic).unwrap();
                    assert_eq!(recomputed, both.discrepancy);
                    assert!(both.discrepancy.is_finite());
                }
                Err(e) => assert!(matches!(e, SvarError::RankDeficient { .. }), "{e}"),
            }
        }
    }

    #[test]
    fn zero_order_is_pure_whitening() {
        let (_, x) = stable_series::<f64>(3, 0, 200, 8);
        let both = fit_both(&x, ModelOrder(0)).unwrap();
        assert!(both.lic.r().is_empty());
        assert!(both.discrepancy < EQUIVALENCE_TOL);
    }
}
