use proptest::prelude::*;
use svar_core::{
    default_burn_in, fit_rvar_ls, fit_svar_lic, random_stable_svar, rvar_to_svar, simulate_series, svar_residuals,
    whitening_error, Complex64, DenseMatrix, ModelOrder, Scalar,
};

fn rel<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / a.frobenius_norm().max(f64::MIN_POSITIVE)
}

fn check_equivalence<T: Scalar>(m: usize, k: usize, seed: u64, radius: f64) -> Result<(), TestCaseError> {
    let n = 64 * (m * (k + 1) + 1);
    let model = random_stable_svar::<T>(m, k, seed, radius).unwrap();
    let x = simulate_series(&model, n, seed ^ 0xabc, default_burn_in(m, k)).unwrap();
    let ls = rvar_to_svar(&fit_rvar_ls(&x, ModelOrder(k)).unwrap()).unwrap();
    let lic = fit_svar_lic(&x, ModelOrder(k)).unwrap();

    prop_assert!(rel(ls.l(), lic.l()) < 1e-8, "L differs by {}", rel(ls.l(), lic.l()));
    for (a, b) in ls.r().iter().zip(lic.r()) {
        prop_assert!(rel(a, b) < 1e-8);
    }
    let (ta, tb) = (
        DenseMatrix::column_vector(ls.t()).unwrap(),
        DenseMatrix::column_vector(lic.t()).unwrap(),
    );
    prop_assert!(rel(&ta, &tb) < 1e-8);

    for fit in [&ls, &lic] {
        prop_assert!(whitening_error(&svar_residuals(fit, &x).unwrap()) < 1e-8);
        prop_assert!(fit.l().is_lower_triangular());
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ls_and_lic_agree_real(m in 1usize..=4, k in 0usize..=4, seed in any::<u64>(), radius in 0.1f64..0.9) {
        check_equivalence::<f64>(m, k, seed, radius)?;
    }

    #[test]
    fn ls_and_lic_agree_complex(m in 1usize..=3, k in 0usize..=3, seed in any::<u64>(), radius in 0.1f64..0.9) {
        check_equivalence::<Complex64>(m, k, seed, radius)?;
    }
}

#[test]
fn larger_samples_recover_the_generating_model() {
    let (m, k) = (3, 1);
    let truth = random_stable_svar::<f64>(m, k, 31, 0.6).unwrap();
    let n = 50_000;
    let x = simulate_series(&truth, n, 32, default_burn_in(m, k)).unwrap();
    let fit = fit_svar_lic(&x, ModelOrder(k)).unwrap().scaled(((n - k) as f64).sqrt());
    assert!(rel(truth.l(), fit.l()) < 0.03);
    assert!(rel(&truth.r()[0], &fit.r()[0]) < 0.05);
}
