//! Seeded stable SVAR systems and simulated series.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SvarError};
use crate::linalg::DenseMatrix;
use crate::model::{spectral_radius_of_lags, SignalMatrix, SvarCoefficients};
use crate::scalar::Scalar;

/// Samples whose magnitude exceeds this abort the simulation.
pub const OVERFLOW_LIMIT: f64 = 1e12;

/// Burn-in that washes out the zero initial conditions: `10·K·M` samples.
pub fn default_burn_in(m: usize, k: usize) -> usize {
    10 * k * m
}

/// Random SVAR model of `m` branches and order `k` whose reduced-form
/// companion matrix has spectral radius just below `target_radius`.
///
/// The lag matrices `A_i` are drawn at random and rescaled to
/// `γⁱ A_i`, which multiplies every companion eigenvalue by `γ`. The
/// structural form is `R_i = L A_i` with a random lower-triangular `L`
/// whose diagonal lies in `[0.5, 1.5)`.
pub fn random_stable_svar<T: Scalar>(m: usize, k: usize, seed: u64, target_radius: f64) -> Result<SvarCoefficients<T>> {
    if !(target_radius > 0.0 && target_radius < 1.0) {
        return Err(SvarError::InvalidArgument(format!(
            "target radius must lie in (0, 1), got {target_radius}"
        )));
    }
    if m == 0 {
        return Err(SvarError::InvalidArgument("at least one branch is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = 1.0 / (m as f64).sqrt();
    let mut lags: Vec<DenseMatrix<T>> = (0..k)
        .map(|_| {
            let data = (0..m * m).map(|_| T::sample_unit(&mut rng).scale(spread)).collect();
            DenseMatrix::from_vec(m, m, data).expect("finite draws")
        })
        .collect();

    let goal = target_radius * (1.0 - 1e-6);
    let mut radius = spectral_radius_of_lags(&lags);
    if radius > 0.0 {
        let mut gamma = goal / radius;
        loop {
            let mut power = 1.0;
            for ai in lags.iter_mut() {
                power *= gamma;
                *ai = ai.scaled(power);
            }
            radius = spectral_radius_of_lags(&lags);
            if radius <= target_radius {
                break;
            }
            gamma = 0.999;
        }
    }

    let mut l = DenseMatrix::<T>::zeros(m, m);
    for i in 0..m {
        for j in 0..i {
            l[(i, j)] = T::sample_unit(&mut rng).scale(0.3);
        }
        l[(i, i)] = T::from_real(0.5 + rng.random::<f64>());
    }
    let t = (0..m).map(|_| T::sample_unit(&mut rng)).collect();
    let r = lags.iter().map(|ai| l.matmul(ai).expect("square blocks")).collect();
    SvarCoefficients::new(l, r, t)
}

/// Runs `L x(n) = t + Σ R_i x(n-i) + w(n)` forward from zero initial
/// conditions with i.i.d. unit-variance shocks, discarding `burn_in` samples.
pub fn simulate_series<T: Scalar>(
    model: &SvarCoefficients<T>,
    n: usize,
    seed: u64,
    burn_in: usize,
) -> Result<SignalMatrix<T>> {
    simulate_series_with_noise(model, n, seed, burn_in).map(|(x, _)| x)
}

/// Like [`simulate_series`], also returning the `M x n` shocks `w` that
/// drove the kept samples.
pub fn simulate_series_with_noise<T: Scalar>(
    model: &SvarCoefficients<T>,
    n: usize,
    seed: u64,
    burn_in: usize,
) -> Result<(SignalMatrix<T>, DenseMatrix<T>)> {
    if n == 0 {
        return Err(SvarError::InvalidArgument("series length must be positive".into()));
    }
    let m = model.branches();
    let total = n + burn_in;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // time-major scratch: history[s] = x(s+1)
    let mut history: Vec<Vec<T>> = Vec::with_capacity(total);
    let mut noise = DenseMatrix::<T>::zeros(m, n);

    for step in 0..total {
        let w: Vec<T> = (0..m).map(|_| T::sample_unit(&mut rng)).collect();
        let mut rhs: Vec<T> = model.t().iter().zip(&w).map(|(&t, &w)| t + w).collect();
        for (i, ri) in model.r().iter().enumerate() {
            let Some(past) = step.checked_sub(i + 1).map(|s| &history[s]) else {
                break;
            };
            for (row, acc) in rhs.iter_mut().enumerate() {
                *acc += ri.row(row).iter().zip(past).fold(T::zero(), |s, (&a, &b)| s + a * b);
            }
        }
        model.l_factor().solve_lower(&mut rhs);
        if rhs.iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW_LIMIT) {
            return Err(SvarError::NumericalOverflow {
                sample: step + 1,
                limit: OVERFLOW_LIMIT,
            });
        }
        if step >= burn_in {
            for (row, &wv) in w.iter().enumerate() {
                noise[(row, step - burn_in)] = wv;
            }
        }
        history.push(rhs);
    }

    let mut data = DenseMatrix::<T>::zeros(m, n);
    for (col, sample) in history[burn_in..].iter().enumerate() {
        for (row, &v) in sample.iter().enumerate() {
            data[(row, col)] = v;
        }
    }
    Ok((SignalMatrix::new(data)?, noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{companion_spectral_radius, svar_residuals, ModelOrder};
    use num_complex::Complex64;

    #[test]
    fn radius_bound_holds() {
        for seed in 0..20 {
            for (m, k) in [(1, 1), (2, 2), (3, 4), (4, 1)] {
                let model = random_stable_svar::<f64>(m, k, seed, 0.9).unwrap();
                let r = companion_spectral_radius(&model);
                assert!(r <= 0.9, "radius {r} for seed {seed}");
                assert!(r > 0.85, "radius {r} unexpectedly small");
            }
        }
    }

    #[test]
    fn complex_models_are_stable() {
        let model = random_stable_svar::<Complex64>(3, 2, 4, 0.7).unwrap();
        assert!(companion_spectral_radius(&model) <= 0.7);
    }

    #[test]
    fn generator_is_deterministic() {
        let a = random_stable_svar::<f64>(3, 2, 77, 0.8).unwrap();
        let b = random_stable_svar::<f64>(3, 2, 77, 0.8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_stable_svar::<f64>(3, 2, 78, 0.8).unwrap());
    }

    #[test]
    fn scalar_model_ratio() {
        let model = random_stable_svar::<f64>(1, 1, 5, 0.5).unwrap();
        assert!((model.r()[0][(0, 0)] / model.l()[(0, 0)]).abs() <= 0.5);
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(random_stable_svar::<f64>(2, 1, 0, 1.0).is_err());
        assert!(random_stable_svar::<f64>(2, 1, 0, 0.0).is_err());
        assert!(random_stable_svar::<f64>(2, 1, 0, f64::NAN).is_err());
    }

    #[test]
    fn identity_model_emits_raw_noise() {
        let model = SvarCoefficients::new(DenseMatrix::<f64>::identity(2), vec![], vec![0.0; 2]).unwrap();
        let (x, w) = simulate_series_with_noise(&model, 50, 3, 0).unwrap();
        assert_eq!(x.data(), &w);
    }

    #[test]
    fn intercept_sets_the_mean() {
        let model = SvarCoefficients::new(DenseMatrix::<f64>::identity(1), vec![], vec![100.0]).unwrap();
        let x = simulate_series(&model, 20_000, 9, 0).unwrap();
        let mean = x.data().row(0).iter().sum::<f64>() / 20_000.0;
        assert!((mean - 100.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn simulation_is_deterministic() {
        let model = random_stable_svar::<f64>(2, 2, 1, 0.9).unwrap();
        let a = simulate_series(&model, 300, 4, 40).unwrap();
        let b = simulate_series(&model, 300, 4, 40).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn residual_round_trip() {
        for (m, k, burn) in [(1, 1, 0), (2, 2, 40), (3, 3, 90)] {
            let model = random_stable_svar::<f64>(m, k, 12, 0.9).unwrap();
            let (x, w) = simulate_series_with_noise(&model, 400, 13, burn).unwrap();
            let res = svar_residuals(&model, &x).unwrap();
            let injected = w.block(0, k, m, 400 - k);
            assert!(res.sub(&injected).unwrap().max_abs() < 1e-10);
        }
        let model = random_stable_svar::<Complex64>(2, 1, 12, 0.9).unwrap();
        let (x, w) = simulate_series_with_noise(&model, 100, 13, 20).unwrap();
        let res = svar_residuals(&model, &x).unwrap();
        assert!(res.sub(&w.block(0, 1, 2, 99)).unwrap().max_abs() < 1e-10);
        assert_eq!(model.order(), ModelOrder(1));
    }

    #[test]
    fn unstable_model_overflows() {
        let model = SvarCoefficients::new(
            DenseMatrix::<f64>::identity(1),
            vec![DenseMatrix::from_rows(&[[1.5]]).unwrap()],
            vec![0.0],
        )
        .unwrap();
        assert!(matches!(
            simulate_series(&model, 1000, 1, 0),
            Err(SvarError::NumericalOverflow { .. })
        ));
    }

    #[test]
    fn complex_noise_has_unit_variance() {
        let model = SvarCoefficients::new(
            DenseMatrix::<Complex64>::identity(1),
            vec![],
            vec![Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        let x = simulate_series(&model, 20_000, 2, 0).unwrap();
        let power = x.data().row(0).iter().map(|v| v.norm_sqr()).sum::<f64>() / 20_000.0;
        assert!((power - 1.0).abs() < 0.05);
    }
}
