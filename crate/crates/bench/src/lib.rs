//! Fixtures shared by the criterion benches.

use svar_core::{default_burn_in, random_stable_svar, simulate_series, SignalMatrix};

/// Stable synthetic series of `m` branches and `n` samples for an order-`k` fit.
pub fn fixture(m: usize, k: usize, n: usize, seed: u64) -> SignalMatrix<f64> {
    let model = random_stable_svar::<f64>(m, k, seed, 0.9).expect("valid radius");
    simulate_series(&model, n, seed ^ 0x5eed, default_burn_in(m, k)).expect("stable model")
}
