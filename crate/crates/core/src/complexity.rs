//! Multiply-count cost models of the two estimators.
//!
//! Only multiplications are counted (additions are assumed to ride along in
//! multiply-accumulate instructions), products with a Hermitian result are
//! charged half, and a Cholesky factorization plus inversion of an `n x n`
//! matrix is charged `n³/2`. Counts are real numbers so the half-cube terms
//! are kept exactly.

use std::fmt;

use crate::error::{Result, SvarError};

const LABEL_WIDTH: usize = 14;

/// An itemized multiply count.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplyCount {
    items: Vec<(&'static str, f64)>,
    total: f64,
}

impl MultiplyCount {
    fn from_items(items: Vec<(&'static str, f64)>) -> Self {
        let total = items.iter().map(|(_, c)| c).sum();
        Self { items, total }
    }

    pub fn items(&self) -> &[(&'static str, f64)] {
        &self.items
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

impl fmt::Display for MultiplyCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .items
            .iter()
            .map(|(l, _)| l.len())
            .max()
            .unwrap_or(0)
            .max(LABEL_WIDTH);
        for (label, count) in &self.items {
            writeln!(f, "{label:<width$}  {count:>16.1}")?;
        }
        write!(f, "{:<width$}  {:>16.1}", "total", self.total)
    }
}

fn check(m: usize, k: usize, n: usize) -> Result<()> {
    if m == 0 {
        return Err(SvarError::InvalidArgument("M must be at least 1".into()));
    }
    if n <= k {
        return Err(SvarError::OrderTooLarge { order: k, samples: n });
    }
    Ok(())
}

/// Least-squares route, one row per step of the fit.
pub fn ls_multiply_count(m: usize, k: usize, n: usize) -> Result<MultiplyCount> {
    check(m, k, n)?;
    let (m, k, n) = (m as f64, k as f64, n as f64);
    let p = m * k + 1.0;
    let cols = n - k;
    Ok(MultiplyCount::from_items(vec![
        ("SS^H", p * p * cols / 2.0),
        ("(SS^H)^-1", p * p * p / 2.0),
        ("XS^H", m * p * cols),
        ("XS^H(SS^H)^-1", m * p * p),
        ("V", m * p * cols),
        ("VV^H", m * m * cols),
        ("L", m * m * m / 2.0),
        ("R_i", m * m * m * k),
        ("t", m * m),
    ]))
}

/// Large inverse Cholesky route.
pub fn lic_multiply_count(m: usize, k: usize, n: usize) -> Result<MultiplyCount> {
    check(m, k, n)?;
    let (m, k, n) = (m as f64, k as f64, n as f64);
    let q = m * (k + 1.0) + 1.0;
    Ok(MultiplyCount::from_items(vec![
        ("TT^H", q * q * (n - k) / 2.0),
        ("U", q * q * q / 2.0),
    ]))
}

/// `1 - lic_total / ls_total`; negative when the direct route costs more.
pub fn savings_ratio(m: usize, k: usize, n: usize) -> Result<f64> {
    let ls = ls_multiply_count(m, k, n)?;
    let lic = lic_multiply_count(m, k, n)?;
    Ok(1.0 - lic.total() / ls.total())
}
