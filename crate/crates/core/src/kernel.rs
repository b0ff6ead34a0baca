//! Inner-product kernels shared by the sum-type statistics.
//!
//! Every sum-type statistic here is a function of the Gram matrix
//! `G[s][t] = x_sᵀ x_t`. It is built once in `O(n² p)` and each lag then
//! costs `O(n²)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{dot, SeriesMatrix, SignMatrix};

/// Full symmetric `n × n` Gram matrix of the rows of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    fn from_rows(n: usize, p: usize, rows: &[f64]) -> Self {
        let mut data = alloc::vec![0.0; n * n];
        for s in 0..n {
            let xs = &rows[s * p..(s + 1) * p];
            for t in s..n {
                let v = dot(xs, &rows[t * p..(t + 1) * p]);
                data[s * n + t] = v;
                data[t * n + s] = v;
            }
        }
        Self { n, data }
    }

    pub fn of_signs(u: &SignMatrix) -> Self {
        Self::from_rows(u.n(), u.p(), u.as_slice())
    }

    pub fn of_series(eps: &SeriesMatrix) -> Self {
        Self::from_rows(eps.n(), eps.p(), eps.as_slice())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, s: usize, t: usize) -> f64 {
        self.data[s * self.n + t]
    }

    /// `(1/(n−h)) Σ_{h+1 ≤ s < t ≤ n} G[s−h][t−h] · G[s][t]` (1-based indices).
    ///
    /// Lags with no admissible pair give `0`.
    pub fn lag_pair_mean(&self, h: usize) -> f64 {
        let n = self.n;
        assert!(h >= 1 && h < n, "lag {h} out of range for n = {n}");
        let mut total = 0.0;
        for s in h..n {
            let lagged = &self.data[(s - h) * n + (s + 1 - h)..(s - h) * n + (n - h)];
            let current = &self.data[s * n + s + 1..s * n + n];
            total += dot(lagged, current);
        }
        total / (n - h) as f64
    }

    /// `lag_pair_mean(h)` for `h = 1..=max_lag`.
    pub fn lag_pair_means(&self, max_lag: usize) -> Vec<f64> {
        (1..=max_lag).map(|h| self.lag_pair_mean(h)).collect()
    }

    /// `2/(n(n−1)) Σ_{s<t} G[s][t]²`.
    pub fn mean_squared_off_diagonal(&self) -> f64 {
        let n = self.n;
        let mut total = 0.0;
        for s in 0..n {
            let row = &self.data[s * n + s + 1..(s + 1) * n];
            total += dot(row, row);
        }
        2.0 * total / (n * (n - 1)) as f64
    }
}

/// Checks a lag against a sample size for the raw statistic kernels.
///
/// The kernels accept `1 ≤ H ≤ n − 1`; lags with an empty pair range
/// contribute zero. The tests themselves require the stricter
/// [`crate::LagWindow`] bound `H ≤ n − 2`.
pub(crate) fn check_kernel_lag(lags: usize, n: usize) -> Result<()> {
    if lags == 0 || lags >= n {
        return Err(Error::InvalidLag { lags, n });
    }
    Ok(())
}

/// Estimator of `tr(Ω²)`, `Ω = E(U Uᵀ)`:
/// `2/(n(n−1)) Σ_{s<t} (U_sᵀ U_t)²`, always within `[0, 1]`.
pub fn trace_omega2_hat(u: &SignMatrix) -> Result<f64> {
    if u.n() < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: u.n() });
    }
    Ok(Gram::of_signs(u).mean_squared_off_diagonal().clamp(0.0, 1.0))
}

/// Raw-vector analogue: `1/(n(n−1)) Σ_{s≠t} (ε_sᵀ ε_t)²`, an estimator of `tr(Σ²)`.
pub fn trace_sigma2_hat(eps: &SeriesMatrix) -> Result<f64> {
    if eps.n() < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: eps.n() });
    }
    Ok(Gram::of_series(eps).mean_squared_off_diagonal())
}
