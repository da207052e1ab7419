//! Quantile shading functions and the recursive query grid.
//!
//! `shade_f` is the estimation-error envelope on quantile space for the
//! exact-query regime; `interval_f` is its counterpart for width-limited
//! sampling. Subtracting the envelope (once for learned quantiles, twice for
//! the comparison distribution) keeps the learned prior dominated by the
//! truth with high probability.

use crate::error::{Error, Result};

/// Parameters shared by the shading functions and learners.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShadeParams {
    /// Query/sample budget scale N.
    pub budget: u32,
    /// Number of buyers n.
    pub buyers: u32,
    /// Log factor L used by the width-limited regime.
    pub log_factor: f64,
    /// Targeting power of the oracle this plan is built for.
    pub delta: f64,
    /// Constant multiplier on every hidden-log-factor choice.
    pub c_log: f64,
}

impl ShadeParams {
    /// Default log factor: `ceil(ln(2 * N * n * 20))`.
    pub fn default_log_factor(budget: u32, buyers: u32) -> f64 {
        (2.0 * budget as f64 * buyers as f64 * 20.0).ln().ceil()
    }

    pub fn new(budget: u32, buyers: u32, delta: f64) -> Result<Self> {
        if budget < 2 {
            return Err(Error::InvalidParameter("budget N must be >= 2".into()));
        }
        if buyers < 1 {
            return Err(Error::InvalidParameter("need at least one buyer".into()));
        }
        Ok(ShadeParams {
            budget,
            buyers,
            log_factor: Self::default_log_factor(budget, buyers),
            delta,
            c_log: 1.0,
        })
    }

    pub fn with_c_log(mut self, c_log: f64) -> Self {
        self.c_log = c_log;
        self
    }

    pub fn with_log_factor(mut self, log_factor: f64) -> Self {
        self.log_factor = log_factor;
        self
    }
}

/// Error envelope for the exact-query regime:
/// `sqrt(q/n)/N + 1/(N^2 n)` up to `1/n`, then `q/N + 1/(N^2 n)` up to 1/2,
/// mirrored above 1/2.
pub fn shade_f(q: f64, p: &ShadeParams) -> f64 {
    debug_assert!((0.0..=1.0 + 1e-12).contains(&q));
    let n = p.buyers as f64;
    let big_n = p.budget as f64;
    let q = q.clamp(0.0, 1.0);
    let q_eff = if q > 0.5 { 1.0 - q } else { q };
    let floor = 1.0 / (big_n * big_n * n);
    if q_eff <= 1.0 / n {
        (q_eff / n).sqrt() / big_n + floor
    } else {
        q_eff / big_n + floor
    }
}

/// Double-envelope shading: `max(0, q - 2 f(q))`.
pub fn shade_df(q: f64, p: &ShadeParams) -> f64 {
    (q - 2.0 * shade_f(q, p)).max(0.0)
}

/// Error envelope for width-limited sampling with `N` draws per interval:
/// `2 sqrt(q L delta / N)` up to `delta`, then `2 sqrt(L/N) q` up to 1/2,
/// mirrored above 1/2.
pub fn interval_f(q: f64, p: &ShadeParams) -> f64 {
    debug_assert!((0.0..=1.0 + 1e-12).contains(&q));
    let big_n = p.budget as f64;
    let q = q.clamp(0.0, 1.0);
    let q_eff = if q > 0.5 { 1.0 - q } else { q };
    if q_eff <= p.delta {
        2.0 * (q_eff * p.log_factor * p.delta / big_n).sqrt()
    } else {
        2.0 * (p.log_factor / big_n).sqrt() * q_eff
    }
}

/// Single-envelope shading for the width-limited regime:
/// `max(0, q - f(q) - 4 L delta / N)`.
pub fn interval_sf(q: f64, p: &ShadeParams) -> f64 {
    let slack = 4.0 * p.log_factor * p.delta / p.budget as f64;
    (q - interval_f(q, p) - slack).max(0.0)
}

/// Shading for the mixed regime: `max(0, q - min(f(q), delta))`.
pub fn hybrid_sf(q: f64, p: &ShadeParams) -> f64 {
    (q - shade_f(q, p).min(p.delta)).max(0.0)
}

/// Recursive query grid: `q_0 = 1`, `q_{j+1} = q_j - 2 f(q_j)` while
/// positive. Strictly decreasing, and the step size keeps the count at
/// most [`pinpoint_budget_bound`].
pub fn pinpoints(p: &ShadeParams) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut q = 1.0;
    loop {
        let next = q - 2.0 * shade_f(q, p);
        if next <= 0.0 {
            return out;
        }
        debug_assert!(next < q);
        out.push(next);
        q = next;
    }
}

/// Proven envelope on the pinpoint count: `3 N ln(N^2 n)`.
pub fn pinpoint_budget_bound(p: &ShadeParams) -> f64 {
    let n = p.buyers as f64;
    let big_n = p.budget as f64;
    3.0 * big_n * (big_n * big_n * n).ln()
}
