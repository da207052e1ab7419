//! Single-buyer reserve-price learners.
//!
//! With one buyer the optimal auction is a posted price at the peak of the
//! revenue-quantile curve, so learning reduces to locating that peak: by
//! quartering search when the curve is concave, by a uniform quantile grid
//! on [0,1]-bounded supports, and by a geometric quantile series on [1,H].

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::prior::Family;

/// Reserve price plus the number of distinct quantile points probed.
#[derive(Debug, Clone, Copy)]
pub struct SingleResult {
    pub reserve: f64,
    pub points_probed: usize,
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

/// Probes one quantile point: an exact query when available, otherwise the
/// median of `n_per_point` targeted samples from a width-delta interval
/// centered at `q` (clipped into [0, 1]).
struct Prober<'a> {
    oracle: &'a Oracle,
    n_per_point: usize,
    cache: HashMap<i64, f64>,
}

impl<'a> Prober<'a> {
    fn new(oracle: &'a Oracle, n_per_point: usize) -> Self {
        Prober {
            oracle,
            n_per_point,
            cache: HashMap::new(),
        }
    }

    fn key(q: f64) -> i64 {
        (q * (1u64 << 48) as f64).round() as i64
    }

    fn value_at(&mut self, q: f64) -> Result<f64> {
        if let Some(&v) = self.cache.get(&Self::key(q)) {
            return Ok(v);
        }
        let v = if self.oracle.supports_queries() {
            self.oracle.targeted_query(0, q)?
        } else {
            let delta = self.oracle.config().delta;
            let mut lo = (q - delta / 2.0).max(0.0);
            let mut hi = lo + delta;
            if hi > 1.0 {
                hi = 1.0;
                lo = 1.0 - delta;
            }
            let mut samples: Vec<f64> = (0..self.n_per_point.max(1))
                .map(|_| self.oracle.targeted_sample(0, lo, hi))
                .collect::<Result<_>>()?;
            median(&mut samples)
        };
        self.cache.insert(Self::key(q), v);
        Ok(v)
    }

    fn points_probed(&self) -> usize {
        self.cache.len()
    }
}

/// Quartering search over a concave revenue curve. Each round estimates the
/// revenue at five equispaced points of the current interval, keeps the
/// quarter-intervals adjacent to the argmax, and halves the interval; the
/// reserve is the value at the surviving point closest to quantile 1/2.
///
/// `family` picks the initial interval: regular curves start at
/// `[eps, 1 - eps]`, monotone-hazard-rate curves at `[1/e, 1 - 1/e]`.
pub fn single_concave_search(
    oracle: &Oracle,
    family: Family,
    eps: f64,
    n_per_point: usize,
) -> Result<SingleResult> {
    if oracle.n() != 1 {
        return Err(Error::NotSingleBuyer);
    }
    if !(0.0..1.0).contains(&eps) || eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be in (0, 1)".into()));
    }
    let q_t = match family {
        Family::Regular | Family::Unit01 | Family::OneToH(_) => eps,
        Family::Mhr => 1.0 / std::f64::consts::E,
        Family::Unknown => return Err(Error::UnknownFamily),
    };
    let mut prober = Prober::new(oracle, n_per_point);
    let mut a = q_t;
    let mut b = 1.0 - q_t;
    let mut guard = 0;
    while b - a > eps {
        let len = b - a;
        let grid = [a, a + 0.25 * len, a + 0.5 * len, a + 0.75 * len, b];
        let mut best = (f64::NEG_INFINITY, grid[0]);
        for &q in &grid {
            let revenue = q * prober.value_at(q)?;
            if revenue > best.0 {
                best = (revenue, q);
            }
        }
        let z = best.1;
        a = a.max(z - 0.25 * len);
        b = b.min(z + 0.25 * len);
        guard += 1;
        if guard > 200 {
            return Err(Error::InvalidParameter("search failed to shrink".into()));
        }
    }
    let q_out = 0.5f64.clamp(a, b);
    let reserve = prober.value_at(q_out)?;
    Ok(SingleResult {
        reserve,
        points_probed: prober.points_probed(),
    })
}

/// Uniform quantile grid for [0, 1]-bounded priors: probe `q = k * eps/4`,
/// pick the value with the best estimated revenue `q * v`. With exact
/// queries the returned reserve loses at most `eps / 2` revenue.
pub fn single_grid_unit(oracle: &Oracle, eps: f64) -> Result<SingleResult> {
    if oracle.n() != 1 {
        return Err(Error::NotSingleBuyer);
    }
    if !(0.0..1.0).contains(&eps) || eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be in (0, 1)".into()));
    }
    let d = eps / 4.0;
    let e = eps / 8.0;
    let steps = (1.0 / d).floor() as usize;
    let mut best: Option<(f64, f64)> = None;
    for k in 1..=steps {
        let q = (k as f64 * d).min(1.0);
        let v = if oracle.supports_queries() {
            oracle.targeted_query(0, q)?
        } else {
            let lo = (q - e).max(0.0);
            let hi = (q + e).min(1.0);
            oracle.targeted_sample(0, lo, hi)?
        };
        if !(0.0..=1.0 + 1e-9).contains(&v) {
            return Err(Error::InvalidPrior(format!("value {v} outside [0, 1]")));
        }
        if best.is_none_or(|(r, _)| q * v > r) {
            best = Some((q * v, v));
        }
    }
    let (_, reserve) = best.expect("at least one grid point");
    Ok(SingleResult {
        reserve,
        points_probed: steps,
    })
}

/// Geometric quantile series for [1, H]-bounded priors: probe
/// `q_i = (1 + eps/8)^(i-1) / H` up to 1 and post the value with the best
/// estimated revenue. Multiplicative `(1 - eps)` guarantee.
pub fn single_grid_geometric(oracle: &Oracle, eps: f64, h: f64) -> Result<SingleResult> {
    if oracle.n() != 1 {
        return Err(Error::NotSingleBuyer);
    }
    if h <= 1.0 {
        return Err(Error::InvalidParameter("H must exceed 1".into()));
    }
    if !(0.0..1.0).contains(&eps) || eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be in (0, 1)".into()));
    }
    let ratio = 1.0 + eps / 8.0;
    let e = eps / (8.0 * h);
    let mut q = 1.0 / h;
    let mut probes = 0;
    let mut best: Option<(f64, f64)> = None;
    while q <= 1.0 + 1e-12 {
        let qc = q.min(1.0);
        let v = if oracle.supports_queries() {
            oracle.targeted_query(0, qc)?
        } else {
            let lo = (qc - e).max(1e-12);
            let hi = (qc + e).min(1.0);
            oracle.targeted_sample(0, lo, hi)?
        };
        probes += 1;
        if best.is_none_or(|(r, _)| qc * v > r) {
            best = Some((qc * v, v));
        }
        q *= ratio;
    }
    let (_, reserve) = best.expect("at least one probe");
    Ok(SingleResult {
        reserve,
        points_probed: probes,
    })
}
