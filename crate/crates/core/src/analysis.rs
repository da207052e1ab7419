//! Verification toolkit: divergence measures, concentration bounds,
//! constructive quantile thresholds and dominance-sandwich reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{shade_df, ShadeParams};
use crate::myerson::opt_revenue;
use crate::prior::ProductPrior;
use crate::quantile::{iron, QuantileDistribution, PROB_TOL};

/// Symmetric Kullback-Leibler divergence of two discrete distributions over
/// the union of their supports: `sum_v (p_v - q_v) ln(p_v / q_v)`.
///
/// A value carried by one side only makes the divergence infinite; callers
/// needing finite answers must align supports first (e.g. by truncation).
pub fn dskl(p: &QuantileDistribution, q: &QuantileDistribution) -> f64 {
    let masses = |d: &QuantileDistribution| -> Vec<(f64, f64)> {
        match d {
            QuantileDistribution::Discrete { support } => {
                support.iter().map(|s| (s.value, s.mass)).collect()
            }
            QuantileDistribution::Curve { .. } => panic!("dskl needs discrete distributions"),
        }
    };
    let pm = masses(p);
    let qm = masses(q);
    let mut values: Vec<f64> = pm.iter().chain(qm.iter()).map(|&(v, _)| v).collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    values.dedup();

    let mass_at = |pairs: &[(f64, f64)], v: f64| -> f64 {
        pairs
            .iter()
            .find(|&&(val, _)| val == v)
            .map(|&(_, m)| m)
            .unwrap_or(0.0)
    };

    let mut total = 0.0;
    for &v in &values {
        let pv = mass_at(&pm, v);
        let qv = mass_at(&qm, v);
        if pv == 0.0 && qv == 0.0 {
            continue;
        }
        if pv == 0.0 || qv == 0.0 {
            return f64::INFINITY;
        }
        // Written so the term is bitwise symmetric in (p, q).
        total += (pv - qv) * (pv.ln() - qv.ln());
    }
    total.max(0.0)
}

/// Symmetric KL of two product priors: additive over buyers.
pub fn dskl_product(p: &ProductPrior, q: &ProductPrior) -> f64 {
    p.buyers
        .iter()
        .zip(&q.buyers)
        .map(|(a, b)| dskl(a, b))
        .sum()
}

/// Empirical-quantile deviation bound for `n_samples` draws conditioned on
/// the quantile interval `[a, b]`:
/// `sqrt(2 (q - a)(b - q) L / N) + L (b - a) / N`.
pub fn bernstein_bound(q: f64, a: f64, b: f64, n_samples: usize, log_factor: f64) -> f64 {
    debug_assert!(a <= q && q <= b, "q must lie in [a, b]");
    debug_assert!(n_samples >= 1);
    let n = n_samples as f64;
    (2.0 * (q - a) * (b - q) * log_factor / n).sqrt() + log_factor * (b - a) / n
}

/// A per-buyer vector of tail-truncation quantiles, the virtual-value level
/// that induced it, and the revenue retained after truncating.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaVector {
    pub thetas: Vec<f64>,
    pub phi_star: f64,
    pub sum: f64,
    /// `opt(truncated) / opt(original)`.
    pub achieved_ratio: f64,
}

/// Largest cumulative quantile whose ironed virtual is still at least `phi`
/// (0 if none), per buyer.
fn theta_upper(hull_qs: &[f64], slopes: &[f64], phi: f64) -> f64 {
    let mut theta = 0.0;
    for (i, &s) in slopes.iter().enumerate() {
        if s >= phi {
            theta = hull_qs[i + 1];
        }
    }
    theta
}

/// Smallest cumulative quantile from which the ironed virtual is at most
/// `phi` (1 if none).
fn theta_lower(hull_qs: &[f64], slopes: &[f64], phi: f64) -> f64 {
    for (i, &s) in slopes.iter().enumerate() {
        if s <= phi {
            return hull_qs[i];
        }
    }
    1.0
}

/// Constructive truncation thresholds: finds the largest virtual level
/// `phi*` with `prod_i (1 - theta_upper_i(phi*)) <= eps`, then greedily
/// lowers coordinates toward `theta_lower` while the product stays strictly
/// under `eps`. The result satisfies `sum(theta) <= ln(1/eps) + 1` and
/// `opt(truncated) >= (1 - eps) opt`.
pub fn theta_thresholds(prior: &ProductPrior, eps: f64) -> Result<ThetaVector> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter("eps must be in (0, 1]".into()));
    }
    let mut hulls: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(prior.n());
    let mut candidates: Vec<f64> = Vec::new();
    for dist in &prior.buyers {
        if !dist.is_discrete() {
            return Err(Error::DiscretizeFirst);
        }
        let hull = iron(&dist.revenue_curve());
        let qs: Vec<f64> = hull.vertices.iter().map(|&(q, _)| q).collect();
        candidates.extend(hull.slopes.iter().copied());
        hulls.push((qs, hull.slopes));
    }
    candidates.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    candidates.dedup();
    // Sentinel above every slope: all theta_upper are 0 there.
    let sentinel = candidates.first().map_or(1.0, |&s| s.abs() + 1.0);
    candidates.insert(0, sentinel);

    let product_at = |phi: f64| -> f64 {
        hulls
            .iter()
            .map(|(qs, slopes)| 1.0 - theta_upper(qs, slopes, phi))
            .product()
    };
    // The product is nondecreasing in phi; take the largest level under eps.
    let phi_star = *candidates
        .iter()
        .find(|&&phi| product_at(phi) <= eps)
        .expect("the smallest slope always qualifies");

    let mut thetas: Vec<f64> = hulls
        .iter()
        .map(|(qs, slopes)| theta_upper(qs, slopes, phi_star))
        .collect();
    for i in 0..thetas.len() {
        let lower = theta_lower(&hulls[i].0, &hulls[i].1, phi_star);
        let saved = thetas[i];
        thetas[i] = lower;
        let product: f64 = thetas.iter().map(|&t| 1.0 - t).product();
        if product >= eps {
            thetas[i] = saved;
        }
    }

    let opt = opt_revenue(prior)?;
    let truncated = prior.truncate_tail(&thetas)?;
    let opt_truncated = opt_revenue(&truncated)?;
    let achieved_ratio = if opt > 0.0 { opt_truncated / opt } else { 1.0 };
    Ok(ThetaVector {
        sum: thetas.iter().sum(),
        thetas,
        phi_star,
        achieved_ratio,
    })
}

/// Dominance sandwich report for one buyer: is the learned distribution
/// below the truth and above the doubly-shaded truth, and by how much is
/// either side violated (negative = clean margins).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SandwichReport {
    pub dominates_upper: bool,
    pub dominates_lower: bool,
    pub max_violation: f64,
}

pub fn verify_sandwich(
    truth: &QuantileDistribution,
    learned: &QuantileDistribution,
    params: &ShadeParams,
) -> SandwichReport {
    let comparison = truth.shade_quantiles(|q| shade_df(q, params));
    let mut grid: Vec<f64> = vec![0.0];
    for d in [truth, learned, &comparison] {
        if let QuantileDistribution::Discrete { support } = d {
            grid.extend(support.iter().map(|p| p.value));
        }
    }
    let mut max_violation = f64::NEG_INFINITY;
    for &v in &grid {
        let upper_gap = learned.quantile_of(v) - truth.quantile_of(v);
        let lower_gap = comparison.quantile_of(v) - learned.quantile_of(v);
        max_violation = max_violation.max(upper_gap).max(lower_gap);
    }
    SandwichReport {
        dominates_upper: truth.dominates(learned),
        dominates_lower: learned.dominates(&comparison),
        max_violation,
    }
}

/// Divergence-versus-revenue comparison of two priors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KlGapReport {
    pub dskl: f64,
    /// Divergence threshold `c / K` under which revenues should be close.
    pub threshold: f64,
    pub opt_a: f64,
    pub opt_b: f64,
    pub revenue_gap: f64,
    /// True when the divergence is under the threshold and the revenue gap
    /// is within `2 alpha`.
    pub within: bool,
}

/// Threshold constant in `c / K`.
const KL_GAP_C: f64 = 1.0;

pub fn kl_revenue_gap(
    a: &ProductPrior,
    b: &ProductPrior,
    k_samples: f64,
    alpha: f64,
) -> Result<KlGapReport> {
    let div = dskl_product(a, b);
    let threshold = KL_GAP_C / k_samples;
    let opt_a = opt_revenue(a)?;
    let opt_b = opt_revenue(b)?;
    let revenue_gap = (opt_a - opt_b).abs();
    Ok(KlGapReport {
        dskl: div,
        threshold,
        opt_a,
        opt_b,
        revenue_gap,
        within: div > threshold || revenue_gap <= 2.0 * alpha + PROB_TOL,
    })
}
