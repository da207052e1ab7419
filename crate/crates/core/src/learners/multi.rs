//! Multi-buyer learners: dominated empirical priors from targeted access.
//!
//! All three learners produce a shaded discrete prior per buyer and the
//! optimal auction built on it. The regimes split by targeting power:
//! exact queries walk the recursive quantile grid, wide intervals use a
//! doubling cover with per-interval batches, and narrow-but-positive widths
//! mix a fixed-width sweep with a single-sample grid walk.

use crate::error::{Error, Result};
use crate::learners::shade::{hybrid_sf, interval_sf, pinpoints, shade_f, ShadeParams};
use crate::myerson::{build_auction, AuctionRule};
use crate::oracle::{BudgetSnapshot, Oracle};
use crate::prior::{Family, ProductPrior};
use crate::quantile::QuantileDistribution;

/// Output of a learner: the dominated empirical prior, its auction, and the
/// oracle budget it consumed.
#[derive(Debug, Clone)]
pub struct LearnResult {
    pub learned_prior: ProductPrior,
    pub rule: AuctionRule,
    pub budget: BudgetSnapshot,
    pub params: ShadeParams,
}

fn finish(
    oracle: &Oracle,
    params: &ShadeParams,
    buyers: Vec<QuantileDistribution>,
) -> Result<LearnResult> {
    let learned_prior = ProductPrior {
        family: Family::Unknown,
        buyers,
    };
    learned_prior.validate()?;
    let rule = build_auction(&learned_prior)?;
    Ok(LearnResult {
        learned_prior,
        rule,
        budget: oracle.ledger(),
        params: *params,
    })
}

/// Exact-query learner: query the values at the recursive quantile grid and
/// assign each the quantile gap down to the next grid point; the remaining
/// tail becomes a point mass at 0.
pub fn learn_pinpoint(oracle: &Oracle, params: &ShadeParams) -> Result<LearnResult> {
    if !oracle.supports_queries() {
        return Err(Error::QueriesUnavailable);
    }
    check_buyers(oracle, params)?;
    let pins = pinpoints(params);
    let k = pins.len() - 1;
    let mut buyers = Vec::with_capacity(oracle.n());
    for i in 0..oracle.n() {
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(k + 1);
        for j in 1..=k {
            let v = oracle.targeted_query(i, pins[j])?;
            let next = if j == k { 0.0 } else { pins[j + 1] };
            pairs.push((v, pins[j] - next));
        }
        pairs.push((0.0, 1.0 - pins.get(1).copied().unwrap_or(0.0)));
        buyers.push(QuantileDistribution::discrete_from_pairs(pairs)?);
    }
    finish(oracle, params, buyers)
}

/// Doubling cover of [0, 1/2]: `[0, d], [d, 2d], ...`, closed at exactly 1/2
/// so every width stays at least `d`.
fn doubling_bounds(delta: f64) -> Vec<f64> {
    let mut bounds = vec![0.0];
    let mut b = delta;
    while b < 0.5 - 1e-12 {
        bounds.push(b);
        b *= 2.0;
    }
    let last = *bounds.last().expect("nonempty");
    if bounds.len() > 1 && 0.5 - last < delta {
        // A short remainder would undercut the targeting power; widen the
        // final interval instead.
        *bounds.last_mut().expect("nonempty") = 0.5;
    } else {
        bounds.push(0.5);
    }
    bounds
}

/// Wide-targeting learner for `delta >= 1/n`: batch-sample every interval of
/// a doubling cover, aggregate the conditional empiricals, and shade the
/// result once.
pub fn learn_interval(oracle: &Oracle, params: &ShadeParams) -> Result<LearnResult> {
    check_buyers(oracle, params)?;
    let delta = params.delta;
    let n = params.buyers as f64;
    if delta < 1.0 / n - 1e-12 {
        return Err(Error::WrongRegime("use learn_hybrid"));
    }
    if oracle.config().delta > delta + 1e-12 {
        return Err(Error::InvalidParameter(
            "oracle targeting power is weaker than the plan's delta".into(),
        ));
    }
    if 2.0 * (params.log_factor / params.budget as f64).sqrt() >= 1.0 {
        return Err(Error::InvalidParameter(
            "budget too small for the log factor; shading would not be monotone".into(),
        ));
    }
    let intervals: Vec<(f64, f64)> = if delta > 0.5 {
        // Too wide to halve; a width of 1 degenerates to plain i.i.d. draws.
        vec![(0.0, 1.0)]
    } else {
        let bounds = doubling_bounds(delta);
        let mut intervals: Vec<(f64, f64)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();
        // Mirror onto the top half.
        let mirrored: Vec<(f64, f64)> =
            intervals.iter().map(|&(a, b)| (1.0 - b, 1.0 - a)).collect();
        intervals.extend(mirrored);
        intervals
    };

    let per_interval = params.budget as usize;
    let mut buyers = Vec::with_capacity(oracle.n());
    for i in 0..oracle.n() {
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for &(a, b) in &intervals {
            let w = (b - a) / per_interval as f64;
            for _ in 0..per_interval {
                pairs.push((oracle.targeted_sample(i, a, b)?, w));
            }
        }
        let empirical = QuantileDistribution::discrete_from_pairs(pairs)?;
        buyers.push(empirical.shade_quantiles(|q| interval_sf(q, params)));
    }
    finish(oracle, params, buyers)
}

/// Per-round batch sizes for the fixed-width sweep of [`learn_hybrid`].
fn hybrid_round_budget(j: usize, delta: f64, params: &ShadeParams) -> usize {
    let n = params.buyers as f64;
    let big_n = params.budget as f64;
    let scale = params.c_log * params.log_factor;
    let base = big_n * big_n * n * delta;
    let jf = j as f64;
    let raw = if j == 1 {
        4.0 * base
    } else if jf * delta <= 1.0 / n {
        let step = (jf.sqrt() - (jf - 1.0).sqrt()).powi(2);
        4.0 * base * step + 2.0 * (base / (jf - 1.0)).sqrt()
    } else {
        4.0 * big_n * big_n / (jf * (jf - 1.0)) + 2.0 * big_n / (jf - 1.0)
    };
    (scale * raw).ceil().max(1.0) as usize
}

/// Mixed-regime learner for `0 < delta < 1/n`: sweep fixed-width intervals
/// from the top of the value space until the error envelope exceeds the
/// width, walk the interior with single samples at step `f`, mirror the
/// sweep on the bottom, and shade by `min(f, delta)`.
pub fn learn_hybrid(oracle: &Oracle, params: &ShadeParams) -> Result<LearnResult> {
    check_buyers(oracle, params)?;
    let n = params.buyers as f64;
    if params.delta <= 0.0 {
        return Err(Error::WrongRegime("use learn_pinpoint"));
    }
    if params.delta >= 1.0 / n - 1e-12 {
        return Err(Error::WrongRegime("use learn_interval"));
    }
    if oracle.config().delta > params.delta + 1e-12 {
        return Err(Error::InvalidParameter(
            "oracle targeting power is weaker than the plan's delta".into(),
        ));
    }
    // Snap the width so rounds tile [0, 1/2] exactly without narrowing below
    // the targeting power.
    let rounds_to_half = (0.5 / params.delta).floor().max(1.0);
    let delta = 0.5 / rounds_to_half;
    let shade_params = ShadeParams { delta, ..*params };

    // Fixed-width rounds: intervals [(j-1)d, jd] and their mirrors.
    let mut round_intervals: Vec<(f64, f64, usize)> = Vec::new();
    let mut boundary = 0.0;
    for j in 1..=rounds_to_half as usize {
        let a = (j - 1) as f64 * delta;
        let b = (j as f64 * delta).min(0.5);
        let n_j = hybrid_round_budget(j, delta, params);
        round_intervals.push((a, b, n_j));
        boundary = b;
        if shade_f(b, params) >= delta || b >= 0.5 - 1e-12 {
            break;
        }
    }

    let mut buyers = Vec::with_capacity(oracle.n());
    for i in 0..oracle.n() {
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for &(a, b, n_j) in &round_intervals {
            let w = (b - a) / n_j as f64;
            for _ in 0..n_j {
                pairs.push((oracle.targeted_sample(i, a, b)?, w));
            }
            // Mirrored interval on the bottom of the value space.
            let (ma, mb) = (1.0 - b, 1.0 - a);
            for _ in 0..n_j {
                pairs.push((oracle.targeted_sample(i, ma, mb)?, w));
            }
        }
        // Interior walk with one sample per grid point, step f.
        if boundary < 0.5 - 1e-12 {
            let mut q = 1.0 - boundary;
            loop {
                let lo = (q - delta).max(0.0);
                let v = oracle.targeted_sample(i, lo, q)?;
                let next = q - shade_f(q, params);
                let floor = next.max(boundary);
                pairs.push((v, q - floor));
                if next < boundary {
                    break;
                }
                q = next;
            }
        }
        let empirical = QuantileDistribution::discrete_from_pairs(pairs)?;
        buyers.push(empirical.shade_quantiles(|q| hybrid_sf(q, &shade_params)));
    }
    finish(oracle, &shade_params, buyers)
}

fn check_buyers(oracle: &Oracle, params: &ShadeParams) -> Result<()> {
    if oracle.n() != params.buyers as usize {
        return Err(Error::InvalidParameter(format!(
            "plan is for {} buyers but the oracle has {}",
            params.buyers,
            oracle.n()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::shade::shade_df;
    use crate::oracle::OracleConfig;

    fn uniform_grid() -> QuantileDistribution {
        QuantileDistribution::discrete_from_pairs(
            (1..=10).rev().map(|k| (k as f64 / 10.0, 0.1)).collect(),
        )
        .expect("valid")
    }

    fn exact_oracle(buyers: Vec<QuantileDistribution>, seed: u64) -> Oracle {
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers,
        };
        Oracle::new(prior, OracleConfig::exact_queries(seed)).expect("ok")
    }

    #[test]
    fn pinpoint_point_mass_telescopes() {
        let oracle = exact_oracle(vec![QuantileDistribution::point_mass(7.0)], 1);
        let params = ShadeParams::new(8, 1, 0.0).expect("ok");
        let result = learn_pinpoint(&oracle, &params).expect("ok");
        let q1 = 1.0 - 2.0 / (8.0f64 * 8.0 * 1.0);
        match &result.learned_prior.buyers[0] {
            QuantileDistribution::Discrete { support } => {
                assert_eq!(support.len(), 2);
                assert_eq!(support[0].value, 7.0);
                assert!((support[0].mass - q1).abs() < 1e-12);
                assert_eq!(support[1].value, 0.0);
            }
            _ => panic!("expected discrete"),
        }

        let zero = exact_oracle(vec![QuantileDistribution::point_mass(0.0)], 1);
        let result = learn_pinpoint(&zero, &params).expect("ok");
        assert_eq!(
            result.learned_prior.buyers[0],
            QuantileDistribution::point_mass(0.0)
        );
    }

    #[test]
    fn pinpoint_output_is_sandwiched_exactly() {
        let oracle = exact_oracle(vec![uniform_grid()], 5);
        let params = ShadeParams::new(16, 1, 0.0).expect("ok");
        let result = learn_pinpoint(&oracle, &params).expect("ok");
        let learned = &result.learned_prior.buyers[0];
        let truth = uniform_grid();
        assert!(truth.dominates(learned));
        let comparison = truth.shade_quantiles(|q| shade_df(q, &params));
        assert!(learned.dominates(&comparison));
        // Query budget: one query per grid point past the first.
        let pins = pinpoints(&params).len() as u64 - 1;
        assert_eq!(result.budget.queries, vec![pins]);
    }

    #[test]
    fn pinpoint_needs_query_capability() {
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![uniform_grid()],
        };
        let oracle = Oracle::new(prior, OracleConfig::exact(0.5, 2)).expect("ok");
        let params = ShadeParams::new(8, 1, 0.5).expect("ok");
        assert!(matches!(
            learn_pinpoint(&oracle, &params),
            Err(Error::QueriesUnavailable)
        ));
    }

    #[test]
    fn interval_point_mass_keeps_shaded_top() {
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![
                QuantileDistribution::point_mass(3.0),
                QuantileDistribution::point_mass(3.0),
            ],
        };
        let oracle = Oracle::new(prior, OracleConfig::exact(0.5, 4)).expect("ok");
        let params = ShadeParams::new(400, 2, 0.5).expect("ok");
        let result = learn_interval(&oracle, &params).expect("ok");
        let sf1 = interval_sf(1.0, &params);
        match &result.learned_prior.buyers[0] {
            QuantileDistribution::Discrete { support } => {
                assert_eq!(support[0].value, 3.0);
                assert!((support[0].mass - sf1).abs() < 1e-12);
            }
            _ => panic!("expected discrete"),
        }
    }

    #[test]
    fn interval_cover_has_two_intervals_at_half_width() {
        assert_eq!(doubling_bounds(0.5), vec![0.0, 0.5]);
        assert_eq!(doubling_bounds(0.25), vec![0.0, 0.25, 0.5]);
        assert_eq!(doubling_bounds(0.125), vec![0.0, 0.125, 0.25, 0.5]);
        // Non-dyadic width: final bound snaps to 1/2 without a narrow piece.
        let bounds = doubling_bounds(0.3);
        assert_eq!(bounds, vec![0.0, 0.5]);
        for w in doubling_bounds(0.07).windows(2) {
            assert!(w[1] - w[0] >= 0.07 - 1e-12);
        }
    }

    #[test]
    fn interval_regime_guard() {
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![
                uniform_grid(),
                uniform_grid(),
                uniform_grid(),
                uniform_grid(),
            ],
        };
        let oracle = Oracle::new(prior, OracleConfig::exact(0.1, 4)).expect("ok");
        let params = ShadeParams::new(400, 4, 0.1).expect("ok");
        assert!(matches!(
            learn_interval(&oracle, &params),
            Err(Error::WrongRegime("use learn_hybrid"))
        ));
    }

    #[test]
    fn hybrid_point_mass_is_dominated_exactly() {
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![QuantileDistribution::point_mass(7.0); 4],
        };
        let oracle = Oracle::new(prior.clone(), OracleConfig::exact(0.1, 6)).expect("ok");
        let params = ShadeParams::new(32, 4, 0.1).expect("ok");
        let result = learn_hybrid(&oracle, &params).expect("ok");
        for (truth, learned) in prior.buyers.iter().zip(&result.learned_prior.buyers) {
            assert!(truth.dominates(learned));
            assert_eq!(learned.max_value(), 7.0);
        }
    }

    #[test]
    fn hybrid_regime_guards() {
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![uniform_grid(), uniform_grid()],
        };
        let oracle = Oracle::new(prior, OracleConfig::exact(0.0, 4)).expect("ok");
        assert!(matches!(
            learn_hybrid(&oracle, &ShadeParams::new(16, 2, 0.0).expect("ok")),
            Err(Error::WrongRegime("use learn_pinpoint"))
        ));
        assert!(matches!(
            learn_hybrid(&oracle, &ShadeParams::new(16, 2, 0.5).expect("ok")),
            Err(Error::WrongRegime("use learn_interval"))
        ));
    }

    #[test]
    fn interval_at_full_width_degenerates_to_iid_sampling() {
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![uniform_grid(), uniform_grid()],
        };
        let oracle = Oracle::new(prior, OracleConfig::exact(1.0, 21)).expect("ok");
        let params = ShadeParams::new(2000, 2, 1.0).expect("ok");
        let result = learn_interval(&oracle, &params).expect("ok");
        // One interval per buyer, N samples each.
        assert_eq!(result.budget.samples, vec![2000, 2000]);
        for learned in &result.learned_prior.buyers {
            learned.validate().expect("valid");
        }
    }

    #[test]
    fn interval_upper_dominance_holds_whp() {
        // Large batches: the truth dominates the shaded empirical in almost
        // every seeded trial.
        let truth = uniform_grid();
        let mut hits = 0;
        let trials = 100;
        for seed in 0..trials {
            let prior = ProductPrior {
                family: Family::Unknown,
                buyers: vec![truth.clone(), truth.clone()],
            };
            let oracle = Oracle::new(prior, OracleConfig::exact(0.5, seed)).expect("ok");
            let params = ShadeParams::new(600, 2, 0.5).expect("ok");
            let result = learn_interval(&oracle, &params).expect("ok");
            if result
                .learned_prior
                .buyers
                .iter()
                .all(|l| truth.dominates(l))
            {
                hits += 1;
            }
        }
        assert!(hits >= 95, "upper dominance in {hits}/{trials}");
    }

    #[test]
    fn hybrid_upper_dominance_holds_whp() {
        let truth = uniform_grid();
        let mut hits = 0;
        let trials = 100;
        let params = ShadeParams::new(32, 4, 0.1).expect("ok");
        // Loose scaling envelope on the per-buyer sample count.
        let n = params.buyers as f64;
        let big_n = params.budget as f64;
        let budget_bound = 20.0
            * params.log_factor
            * (big_n * big_n * n * params.delta + big_n * (big_n * big_n * n).ln() + 1.0);
        for seed in 0..trials {
            let prior = ProductPrior {
                family: Family::Unknown,
                buyers: vec![truth.clone(); 4],
            };
            let oracle = Oracle::new(prior, OracleConfig::exact(0.1, seed)).expect("ok");
            let result = learn_hybrid(&oracle, &params).expect("ok");
            for &spent in &result.budget.samples {
                assert!(
                    (spent as f64) <= budget_bound,
                    "budget {spent} over {budget_bound}"
                );
            }
            if result
                .learned_prior
                .buyers
                .iter()
                .all(|l| truth.dominates(l))
            {
                hits += 1;
            }
        }
        assert!(hits >= 95, "upper dominance in {hits}/{trials}");
    }

    #[test]
    fn pinpoint_through_data_holder_stays_near_optimal() {
        // Queries answered from a frozen empirical dataset instead of the
        // truth: with enough holder data the learned rule's revenue on the
        // true prior stays close to optimal.
        use crate::myerson::{expected_revenue, opt_revenue, RevenueMode};
        use crate::oracle::OracleMode;
        let truth = uniform_grid();
        let opt = opt_revenue(&ProductPrior {
            family: Family::Unknown,
            buyers: vec![truth.clone()],
        })
        .expect("ok");
        for seed in 0..5 {
            let prior = ProductPrior { family: Family::Unknown, buyers: vec![truth.clone()] };
            let oracle = Oracle::new(
                prior.clone(),
                OracleConfig {
                    delta: 0.0,
                    mode: OracleMode::DataHolder { samples_per_buyer: 50_000 },
                    seed,
                    allow_query: false,
                },
            )
            .expect("ok");
            let params = ShadeParams::new(32, 1, 0.0).expect("ok");
            let result = learn_pinpoint(&oracle, &params).expect("ok");
            let revenue = expected_revenue(&result.rule, &prior, RevenueMode::Exact)
                .expect("ok")
                .revenue;
            assert!(opt - revenue <= 0.05, "seed {seed}: opt {opt} revenue {revenue}");
        }
    }

    #[test]
    fn hybrid_sweep_degenerates_to_grid_walk_for_tiny_width() {
        // With delta far below the envelope the sweep stops after one round.
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![uniform_grid(), uniform_grid()],
        };
        let delta = 0.004;
        let oracle = Oracle::new(prior, OracleConfig::exact(delta, 8)).expect("ok");
        let params = ShadeParams::new(8, 2, delta).expect("ok");
        assert!(shade_f(delta, &params) >= delta);
        let result = learn_hybrid(&oracle, &params).expect("ok");
        let truth = uniform_grid();
        for learned in &result.learned_prior.buyers {
            assert!(truth.dominates(learned), "upper dominance after grid walk");
        }
    }
}
