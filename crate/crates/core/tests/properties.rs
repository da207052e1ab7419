//! Property tests over randomly generated priors.

use proptest::prelude::*;

use auction_core::learners::{shade_df, ShadeParams};
use auction_core::myerson::{build_auction, opt_revenue};
use auction_core::prior::{Family, ProductPrior};
use auction_core::quantile::{iron, QuantileDistribution};

/// Strategy for a small discrete distribution with distinct values.
fn discrete_dist() -> impl Strategy<Value = QuantileDistribution> {
    prop::collection::vec((0.001f64..10.0, 0.05f64..1.0), 1..10).prop_map(|raw| {
        let total: f64 = raw.iter().map(|&(_, m)| m).sum();
        let mut pairs: Vec<(f64, f64)> = raw
            .into_iter()
            .enumerate()
            // Offset values by index so they are distinct after sorting.
            .map(|(i, (v, m))| (v + i as f64 * 10.0, m / total))
            .collect();
        pairs.reverse();
        QuantileDistribution::discrete_from_pairs(pairs).expect("valid")
    })
}

proptest! {
    #[test]
    fn quantile_and_value_invert_on_support(dist in discrete_dist()) {
        let QuantileDistribution::Discrete { support } = &dist else { unreachable!() };
        for p in support {
            let q = dist.quantile_of(p.value);
            prop_assert!(q > 0.0);
            prop_assert_eq!(dist.value_at(q).expect("ok"), p.value);
        }
    }

    #[test]
    fn tail_truncation_is_dominated(dist in discrete_dist(), theta in 0.0f64..1.0) {
        let truncated = dist.truncate_tail(theta);
        truncated.validate().expect("valid");
        prop_assert!(dist.dominates(&truncated));
    }

    #[test]
    fn ironing_majorizes_and_is_concave(dist in discrete_dist()) {
        let rc = dist.revenue_curve();
        let hull = iron(&rc);
        for &(q, r) in &rc.points {
            prop_assert!(hull.value_at(q) >= r - 1e-12, "envelope below curve at q={}", q);
        }
        for w in hull.slopes.windows(2) {
            prop_assert!(w[1] < w[0] + 1e-12, "slopes not decreasing: {:?}", hull.slopes);
        }
        for v in &hull.vertices {
            prop_assert!(rc.points.contains(v), "vertex {:?} is not a source point", v);
        }
    }

    #[test]
    fn ironed_virtual_is_nondecreasing_in_value(dist in discrete_dist()) {
        let QuantileDistribution::Discrete { support } = &dist else { unreachable!() };
        let mut last = f64::NEG_INFINITY;
        for p in support.iter().rev() {
            let phi = dist.ironed_virtual(p.value).expect("ok");
            prop_assert!(phi >= last - 1e-12);
            last = phi;
        }
    }

    #[test]
    fn dominance_is_transitive_on_shaded_chains(
        dist in discrete_dist(),
        cut1 in 0.2f64..1.0,
        cut2 in 0.2f64..1.0,
    ) {
        // Chain a >= b >= c built by composing monotone shades.
        let a = dist.clone();
        let b = a.truncate_tail(cut1);
        let c = b.shade_quantiles(|q| q * cut2);
        prop_assert!(a.dominates(&a), "reflexive");
        prop_assert!(a.dominates(&b) && b.dominates(&c));
        prop_assert!(a.dominates(&c), "transitive");
        // Antisymmetry up to equality: mutual dominance happens only when
        // the quantile functions agree on the union grid.
        if c.dominates(&a) {
            let QuantileDistribution::Discrete { support } = &a else { unreachable!() };
            for p in support {
                prop_assert!((a.quantile_of(p.value) - c.quantile_of(p.value)).abs() <= 2e-12);
            }
        }
    }

    #[test]
    fn json_round_trip_is_exact(dist in discrete_dist()) {
        let text = serde_json::to_string(&dist).expect("serialize");
        let back: QuantileDistribution = serde_json::from_str(&text).expect("parse");
        prop_assert_eq!(&dist, &back);
    }

    #[test]
    fn shade_df_stays_nondecreasing(budget in 2u32..300, buyers in 1u32..64) {
        let params = ShadeParams::new(budget, buyers, 0.0).expect("ok");
        let mut last = 0.0f64;
        for k in 0..=2000 {
            let q = k as f64 / 2000.0;
            let y = shade_df(q, &params);
            prop_assert!(y >= last - 1e-12);
            last = y;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Truthful bidding beats any unilateral deviation over the bid grid.
    #[test]
    fn auction_is_dsic_and_ir(
        b0 in discrete_dist(),
        b1 in discrete_dist(),
        profile_seed in 0u64..1000,
    ) {
        let prior = ProductPrior { family: Family::Unknown, buyers: vec![b0, b1] };
        let rule = build_auction(&prior).expect("ok");
        let mut stream = auction_core::rng::Stream::new(profile_seed, &[]);
        let values: Vec<f64> = prior
            .buyers
            .iter()
            .map(|d| d.value_at(stream.next_unit()).expect("ok"))
            .collect();
        let truthful = rule.run(&values).expect("ok");
        if let Some(w) = truthful.winner {
            prop_assert!(truthful.payment <= values[w] + 1e-12, "IR violated");
        }
        let utility = |outcome: &auction_core::myerson::Outcome, i: usize| -> f64 {
            match outcome.winner {
                Some(w) if w == i => values[i] - outcome.payment,
                _ => 0.0,
            }
        };
        for i in 0..2 {
            let truthful_utility = utility(&truthful, i);
            prop_assert!(truthful_utility >= -1e-12);
            let QuantileDistribution::Discrete { support } = &prior.buyers[i] else {
                unreachable!()
            };
            let mut deviations: Vec<f64> = support.iter().map(|p| p.value).collect();
            deviations.push(0.0);
            deviations.push(values[i] * 1.5);
            for dev in deviations {
                let mut bids = values.clone();
                bids[i] = dev;
                let out = rule.run(&bids).expect("ok");
                prop_assert!(
                    utility(&out, i) <= truthful_utility + 1e-9,
                    "profitable deviation to {} for buyer {}",
                    dev,
                    i
                );
            }
        }
    }

    /// Expected payments equal the expected winning ironed virtual: the
    /// allocation depends only on values rounded down to the support, so the
    /// identity holds exactly profile by profile in expectation.
    #[test]
    fn virtual_surplus_identity(b0 in discrete_dist(), b1 in discrete_dist()) {
        let prior = ProductPrior { family: Family::Unknown, buyers: vec![b0, b1] };
        let rule = build_auction(&prior).expect("ok");
        let revenue = opt_revenue(&prior).expect("ok");

        let tables: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..2)
            .map(|i| {
                let QuantileDistribution::Discrete { support } = &prior.buyers[i] else {
                    unreachable!()
                };
                let values: Vec<f64> = support.iter().rev().map(|p| p.value).collect();
                let masses: Vec<f64> = support.iter().rev().map(|p| p.mass).collect();
                let virtuals: Vec<f64> =
                    values.iter().map(|&v| rule.buyer(i).virtual_of_bid(v)).collect();
                (values, masses, virtuals)
            })
            .collect();

        let mut surplus = 0.0;
        for i0 in 0..tables[0].0.len() {
            for i1 in 0..tables[1].0.len() {
                let prob = tables[0].1[i0] * tables[1].1[i1];
                let (phi0, phi1) = (tables[0].2[i0], tables[1].2[i1]);
                let best = phi0.max(phi1);
                if best >= 0.0 {
                    surplus += prob * best;
                }
            }
        }
        prop_assert!(
            (revenue - surplus).abs() < 1e-9,
            "revenue {} vs virtual surplus {}",
            revenue,
            surplus
        );
    }

    /// Optimal revenue is monotone under first-order dominance.
    #[test]
    fn weak_revenue_monotonicity(dist in discrete_dist(), theta in 0.1f64..1.0) {
        let upper = ProductPrior { family: Family::Unknown, buyers: vec![dist.clone()] };
        let lower = ProductPrior {
            family: Family::Unknown,
            buyers: vec![dist.truncate_tail(theta)],
        };
        prop_assert!(
            opt_revenue(&upper).expect("ok") >= opt_revenue(&lower).expect("ok") - 1e-9
        );
    }
}
