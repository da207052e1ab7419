//! Optimal single-item auction for a discrete product prior.
//!
//! The rule maps each bid through its buyer's ironed virtual value (bids are
//! first rounded down to the buyer's support), gives the item to the highest
//! nonnegative virtual with ties to the lowest index, and charges the
//! winner's critical bid: the smallest support value that still wins.

use crate::error::{Error, Result};
use crate::prior::ProductPrior;
use crate::quantile::{iron, QuantileDistribution};
use crate::rng::Stream;

/// Hard cap on exact enumeration size.
const ENUMERATION_CAP: u128 = 10_000_000;

/// Per-buyer slice of the auction rule.
#[derive(Debug, Clone)]
pub struct BuyerRule {
    /// Support values ascending.
    values: Vec<f64>,
    /// Ironed virtual value of each support value (nondecreasing).
    virtuals: Vec<f64>,
    /// Virtual assigned to bids below the whole support.
    below: f64,
}

impl BuyerRule {
    fn from_prior(dist: &QuantileDistribution) -> Result<Self> {
        let QuantileDistribution::Discrete { support } = dist else {
            return Err(Error::DiscretizeFirst);
        };
        let hull = iron(&dist.revenue_curve());
        let cum = dist.cumulative();
        // Support is stored descending; emit ascending.
        let mut values = Vec::with_capacity(support.len());
        let mut virtuals = Vec::with_capacity(support.len());
        for (p, &q) in support.iter().zip(cum.iter()).rev() {
            values.push(p.value);
            virtuals.push(hull.virtual_at_quantile(q));
        }
        let below = virtuals[0];
        Ok(BuyerRule {
            values,
            virtuals,
            below,
        })
    }

    /// Ironed virtual of a bid after rounding down to the support.
    pub fn virtual_of_bid(&self, bid: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v <= bid);
        if idx == 0 {
            self.below
        } else {
            self.virtuals[idx - 1]
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.values
    }

    pub fn virtuals(&self) -> &[f64] {
        &self.virtuals
    }

    /// Monopoly reserve: smallest support value with nonnegative virtual.
    pub fn reserve(&self) -> Option<f64> {
        self.virtuals
            .iter()
            .position(|&phi| phi >= 0.0)
            .map(|i| self.values[i])
    }
}

/// A deterministic DSIC single-item auction.
#[derive(Debug, Clone)]
pub struct AuctionRule {
    buyers: Vec<BuyerRule>,
}

/// Result of one auction run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub winner: Option<usize>,
    pub payment: f64,
}

/// How to evaluate expected revenue.
#[derive(Debug, Clone, Copy)]
pub enum RevenueMode {
    /// Full enumeration over the product of supports.
    Exact,
    /// Seeded i.i.d. profile draws.
    MonteCarlo { trials: usize, seed: u64 },
}

/// Expected revenue together with a standard error when estimated.
#[derive(Debug, Clone, Copy)]
pub struct RevenueEstimate {
    pub revenue: f64,
    pub stderr: Option<f64>,
}

/// Builds the optimal auction for a discrete product prior.
pub fn build_auction(prior: &ProductPrior) -> Result<AuctionRule> {
    let buyers = prior
        .buyers
        .iter()
        .map(BuyerRule::from_prior)
        .collect::<Result<Vec<_>>>()?;
    Ok(AuctionRule { buyers })
}

impl AuctionRule {
    pub fn n(&self) -> usize {
        self.buyers.len()
    }

    pub fn buyer(&self, i: usize) -> &BuyerRule {
        &self.buyers[i]
    }

    /// Winner index for a profile of virtuals: highest nonnegative virtual,
    /// ties to the lowest index.
    fn winner_of(virtuals: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &phi) in virtuals.iter().enumerate() {
            if phi >= 0.0 && best.is_none_or(|(_, b)| phi > b) {
                best = Some((i, phi));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Critical payment for `winner` against the other buyers' virtuals:
    /// the smallest support value whose virtual still wins.
    fn payment_of(&self, winner: usize, virtuals: &[f64]) -> f64 {
        let before = virtuals[..winner]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let after = virtuals[winner + 1..]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let rule = &self.buyers[winner];
        // Virtuals are nondecreasing along the ascending support, so the
        // first clearing index is the critical bid.
        for (i, &phi) in rule.virtuals.iter().enumerate() {
            if phi >= 0.0 && phi > before && phi >= after {
                return rule.values[i];
            }
        }
        unreachable!("winner's own bid clears its threshold");
    }

    /// Runs the auction on a bid profile.
    pub fn run(&self, bids: &[f64]) -> Result<Outcome> {
        if bids.len() != self.buyers.len() {
            return Err(Error::BidCountMismatch {
                got: bids.len(),
                want: self.buyers.len(),
            });
        }
        if bids.iter().any(|&b| b < 0.0) {
            return Err(Error::NegativeValue);
        }
        let virtuals: Vec<f64> = self
            .buyers
            .iter()
            .zip(bids)
            .map(|(r, &b)| r.virtual_of_bid(b))
            .collect();
        match Self::winner_of(&virtuals) {
            None => Ok(Outcome {
                winner: None,
                payment: 0.0,
            }),
            Some(w) => Ok(Outcome {
                winner: Some(w),
                payment: self.payment_of(w, &virtuals),
            }),
        }
    }
}

/// Alias for [`AuctionRule::run`] matching the operation vocabulary.
pub fn run_auction(rule: &AuctionRule, bids: &[f64]) -> Result<Outcome> {
    rule.run(bids)
}

/// Expected revenue of `rule` on `prior`, exactly or by Monte Carlo.
pub fn expected_revenue(
    rule: &AuctionRule,
    prior: &ProductPrior,
    mode: RevenueMode,
) -> Result<RevenueEstimate> {
    if prior.n() != rule.n() {
        return Err(Error::BidCountMismatch {
            got: prior.n(),
            want: rule.n(),
        });
    }
    match mode {
        RevenueMode::Exact => exact_revenue(rule, prior).map(|revenue| RevenueEstimate {
            revenue,
            stderr: None,
        }),
        RevenueMode::MonteCarlo { trials, seed } => monte_carlo_revenue(rule, prior, trials, seed),
    }
}

/// Optimal revenue of a prior: its own auction evaluated exactly.
pub fn opt_revenue(prior: &ProductPrior) -> Result<f64> {
    Ok(expected_revenue(&build_auction(prior)?, prior, RevenueMode::Exact)?.revenue)
}

struct BuyerTable {
    values: Vec<f64>,
    masses: Vec<f64>,
    /// Virtual of each support value under the rule being evaluated.
    virtuals: Vec<f64>,
}

fn buyer_tables(rule: &AuctionRule, prior: &ProductPrior) -> Result<Vec<BuyerTable>> {
    prior
        .buyers
        .iter()
        .zip(&rule.buyers)
        .map(|(dist, brule)| {
            let QuantileDistribution::Discrete { support } = dist else {
                return Err(Error::DiscretizeFirst);
            };
            let mut values = Vec::with_capacity(support.len());
            let mut masses = Vec::with_capacity(support.len());
            for p in support.iter().rev() {
                values.push(p.value);
                masses.push(p.mass);
            }
            let virtuals = values.iter().map(|&v| brule.virtual_of_bid(v)).collect();
            Ok(BuyerTable {
                values,
                masses,
                virtuals,
            })
        })
        .collect()
}

fn exact_revenue(rule: &AuctionRule, prior: &ProductPrior) -> Result<f64> {
    let tables = buyer_tables(rule, prior)?;
    let total: u128 = tables.iter().map(|t| t.values.len() as u128).product();
    if total > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge(total));
    }

    let n = tables.len();
    let mut idx = vec![0usize; n];
    let mut revenue = 0.0;
    loop {
        let mut prob = 1.0;
        for (i, t) in tables.iter().enumerate() {
            prob *= t.masses[idx[i]];
        }
        let virtuals: Vec<f64> = tables
            .iter()
            .enumerate()
            .map(|(i, t)| t.virtuals[idx[i]])
            .collect();
        if let Some(w) = AuctionRule::winner_of(&virtuals) {
            revenue += prob * rule.payment_of(w, &virtuals);
        }

        // Odometer step.
        let mut i = 0;
        loop {
            if i == n {
                return Ok(revenue);
            }
            idx[i] += 1;
            if idx[i] < tables[i].values.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Chunked so parallel evaluation could derive the same substreams from
/// (seed, chunk); results are independent of scheduling either way.
const MC_CHUNK: usize = 1024;

fn monte_carlo_revenue(
    rule: &AuctionRule,
    prior: &ProductPrior,
    trials: usize,
    seed: u64,
) -> Result<RevenueEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut bids = vec![0.0; prior.n()];
    let mut done = 0usize;
    let mut chunk_id = 0u64;
    while done < trials {
        let mut stream = Stream::new(seed, &[chunk_id]);
        let here = MC_CHUNK.min(trials - done);
        for _ in 0..here {
            for (b, dist) in bids.iter_mut().zip(&prior.buyers) {
                *b = dist.value_at(stream.next_unit())?;
            }
            let pay = rule.run(&bids)?.payment;
            sum += pay;
            sum_sq += pay * pay;
        }
        done += here;
        chunk_id += 1;
    }
    let mean = sum / trials as f64;
    let var = (sum_sq / trials as f64 - mean * mean).max(0.0);
    let stderr = (var / trials as f64).sqrt();
    Ok(RevenueEstimate {
        revenue: mean,
        stderr: Some(stderr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::Family;

    fn uniform_grid() -> QuantileDistribution {
        QuantileDistribution::discrete_from_pairs(
            (1..=10).rev().map(|k| (k as f64 / 10.0, 0.1)).collect(),
        )
        .expect("valid")
    }

    fn single(dist: QuantileDistribution) -> ProductPrior {
        ProductPrior {
            family: Family::Unknown,
            buyers: vec![dist],
        }
    }

    #[test]
    fn single_buyer_rule_is_a_posted_price() {
        let prior = single(uniform_grid());
        let rule = build_auction(&prior).expect("ok");
        assert_eq!(rule.buyer(0).reserve(), Some(0.5));

        assert_eq!(
            rule.run(&[0.7]).expect("ok"),
            Outcome {
                winner: Some(0),
                payment: 0.5
            }
        );
        assert_eq!(
            rule.run(&[0.3]).expect("ok"),
            Outcome {
                winner: None,
                payment: 0.0
            }
        );

        let point = single(QuantileDistribution::point_mass(1.0));
        let rule = build_auction(&point).expect("ok");
        assert_eq!(rule.buyer(0).reserve(), Some(1.0));
    }

    #[test]
    fn higher_constant_virtual_always_wins() {
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![
                QuantileDistribution::point_mass(1.0),
                QuantileDistribution::point_mass(2.0),
            ],
        };
        let rule = build_auction(&prior).expect("ok");
        let out = rule.run(&[1.0, 2.0]).expect("ok");
        assert_eq!(out.winner, Some(1));
        assert_eq!(out.payment, 2.0);
    }

    #[test]
    fn curve_buyers_are_rejected() {
        let prior = single(
            QuantileDistribution::curve(vec![
                crate::quantile::CurvePoint { q: 0.0, v: 1.0 },
                crate::quantile::CurvePoint { q: 1.0, v: 0.0 },
            ])
            .expect("valid"),
        );
        assert!(matches!(build_auction(&prior), Err(Error::DiscretizeFirst)));
    }

    #[test]
    fn exact_revenue_examples() {
        let two_points = ProductPrior {
            family: Family::Unknown,
            buyers: vec![
                QuantileDistribution::point_mass(1.0),
                QuantileDistribution::point_mass(1.0),
            ],
        };
        assert!((opt_revenue(&two_points).expect("ok") - 1.0).abs() < 1e-12);

        let grid = single(uniform_grid());
        assert!((opt_revenue(&grid).expect("ok") - 0.30).abs() < 1e-12);

        let dist =
            QuantileDistribution::discrete_from_pairs(vec![(5.0, 0.25), (4.0, 0.05), (1.0, 0.7)])
                .expect("valid");
        let best_posted = [5.0, 4.0, 1.0]
            .iter()
            .map(|&p| p * dist.quantile_of(p))
            .fold(f64::NEG_INFINITY, f64::max);
        let spiky = single(dist);
        assert!((opt_revenue(&spiky).expect("ok") - 1.25).abs() < 1e-12);
        assert!((best_posted - 1.25).abs() < 1e-12);
    }

    #[test]
    fn grid_revenue_matches_posted_price_enumeration() {
        // Brute force over all posted prices on the grid distribution.
        let grid = uniform_grid();
        let best = (1..=10)
            .map(|k| {
                let p = k as f64 / 10.0;
                p * grid.quantile_of(p)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((opt_revenue(&single(grid)).expect("ok") - best).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let prior = single(uniform_grid());
        let rule = build_auction(&prior).expect("ok");
        let mc = expected_revenue(
            &rule,
            &prior,
            RevenueMode::MonteCarlo {
                trials: 100_000,
                seed: 11,
            },
        )
        .expect("ok");
        let se = mc.stderr.expect("stderr present");
        assert!(
            (mc.revenue - 0.30).abs() < 3.0 * se,
            "mc {} se {}",
            mc.revenue,
            se
        );

        // Same seed, same answer.
        let again = expected_revenue(
            &rule,
            &prior,
            RevenueMode::MonteCarlo {
                trials: 100_000,
                seed: 11,
            },
        )
        .expect("ok");
        assert_eq!(mc.revenue, again.revenue);
    }

    #[test]
    fn virtual_surplus_identity_holds_exactly() {
        // E[payments] equals E[winner's ironed virtual] profile by profile in
        // expectation, because allocation depends only on rounded values.
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![
                QuantileDistribution::discrete_from_pairs(vec![(3.0, 0.3), (2.0, 0.4), (1.0, 0.3)])
                    .expect("valid"),
                QuantileDistribution::discrete_from_pairs(vec![(2.5, 0.5), (0.5, 0.5)])
                    .expect("valid"),
            ],
        };
        let rule = build_auction(&prior).expect("ok");
        let exact = opt_revenue(&prior).expect("ok");

        let tables = buyer_tables(&rule, &prior).expect("discrete");
        let mut surplus = 0.0;
        for i0 in 0..tables[0].values.len() {
            for i1 in 0..tables[1].values.len() {
                let prob = tables[0].masses[i0] * tables[1].masses[i1];
                let virtuals = [tables[0].virtuals[i0], tables[1].virtuals[i1]];
                if let Some(w) = AuctionRule::winner_of(&virtuals) {
                    surplus += prob * virtuals[w];
                }
            }
        }
        assert!(
            (exact - surplus).abs() < 1e-9,
            "exact {exact} surplus {surplus}"
        );
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let grid = uniform_grid();
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![grid; 8], // 10^8 profiles
        };
        let rule = build_auction(&prior).expect("ok");
        assert!(matches!(
            expected_revenue(&rule, &prior, RevenueMode::Exact),
            Err(Error::EnumerationTooLarge(100_000_000))
        ));
        // Monte Carlo still works.
        let mc = expected_revenue(
            &rule,
            &prior,
            RevenueMode::MonteCarlo {
                trials: 2000,
                seed: 4,
            },
        )
        .expect("ok");
        assert!(mc.revenue > 0.0);
    }

    #[test]
    fn payment_never_exceeds_bid() {
        let prior = ProductPrior {
            family: Family::Unknown,
            buyers: vec![uniform_grid(), uniform_grid()],
        };
        let rule = build_auction(&prior).expect("ok");
        for a in 1..=10 {
            for b in 1..=10 {
                let bids = [a as f64 / 10.0, b as f64 / 10.0];
                let out = rule.run(&bids).expect("ok");
                match out.winner {
                    Some(w) => assert!(out.payment <= bids[w] + 1e-12),
                    None => assert_eq!(out.payment, 0.0),
                }
            }
        }
    }
}
