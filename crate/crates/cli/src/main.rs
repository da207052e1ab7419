//! Command-line driver: prior generation, learning runs, analysis reports
//! and benchmark suites.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use auction_core::analysis::{kl_revenue_gap, theta_thresholds};
use auction_core::experiment::{run_experiment, ExperimentConfig, Suite};
use auction_core::families::{gen_family, gen_lowerbound, GenSpec, LowerBound};
use auction_core::learners::{
    choose_params, learn_hybrid, learn_interval, learn_pinpoint, single_concave_search,
    single_grid_geometric, single_grid_unit, LearnerKind,
};
use auction_core::myerson::opt_revenue;
use auction_core::oracle::{Oracle, OracleConfig, OracleMode};
use auction_core::prior::{Family, ProductPrior};

#[derive(Parser)]
#[command(
    name = "auction-bench",
    about = "Single-item auction learning from targeted samples",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FamilyArgs {
    /// Distribution family: regular | mhr | unit01 | one_to_h | unknown
    #[arg(long, default_value = "unit01")]
    family: String,
    /// Upper support bound for the one_to_h family
    #[arg(long)]
    h: Option<f64>,
}

impl FamilyArgs {
    fn family(&self) -> Result<Family> {
        Ok(Family::parse(&self.family, self.h)?)
    }
}

#[derive(Args)]
struct OracleArgs {
    /// Targeting power: minimum quantile-interval width
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Oracle mode: exact | data-holder
    #[arg(long, default_value = "exact")]
    oracle_mode: String,
    /// Data-holder dataset size per buyer
    #[arg(long, default_value_t = 1000)]
    holder_m: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl OracleArgs {
    fn config(&self) -> Result<OracleConfig> {
        let mode = match self.oracle_mode.as_str() {
            "exact" => OracleMode::ExactDistribution,
            "data-holder" => OracleMode::DataHolder {
                samples_per_buyer: self.holder_m,
            },
            other => bail!("unknown oracle mode {other}"),
        };
        Ok(OracleConfig {
            delta: self.delta,
            mode,
            seed: self.seed,
            allow_query: false,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random prior and write it as JSON.
    Gen {
        #[command(flatten)]
        family: FamilyArgs,
        /// Number of buyers
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Support size per buyer
        #[arg(long, default_value_t = 12)]
        support: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn an auction from a prior through a targeted oracle.
    Learn {
        /// Prior JSON produced by `gen` (or hand-written)
        #[arg(long)]
        prior: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        /// Additive / multiplicative accuracy target
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Expected buyer count; checked against the prior file
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Constant multiplier on chosen budgets
        #[arg(long, default_value_t = 1.0)]
        c_log: f64,
        /// Override the log factor L used by width-limited shading
        #[arg(long = "L")]
        log_factor: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analysis report for one prior (thresholds) or two (divergence).
    Analyze {
        #[arg(long)]
        prior: PathBuf,
        /// Second prior for dominance / divergence comparison
        #[arg(long)]
        prior2: Option<PathBuf>,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark suite and write CSV (and optionally JSON) records.
    Bench {
        /// Suite name, e.g. sandwich, monotonicity, interval-regime
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        support: usize,
        #[arg(long, default_value_t = 1.0)]
        c_log: f64,
        #[arg(long = "L")]
        log_factor: Option<f64>,
        /// Query budget for the lower-bound suite
        #[arg(long, default_value_t = 10)]
        queries: usize,
        /// CSV output path
        #[arg(long)]
        out: PathBuf,
        /// Also write the full report as JSON next to the CSV
        #[arg(long, default_value_t = false)]
        json: bool,
    },
    /// Generate a hard lower-bound instance as a curve prior.
    Lowerbound {
        /// Instance family: top-triangle | unit-hill | geo-hill
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0.02)]
        eps: f64,
        /// Refinement rounds (top-triangle)
        #[arg(long, default_value_t = 2)]
        rounds: u32,
        /// Curve index (top-triangle) or hill site (hills)
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen {
            family,
            n,
            support,
            seed,
            out,
        } => {
            let prior = gen_family(family.family()?, &GenSpec { buyers: n, support }, seed)?;
            prior.save(&out)?;
            println!(
                "wrote {} buyers ({}) to {}",
                n,
                family.family,
                out.display()
            );
        }
        Command::Learn {
            prior,
            family,
            eps,
            n,
            oracle,
            c_log,
            log_factor,
            out,
        } => {
            let prior = ProductPrior::load(&prior)?;
            let fam = family.family()?;
            if let Some(expected) = n {
                if expected != prior.n() {
                    bail!(
                        "--n {} does not match the prior's {} buyers",
                        expected,
                        prior.n()
                    );
                }
            }
            let n = prior.n();
            let plan = choose_params(fam, eps, n, oracle.delta, c_log)?;
            let mut params = plan.params;
            if let Some(lf) = log_factor {
                params = params.with_log_factor(lf);
            }
            let oracle = Oracle::new(prior.clone(), oracle.config()?)?;
            let report = match plan.learner {
                LearnerKind::Pinpoint => learn_report(&learn_pinpoint(&oracle, &params)?)?,
                LearnerKind::Interval => learn_report(&learn_interval(&oracle, &params)?)?,
                LearnerKind::Hybrid => learn_report(&learn_hybrid(&oracle, &params)?)?,
                LearnerKind::SingleConcave => {
                    let r = single_concave_search(&oracle, fam, eps, params.budget as usize)?;
                    single_report(r.reserve, r.points_probed, &oracle)
                }
                LearnerKind::SingleGridUnit => {
                    let r = single_grid_unit(&oracle, eps)?;
                    single_report(r.reserve, r.points_probed, &oracle)
                }
                LearnerKind::SingleGridGeometric => {
                    let Family::OneToH(h) = fam else {
                        bail!("geometric grid needs one_to_h")
                    };
                    let r = single_grid_geometric(&oracle, eps, h)?;
                    single_report(r.reserve, r.points_probed, &oracle)
                }
            };
            fs::write(&out, serde_json::to_string_pretty(&report)?)
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "learned with {:?}; result in {}",
                plan.learner,
                out.display()
            );
        }
        Command::Analyze {
            prior,
            prior2,
            eps,
            out,
        } => {
            let a = ProductPrior::load(&prior)?;
            let mut report = serde_json::Map::new();
            let a_discrete = discretized(&a)?;
            report.insert(
                "opt".into(),
                serde_json::to_value(opt_revenue(&a_discrete)?)?,
            );
            report.insert(
                "thresholds".into(),
                serde_json::to_value(theta_thresholds(&a_discrete, eps)?)?,
            );
            if let Some(path) = prior2 {
                let b = ProductPrior::load(&path)?;
                let b_discrete = discretized(&b)?;
                let dominated: Vec<bool> = a_discrete
                    .buyers
                    .iter()
                    .zip(&b_discrete.buyers)
                    .map(|(x, y)| x.dominates(y))
                    .collect();
                report.insert("dominates".into(), serde_json::to_value(dominated)?);
                report.insert(
                    "kl_gap".into(),
                    serde_json::to_value(kl_revenue_gap(
                        &a_discrete,
                        &b_discrete,
                        1.0 / (eps * eps),
                        eps,
                    )?)?,
                );
            }
            let text = serde_json::to_string_pretty(&serde_json::Value::Object(report))?;
            match out {
                Some(path) => {
                    fs::write(&path, text)
                        .with_context(|| format!("writing {}", path.display()))?;
                    println!("report in {}", path.display());
                }
                None => println!("{text}"),
            }
        }
        Command::Bench {
            suite,
            family,
            eps,
            delta,
            n,
            trials,
            seed,
            support,
            c_log,
            log_factor,
            queries,
            out,
            json,
        } => {
            let mut config = ExperimentConfig::new(suite.parse::<Suite>()?);
            config.family = family.family;
            config.h = family.h;
            config.eps = eps;
            config.delta = delta;
            config.n = n;
            config.trials = trials;
            config.seed = seed;
            config.support = support;
            config.c_log = c_log;
            config.log_factor = log_factor;
            config.queries = queries;
            let report = run_experiment(&config)?;
            fs::write(&out, report.to_csv())
                .with_context(|| format!("writing {}", out.display()))?;
            if json {
                let json_path = out.with_extension("json");
                fs::write(&json_path, serde_json::to_string_pretty(&report)?)
                    .with_context(|| format!("writing {}", json_path.display()))?;
            }
            let s = &report.summary;
            println!(
                "{}: {}/{} pass (rate {:.3}), mean gap {:.4}, budget {}",
                config.suite, s.passes, s.trials, s.pass_rate, s.mean_gap, s.total_budget
            );
        }
        Command::Lowerbound {
            family,
            eps,
            rounds,
            index,
            h,
            out,
        } => {
            let instance = match family.as_str() {
                "top-triangle" => LowerBound::TopTriangle { rounds, index },
                "unit-hill" => LowerBound::UnitHill { eps, site: index },
                "geo-hill" => {
                    let h = h.context("geo-hill needs --h")?;
                    LowerBound::GeoHill {
                        eps,
                        h,
                        site: index,
                    }
                }
                other => bail!("unknown lower-bound family {other}"),
            };
            let dist = gen_lowerbound(&instance)?;
            let family_tag = match instance {
                LowerBound::GeoHill { h, .. } => Family::OneToH(h),
                LowerBound::UnitHill { .. } => Family::Unit01,
                LowerBound::TopTriangle { .. } => Family::Regular,
            };
            let prior = ProductPrior::new(family_tag, vec![dist])?;
            prior.save(&out)?;
            println!("wrote {family} instance to {}", out.display());
        }
    }
    Ok(())
}

/// Exact evaluation needs discrete buyers; curve priors get a fine grid.
fn discretized(prior: &ProductPrior) -> Result<ProductPrior> {
    let buyers = prior
        .buyers
        .iter()
        .map(|b| Ok(b.discretize(10_000)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductPrior {
        family: prior.family,
        buyers,
    })
}

fn learn_report(result: &auction_core::learners::LearnResult) -> Result<serde_json::Value> {
    let reserves: Vec<Option<f64>> = (0..result.learned_prior.n())
        .map(|i| result.rule.buyer(i).reserve())
        .collect();
    Ok(serde_json::json!({
        "learned_prior": result.learned_prior,
        "rule": { "per_buyer_reserve": reserves },
        "learned_opt": opt_revenue(&result.learned_prior)?,
        "budget": result.budget,
        "params": result.params,
    }))
}

fn single_report(reserve: f64, probes: usize, oracle: &Oracle) -> serde_json::Value {
    serde_json::json!({
        "reserve": reserve,
        "points_probed": probes,
        "budget": oracle.ledger(),
    })
}
