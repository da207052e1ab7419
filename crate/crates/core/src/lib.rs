//! Learning near-optimal single-item auctions from targeted samples.
//!
//! The crate covers the full pipeline at desk scale: quantile-space priors
//! with ironing ([`quantile`]), exact and Monte Carlo evaluation of the
//! optimal auction ([`myerson`]), targeted sampling oracles with budget
//! accounting ([`oracle`]), the shading-based learners ([`learners`]),
//! verification tooling ([`analysis`]), and prior generators plus experiment
//! drivers ([`families`], [`experiment`]).

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod families;
pub mod learners;
pub mod myerson;
pub mod oracle;
pub mod prior;
pub mod quantile;
pub mod rng;

pub use error::{Error, Result};
pub use myerson::{
    build_auction, expected_revenue, opt_revenue, AuctionRule, Outcome, RevenueMode,
};
pub use oracle::{BudgetSnapshot, Oracle, OracleConfig, OracleMode};
pub use prior::{Family, ProductPrior};
pub use quantile::{
    iron, CurvePoint, IronedCurve, QuantileDistribution, RevenueCurve, SupportPoint,
};
