//! Learning algorithms: shading machinery, multi-buyer learners over
//! targeted oracles, single-buyer reserve search, and the parameter chooser
//! that picks both.

mod multi;
mod shade;
mod single;

pub use multi::{learn_hybrid, learn_interval, learn_pinpoint, LearnResult};
pub use shade::{
    hybrid_sf, interval_f, interval_sf, pinpoint_budget_bound, pinpoints, shade_df, shade_f,
    ShadeParams,
};
pub use single::{single_concave_search, single_grid_geometric, single_grid_unit, SingleResult};

use crate::error::{Error, Result};
use crate::prior::Family;

/// Which learner a plan routes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Pinpoint,
    Interval,
    Hybrid,
    SingleConcave,
    SingleGridUnit,
    SingleGridGeometric,
}

/// A budget plus a learner selection.
#[derive(Debug, Clone, Copy)]
pub struct LearnPlan {
    pub params: ShadeParams,
    pub learner: LearnerKind,
}

/// Per-family scale constant: estimating revenue to a fixed accuracy on this
/// family needs sample batches proportional to `1 / p`.
fn family_rate(family: Family, eps: f64) -> Result<f64> {
    Ok(match family {
        Family::Unit01 => 1.0,
        Family::Regular => eps / 8.0,
        Family::Mhr => 1.0 / (2.0 / eps).ln(),
        Family::OneToH(h) => 1.0 / h,
        Family::Unknown => return Err(Error::UnknownFamily),
    })
}

/// Extra headroom on the per-interval batch size of the wide-targeting
/// regime; the theory fixes only the rate.
const INTERVAL_RATE_SCALE: f64 = 8.0;

/// Picks the budget and learner for a family, accuracy and targeting power.
///
/// Exact queries route to the grid learner with `N ~ log / (sqrt(p) eps)`;
/// width at least `1/n` routes to the interval learner with per-interval
/// batches `N ~ log * n * delta / (p * eps^2)`; anything in between routes to
/// the mixed learner. A single buyer routes to the family's direct search.
pub fn choose_params(
    family: Family,
    eps: f64,
    n: usize,
    delta: f64,
    c_log: f64,
) -> Result<LearnPlan> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter("eps must be in (0, 1)".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one buyer".into()));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter("delta must be in [0, 1]".into()));
    }
    let p = family_rate(family, eps)?;
    let log_fac = (n as f64 / eps).ln().ceil().max(1.0);

    if n == 1 {
        let learner = match family {
            Family::Regular | Family::Mhr => LearnerKind::SingleConcave,
            Family::Unit01 => LearnerKind::SingleGridUnit,
            Family::OneToH(_) => LearnerKind::SingleGridGeometric,
            Family::Unknown => return Err(Error::UnknownFamily),
        };
        // Batch size per probed point; one sample suffices for exact queries.
        let per_point = if delta == 0.0 {
            1.0
        } else {
            match family {
                Family::Regular => (delta * delta / eps.powi(4)).min(delta / eps.powi(3)),
                Family::Mhr => delta * delta / (eps * eps),
                _ => delta / (eps * eps),
            }
            .max(1.0)
        };
        let budget = (c_log * log_fac * per_point).ceil().max(2.0) as u32;
        let params = ShadeParams::new(budget, 1, delta)?.with_c_log(c_log);
        return Ok(LearnPlan { params, learner });
    }

    let (learner, budget) = if delta == 0.0 {
        let n_budget = c_log * log_fac / (p.sqrt() * eps);
        (LearnerKind::Pinpoint, n_budget)
    } else if delta >= 1.0 / n as f64 - 1e-12 {
        let n_budget = c_log * log_fac * INTERVAL_RATE_SCALE * n as f64 * delta / (p * eps * eps);
        (LearnerKind::Interval, n_budget)
    } else {
        let n_budget = c_log * log_fac / (p.sqrt() * eps);
        (LearnerKind::Hybrid, n_budget)
    };
    let budget = budget.ceil().max(2.0).min(u32::MAX as f64) as u32;
    let params = ShadeParams::new(budget, n as u32, delta)?.with_c_log(c_log);
    Ok(LearnPlan { params, learner })
}
