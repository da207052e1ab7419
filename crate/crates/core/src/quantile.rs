//! Quantile-space value priors.
//!
//! A buyer's prior is stored either as a discrete set of point masses or as a
//! piecewise-linear value curve over quantiles. The quantile of a value `v` is
//! `q(v) = Pr[V >= v]`, so small quantiles correspond to high values. At a
//! point mass the value owns the half-open cumulative interval
//! `(q_prev, q_this]`; `value_at(0)` is an error rather than an infinite
//! value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for probability sums and dominance comparisons.
pub const PROB_TOL: f64 = 1e-12;

/// One point mass of a discrete prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub value: f64,
    pub mass: f64,
}

/// One breakpoint of a piecewise-linear value curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub q: f64,
    pub v: f64,
}

/// A single buyer's value prior in quantile space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum QuantileDistribution {
    /// Point masses sorted strictly descending by value; masses sum to 1.
    Discrete { support: Vec<SupportPoint> },
    /// Breakpoints with strictly increasing quantile and nonincreasing value;
    /// values between breakpoints interpolate linearly.
    Curve { breakpoints: Vec<CurvePoint> },
}

impl QuantileDistribution {
    /// Builds a discrete distribution from raw (value, mass) pairs: sorts
    /// descending, merges equal values, drops empty masses and pins the mass
    /// sum to exactly 1 by adjusting the lowest value.
    pub fn discrete_from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().filter(|&(_, m)| m > 0.0).collect();
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution("no positive masses".into()));
        }
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite values"));
        let mut support: Vec<SupportPoint> = Vec::with_capacity(pairs.len());
        for (value, mass) in pairs {
            if value < 0.0 || !value.is_finite() {
                return Err(Error::InvalidDistribution(format!("bad value {value}")));
            }
            match support.last_mut() {
                Some(last) if last.value == value => last.mass += mass,
                _ => support.push(SupportPoint { value, mass }),
            }
        }
        let total: f64 = support.iter().map(|p| p.mass).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        // Absorb float drift into the lowest value so cumulative quantiles end
        // exactly at 1.
        let last = support.last_mut().expect("nonempty");
        last.mass += 1.0 - total;
        if last.mass <= 0.0 {
            support.pop();
        }
        let dist = QuantileDistribution::Discrete { support };
        dist.validate()?;
        Ok(dist)
    }

    /// Empirical distribution of a sample set: mass of `v` is its
    /// multiplicity over the sample count.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        let w = 1.0 / values.len() as f64;
        Self::discrete_from_pairs(values.iter().map(|&v| (v, w)).collect())
    }

    /// Point mass at a single value.
    pub fn point_mass(value: f64) -> Self {
        QuantileDistribution::Discrete {
            support: vec![SupportPoint { value, mass: 1.0 }],
        }
    }

    pub fn curve(breakpoints: Vec<CurvePoint>) -> Result<Self> {
        let dist = QuantileDistribution::Curve { breakpoints };
        dist.validate()?;
        Ok(dist)
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, QuantileDistribution::Discrete { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            QuantileDistribution::Discrete { support } => {
                if support.is_empty() {
                    return Err(Error::InvalidDistribution("empty support".into()));
                }
                let mut total = 0.0;
                for (i, p) in support.iter().enumerate() {
                    if !(p.value.is_finite() && p.value >= 0.0) {
                        return Err(Error::InvalidDistribution(format!("bad value {}", p.value)));
                    }
                    if !(p.mass.is_finite() && p.mass > 0.0 && p.mass <= 1.0 + PROB_TOL) {
                        return Err(Error::InvalidDistribution(format!("bad mass {}", p.mass)));
                    }
                    if i > 0 && support[i - 1].value <= p.value {
                        return Err(Error::InvalidDistribution(
                            "support not strictly descending".into(),
                        ));
                    }
                    total += p.mass;
                }
                if (total - 1.0).abs() > PROB_TOL {
                    return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
                }
                Ok(())
            }
            QuantileDistribution::Curve { breakpoints } => {
                if breakpoints.len() < 2 {
                    return Err(Error::InvalidDistribution(
                        "curve needs >= 2 breakpoints".into(),
                    ));
                }
                for (i, p) in breakpoints.iter().enumerate() {
                    if !(p.q.is_finite() && (0.0..=1.0).contains(&p.q)) {
                        return Err(Error::InvalidDistribution(format!("bad quantile {}", p.q)));
                    }
                    if !(p.v.is_finite() && p.v >= 0.0) {
                        return Err(Error::InvalidDistribution(format!("bad value {}", p.v)));
                    }
                    if i > 0 {
                        if breakpoints[i - 1].q >= p.q {
                            return Err(Error::InvalidDistribution(
                                "curve quantiles not strictly increasing".into(),
                            ));
                        }
                        if breakpoints[i - 1].v < p.v - PROB_TOL {
                            return Err(Error::InvalidDistribution(
                                "curve values increase with quantile".into(),
                            ));
                        }
                    }
                }
                let last = breakpoints.last().expect("nonempty");
                if (last.q - 1.0).abs() > PROB_TOL {
                    return Err(Error::InvalidDistribution(
                        "curve must end at quantile 1".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Cumulative quantiles of a discrete support, in support order
    /// (descending value). The last entry is 1.
    pub fn cumulative(&self) -> Vec<f64> {
        match self {
            QuantileDistribution::Discrete { support } => {
                let mut acc = 0.0;
                let mut cum: Vec<f64> = support
                    .iter()
                    .map(|p| {
                        acc += p.mass;
                        acc
                    })
                    .collect();
                if let Some(last) = cum.last_mut() {
                    *last = 1.0;
                }
                cum
            }
            QuantileDistribution::Curve { .. } => panic!("cumulative() needs a discrete prior"),
        }
    }

    pub fn max_value(&self) -> f64 {
        match self {
            QuantileDistribution::Discrete { support } => support[0].value,
            QuantileDistribution::Curve { breakpoints } => breakpoints[0].v,
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            QuantileDistribution::Discrete { support } => support.last().expect("nonempty").value,
            QuantileDistribution::Curve { breakpoints } => breakpoints.last().expect("nonempty").v,
        }
    }

    /// `Pr[V >= v]` for `v >= 0`.
    pub fn quantile_of(&self, v: f64) -> f64 {
        debug_assert!(v >= 0.0, "quantile_of needs a nonnegative value");
        match self {
            QuantileDistribution::Discrete { support } => {
                // Support is descending, so `value >= v` is a prefix.
                let count = support.partition_point(|p| p.value >= v);
                if count == 0 {
                    0.0
                } else if count == support.len() {
                    1.0
                } else {
                    self.cumulative()[count - 1]
                }
            }
            QuantileDistribution::Curve { breakpoints } => {
                // Largest q with curve value >= v; flat extension below the
                // first breakpoint.
                let first = breakpoints[0];
                let last = breakpoints[breakpoints.len() - 1];
                if v > first.v {
                    return 0.0;
                }
                if v <= last.v {
                    return 1.0;
                }
                // v in (last.v, first.v]: find segment with v_hi >= v > v_lo.
                let idx = breakpoints.partition_point(|p| p.v >= v);
                // idx >= 1 and breakpoints[idx].v < v <= breakpoints[idx-1].v
                let hi = breakpoints[idx - 1];
                let lo = breakpoints[idx];
                if hi.v == lo.v {
                    return lo.q;
                }
                hi.q + (lo.q - hi.q) * (hi.v - v) / (hi.v - lo.v)
            }
        }
    }

    /// The value whose quantile interval contains `q`, for `q` in `(0, 1]`.
    pub fn value_at(&self, q: f64) -> Result<f64> {
        if q == 0.0 {
            return Err(Error::QuantileZero);
        }
        if !(q > 0.0 && q <= 1.0 + 1e-9) {
            return Err(Error::QuantileOutOfRange(q));
        }
        match self {
            QuantileDistribution::Discrete { support } => {
                let cum = self.cumulative();
                let idx = cum.partition_point(|&c| c < q).min(support.len() - 1);
                Ok(support[idx].value)
            }
            QuantileDistribution::Curve { breakpoints } => {
                let q = q.min(1.0);
                let first = breakpoints[0];
                if q <= first.q {
                    return Ok(first.v);
                }
                let idx = breakpoints.partition_point(|p| p.q < q);
                let hi = breakpoints[idx - 1];
                let lo = breakpoints[idx.min(breakpoints.len() - 1)];
                if lo.q == hi.q {
                    return Ok(lo.v);
                }
                Ok(hi.v + (lo.v - hi.v) * (q - hi.q) / (lo.q - hi.q))
            }
        }
    }

    /// Applies a nondecreasing map `s` to the quantile of every positive
    /// value; the quantile of value 0 stays 1, so the removed tail collapses
    /// onto a point mass at 0. Discrete only.
    pub fn shade_quantiles(&self, s: impl Fn(f64) -> f64) -> Self {
        let QuantileDistribution::Discrete { support } = self else {
            panic!("shade_quantiles needs a discrete prior");
        };
        let cum = self.cumulative();
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(support.len() + 1);
        let mut prev = 0.0;
        for (p, &c) in support.iter().zip(cum.iter()) {
            if p.value == 0.0 {
                break;
            }
            let shaded = s(c).clamp(0.0, 1.0);
            debug_assert!(shaded >= prev - 1e-9, "shading map must be nondecreasing");
            pairs.push((p.value, (shaded - prev).max(0.0)));
            prev = prev.max(shaded);
        }
        if prev < 1.0 {
            pairs.push((0.0, 1.0 - prev));
        }
        Self::discrete_from_pairs(pairs).expect("shaded distribution is valid")
    }

    /// Rounds values with quantile above `theta` down to 0:
    /// `q'(v) = min(q(v), theta)` for positive values.
    pub fn truncate_tail(&self, theta: f64) -> Self {
        debug_assert!((0.0..=1.0 + PROB_TOL).contains(&theta));
        match self {
            QuantileDistribution::Discrete { .. } => {
                if theta <= 0.0 {
                    return Self::point_mass(0.0);
                }
                self.shade_quantiles(|q| q.min(theta))
            }
            QuantileDistribution::Curve { breakpoints } => {
                if theta <= 0.0 {
                    return Self::point_mass(0.0);
                }
                if theta >= 1.0 - 1e-9 {
                    return self.clone();
                }
                let v_at = self.value_at(theta).expect("theta in (0,1)");
                let mut pts: Vec<CurvePoint> = breakpoints
                    .iter()
                    .copied()
                    .take_while(|p| p.q < theta)
                    .collect();
                pts.push(CurvePoint { q: theta, v: v_at });
                // Step down to 0 over a negligible quantile gap.
                let step = (theta + 1e-12).min(1.0 - 1e-12);
                if v_at > 0.0 {
                    pts.push(CurvePoint { q: step, v: 0.0 });
                }
                pts.push(CurvePoint { q: 1.0, v: 0.0 });
                QuantileDistribution::Curve { breakpoints: pts }
            }
        }
    }

    /// Moves all mass on values above `cap` down to `cap`.
    pub fn truncate_top(&self, cap: f64) -> Self {
        debug_assert!(cap >= 0.0);
        match self {
            QuantileDistribution::Discrete { support } => {
                let pairs = support.iter().map(|p| (p.value.min(cap), p.mass)).collect();
                Self::discrete_from_pairs(pairs).expect("capped distribution is valid")
            }
            QuantileDistribution::Curve { breakpoints } => {
                if cap >= self.max_value() {
                    return self.clone();
                }
                let q_cap = self.quantile_of(cap);
                let mut pts = vec![CurvePoint { q: 0.0, v: cap }];
                if q_cap > 0.0 {
                    pts.push(CurvePoint { q: q_cap, v: cap });
                }
                for p in breakpoints.iter().filter(|p| p.q > q_cap && p.v < cap) {
                    pts.push(*p);
                }
                if pts.last().expect("nonempty").q < 1.0 {
                    pts.push(CurvePoint {
                        q: 1.0,
                        v: self.min_value().min(cap),
                    });
                }
                pts.dedup_by(|a, b| a.q == b.q);
                QuantileDistribution::Curve { breakpoints: pts }
            }
        }
    }

    /// Rounds the lowest `eps` fraction of values down to 0.
    pub fn truncate_bottom(&self, eps: f64) -> Self {
        debug_assert!((0.0..=1.0 + PROB_TOL).contains(&eps));
        self.truncate_tail(1.0 - eps.clamp(0.0, 1.0))
    }

    /// First-order stochastic dominance: `self` dominates `other` when
    /// `Pr_self[V >= v] >= Pr_other[V >= v]` at every checked value.
    pub fn dominates(&self, other: &QuantileDistribution) -> bool {
        let mut grid: Vec<f64> = Vec::new();
        for d in [self, other] {
            match d {
                QuantileDistribution::Discrete { support } => {
                    grid.extend(support.iter().map(|p| p.value));
                }
                QuantileDistribution::Curve { breakpoints } => {
                    grid.extend(breakpoints.iter().map(|p| p.v));
                }
            }
        }
        grid.push(0.0);
        grid.iter()
            .all(|&v| self.quantile_of(v) >= other.quantile_of(v) - PROB_TOL)
    }

    /// Uniform-quantile-grid discretization; values sampled at grid midpoints.
    pub fn discretize(&self, grid_size: usize) -> Result<Self> {
        if grid_size == 0 {
            return Err(Error::InvalidParameter("grid_size must be positive".into()));
        }
        if self.is_discrete() {
            return Ok(self.clone());
        }
        let w = 1.0 / grid_size as f64;
        let mut pairs = Vec::with_capacity(grid_size);
        for k in 0..grid_size {
            let q = (k as f64 + 0.5) * w;
            pairs.push((self.value_at(q)?, w));
        }
        Self::discrete_from_pairs(pairs)
    }

    /// Revenue-quantile curve `R(q) = q * v(q)` sampled at (0,0) and every
    /// breakpoint.
    pub fn revenue_curve(&self) -> RevenueCurve {
        let mut points = vec![(0.0, 0.0)];
        match self {
            QuantileDistribution::Discrete { support } => {
                let cum = self.cumulative();
                for (p, &q) in support.iter().zip(cum.iter()) {
                    points.push((q, q * p.value));
                }
            }
            QuantileDistribution::Curve { breakpoints } => {
                for p in breakpoints.iter().filter(|p| p.q > 0.0) {
                    points.push((p.q, p.q * p.v));
                }
            }
        }
        RevenueCurve { points }
    }

    /// Ironed virtual value of `v`: the slope of the concave revenue envelope
    /// on the segment owning the quantile of `v` rounded down to the support.
    pub fn ironed_virtual(&self, v: f64) -> Result<f64> {
        if v < 0.0 {
            return Err(Error::NegativeValue);
        }
        let QuantileDistribution::Discrete { support } = self else {
            return Err(Error::DiscretizeFirst);
        };
        let ironed = iron(&self.revenue_curve());
        // Largest support value <= v; below the support use the final segment.
        let idx = support.partition_point(|p| p.value > v);
        if idx == support.len() {
            return Ok(*ironed.slopes.last().expect("nonempty hull"));
        }
        let q = self.cumulative()[idx];
        Ok(ironed.virtual_at_quantile(q))
    }
}

/// Revenue-quantile curve: points `(q, R)` with strictly increasing `q`,
/// starting at `(0, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevenueCurve {
    pub points: Vec<(f64, f64)>,
}

/// Upper concave envelope of a revenue curve. Vertices are a subsequence of
/// the source points; `slopes[i]` is the slope between `vertices[i]` and
/// `vertices[i + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IronedCurve {
    pub vertices: Vec<(f64, f64)>,
    pub slopes: Vec<f64>,
}

impl IronedCurve {
    /// Slope of the segment owning `q`; segment `i` owns `(q_i, q_{i+1}]`.
    pub fn virtual_at_quantile(&self, q: f64) -> f64 {
        debug_assert!(!self.slopes.is_empty());
        let idx = self.vertices[1..].partition_point(|&(vq, _)| vq < q);
        self.slopes[idx.min(self.slopes.len() - 1)]
    }

    /// Envelope height at quantile `q` by linear interpolation.
    pub fn value_at(&self, q: f64) -> f64 {
        let idx = self.vertices.partition_point(|&(vq, _)| vq < q);
        if idx == 0 {
            return self.vertices[0].1;
        }
        if idx == self.vertices.len() {
            return self.vertices.last().expect("nonempty").1;
        }
        let (q0, r0) = self.vertices[idx - 1];
        let (q1, r1) = self.vertices[idx];
        if q1 == q0 {
            return r1;
        }
        r0 + (r1 - r0) * (q - q0) / (q1 - q0)
    }
}

/// Upper concave envelope by a monotone-chain scan. Interior collinear points
/// are dropped so the vertex set is canonical.
pub fn iron(curve: &RevenueCurve) -> IronedCurve {
    let pts = &curve.points;
    debug_assert!(pts.len() >= 2, "revenue curve needs at least two points");
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Pop b when a->b->p turns left or runs straight.
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let slopes = hull
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    IronedCurve {
        vertices: hull,
        slopes,
    }
}
