//! Prior generators: random family instances for experiments and the
//! piecewise revenue-curve families used by the lower-bound demos.

use crate::error::{Error, Result};
use crate::prior::{Family, ProductPrior};
use crate::quantile::{iron, CurvePoint, QuantileDistribution};
use crate::rng::Stream;

/// Shape parameters for random family priors.
#[derive(Debug, Clone, Copy)]
pub struct GenSpec {
    pub buyers: usize,
    pub support: usize,
}

const GEN_ATTEMPTS: u32 = 100;

/// Draws `support` distinct values in `(lo, hi]` with random masses.
fn random_discrete(stream: &mut Stream, support: usize, lo: f64, hi: f64) -> QuantileDistribution {
    loop {
        let mut pairs: Vec<(f64, f64)> = (0..support)
            .map(|_| (stream.next_range(lo, hi), stream.next_exp() + 1e-3))
            .collect();
        let total: f64 = pairs.iter().map(|&(_, m)| m).sum();
        for p in &mut pairs {
            p.1 /= total;
        }
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite"));
        pairs.dedup_by(|a, b| a.0 == b.0);
        if pairs.len() == support {
            return QuantileDistribution::discrete_from_pairs(pairs).expect("valid");
        }
    }
}

/// Rounds a discrete prior down to the vertex values of its concave revenue
/// envelope; the result is regular by construction.
pub fn regularize(dist: &QuantileDistribution) -> QuantileDistribution {
    let hull = iron(&dist.revenue_curve());
    let mut pairs = Vec::with_capacity(hull.vertices.len());
    let mut prev_q = 0.0;
    for &(q, _) in hull.vertices.iter().skip(1) {
        let value = dist.value_at(q).expect("vertex quantile is positive");
        pairs.push((value, q - prev_q));
        prev_q = q;
    }
    QuantileDistribution::discrete_from_pairs(pairs).expect("valid")
}

/// Discretized capped-exponential prior; its revenue curve samples a concave
/// function, so the result is regular with a hazard rate bounded below.
fn random_mhr(stream: &mut Stream, support: usize) -> QuantileDistribution {
    let lambda = stream.next_range(0.8, 2.5);
    let cap = stream.next_range(0.8, 2.0);
    let m = support as f64;
    let pairs = (1..=support)
        .map(|k| {
            let q = k as f64 / m;
            ((-(q.ln()) / lambda).min(cap), 1.0 / m)
        })
        .collect();
    QuantileDistribution::discrete_from_pairs(pairs).expect("valid")
}

fn buyer_passes_family(dist: &QuantileDistribution, family: Family) -> bool {
    match family {
        Family::Unit01 => dist.max_value() <= 1.0 + 1e-12,
        Family::OneToH(h) => dist.min_value() >= 1.0 - 1e-12 && dist.max_value() <= h + 1e-12,
        Family::Regular | Family::Mhr => {
            let rc = dist.revenue_curve();
            let hull = iron(&rc);
            rc.points.iter().all(|&(q, r)| hull.value_at(q) <= r + 1e-9)
        }
        Family::Unknown => true,
    }
}

/// Random product prior from a family; every buyer is checked against the
/// family invariant and regenerated on failure.
pub fn gen_family(family: Family, spec: &GenSpec, seed: u64) -> Result<ProductPrior> {
    if spec.buyers == 0 || spec.support == 0 {
        return Err(Error::InvalidParameter(
            "buyers and support must be positive".into(),
        ));
    }
    let mut buyers = Vec::with_capacity(spec.buyers);
    for i in 0..spec.buyers {
        let mut accepted = None;
        for attempt in 0..GEN_ATTEMPTS {
            let mut stream = Stream::new(seed, &[i as u64, attempt as u64]);
            let candidate = match family {
                Family::Unit01 => random_discrete(&mut stream, spec.support, 0.0, 1.0),
                Family::OneToH(h) => random_discrete(&mut stream, spec.support, 1.0, h),
                Family::Regular => {
                    regularize(&random_discrete(&mut stream, spec.support, 0.0, 1.0))
                }
                Family::Mhr => random_mhr(&mut stream, spec.support),
                Family::Unknown => random_discrete(&mut stream, spec.support, 0.0, 2.0),
            };
            if buyer_passes_family(&candidate, family) {
                accepted = Some(candidate);
                break;
            }
        }
        buyers.push(accepted.ok_or(Error::GeneratorFailed(GEN_ATTEMPTS))?);
    }
    ProductPrior::new(family, buyers)
}

/// Hard-instance families defined by piecewise revenue-quantile curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerBound {
    /// Recursive triangle refinements; `index < 2^rounds` selects the curve.
    TopTriangle { rounds: u32, index: u64 },
    /// Equal-revenue plateau with one hidden hill of height `2 * eps` at
    /// `site`, hills spaced `4 * eps` apart above quantile 1/2.
    UnitHill { eps: f64, site: u64 },
    /// [1, H] plateau with one geometric hill at `site >= 1`.
    GeoHill { eps: f64, h: f64, site: u64 },
}

/// Number of hill placements that fit entirely below quantile 1.
pub fn unit_hill_sites(eps: f64) -> u64 {
    (1.0 / (8.0 * eps) + 1e-9).floor() as u64
}

/// Number of legal geometric hill placements.
pub fn geo_hill_sites(eps: f64, h: f64) -> u64 {
    (h.ln() / (1.0 + 2.0 * eps).ln() - 1e-9).ceil().max(1.0) as u64 - 1
}

type Point = (f64, f64);

fn intersect(a: Point, b: Point, c: Point, d: Point) -> Point {
    // Line a-b meets line c-d.
    let (x1, y1) = a;
    let (x2, y2) = b;
    let (x3, y3) = c;
    let (x4, y4) = d;
    let denom = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4);
    debug_assert!(denom.abs() > 1e-15, "parallel lines in triangle refinement");
    let px = ((x1 * y2 - y1 * x2) * (x3 - x4) - (x1 - x2) * (x3 * y4 - y3 * x4)) / denom;
    let py = ((x1 * y2 - y1 * x2) * (y3 - y4) - (y1 - y2) * (x3 * y4 - y3 * x4)) / denom;
    (px, py)
}

fn mid(a: Point, b: Point) -> Point {
    (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1))
}

/// Revenue polyline of one top-triangle curve: starting from the triangle
/// with base (0,0)-(1,0) and apex (1/2, 1/2), each round splits the current
/// top triangle through the midpoint of its horizontal median; the index
/// bits pick the left or right refinement.
fn top_triangle_polyline(rounds: u32, index: u64) -> Vec<Point> {
    let mut p1: Point = (0.0, 0.0);
    let mut p2: Point = (1.0, 0.0);
    let mut apex: Point = (0.5, 0.5);
    let mut prefix = vec![p1];
    let mut suffix = vec![p2];
    for level in (0..rounds).rev() {
        let m1 = mid(p1, apex);
        let m2 = mid(p2, apex);
        let m = mid(m1, m2);
        if (index >> level) & 1 == 1 {
            let e1 = intersect(p1, m, apex, p2);
            p1 = m;
            p2 = m2;
            apex = e1;
            prefix.push(p1);
            suffix.push(p2);
        } else {
            let e2 = intersect(p2, m, apex, p1);
            p1 = m1;
            p2 = m;
            apex = e2;
            prefix.push(p1);
            suffix.push(p2);
        }
    }
    prefix.push(apex);
    prefix.extend(suffix.into_iter().rev());
    prefix
}

/// Converts a concave revenue polyline through (0,0) into a value curve:
/// `v(q) = R(q) / q`, with the slope of the first segment at quantile 0.
fn polyline_to_curve(points: &[Point]) -> Result<QuantileDistribution> {
    let first_slope = points[1].1 / points[1].0;
    let mut breakpoints = vec![CurvePoint {
        q: 0.0,
        v: first_slope,
    }];
    for &(q, r) in &points[1..] {
        breakpoints.push(CurvePoint {
            q,
            v: (r / q).max(0.0),
        });
    }
    QuantileDistribution::curve(breakpoints)
}

/// Equal-revenue plateau points `v = plateau / q` on `[from, to]`.
fn plateau_points(out: &mut Vec<CurvePoint>, plateau: f64, from: f64, to: f64, step: f64) {
    let mut q = from;
    while q < to - 1e-12 {
        out.push(CurvePoint { q, v: plateau / q });
        q += step;
    }
    out.push(CurvePoint {
        q: to,
        v: plateau / to,
    });
}

fn unit_hill_curve(eps: f64, site: u64) -> Result<QuantileDistribution> {
    if !(eps > 0.0 && eps < 0.125) {
        return Err(Error::InvalidParameter("eps must be in (0, 1/8)".into()));
    }
    if (site as f64) >= 1.0 / (2.0 * eps) {
        return Err(Error::InvalidParameter("hill site out of range".into()));
    }
    let s = site as f64;
    let q_l = 0.5 + 4.0 * s * eps;
    let q_r = (0.5 + 4.0 * (s + 1.0) * eps).min(1.0);
    let gap = 1e-9;
    let step = (eps / 2.0).min(0.002);

    let mut pts = vec![CurvePoint { q: 0.0, v: 1.0 }, CurvePoint { q: 0.5, v: 1.0 }];
    if q_l >= 1.0 {
        // Hill fully out of range: plain equal-revenue plateau.
        plateau_points(&mut pts, 0.5, 0.5 + step, 1.0, step);
        return QuantileDistribution::curve(pts);
    }
    if q_l > 0.5 {
        plateau_points(&mut pts, 0.5, (0.5 + step).min(q_l), q_l, step);
    }
    // Hill: R(q) = (q + 1/2 - 4 s eps) / 2 rising from 1/2 to (1 + 4 eps)/2.
    let hill_v = |q: f64| 0.5 * (q + 0.5 - 4.0 * s * eps) / q;
    let peak = q_r - gap;
    let mut q = q_l + (q_r - q_l) / 4.0;
    while q < peak - 1e-12 {
        pts.push(CurvePoint { q, v: hill_v(q) });
        q += (q_r - q_l) / 4.0;
    }
    pts.push(CurvePoint {
        q: peak,
        v: hill_v(peak),
    });
    if q_r < 1.0 {
        plateau_points(&mut pts, 0.5, q_r, 1.0, step);
    } else {
        pts.push(CurvePoint { q: 1.0, v: 0.5 });
    }
    QuantileDistribution::curve(pts)
}

/// Peak revenue of a unit-hill instance (just below the hill's right edge).
pub fn unit_hill_opt(eps: f64) -> f64 {
    0.5 * (1.0 + 4.0 * eps) - 1e-9
}

fn geo_hill_curve(eps: f64, h: f64, site: u64) -> Result<QuantileDistribution> {
    if h <= 1.0 {
        return Err(Error::InvalidParameter("H must exceed 1".into()));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter("eps must be in (0, 1/2)".into()));
    }
    let growth = 1.0 + 2.0 * eps;
    if site == 0 || (site as f64) >= h.ln() / growth.ln() {
        return Err(Error::InvalidParameter("hill site out of range".into()));
    }
    let q_l = growth.powi(site as i32 - 1) / h;
    let q_r = growth.powi(site as i32) / h;
    let gap = q_l * 1e-9;
    let step = 1.0 / 256.0;

    let mut pts = vec![CurvePoint { q: 0.0, v: h }, CurvePoint { q: 1.0 / h, v: h }];
    if q_l > 1.0 / h + 1e-15 {
        plateau_points(&mut pts, 1.0, 1.0 / h, q_l, (q_l - 1.0 / h).min(step));
    }
    // Hill: constant value 1 / q_l carries revenue from 1 up to 1 + 2 eps.
    let hill_value = 1.0 / q_l;
    pts.push(CurvePoint {
        q: q_r - gap,
        v: hill_value,
    });
    plateau_points(&mut pts, 1.0, q_r, 1.0, step);
    pts.dedup_by(|a, b| (a.q - b.q).abs() < 1e-15);
    QuantileDistribution::curve(pts)
}

/// Builds one lower-bound instance as a curve prior whose revenue curve hits
/// the family's piecewise definition exactly at every breakpoint.
pub fn gen_lowerbound(family: &LowerBound) -> Result<QuantileDistribution> {
    match *family {
        LowerBound::TopTriangle { rounds, index } => {
            if rounds >= 32 || index >= (1u64 << rounds) {
                return Err(Error::InvalidParameter(
                    "triangle index out of range".into(),
                ));
            }
            polyline_to_curve(&top_triangle_polyline(rounds, index))
        }
        LowerBound::UnitHill { eps, site } => unit_hill_curve(eps, site),
        LowerBound::GeoHill { eps, h, site } => geo_hill_curve(eps, h, site),
    }
}
