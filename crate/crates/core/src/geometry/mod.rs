//! Measures of neighbourhoods `Δ(R_α, λ)` and their unions, plus the covering machinery.

mod ball;
pub mod interval;
pub mod strip;

use std::collections::HashMap;

use num::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ball::{angle_dist, Ball};
pub use interval::{IntervalUnion, StreamingUnion};
pub use strip::{Strip, StripUnion};

use crate::funcs::{ExtendedLogPower, FuncError};
use crate::systems::{self, Ambient, Geometry, ResonantElement, ResonantSystem, SystemError, SystemKind};
use interval::{arc_pieces, fixed_to_f64, rational_interval_inward, real_interval_inward, ONE};

/// Positional slack for algebraic roots, which are only located to this accuracy.
pub const ROOT_SLACK: f64 = 1e-14;
/// Allowed residual when a point is asserted to lie on a line.
pub const ON_LINE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error("balls must share a common radius ({0} vs {1})")]
    MixedRadii(f64, f64),
    #[error("balls must live in the same ambient space")]
    MixedKinds,
    #[error("zero radius in mass sample")]
    ZeroRadius,
    #[error("center is off the line (residual {0:e})")]
    OffLine(f64),
    #[error("{0}")]
    Ambient(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// Subset of `[0,1]`.
    Intervals(IntervalUnion),
    /// Subset of the circle, in turns.
    Arcs(IntervalUnion),
    /// Subset of the unit square, optionally cut to a disc.
    Strips { union: StripUnion, disc: Option<(f64, f64, f64)> },
}

impl Region {
    pub fn empty(ambient: Ambient) -> Self {
        match ambient {
            Ambient::UnitInterval => Region::Intervals(IntervalUnion::empty()),
            Ambient::UnitCircle => Region::Arcs(IntervalUnion::empty()),
            Ambient::UnitSquare => Region::Strips { union: StripUnion::new(vec![]), disc: None },
        }
    }
}

fn interval_window(ball: Option<&Ball>) -> Result<(i128, i128), GeometryError> {
    match ball {
        None => Ok((0, ONE)),
        Some(Ball::Interval { center, radius }) => {
            let (a, b) = real_interval_inward(*center, *radius);
            Ok((a.max(0), b.min(ONE)))
        }
        Some(_) => Err(GeometryError::Ambient("expected an interval ball".into())),
    }
}

fn arc_window(ball: Option<&Ball>) -> Result<IntervalUnion, GeometryError> {
    match ball {
        None => Ok(IntervalUnion::new(vec![(0, ONE)])),
        Some(Ball::Arc { center, radius }) => Ok(IntervalUnion::new(arc_pieces(*center, *radius, true))),
        Some(_) => Err(GeometryError::Ambient("expected an arc".into())),
    }
}

fn disc_of(ball: Option<&Ball>) -> Result<Option<(f64, f64, f64)>, GeometryError> {
    match ball {
        None => Ok(None),
        Some(Ball::Disc { cx, cy, radius }) => Ok(Some((*cx, *cy, *radius))),
        Some(_) => Err(GeometryError::Ambient("expected a disc".into())),
    }
}

/// Inward-rounded neighbourhood of a point element of `[0,1]`.
pub fn point_interval(el: &ResonantElement, r: f64) -> (i128, i128) {
    match el.geometry {
        Geometry::Point { num, den } => rational_interval_inward(num, den, r),
        Geometry::Real { x } => real_interval_inward(x, r - ROOT_SLACK),
        _ => (0, 0),
    }
}

/// `Δ(ψ, n)`: the union of `radius_fn(u_n)`-neighbourhoods of the window `J(n)`, clipped to `within`.
pub fn build_delta(
    sys: &ResonantSystem,
    n: u32,
    radius_fn: &ExtendedLogPower,
    within: Option<&Ball>,
) -> Result<Region, GeometryError> {
    let r = radius_fn.eval(sys.sequence().u(n))?;
    build_delta_radius(sys, n, r, within)
}

/// As [`build_delta`] with the radius given directly.
pub fn build_delta_radius(sys: &ResonantSystem, n: u32, r: f64, within: Option<&Ball>) -> Result<Region, GeometryError> {
    let (wl, wh) = sys.window_bounds(n)?;
    build_delta_weights(sys, wl, wh, r, within)
}

/// Neighbourhoods of radius `r` around every element with weight in `(wl, wh]`.
pub fn build_delta_weights(
    sys: &ResonantSystem,
    wl: u64,
    wh: u64,
    r: f64,
    within: Option<&Ball>,
) -> Result<Region, GeometryError> {
    if r <= 0.0 {
        return Ok(Region::empty(sys.ambient));
    }
    let grown = within.map(|b| b.with_radius(b.radius() + r));
    match sys.ambient {
        Ambient::UnitInterval => {
            let (lo, hi) = interval_window(within)?;
            let mut raw = Vec::new();
            if sys.kind == SystemKind::Rationals {
                let (a, b) = match &grown {
                    Some(g) => g.exact_bounds().expect("interval"),
                    None => Ball::unit_interval().exact_bounds().expect("interval"),
                };
                sys.check_cap(wl, wh, grown.as_ref())?;
                for ((p, q), _) in systems::rational_values_in(wl, wh, sys.rational_mode, &a, &b) {
                    raw.push(rational_interval_inward(p as i128, q as i128, r));
                }
            } else {
                for el in systems::enumerate_weights(sys, wl, wh, grown.as_ref())? {
                    raw.push(point_interval(&el, r));
                }
            }
            Ok(Region::Intervals(IntervalUnion::new(raw).clip(lo, hi)))
        }
        Ambient::UnitCircle => {
            let window = arc_window(within)?;
            let mut raw = Vec::new();
            for el in systems::enumerate_weights(sys, wl, wh, grown.as_ref())? {
                raw.extend(arc_pieces(el.coordinate().expect("angle"), r, true));
            }
            Ok(Region::Arcs(IntervalUnion::new(raw).intersect(&window)))
        }
        Ambient::UnitSquare => {
            let disc = disc_of(within)?;
            let strips = systems::enumerate_weights(sys, wl, wh, grown.as_ref())?
                .into_iter()
                .filter_map(|el| match el.geometry {
                    Geometry::Line { p, q1, q2 } => Some(Strip { p, q1, q2, half: r }),
                    _ => None,
                })
                .collect();
            Ok(Region::Strips { union: StripUnion::new(strips), disc })
        }
    }
}

/// Measure of `region ∩ within` with a 99% error bound (zero when exact).
pub fn region_measure(region: &Region, within: Option<&Ball>) -> Result<(f64, f64), GeometryError> {
    match region {
        Region::Intervals(u) => {
            let (lo, hi) = interval_window(within)?;
            Ok((u.clip(lo, hi).measure(), 0.0))
        }
        Region::Arcs(u) => Ok((u.intersect(&arc_window(within)?).measure(), 0.0)),
        Region::Strips { union, disc } => {
            let d = match (disc_of(within)?, disc) {
                (Some(a), Some(b)) if a != *b => {
                    return Err(GeometryError::Ambient("nested disc restriction is not supported".into()))
                }
                (a, b) => a.or(*b),
            };
            Ok(union.measure(d))
        }
    }
}

/// `m(Δ(r, n) ∩ within)` without materializing the region when the window is large.
///
/// Rationals are streamed along the Farey sequence; other systems build the region.
pub fn delta_measure(sys: &ResonantSystem, n: u32, r: f64, within: &Ball) -> Result<(f64, f64), GeometryError> {
    let (wl, wh) = sys.window_bounds(n)?;
    delta_measure_weights(sys, wl, wh, r, within)
}

/// As [`delta_measure`] for weights in `(wl, wh]`.
pub fn delta_measure_weights(sys: &ResonantSystem, wl: u64, wh: u64, r: f64, within: &Ball) -> Result<(f64, f64), GeometryError> {
    if r <= 0.0 {
        return Ok((0.0, 0.0));
    }
    if sys.kind != SystemKind::Rationals {
        let region = build_delta_weights(sys, wl, wh, r, Some(within))?;
        return region_measure(&region, Some(within));
    }
    let (lo, hi) = interval_window(Some(within))?;
    let grown = within.with_radius(within.radius() + r);
    let (a, b) = grown.exact_bounds().expect("interval");
    sys.check_cap(wl, wh, Some(&grown))?;
    let mut acc = StreamingUnion::new(lo, hi);
    for ((p, q), _) in systems::rational_values_in(wl, wh, sys.rational_mode, &a, &b) {
        let (x, y) = rational_interval_inward(p as i128, q as i128, r);
        acc.push(x, y);
    }
    Ok((fixed_to_f64(acc.finish().0), 0.0))
}

/// Distance between centers of two balls of the same kind.
pub fn center_distance(a: &Ball, b: &Ball) -> Result<f64, GeometryError> {
    match (*a, *b) {
        (Ball::Interval { center: x, .. }, Ball::Interval { center: y, .. }) => Ok((x - y).abs()),
        (Ball::Arc { center: x, .. }, Ball::Arc { center: y, .. }) => Ok(angle_dist(x, y)),
        (Ball::Disc { cx, cy, .. }, Ball::Disc { cx: dx, cy: dy, .. }) => Ok((cx - dx).hypot(cy - dy)),
        _ => Err(GeometryError::MixedKinds),
    }
}

fn cell_of(b: &Ball, w: f64, n_arc: i64) -> (i64, i64) {
    match *b {
        Ball::Interval { center, .. } => ((center / w).floor() as i64, 0),
        Ball::Arc { center, .. } => (((center.rem_euclid(std::f64::consts::TAU) / w).floor() as i64).min(n_arc - 1), 0),
        Ball::Disc { cx, cy, .. } => ((cx / w).floor() as i64, (cy / w).floor() as i64),
    }
}

/// Indices of the balls kept by the greedy pass of the covering lemma.
///
/// A ball is kept when its center is at distance `≥ 2r` from every kept center, so kept balls
/// are disjoint and every input ball lies in some kept ball dilated by 3.
pub fn greedy_3r_cover_indices(balls: &[Ball]) -> Result<Vec<usize>, GeometryError> {
    let Some(first) = balls.first() else { return Ok(vec![]) };
    let r = first.radius();
    for b in balls {
        center_distance(first, b)?;
        let s = b.radius();
        if (s - r).abs() > 1e-12 * r.abs().max(s.abs()) {
            return Err(GeometryError::MixedRadii(r, s));
        }
    }
    if r <= 0.0 {
        return Ok((0..balls.len()).collect());
    }
    let w = 2.0 * r;
    let n_arc = ((std::f64::consts::TAU / w).floor() as i64).max(1);
    let is_arc = matches!(first, Ball::Arc { .. });
    let is_disc = matches!(first, Ball::Disc { .. });
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut kept = Vec::new();
    for (i, b) in balls.iter().enumerate() {
        let (cx, cy) = cell_of(b, w, n_arc);
        let mut clash = false;
        'scan: for dx in -1..=1 {
            for dy in if is_disc { -1..=1 } else { 0..=0 } {
                let key = if is_arc { ((cx + dx).rem_euclid(n_arc), 0) } else { (cx + dx, cy + dy) };
                if let Some(list) = grid.get(&key) {
                    for &j in list {
                        if center_distance(&balls[j], b)? < w {
                            clash = true;
                            break 'scan;
                        }
                    }
                }
            }
        }
        if !clash {
            grid.entry((cx, cy)).or_default().push(i);
            kept.push(i);
        }
    }
    Ok(kept)
}

pub fn greedy_3r_cover(balls: &[Ball]) -> Result<Vec<Ball>, GeometryError> {
    Ok(greedy_3r_cover_indices(balls)?.into_iter().map(|i| balls[i]).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdpBound {
    /// `max μ(B) / f(r(B))` over the samples.
    pub c: f64,
    /// `μ(X) / c`.
    pub bound: f64,
}

/// Mass distribution principle: `H^f(X) ≥ μ(X) / c` with `c = max μ(B)/f(r(B))`.
pub fn mdp_lower_bound(samples: &[(Ball, f64)], f: &ExtendedLogPower, total_mass: f64) -> Result<MdpBound, GeometryError> {
    let mut c: f64 = 0.0;
    for (b, mass) in samples {
        let r = b.radius();
        if r <= 0.0 {
            return Err(GeometryError::ZeroRadius);
        }
        c = c.max(mass / f.eval(r)?);
    }
    let bound = if c > 0.0 { total_mass / c } else { f64::INFINITY };
    Ok(MdpBound { c, bound })
}

/// Area of `B(center, R) ∩ Δ(line, λ)` inside the unit square.
pub fn intersect_ball_with_thickening(
    line: &ResonantElement,
    center: (f64, f64),
    radius: f64,
    lambda: f64,
) -> Result<f64, GeometryError> {
    let Geometry::Line { p, q1, q2 } = line.geometry else {
        return Err(GeometryError::Ambient("expected a line".into()));
    };
    let strip = Strip { p, q1, q2, half: lambda };
    let residual = strip.distance(center.0, center.1);
    if residual > ON_LINE_TOL {
        return Err(GeometryError::OffLine(residual));
    }
    if radius <= 0.0 || lambda <= 0.0 {
        return Ok(0.0);
    }
    Ok(strip::disc_polygon_area(center.0, center.1, radius, &strip.polygon()))
}

/// `m(B)` with the endpoints rounded outward.
pub fn ball_measure_outward(ball: &Ball) -> f64 {
    match *ball {
        Ball::Interval { center, radius } => {
            let (a, b) = interval::real_interval_outward(center, radius);
            fixed_to_f64(b.min(ONE) - a.max(0))
        }
        Ball::Arc { center, radius } => IntervalUnion::new(arc_pieces(center, radius, false)).measure(),
        Ball::Disc { .. } => ball.measure(),
    }
}

pub fn exact_to_f64(x: &num::rational::BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
