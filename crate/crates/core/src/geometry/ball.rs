use num::rational::BigRational;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Open ball `{y : d(x,y) < r}` intersected with the ambient space.
///
/// Arcs are measured in radians along the unit circle; discs live in the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ball {
    Interval { center: f64, radius: f64 },
    Arc { center: f64, radius: f64 },
    Disc { cx: f64, cy: f64, radius: f64 },
}

impl Ball {
    pub fn interval(center: f64, radius: f64) -> Self {
        Ball::Interval { center, radius }
    }

    /// The ball with endpoints `lo`, `hi`.
    pub fn from_endpoints(lo: f64, hi: f64) -> Self {
        Ball::Interval { center: 0.5 * (lo + hi), radius: 0.5 * (hi - lo) }
    }

    pub fn unit_interval() -> Self {
        Ball::Interval { center: 0.5, radius: 0.5 }
    }

    pub fn full_circle() -> Self {
        Ball::Arc { center: 0.0, radius: PI }
    }

    pub fn unit_square() -> Self {
        Ball::Disc { cx: 0.5, cy: 0.5, radius: std::f64::consts::SQRT_2 / 2.0 }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            Ball::Interval { radius, .. } | Ball::Arc { radius, .. } | Ball::Disc { radius, .. } => radius,
        }
    }

    pub fn with_radius(&self, r: f64) -> Self {
        match *self {
            Ball::Interval { center, .. } => Ball::Interval { center, radius: r },
            Ball::Arc { center, .. } => Ball::Arc { center, radius: r },
            Ball::Disc { cx, cy, .. } => Ball::Disc { cx, cy, radius: r },
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.with_radius(self.radius() * factor)
    }

    /// Exact endpoints of an interval ball (f64 values are exact dyadic rationals).
    pub fn exact_bounds(&self) -> Option<(BigRational, BigRational)> {
        match *self {
            Ball::Interval { center, radius } => {
                let c = BigRational::from_float(center)?;
                let r = BigRational::from_float(radius)?;
                Some((&c - &r, &c + &r))
            }
            _ => None,
        }
    }

    /// Normalized measure of the ball inside its ambient space.
    pub fn measure(&self) -> f64 {
        match *self {
            Ball::Interval { center, radius } => ((center + radius).min(1.0) - (center - radius).max(0.0)).max(0.0),
            Ball::Arc { radius, .. } => (2.0 * radius).min(2.0 * PI) / (2.0 * PI),
            Ball::Disc { cx, cy, radius } => super::strip::disc_square_area(cx, cy, radius),
        }
    }

    /// Whether the 1-D ball covers all of `[0,1]`.
    pub fn covers_unit_interval(&self) -> bool {
        matches!(*self, Ball::Interval { center, radius } if center - radius <= 0.0 && center + radius >= 1.0)
    }
}

/// Angular distance on the circle, in `[0, π]`.
pub fn angle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}
