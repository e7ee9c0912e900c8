//! Concrete resonant systems and their windows `J(n) = {α : l_n < β_α ≤ u_n}`.
//!
//! Each system carries the data the verdict engine needs: ambient dimension δ, the common
//! dimension γ of its resonant sets, a claimed ubiquity function ρ, the sequence base k,
//! cardinality exponents and the (M2) measure constants.

pub mod algebraic;
pub mod circle;
pub mod farey;
pub mod lines;
pub mod primes;

use std::fmt;
use std::str::FromStr;

use num::integer::gcd;
use num::rational::{BigRational, Ratio};
use num::{BigInt, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcs::{Exp, ExtendedLogPower, GeometricSequence};
use crate::geometry::Ball;

pub const DEFAULT_WINDOW_CAP: u64 = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("window predicted to hold {predicted} elements, above the cap {cap}")]
    ResourceCap { predicted: f64, cap: u64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("bad system descriptor `{0}`")]
    Parse(String),
    #[error("window index {0} out of range")]
    BadWindow(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Rationals,
    PrimeRationals,
    Algebraic(u32),
    Circle,
    Lines21,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemKind::Rationals => write!(f, "rationals"),
            SystemKind::PrimeRationals => write!(f, "primes"),
            SystemKind::Algebraic(d) => write!(f, "algebraic:{d}"),
            SystemKind::Circle => write!(f, "circle"),
            SystemKind::Lines21 => write!(f, "lines21"),
        }
    }
}

impl FromStr for SystemKind {
    type Err = SystemError;
    fn from_str(s: &str) -> Result<Self, SystemError> {
        let t = s.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "rationals" => SystemKind::Rationals,
            "primes" | "prime_rationals" | "primerationals" => SystemKind::PrimeRationals,
            "circle" => SystemKind::Circle,
            "lines21" | "lines" => SystemKind::Lines21,
            _ => {
                let d = t
                    .strip_prefix("algebraic:")
                    .and_then(|d| d.parse::<u32>().ok())
                    .filter(|d| (1..=3).contains(d))
                    .ok_or_else(|| SystemError::Parse(s.to_string()))?;
                SystemKind::Algebraic(d)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    UnitInterval,
    UnitCircle,
    UnitSquare,
}

/// Which integer pairs index rational points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RationalMode {
    /// Every pair `0 ≤ p ≤ q`; a value can recur under several denominators.
    AllPairs,
    /// Only `gcd(p, q) = 1`.
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonantSystem {
    pub kind: SystemKind,
    pub ambient: Ambient,
    pub delta: Exp,
    pub gamma: Exp,
    pub rho: ExtendedLogPower,
    pub k: f64,
    /// Smallest base for which the ubiquity claim is made.
    pub min_k: f64,
    /// `#J(n) ≍ u_n^p (ln u_n)^q`.
    pub card_exponents: (Exp, Exp),
    /// `(a, b)` with `a r^δ ≤ m(B(x, r)) ≤ b r^δ`.
    pub measure_constants: (f64, f64),
    pub rational_mode: RationalMode,
    /// Restrict circle points to the closed first quadrant.
    pub first_quadrant: bool,
    pub window_cap: u64,
}

fn e(n: i64) -> Exp {
    Exp::from_integer(n)
}

impl ResonantSystem {
    /// Default system with ρ coefficient 1 (or `k` for the rationals).
    pub fn new(kind: SystemKind, k: f64) -> Self {
        let z = e(0);
        let (ambient, delta, gamma, rho, min_k, card, mc) = match kind {
            SystemKind::Rationals => (
                Ambient::UnitInterval,
                e(1),
                z,
                ExtendedLogPower::power(k, e(-2)),
                6.0,
                (e(2), z),
                (1.0, 2.0),
            ),
            SystemKind::PrimeRationals => (
                Ambient::UnitInterval,
                e(1),
                z,
                ExtendedLogPower::new(1.0, e(-2), e(2), z).expect("valid"),
                2.0,
                (e(2), e(-2)),
                (1.0, 2.0),
            ),
            SystemKind::Algebraic(d) => (
                Ambient::UnitInterval,
                e(1),
                z,
                ExtendedLogPower::power(1.0, e(-(d as i64 + 1))),
                10.0,
                (e(d as i64 + 1), z),
                (1.0, 2.0),
            ),
            SystemKind::Circle => (
                Ambient::UnitCircle,
                e(1),
                z,
                ExtendedLogPower::power(1.0, e(-1)),
                2.0,
                (e(1), z),
                (1.0 / std::f64::consts::PI, 1.0 / std::f64::consts::PI),
            ),
            SystemKind::Lines21 => (
                Ambient::UnitSquare,
                e(2),
                e(1),
                ExtendedLogPower::new(1.0, e(-3), e(1), z).expect("valid"),
                2.0,
                (e(3), z),
                (std::f64::consts::PI / 4.0, std::f64::consts::PI),
            ),
        };
        Self {
            kind,
            ambient,
            delta,
            gamma,
            rho,
            k,
            min_k,
            card_exponents: card,
            measure_constants: mc,
            rational_mode: RationalMode::AllPairs,
            first_quadrant: false,
            window_cap: DEFAULT_WINDOW_CAP,
        }
    }

    pub fn rationals(k: f64) -> Self {
        Self::new(SystemKind::Rationals, k)
    }

    pub fn with_rho_coeff(mut self, c: f64) -> Self {
        self.rho.coeff = c;
        self
    }

    pub fn with_mode(mut self, mode: RationalMode) -> Self {
        self.rational_mode = mode;
        self
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.window_cap = cap;
        self
    }

    pub fn with_first_quadrant(mut self, yes: bool) -> Self {
        self.first_quadrant = yes;
        self
    }

    pub fn sequence(&self) -> GeometricSequence {
        GeometricSequence::new(self.k, 64).expect("k > 1")
    }

    /// Whether `k` is at least the smallest base for which ubiquity is claimed.
    pub fn claims_local_ubiquity(&self) -> bool {
        self.k >= self.min_k
    }

    pub fn ambient_ball(&self) -> Ball {
        match self.ambient {
            Ambient::UnitInterval => Ball::unit_interval(),
            Ambient::UnitCircle => Ball::full_circle(),
            Ambient::UnitSquare => Ball::unit_square(),
        }
    }

    /// `#J` as a function of `r`: `r^p (ln r)^q`.
    pub fn card_function(&self) -> ExtendedLogPower {
        ExtendedLogPower::new(1.0, self.card_exponents.0, self.card_exponents.1, e(0)).expect("valid")
    }

    /// Integer weight bounds `(lo, hi]` of window `n`.
    pub fn window_bounds(&self, n: u32) -> Result<(u64, u64), SystemError> {
        if n == 0 {
            return Err(SystemError::BadWindow(n));
        }
        let (lo, hi) = self.sequence().window(n);
        if hi > u64::MAX as u128 / 4 {
            return Err(SystemError::BadWindow(n));
        }
        Ok((lo as u64, hi as u64))
    }

    /// Rough element count for weights in `(lo, hi]`, scaled by the share of the ambient kept.
    pub fn predicted_count(&self, lo: u64, hi: u64, restrict: Option<&Ball>) -> f64 {
        let (lo, hi) = (lo as f64, hi as f64);
        let base = match self.kind {
            SystemKind::Rationals => 0.5 * (hi * hi - lo * lo) + (hi - lo),
            SystemKind::PrimeRationals => {
                let l = hi.max(3.0).ln();
                0.5 * (hi * hi - lo * lo) / (l * l) + 1.0
            }
            SystemKind::Algebraic(d) => {
                // Cost is driven by the coefficient box, not the root count.
                (2.0 * hi + 1.0).powi(d as i32 + 1)
            }
            SystemKind::Circle => (hi - lo) * (4.0 + 2.0 * hi.max(2.0).ln()),
            SystemKind::Lines21 => 4.0 * (hi * hi * hi - lo * lo * lo),
        };
        let frac = match restrict {
            _ if matches!(self.kind, SystemKind::Algebraic(_)) => 1.0,
            None => 1.0,
            Some(b) => (2.0 * b.measure()).min(1.0),
        };
        base * frac
    }

    pub(crate) fn check_cap(&self, lo: u64, hi: u64, restrict: Option<&Ball>) -> Result<(), SystemError> {
        let predicted = self.predicted_count(lo, hi, restrict);
        if predicted > self.window_cap as f64 {
            Err(SystemError::ResourceCap { predicted, cap: self.window_cap })
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// Exact rational point of `[0,1]`.
    Point { num: i128, den: i128 },
    /// Real algebraic point of `[0,1]`.
    Real { x: f64 },
    /// Rational point `(p1/q, p2/q)` on the unit circle, with its angle in `[0, 2π)`.
    CirclePoint { p1: i64, p2: i64, q: i64, angle: f64 },
    /// The line `q1 x + q2 y = p`.
    Line { p: i64, q1: i64, q2: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Pair { p: i64, q: i64 },
    Poly { coeffs: Vec<i64> },
    Triple { p1: i64, p2: i64, q: i64 },
    LineCoeffs { p: i64, q1: i64, q2: i64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonantElement {
    pub weight: u64,
    pub geometry: Geometry,
    pub provenance: Provenance,
}

impl ResonantElement {
    /// Coordinate of a point element in `[0,1]` (interval systems) or its angle (circle).
    pub fn coordinate(&self) -> Option<f64> {
        match self.geometry {
            Geometry::Point { num, den } => Some(num as f64 / den as f64),
            Geometry::Real { x } => Some(x),
            Geometry::CirclePoint { angle, .. } => Some(angle),
            Geometry::Line { .. } => None,
        }
    }

    /// CSV row: provenance fields, weight, geometry fields.
    pub fn csv_row(&self) -> String {
        let prov = match &self.provenance {
            Provenance::Pair { p, q } => format!("{p},{q}"),
            Provenance::Poly { coeffs } => coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
            Provenance::Triple { p1, p2, q } => format!("{p1},{p2},{q}"),
            Provenance::LineCoeffs { p, q1, q2 } => format!("{p},{q1},{q2}"),
        };
        let geo = match &self.geometry {
            Geometry::Point { num, den } => format!("{num}/{den}"),
            Geometry::Real { x } => format!("{x}"),
            Geometry::CirclePoint { angle, .. } => format!("{angle}"),
            Geometry::Line { p, q1, q2 } => format!("{q1}*x+{q2}*y={p}"),
        };
        format!("{prov},{},{geo}", self.weight)
    }
}

/// Inclusive range of integers `p` with `lo ≤ p/q ≤ hi`.
pub(crate) fn p_range(q: i64, lo: &BigRational, hi: &BigRational) -> (i64, i64) {
    let qb = BigRational::from_integer(BigInt::from(q));
    let a = (lo * &qb).ceil().to_integer().to_i64().unwrap_or(i64::MIN);
    let b = (hi * &qb).floor().to_integer().to_i64().unwrap_or(i64::MAX);
    (a, b)
}

fn interval_bounds(restrict: Option<&Ball>) -> Result<(BigRational, BigRational), SystemError> {
    match restrict {
        None => Ok((BigRational::from_integer(0.into()), BigRational::from_integer(1.into()))),
        Some(b) => b
            .exact_bounds()
            .ok_or_else(|| SystemError::Unsupported("interval systems need an interval ball".into())),
    }
}

/// Elements with weight in `(lo, hi]` whose geometry meets `restrict`.
pub fn enumerate_weights(
    sys: &ResonantSystem,
    lo: u64,
    hi: u64,
    restrict: Option<&Ball>,
) -> Result<Vec<ResonantElement>, SystemError> {
    sys.check_cap(lo, hi, restrict)?;
    let mut out = Vec::new();
    match sys.kind {
        SystemKind::Rationals => {
            let (a, b) = interval_bounds(restrict)?;
            for q in (lo + 1)..=hi {
                let q = q as i64;
                let (p0, p1) = p_range(q, &a, &b);
                for p in p0.max(0)..=p1.min(q) {
                    if sys.rational_mode == RationalMode::Reduced && gcd(p, q) != 1 {
                        continue;
                    }
                    out.push(rational_element(p, q));
                }
            }
        }
        SystemKind::PrimeRationals => {
            let (a, b) = interval_bounds(restrict)?;
            let sieve = primes::Sieve::new(hi);
            for q in (lo + 1)..=hi {
                if !sieve.is_prime(q) {
                    continue;
                }
                let (p0, p1) = p_range(q as i64, &a, &b);
                for p in p0.max(2)..=p1.min(q as i64) {
                    if sieve.is_prime(p as u64) {
                        out.push(rational_element(p, q as i64));
                    }
                }
            }
        }
        SystemKind::Algebraic(d) => {
            let (a, b) = match restrict {
                None => (0.0, 1.0),
                Some(Ball::Interval { center, radius }) => (center - radius, center + radius),
                Some(_) => return Err(SystemError::Unsupported("interval systems need an interval ball".into())),
            };
            algebraic::for_each(d, lo, hi, |el| {
                let x = el.coordinate().expect("point");
                if x >= a && x <= b {
                    out.push(el);
                }
            });
        }
        SystemKind::Circle => {
            circle::for_each(lo, hi, sys.first_quadrant, |el| {
                let keep = match restrict {
                    None => true,
                    Some(Ball::Arc { center, radius }) => {
                        crate::geometry::angle_dist(el.coordinate().expect("angle"), *center) <= *radius
                    }
                    Some(_) => false,
                };
                if keep {
                    out.push(el);
                }
            });
        }
        SystemKind::Lines21 => {
            lines::for_each(lo, hi, restrict, |el| out.push(el));
        }
    }
    Ok(out)
}

pub(crate) fn rational_element(p: i64, q: i64) -> ResonantElement {
    let r = Ratio::new(p as i128, q as i128);
    ResonantElement {
        weight: q as u64,
        geometry: Geometry::Point { num: *r.numer(), den: *r.denom() },
        provenance: Provenance::Pair { p, q },
    }
}

/// The window `J(n)` restricted to elements meeting `restrict`.
pub fn enumerate_window(
    sys: &ResonantSystem,
    n: u32,
    restrict: Option<&Ball>,
) -> Result<Vec<ResonantElement>, SystemError> {
    let (lo, hi) = sys.window_bounds(n)?;
    enumerate_weights(sys, lo, hi, restrict)
}

/// Number of elements with weight in `(lo, hi]` meeting `ball`, without materializing them.
pub fn count_weights_in_ball(sys: &ResonantSystem, lo: u64, hi: u64, ball: &Ball) -> Result<u64, SystemError> {
    match sys.kind {
        SystemKind::Rationals => {
            sys.check_cap(lo, hi, Some(ball))?;
            if ball.covers_unit_interval() && sys.rational_mode == RationalMode::AllPairs {
                let (lo, hi) = (lo as u128, hi as u128);
                let s = |n: u128| n * (n + 1) / 2 + n;
                return Ok((s(hi) - s(lo)) as u64);
            }
            let (a, b) = interval_bounds(Some(ball))?;
            let mut count = 0u64;
            for q in (lo + 1)..=hi {
                let q = q as i64;
                let (p0, p1) = p_range(q, &a, &b);
                let (p0, p1) = (p0.max(0), p1.min(q));
                if p1 < p0 {
                    continue;
                }
                if sys.rational_mode == RationalMode::AllPairs {
                    count += (p1 - p0 + 1) as u64;
                } else {
                    count += (p0..=p1).filter(|&p| gcd(p, q) == 1).count() as u64;
                }
            }
            Ok(count)
        }
        SystemKind::PrimeRationals => {
            sys.check_cap(lo, hi, Some(ball))?;
            let (a, b) = interval_bounds(Some(ball))?;
            let sieve = primes::Sieve::new(hi);
            let pi = sieve.prefix_counts();
            let mut count = 0u64;
            for q in (lo + 1)..=hi {
                if !sieve.is_prime(q) {
                    continue;
                }
                let (p0, p1) = p_range(q as i64, &a, &b);
                let (p0, p1) = (p0.max(2), p1.min(q as i64));
                if p1 >= p0 {
                    count += pi[p1 as usize] - pi[p0 as usize - 1];
                }
            }
            Ok(count)
        }
        SystemKind::Algebraic(d) => {
            sys.check_cap(lo, hi, Some(ball))?;
            let (a, b) = match *ball {
                Ball::Interval { center, radius } => (center - radius, center + radius),
                _ => return Err(SystemError::Unsupported("interval systems need an interval ball".into())),
            };
            let mut count = 0u64;
            algebraic::for_each(d, lo, hi, |el| {
                let x = el.coordinate().expect("point");
                if x >= a && x <= b {
                    count += 1;
                }
            });
            Ok(count)
        }
        SystemKind::Circle | SystemKind::Lines21 => {
            Ok(enumerate_weights(sys, lo, hi, Some(ball))?.len() as u64)
        }
    }
}

/// `#(J(n) ∩ ball)`.
pub fn count_in_ball(sys: &ResonantSystem, n: u32, ball: &Ball) -> Result<u64, SystemError> {
    let (lo, hi) = sys.window_bounds(n)?;
    count_weights_in_ball(sys, lo, hi, ball)
}

/// Cover-cost multiplier `#J(n) · scale^{-γ}`, from the cardinality exponents.
pub fn natural_cover_count(sys: &ResonantSystem, n: u32, scale: f64) -> f64 {
    let ln_u = sys.sequence().ln_u(n);
    let card = sys.card_function().ln_eval_at_ln(ln_u);
    (card - sys.gamma.to_f64().unwrap_or(0.0) * scale.ln()).exp()
}

/// Same multiplier from an exact count of the window.
pub fn natural_cover_count_exact(sys: &ResonantSystem, n: u32, scale: f64) -> Result<f64, SystemError> {
    let (lo, hi) = sys.window_bounds(n)?;
    let count = count_weights_in_ball(sys, lo, hi, &sys.ambient_ball())?;
    Ok(count as f64 * scale.powf(-sys.gamma.to_f64().unwrap_or(0.0)))
}

/// Distinct rational values with denominator in a window, as reduced fractions `a/b ∈ [lo, hi]`,
/// each tagged with the smallest in-window representative `(ja, jb)`.
///
/// In all-pairs mode every reduced fraction with `b ≤ u_n` has a multiple in `(l_n, u_n]`
/// because `u_n ≥ 2 l_n`; in reduced mode only `b ∈ (l_n, u_n]` qualify.
pub fn rational_values_in(
    lo_w: u64,
    hi_w: u64,
    mode: RationalMode,
    lo: &BigRational,
    hi: &BigRational,
) -> impl Iterator<Item = (farey::Frac, (u64, u64))> {
    farey::FareyWalk::new(lo, hi, hi_w).filter_map(move |(a, b)| {
        let (a, b) = (a as u64, b as u64);
        match mode {
            RationalMode::Reduced => (b > lo_w).then_some(((a as u128, b as u128), (a, b))),
            RationalMode::AllPairs => {
                let j = lo_w / b + 1;
                (j * b <= hi_w).then_some(((a as u128, b as u128), (j * a, j * b)))
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_k10_first_window() {
        let sys = ResonantSystem::rationals(10.0);
        let w = enumerate_window(&sys, 1, None).unwrap();
        assert_eq!(w.len(), (2..=10).map(|q| q + 1).sum::<usize>());
        assert_eq!(w.len(), 63);
        assert_eq!(count_in_ball(&sys, 1, &Ball::unit_interval()).unwrap(), 63);
    }

    #[test]
    fn primes_k2_first_window() {
        let sys = ResonantSystem::new(SystemKind::PrimeRationals, 2.0);
        let w = enumerate_window(&sys, 1, None).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].provenance, Provenance::Pair { p: 2, q: 2 });
    }

    #[test]
    fn descriptor_round_trip() {
        for s in ["rationals", "primes", "algebraic:2", "algebraic:3", "circle", "lines21"] {
            let k: SystemKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("algebraic:7".parse::<SystemKind>().is_err());
        assert!("reals".parse::<SystemKind>().is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let sys = ResonantSystem::rationals(10.0).with_cap(1000);
        assert!(matches!(enumerate_window(&sys, 3, None), Err(SystemError::ResourceCap { .. })));
    }

    #[test]
    fn windows_partition_rationals() {
        let sys = ResonantSystem::rationals(3.0);
        let mut all: Vec<Provenance> = Vec::new();
        for n in 1..=4 {
            all.extend(enumerate_window(&sys, n, None).unwrap().into_iter().map(|e| e.provenance));
        }
        let direct: Vec<Provenance> = enumerate_weights(&sys, 1, 81, None)
            .unwrap()
            .into_iter()
            .map(|e| e.provenance)
            .collect();
        assert_eq!(all, direct);
    }

    #[test]
    fn restricted_count_matches_enumeration() {
        let sys = ResonantSystem::rationals(6.0).with_mode(RationalMode::Reduced);
        let ball = Ball::from_endpoints(0.3, 0.5);
        let n = 3;
        let count = count_in_ball(&sys, n, &ball).unwrap();
        assert_eq!(count as usize, enumerate_window(&sys, n, Some(&ball)).unwrap().len());
        let (lo, hi) = sys.window_bounds(n).unwrap();
        let (a, b) = ball.exact_bounds().unwrap();
        let via_farey = rational_values_in(lo, hi, RationalMode::Reduced, &a, &b).count();
        assert_eq!(via_farey as u64, count);
    }
}
