//! Lines `q₁x + q₂y = p` meeting the unit square, weighted by `|q| = max(|q₁|, |q₂|)`.

use super::{Geometry, Provenance, ResonantElement};
use crate::geometry::Ball;

/// Inclusive `p` range for which the line meets the closed unit square.
pub fn square_p_range(q1: i64, q2: i64) -> (i64, i64) {
    (q1.min(0) + q2.min(0), q1.max(0) + q2.max(0))
}

/// Euclidean distance from `(x, y)` to the line.
pub fn distance(p: i64, q1: i64, q2: i64, x: f64, y: f64) -> f64 {
    let n = ((q1 * q1 + q2 * q2) as f64).sqrt();
    (q1 as f64 * x + q2 as f64 * y - p as f64).abs() / n
}

/// Calls `out` for each sign-normalized line (first nonzero `q` coordinate positive) with
/// `|q| ∈ (lo, hi]` that meets the unit square and, if given, the open disc `restrict`.
pub fn for_each(lo: u64, hi: u64, restrict: Option<&Ball>, mut out: impl FnMut(ResonantElement)) {
    let disc = match restrict {
        Some(&Ball::Disc { cx, cy, radius }) => Some((cx, cy, radius)),
        _ => None,
    };
    let (lo, hi) = (lo as i64, hi as i64);
    for q1 in 0..=hi {
        let q2_min = if q1 == 0 { 1 } else { -hi };
        for q2 in q2_min..=hi {
            let norm = q1.abs().max(q2.abs());
            if norm <= lo {
                continue;
            }
            let (mut a, mut b) = square_p_range(q1, q2);
            if let Some((cx, cy, r)) = disc {
                let mid = q1 as f64 * cx + q2 as f64 * cy;
                let span = r * ((q1 * q1 + q2 * q2) as f64).sqrt();
                a = a.max((mid - span).floor() as i64);
                b = b.min((mid + span).ceil() as i64);
            }
            for p in a..=b {
                if let Some((cx, cy, r)) = disc {
                    if distance(p, q1, q2, cx, cy) >= r {
                        continue;
                    }
                }
                out(ResonantElement {
                    weight: norm as u64,
                    geometry: Geometry::Line { p, q1, q2 },
                    provenance: Provenance::LineCoeffs { p, q1, q2 },
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meets_square(p: i64, q1: i64, q2: i64) -> bool {
        let v = [0, q1, q2, q1 + q2];
        v.iter().any(|&x| x <= p) && v.iter().any(|&x| x >= p)
    }

    #[test]
    fn matches_brute_force() {
        let mut got = Vec::new();
        for_each(2, 6, None, |e| got.push(e.provenance));
        let mut want = Vec::new();
        for q1 in -6i64..=6 {
            for q2 in -6i64..=6 {
                let n = q1.abs().max(q2.abs());
                let normalized = q1 > 0 || (q1 == 0 && q2 > 0);
                if !(3..=6).contains(&n) || !normalized {
                    continue;
                }
                for p in -20..=20 {
                    if meets_square(p, q1, q2) {
                        want.push(Provenance::LineCoeffs { p, q1, q2 });
                    }
                }
            }
        }
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn disc_restriction_filters_by_distance() {
        let ball = Ball::Disc { cx: 0.3, cy: 0.6, radius: 0.05 };
        let mut got = 0;
        for_each(0, 12, Some(&ball), |e| {
            if let Geometry::Line { p, q1, q2 } = e.geometry {
                assert!(distance(p, q1, q2, 0.3, 0.6) < 0.05);
            }
            got += 1;
        });
        let mut want = 0;
        for_each(0, 12, None, |e| {
            if let Geometry::Line { p, q1, q2 } = e.geometry {
                if distance(p, q1, q2, 0.3, 0.6) < 0.05 {
                    want += 1;
                }
            }
        });
        assert_eq!(got, want);
        assert!(got > 0);
    }
}
