//! Rational points `(p₁/q, p₂/q)` on the unit circle.

use std::f64::consts::PI;

use num::integer::gcd;

use super::{Geometry, Provenance, ResonantElement};

fn point(p1: i64, p2: i64, q: i64) -> ResonantElement {
    let angle = (p2 as f64).atan2(p1 as f64).rem_euclid(2.0 * PI);
    ResonantElement {
        weight: q as u64,
        geometry: Geometry::CirclePoint { p1, p2, q, angle },
        provenance: Provenance::Triple { p1, p2, q },
    }
}

/// All integer solutions of `p₁² + p₂² = q²` with `q ∈ (lo, hi]`, sorted by `(q, angle)`.
///
/// Built from primitive triples `(m² − n², 2mn, m² + n²)` and their multiples, with every
/// sign and swap, plus the axis points `(±q, 0), (0, ±q)`.
pub fn for_each(lo: u64, hi: u64, first_quadrant: bool, mut out: impl FnMut(ResonantElement)) {
    let (lo, hi) = (lo as i64, hi as i64);
    let mut pts: Vec<(i64, i64, i64)> = Vec::new();
    for q in (lo + 1)..=hi {
        pts.push((q, 0, q));
        pts.push((0, q, q));
        if !first_quadrant {
            pts.push((-q, 0, q));
            pts.push((0, -q, q));
        }
    }
    let mut m = 2i64;
    while m * m + 1 <= hi {
        for n in 1..m {
            if (m - n) % 2 == 0 || gcd(m, n) != 1 {
                continue;
            }
            let c = m * m + n * n;
            if c > hi {
                break;
            }
            let (a, b) = (m * m - n * n, 2 * m * n);
            for j in (lo / c + 1)..=(hi / c) {
                let (a, b, q) = (j * a, j * b, j * c);
                for (x, y) in [(a, b), (b, a)] {
                    if first_quadrant {
                        pts.push((x, y, q));
                    } else {
                        for (sx, sy) in [(1, 1), (-1, 1), (1, -1), (-1, -1)] {
                            pts.push((sx * x, sy * y, q));
                        }
                    }
                }
            }
        }
        m += 1;
    }
    let mut els: Vec<ResonantElement> = pts.into_iter().map(|(x, y, q)| point(x, y, q)).collect();
    els.sort_by(|a, b| {
        let key = |e: &ResonantElement| (e.weight, e.coordinate().unwrap());
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    els.into_iter().for_each(&mut out);
}

/// Reduced form of a circle point, identifying equal point values across denominators.
pub fn reduced(p1: i64, p2: i64, q: i64) -> (i64, i64, i64) {
    let g = gcd(gcd(p1, p2), q);
    (p1 / g, p2 / g, q / g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(lo: i64, hi: i64, first_quadrant: bool) -> Vec<(i64, i64, i64)> {
        let mut v = Vec::new();
        for q in (lo + 1)..=hi {
            let min = if first_quadrant { 0 } else { -q };
            for x in min..=q {
                for y in min..=q {
                    if x * x + y * y == q * q {
                        v.push((x, y, q));
                    }
                }
            }
        }
        v.sort();
        v
    }

    fn collect(lo: u64, hi: u64, fq: bool) -> Vec<(i64, i64, i64)> {
        let mut v = Vec::new();
        for_each(lo, hi, fq, |e| {
            if let Provenance::Triple { p1, p2, q } = e.provenance {
                assert_eq!(p1 * p1 + p2 * p2, q * q);
                v.push((p1, p2, q));
            }
        });
        v.sort();
        v
    }

    #[test]
    fn first_quadrant_up_to_25() {
        let got = collect(0, 25, true);
        assert_eq!(got, brute(0, 25, true));
        let mut hyps: Vec<i64> = got.iter().filter(|t| t.0 != 0 && t.1 != 0).map(|t| t.2).collect();
        hyps.sort();
        hyps.dedup();
        assert_eq!(hyps, vec![5, 10, 13, 15, 17, 20, 25]);
    }

    #[test]
    fn all_quadrants_match_brute_force() {
        assert_eq!(collect(0, 60, false), brute(0, 60, false));
        assert_eq!(collect(30, 90, false), brute(30, 90, false));
    }
}
