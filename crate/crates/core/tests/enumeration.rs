use limsup::geometry::Ball;
use limsup::systems::{enumerate_weights, ResonantSystem, SystemKind};
use num::integer::gcd;

/// Roots in `[lo, hi]` of every irreducible `c + b x + a x²` or `b x + c` with `a > 0` (or
/// `b > 0` when linear), content 1 and height in `(h_lo, h_hi]`, by brute force.
fn quadratic_oracle(h_lo: i64, h_hi: i64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for a in -h_hi..=h_hi {
        for b in -h_hi..=h_hi {
            for c in -h_hi..=h_hi {
                let height = a.abs().max(b.abs()).max(c.abs());
                if height <= h_lo || gcd(gcd(a, b), c) != 1 {
                    continue;
                }
                if a == 0 {
                    if b > 0 {
                        let x = -c as f64 / b as f64;
                        if x >= lo && x <= hi {
                            out.push(x);
                        }
                    }
                    continue;
                }
                if a < 0 {
                    continue;
                }
                let disc = b * b - 4 * a * c;
                if disc < 0 {
                    continue;
                }
                let s = (disc as f64).sqrt().round() as i64;
                if s * s == disc {
                    continue;
                }
                let sq = (disc as f64).sqrt();
                for x in [(-b as f64 - sq) / (2.0 * a as f64), (-b as f64 + sq) / (2.0 * a as f64)] {
                    if x >= lo && x <= hi {
                        out.push(x);
                    }
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn algebraic_window_matches_exhaustive_search() {
    let sys = ResonantSystem::new(SystemKind::Algebraic(2), 2.0);
    let ball = Ball::from_endpoints(0.0, 0.5);
    let mut got: Vec<f64> = enumerate_weights(&sys, 10, 20, Some(&ball))
        .unwrap()
        .iter()
        .map(|e| {
            assert!(e.weight > 10 && e.weight <= 20);
            e.coordinate().unwrap()
        })
        .collect();
    got.sort_by(f64::total_cmp);
    let want = quadratic_oracle(10, 20, 0.0, 0.5);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
    }
}

#[test]
fn circle_window_matches_brute_force() {
    let sys = ResonantSystem::new(SystemKind::Circle, 2.0);
    let got = enumerate_weights(&sys, 20, 60, None).unwrap();
    let mut want = 0;
    for q in 21i64..=60 {
        for a in -q..=q {
            let b2 = q * q - a * a;
            let b = (b2 as f64).sqrt().round() as i64;
            if b * b == b2 {
                want += if b == 0 { 1 } else { 2 };
            }
        }
    }
    assert_eq!(got.len(), want);
}

#[test]
fn rational_window_counts_all_pairs() {
    let sys = ResonantSystem::rationals(6.0);
    let got = enumerate_weights(&sys, 6, 36, None).unwrap();
    let want: usize = (7..=36).map(|q| q + 1).sum();
    assert_eq!(got.len(), want);
}
