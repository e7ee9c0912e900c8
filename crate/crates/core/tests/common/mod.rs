//! Independent oracles and case generators shared by the property tests and the acceptance
//! target.
#![allow(dead_code)]

use limsup::funcs::{classify_partial_sums, classify_series, condense_over_u, Exp, ExtendedLogPower, GeometricSequence, SeriesClass};
use limsup::geometry::strip::{Strip, StripUnion};
use limsup::geometry::{center_distance, greedy_3r_cover_indices, Ball, IntervalUnion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Merges overlapping or touching closed intervals pair by pair until nothing changes.
pub fn naive_union(raw: &[(i128, i128)]) -> Vec<(i128, i128)> {
    let mut v: Vec<(i128, i128)> = raw.iter().copied().filter(|(a, b)| a < b).collect();
    loop {
        let mut merged = false;
        'outer: for i in 0..v.len() {
            for j in i + 1..v.len() {
                let (a, b) = v[i];
                let (c, d) = v[j];
                if a.max(c) <= b.min(d) {
                    v[i] = (a.min(c), b.max(d));
                    v.swap_remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    v.sort_unstable();
    v
}

pub fn interval_case(rng: &mut ChaCha8Rng) -> Vec<(i128, i128)> {
    let n = rng.gen_range(0..40);
    let span: i128 = rng.gen_range(10..10_000);
    (0..n)
        .map(|_| {
            let a = rng.gen_range(-span..span);
            (a, a + rng.gen_range(-5..span / 4 + 2))
        })
        .collect()
}

pub fn interval_union_agrees(raw: &[(i128, i128)]) -> Result<(), String> {
    let got = IntervalUnion::new(raw.to_vec());
    let want = naive_union(raw);
    if got.intervals() != want.as_slice() {
        return Err(format!("{raw:?}: union {:?} != oracle {want:?}", got.intervals()));
    }
    let m: i128 = want.iter().map(|(a, b)| b - a).sum();
    if got.measure_fixed() != m {
        return Err(format!("{raw:?}: measure {} != {m}", got.measure_fixed()));
    }
    Ok(())
}

pub struct StripCase {
    pub strips: Vec<Strip>,
    pub disc: Option<(f64, f64, f64)>,
}

pub fn strip_case(rng: &mut ChaCha8Rng) -> StripCase {
    let n = rng.gen_range(1..=3);
    let strips = (0..n)
        .map(|_| {
            let (q1, q2) = loop {
                let q = (rng.gen_range(-4i64..=4), rng.gen_range(-4i64..=4));
                if q != (0, 0) {
                    break q;
                }
            };
            let lo = q1.min(0) + q2.min(0);
            let hi = q1.max(0) + q2.max(0);
            Strip { p: rng.gen_range(lo..=hi), q1, q2, half: rng.gen_range(0.01..0.25) }
        })
        .collect();
    let disc = rng.gen_bool(0.5).then(|| (rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9), rng.gen_range(0.05..0.5)));
    StripCase { strips, disc }
}

pub const STRIP_MC_SAMPLES: u64 = 40_000;
/// Samples for the confirmation run of a case that misses at 3σ.
pub const STRIP_MC_CONFIRM_SAMPLES: u64 = 1_000_000;

/// Hit-or-miss estimate over the bounding box of the square (and disc), with its standard error.
pub fn strip_monte_carlo(case: &StripCase, seed: u64, samples: u64) -> (f64, f64) {
    let (x0, x1, y0, y1) = match case.disc {
        None => (0.0, 1.0, 0.0, 1.0),
        Some((cx, cy, r)) => ((cx - r).max(0.0), (cx + r).min(1.0), (cy - r).max(0.0), (cy + r).min(1.0)),
    };
    let area = (x1 - x0) * (y1 - y0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let (x, y) = (rng.gen_range(x0..x1), rng.gen_range(y0..y1));
        let in_disc = case.disc.map_or(true, |(cx, cy, r)| (x - cx).hypot(y - cy) <= r);
        let in_strips = case.strips.iter().any(|s| {
            let d = (s.q1 as f64 * x + s.q2 as f64 * y - s.p as f64).abs() / ((s.q1 * s.q1 + s.q2 * s.q2) as f64).sqrt();
            d < s.half
        });
        if in_disc && in_strips {
            hits += 1;
        }
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    let sigma = area * (p * (1.0 - p) / n).sqrt().max(1.0 / n);
    (area * p, sigma)
}

/// Exact area within 3σ of the estimate. A miss is re-run once with fresh, larger sampling and
/// fails only if it misses again; `Ok(true)` reports a confirmed re-run.
pub fn strip_agrees(case: &StripCase, seed: u64) -> Result<bool, String> {
    let (exact, err) = StripUnion::new(case.strips.clone()).measure(case.disc);
    if err != 0.0 {
        return Err(format!("expected an exact measure for {} strips", case.strips.len()));
    }
    let within = |samples: u64, seed: u64| {
        let (est, sigma) = strip_monte_carlo(case, seed, samples);
        ((exact - est).abs() <= 3.0 * sigma + 1e-12, est, sigma)
    };
    if within(STRIP_MC_SAMPLES, seed).0 {
        return Ok(false);
    }
    let (ok, est, sigma) = within(STRIP_MC_CONFIRM_SAMPLES, seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1));
    if ok {
        Ok(true)
    } else {
        Err(format!("strips {:?} disc {:?}: exact {exact} vs estimate {est} ± {sigma}", case.strips, case.disc))
    }
}

pub fn cover_case(rng: &mut ChaCha8Rng) -> Vec<Ball> {
    let n = rng.gen_range(1..150);
    let r = 10f64.powf(rng.gen_range(-3.0..-0.7));
    match rng.gen_range(0..3) {
        0 => (0..n).map(|_| Ball::interval(rng.gen_range(0.0..1.0), r)).collect(),
        1 => (0..n).map(|_| Ball::Arc { center: rng.gen_range(0.0..std::f64::consts::TAU), radius: r }).collect(),
        _ => (0..n).map(|_| Ball::Disc { cx: rng.gen_range(0.0..1.0), cy: rng.gen_range(0.0..1.0), radius: r }).collect(),
    }
}

/// Kept balls are pairwise disjoint and their 3-fold dilations cover every input ball.
pub fn cover_postconditions(balls: &[Ball]) -> Result<(), String> {
    let kept = greedy_3r_cover_indices(balls).map_err(|e| e.to_string())?;
    let r = balls[0].radius();
    for (i, &a) in kept.iter().enumerate() {
        for &b in &kept[i + 1..] {
            let d = center_distance(&balls[a], &balls[b]).unwrap();
            if d < 2.0 * r {
                return Err(format!("kept balls {a} and {b} overlap: distance {d} < {}", 2.0 * r));
            }
        }
    }
    for (i, ball) in balls.iter().enumerate() {
        let covered = kept.iter().any(|&k| center_distance(ball, &balls[k]).unwrap() + r <= 3.0 * r * (1.0 + 1e-12));
        if !covered {
            return Err(format!("ball {i} is outside every dilated kept ball"));
        }
    }
    Ok(())
}

/// Exponents drawn for series terms: `p ∈ [-3, 1]` in steps of 1/20, `q ∈ [-2, 2]` in steps
/// of 1/4, `w ∈ [-1, 1]` in steps of 1/2.
pub fn series_term(rng: &mut ChaCha8Rng) -> ExtendedLogPower {
    let p = Exp::new(rng.gen_range(-60..=20), 20);
    let q = Exp::new(rng.gen_range(-8..=8), 4);
    let w = Exp::new(rng.gen_range(-2..=2), 2);
    ExtendedLogPower::new(rng.gen_range(0.1..10.0), p, q, w).unwrap()
}

pub const CONDENSATION_BASES: [f64; 5] = [1.5, 2.0, 3.0, 6.0, 10.0];

/// `Σ_r a(r)` and `Σ_n k^n a(k^n)` have the same convergence class.
pub fn condensation_agrees(term: &ExtendedLogPower, k: f64) -> Result<(), String> {
    let u = GeometricSequence::new(k, 64).unwrap();
    let direct = classify_series(term).class;
    let condensed = condense_over_u(term, &u, Exp::from_integer(1)).map_err(|e| e.to_string())?.class;
    if direct != condensed {
        return Err(format!("{term}: direct {direct:?}, condensed over {k}^n {condensed:?}"));
    }
    Ok(())
}

/// Distance from the `p = -1` boundary below which partial sums are not compared.
pub const PARTIAL_SUM_GAP: f64 = 0.1;

/// `None` when the term is too close to the boundary to compare.
pub fn partial_sums_agree(term: &ExtendedLogPower) -> Option<Result<(), String>> {
    let p = *term.p.numer() as f64 / *term.p.denom() as f64;
    if (p + 1.0).abs() <= PARTIAL_SUM_GAP {
        return None;
    }
    let start = term.domain_bound().ceil() as u64;
    let numeric = classify_partial_sums(|r| term.eval(r).unwrap_or(0.0), start).class;
    let symbolic = classify_series(term).class;
    Some(if numeric == symbolic && numeric != SeriesClass::Unknown {
        Ok(())
    } else {
        Err(format!("{term}: symbolic {symbolic:?}, partial sums {numeric:?}"))
    })
}
