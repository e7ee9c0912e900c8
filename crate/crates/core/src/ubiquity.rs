//! Empirical checks of the ubiquity hypotheses: local ubiquity ratios, the intersection
//! conditions for lines, and quasi-independence of the sets `A_n(ψ, B)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcs::{ExtendedLogPower, FuncError};
use crate::geometry::interval::{fixed_ceil, fixed_ratio_floor, fixed_to_f64, rational_interval_inward, ONE};
use crate::geometry::strip::{self, Strip};
use crate::geometry::{self, ball_measure_outward, Ball, GeometryError, IntervalUnion};
use crate::systems::{self, Ambient, Geometry, ResonantSystem, SystemError, SystemKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UbiquityError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    System(#[from] SystemError),
    /// `ψ(u_n)` is not below `ρ(u_n)/24`; the limsup condition applies instead.
    #[error("psi(u_{n}) = {psi:e} is not below rho(u_{n})/24 = {bound:e}")]
    PsiTooLarge { n: u32, psi: f64, bound: f64 },
    #[error("stream for level {n} needs about {steps:e} steps, above the cap {cap:e}")]
    StreamCap { n: u32, steps: f64, cap: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// How the ubiquity of a system is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UbiquityStatus {
    /// Local ubiquity asserted by a published result.
    Claimed,
    /// Local ubiquity measured on sample balls.
    Verified,
    /// Only the global form is known.
    GlobalOnly,
    None,
}

impl UbiquityStatus {
    pub fn is_local(self) -> bool {
        matches!(self, UbiquityStatus::Claimed | UbiquityStatus::Verified)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UbiquityRecord {
    pub ball: Ball,
    pub n: u32,
    pub rho: f64,
    /// `m(B ∩ Δ(ρ, n)) / m(B)` over the window `l_n < β ≤ u_n`.
    pub ratio: f64,
    /// Same ratio over all `β ≤ u_n`.
    pub ratio_unrestricted: f64,
    pub error_bound: f64,
    /// Whether `36 ρ(u_n) < r(B)`.
    pub fits: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UbiquityReport {
    pub system: String,
    pub records: Vec<UbiquityRecord>,
    pub kappa_min: f64,
    pub kappa_min_unrestricted: f64,
    pub threshold: Option<f64>,
    pub pass: Option<bool>,
}

/// Five seeded balls of radius 0.1 plus the whole ambient space.
pub fn default_sample_balls(sys: &ResonantSystem, seed: u64) -> Vec<Ball> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Ball> = (0..5)
        .map(|_| match sys.ambient {
            Ambient::UnitInterval => Ball::interval(rng.gen_range(0.1..0.9), 0.1),
            Ambient::UnitCircle => Ball::Arc { center: rng.gen_range(0.0..std::f64::consts::TAU), radius: 0.1 },
            Ambient::UnitSquare => Ball::Disc { cx: rng.gen_range(0.1..0.9), cy: rng.gen_range(0.1..0.9), radius: 0.1 },
        })
        .collect();
    out.push(sys.ambient_ball());
    out
}

/// Measures `m(B ∩ Δ(ρ, n)) / m(B)` for every ball and level.
///
/// Neighbourhood endpoints are rounded inward and `m(B)` outward, so ratios never overstate.
pub fn verify_local_ubiquity(
    sys: &ResonantSystem,
    balls: &[Ball],
    ns: &[u32],
    kappa_claim: Option<f64>,
) -> Result<UbiquityReport, UbiquityError> {
    let u = sys.sequence();
    let mut records = Vec::new();
    for ball in balls {
        let mb = ball_measure_outward(ball);
        for &n in ns {
            let rho = sys.rho.eval(u.u(n))?;
            let (wl, wh) = sys.window_bounds(n)?;
            let (m, err) = geometry::delta_measure_weights(sys, wl, wh, rho, ball)?;
            let unrestricted = if wl == 0 || (sys.kind == SystemKind::Rationals && sys.rational_mode == systems::RationalMode::AllPairs) {
                m
            } else {
                geometry::delta_measure_weights(sys, 0, wh, rho, ball)?.0
            };
            records.push(UbiquityRecord {
                ball: *ball,
                n,
                rho,
                ratio: (m / mb).min(1.0),
                ratio_unrestricted: (unrestricted / mb).min(1.0),
                error_bound: err / mb,
                fits: 36.0 * rho < ball.radius(),
            });
        }
    }
    let kappa_min = records.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let kappa_min_unrestricted = records.iter().map(|r| r.ratio_unrestricted).fold(f64::INFINITY, f64::min);
    let pass = kappa_claim.map(|k| kappa_min >= k);
    Ok(UbiquityReport { system: sys.kind.to_string(), records, kappa_min, kappa_min_unrestricted, threshold: kappa_claim, pass })
}

/// A line, a point on it, and the thickening `λ`, at scale `ρ = ρ(u_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSample {
    pub line: (i64, i64, i64),
    pub center: (f64, f64),
    pub lambda: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    /// `min m(B(c, ρ/2) ∩ Δ(R, λ)) / (m(B(c, λ)) (ρ/λ)^γ)`.
    pub c1_est: f64,
    /// `max m(B(c, r) ∩ Δ(R, 3λ)) / (m(B(c, λ)) (r/λ)^γ)` over `r ∈ {ρ, 2ρ, 3ρ}`.
    pub c2_est: f64,
    /// Samples too close to the boundary of the square; excluded.
    pub violations: Vec<usize>,
    pub ratios_i: Vec<f64>,
    pub ratios_ii: Vec<f64>,
}

/// Checks the two intersection conditions on interior samples.
pub fn verify_intersection_conditions(
    sys: &ResonantSystem,
    samples: &[IntersectionSample],
) -> Result<IntersectionReport, UbiquityError> {
    let gamma = sys.gamma.to_integer();
    if gamma == 0 {
        return Ok(IntersectionReport { c1_est: 1.0, c2_est: 1.0, violations: vec![], ratios_i: vec![], ratios_ii: vec![] });
    }
    if sys.kind != SystemKind::Lines21 {
        return Err(UbiquityError::Unsupported("intersection conditions are implemented for lines".into()));
    }
    let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
    let (mut ratios_i, mut ratios_ii, mut violations) = (vec![], vec![], vec![]);
    for (idx, s) in samples.iter().enumerate() {
        let (x, y) = s.center;
        let margin = x.min(y).min(1.0 - x).min(1.0 - y);
        if margin < 3.0 * s.rho {
            violations.push(idx);
            continue;
        }
        let (p, q1, q2) = s.line;
        let line = systems::ResonantElement {
            weight: q1.unsigned_abs().max(q2.unsigned_abs()),
            geometry: Geometry::Line { p, q1, q2 },
            provenance: systems::Provenance::LineCoeffs { p, q1, q2 },
        };
        let shape = |r: f64| std::f64::consts::PI * s.lambda * s.lambda * (r / s.lambda);
        let lhs = geometry::intersect_ball_with_thickening(&line, s.center, 0.5 * s.rho, s.lambda)?;
        let ri = lhs / shape(s.rho);
        c1 = c1.min(ri);
        ratios_i.push(ri);
        for mult in [1.0, 2.0, 3.0] {
            let r = mult * s.rho;
            let lhs = geometry::intersect_ball_with_thickening(&line, s.center, r, 3.0 * s.lambda)?;
            let rii = lhs / shape(r);
            c2 = c2.max(rii);
            ratios_ii.push(rii);
        }
    }
    Ok(IntersectionReport { c1_est: c1, c2_est: c2, violations, ratios_i, ratios_ii })
}

/// Seeded samples: a window line, a uniform point on its segment in the square, and
/// `λ = ρ(u_n) · frac` for each given fraction.
pub fn sample_intersection_cases(
    sys: &ResonantSystem,
    n: u32,
    count: usize,
    lambda_fracs: &[f64],
    seed: u64,
) -> Result<Vec<IntersectionSample>, UbiquityError> {
    let rho = sys.rho.eval(sys.sequence().u(n))?;
    let lines: Vec<(i64, i64, i64)> = systems::enumerate_window(sys, n, None)?
        .into_iter()
        .filter_map(|e| match e.geometry {
            Geometry::Line { p, q1, q2 } => Some((p, q1, q2)),
            _ => None,
        })
        .collect();
    if lines.is_empty() {
        return Ok(vec![]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..count {
        let (p, q1, q2) = lines[rng.gen_range(0..lines.len())];
        let seg = Strip { p, q1, q2, half: 0.0 };
        // Endpoints of the segment inside the square.
        let poly = strip::clip_halfplane(&strip::unit_square(), q1 as f64, q2 as f64, p as f64);
        let poly = strip::clip_halfplane(&poly, -(q1 as f64), -(q2 as f64), -(p as f64));
        let on: Vec<(f64, f64)> = poly.into_iter().filter(|&(x, y)| seg.distance(x, y) < 1e-12).collect();
        if on.len() < 2 {
            continue;
        }
        let (a, b) = (on[0], on[on.len() - 1]);
        let t: f64 = rng.gen();
        let mut c = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
        // Project back onto the line to remove rounding drift.
        let norm2 = (q1 * q1 + q2 * q2) as f64;
        let off = (q1 as f64 * c.0 + q2 as f64 * c.1 - p as f64) / norm2;
        c = (c.0 - off * q1 as f64, c.1 - off * q2 as f64);
        for &frac in lambda_fracs {
            out.push(IntersectionSample { line: (p, q1, q2), center: c, lambda: rho * frac, rho });
        }
    }
    Ok(out)
}

/// `A_n(ψ, B)` for the rationals, with the comparability constant of `#G_B(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ASetSummary {
    pub n: u32,
    pub g_count: u64,
    pub psi: f64,
    pub rho: f64,
    pub measure: f64,
    /// `#G_B(n) · m(B(ρ(u_n))) / m(B)`.
    pub comparability: f64,
}

/// Default cap on Farey steps per streamed level.
pub const DEFAULT_STREAM_CAP: f64 = 1.5e9;

fn check_a_preconditions(sys: &ResonantSystem, psi: &ExtendedLogPower, n: u32) -> Result<(f64, f64), UbiquityError> {
    if sys.kind != SystemKind::Rationals {
        return Err(UbiquityError::Unsupported("A-sets are built for the rationals".into()));
    }
    let u = sys.sequence().u(n);
    let (ps, rh) = (psi.eval(u)?, sys.rho.eval(u)?);
    if !(ps < rh / 24.0) {
        return Err(UbiquityError::PsiTooLarge { n, psi: ps, bound: rh / 24.0 });
    }
    Ok((ps, rh))
}

fn centre_window(ball: &Ball) -> Ball {
    if ball.covers_unit_interval() {
        Ball::unit_interval()
    } else {
        ball.scaled(0.5)
    }
}

/// Streams the interval list of `A_n(ψ, B)` in increasing order.
///
/// `G_B(n)` is the greedy selection, along the sorted window values in `½B`, of points whose
/// `3ρ(u_n)`-balls are disjoint from those already chosen.
pub fn stream_a_set(
    sys: &ResonantSystem,
    psi: &ExtendedLogPower,
    ball: &Ball,
    n: u32,
    cap: f64,
    mut out: impl FnMut(i128, i128),
) -> Result<(ASetSummary, i128), UbiquityError> {
    let (ps, rh) = check_a_preconditions(sys, psi, n)?;
    let (wl, wh) = sys.window_bounds(n)?;
    let half = centre_window(ball);
    let (lo, hi) = half.exact_bounds().expect("interval");
    let width = (2.0 * half.radius()).min(1.0);
    let steps = 0.31 * (wh as f64).powi(2) * width;
    if steps > cap {
        return Err(UbiquityError::StreamCap { n, steps, cap });
    }
    let (clip_lo, clip_hi) = {
        let (a, b) = geometry::interval::real_interval_inward(
            match ball {
                Ball::Interval { center, .. } => *center,
                _ => 0.5,
            },
            ball.radius(),
        );
        (a.max(0), b.min(ONE))
    };
    let sep = fixed_ceil(6.0 * rh) + 1;
    let mut last: Option<i128> = None;
    let mut g_count = 0u64;
    let mut total = 0i128;
    for ((a, b), _) in systems::rational_values_in(wl, wh, sys.rational_mode, &lo, &hi) {
        let c = fixed_ratio_floor(a as i128, b as i128);
        if last.is_some_and(|l| c < l + sep) {
            continue;
        }
        last = Some(c);
        g_count += 1;
        let (x, y) = rational_interval_inward(a as i128, b as i128, ps);
        let (x, y) = (x.max(clip_lo), y.min(clip_hi));
        if x < y {
            total += y - x;
            out(x, y);
        }
    }
    let mb = ball_measure_outward(ball);
    let summary = ASetSummary {
        n,
        g_count,
        psi: ps,
        rho: rh,
        measure: fixed_to_f64(total),
        comparability: g_count as f64 * 2.0 * rh / mb,
    };
    Ok((summary, total))
}

/// Materialized `A_n(ψ, B)` for each level in `ns`.
pub fn build_a_sets(
    sys: &ResonantSystem,
    psi: &ExtendedLogPower,
    ball: &Ball,
    ns: &[u32],
) -> Result<Vec<(ASetSummary, IntervalUnion)>, UbiquityError> {
    ns.iter()
        .map(|&n| {
            let mut raw = Vec::new();
            let (s, _) = stream_a_set(sys, psi, ball, n, DEFAULT_STREAM_CAP, |a, b| raw.push((a, b)))?;
            Ok((s, IntervalUnion::new(raw)))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiIndependenceRow {
    pub q: u32,
    pub single_sum: f64,
    pub pair_sum: f64,
    /// `pair_sum · m(B) / single_sum²`.
    pub ratio: f64,
    /// `single_sum² / pair_sum`, the divergent Borel–Cantelli lower bound at horizon `q`.
    pub bc_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiIndependenceReport {
    pub requested_q: u32,
    pub reached_q: u32,
    pub levels: Vec<ASetSummary>,
    pub rows: Vec<QuasiIndependenceRow>,
    /// Why the horizon stopped short, when it did.
    pub capped: Option<String>,
}

/// Exact `Σ_{s,t ≤ Q} m(A_s ∩ A_t)` for `Q = 1..q`, streaming the newest level against the
/// stored earlier ones. Stops early at the first level whose stream exceeds `cap` steps.
pub fn verify_quasi_independence(
    sys: &ResonantSystem,
    psi: &ExtendedLogPower,
    ball: &Ball,
    q: u32,
    cap: f64,
) -> Result<QuasiIndependenceReport, UbiquityError> {
    let mb = ball_measure_outward(ball);
    let mut stored: Vec<Vec<(i128, i128)>> = Vec::new();
    let mut levels = Vec::new();
    let mut rows = Vec::new();
    let (mut single, mut pair) = (0i128, 0i128);
    let mut capped = None;
    for t in 1..=q {
        let mut cursors = vec![0usize; stored.len()];
        let mut cross = 0i128;
        let mut current = Vec::new();
        let keep = t < q;
        let res = stream_a_set(sys, psi, ball, t, cap, |x, y| {
            for (s, list) in stored.iter().enumerate() {
                let i = &mut cursors[s];
                while *i < list.len() && list[*i].1 <= x {
                    *i += 1;
                }
                let mut j = *i;
                while j < list.len() && list[j].0 < y {
                    cross += list[j].1.min(y) - list[j].0.max(x);
                    j += 1;
                }
            }
            if keep {
                current.push((x, y));
            }
        });
        let (summary, m) = match res {
            Ok(s) => s,
            Err(UbiquityError::StreamCap { n, steps, cap }) => {
                capped = Some(format!("level {n} needs about {steps:.3e} Farey steps (cap {cap:.3e})"));
                break;
            }
            Err(e) => return Err(e),
        };
        single += m;
        pair += m + 2 * cross;
        levels.push(summary);
        stored.push(current);
        let (s, p) = (fixed_to_f64(single), fixed_to_f64(pair));
        rows.push(QuasiIndependenceRow { q: t, single_sum: s, pair_sum: p, ratio: p * mb / (s * s), bc_bound: s * s / p });
    }
    let reached_q = rows.last().map_or(0, |r| r.q);
    Ok(QuasiIndependenceReport { requested_q: q, reached_q, levels, rows, capped })
}

/// `Σ_{s,t} m(A_s ∩ A_t)` over materialized A-sets, in fixed-point units.
pub fn pair_sum_exact(sets: &[IntervalUnion]) -> i128 {
    let mut total = 0;
    for (i, a) in sets.iter().enumerate() {
        total += a.measure_fixed();
        for b in &sets[i + 1..] {
            total += 2 * a.intersect(b).measure_fixed();
        }
    }
    total
}

/// Doubling ratio `m(B(c, 2r)) / m(B(c, r))` at resonant centers of window `n`.
pub fn doubling_ratios(sys: &ResonantSystem, n: u32, r: f64, limit: usize) -> Result<Vec<f64>, UbiquityError> {
    let els = systems::enumerate_window(sys, n, None)?;
    Ok(els
        .iter()
        .take(limit)
        .filter_map(|e| {
            let b = match (sys.ambient, e.coordinate()) {
                (Ambient::UnitInterval, Some(x)) => Ball::interval(x, r),
                (Ambient::UnitCircle, Some(a)) => Ball::Arc { center: a, radius: r },
                _ => return None,
            };
            let m1 = b.measure();
            (m1 > 0.0).then(|| b.scaled(2.0).measure() / m1)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_one_example() {
        let sys = ResonantSystem::rationals(6.0);
        let rep = verify_local_ubiquity(&sys, &[Ball::from_endpoints(0.3, 0.5)], &[3], Some(0.5)).unwrap();
        assert_eq!(rep.pass, Some(true), "{rep:?}");
    }

    #[test]
    fn ambient_ratio_is_delta_measure() {
        let sys = ResonantSystem::rationals(6.0);
        let rep = verify_local_ubiquity(&sys, &[Ball::unit_interval()], &[2], None).unwrap();
        let rho = sys.rho.eval(36.0).unwrap();
        let region = geometry::build_delta_radius(&sys, 2, rho, None).unwrap();
        let (m, _) = geometry::region_measure(&region, None).unwrap();
        assert_eq!(rep.records[0].ratio, m);
    }

    #[test]
    fn gamma_zero_intersection_is_trivial() {
        let sys = ResonantSystem::rationals(6.0);
        let rep = verify_intersection_conditions(&sys, &[]).unwrap();
        assert_eq!((rep.c1_est, rep.c2_est, rep.violations.len()), (1.0, 1.0, 0));
    }

    #[test]
    fn lines_intersection_constants() {
        let sys = ResonantSystem::new(SystemKind::Lines21, 2.0);
        let n = 4;
        let samples = sample_intersection_cases(&sys, n, 40, &[0.5], 5).unwrap();
        let rep = verify_intersection_conditions(&sys, &samples).unwrap();
        assert!(rep.ratios_i.len() + rep.violations.len() == samples.len());
        assert!(rep.c1_est >= 0.5 - 1e-12 && rep.c1_est <= 2.0 / std::f64::consts::PI + 1e-9, "{}", rep.c1_est);
        assert!(rep.c2_est <= 12.0 / std::f64::consts::PI + 1e-9);
        let mut per = Vec::new();
        for frac in [0.25, 0.125, 0.0625] {
            let s = sample_intersection_cases(&sys, n, 40, &[frac], 5).unwrap();
            per.push(verify_intersection_conditions(&sys, &s).unwrap().c1_est);
        }
        let (lo, hi) = per.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo <= 2.0, "{per:?}");
    }

    #[test]
    fn a_sets_disjoint_and_inside_delta() {
        let sys = ResonantSystem::rationals(6.0);
        let psi = sys.rho.scale(1.0 / 25.0);
        let ball = Ball::unit_interval();
        let sets = build_a_sets(&sys, &psi, &ball, &[2, 3]).unwrap();
        for (s, a) in &sets {
            assert!(s.g_count > 0);
            assert_eq!(a.len() as u64, s.g_count);
            let delta = match geometry::build_delta_radius(&sys, s.n, s.psi, None).unwrap() {
                geometry::Region::Intervals(d) => d,
                _ => unreachable!(),
            };
            assert_eq!(a.intersect(&delta), *a);
        }
        let too_big = sys.rho.scale(0.5);
        assert!(matches!(build_a_sets(&sys, &too_big, &ball, &[2]), Err(UbiquityError::PsiTooLarge { .. })));
    }

    #[test]
    fn quasi_independence_small_horizon() {
        let sys = ResonantSystem::rationals(6.0);
        let psi = sys.rho.scale(1.0 / 25.0);
        let ball = Ball::unit_interval();
        let rep = verify_quasi_independence(&sys, &psi, &ball, 4, DEFAULT_STREAM_CAP).unwrap();
        assert_eq!(rep.reached_q, 4);
        assert!(rep.rows[0].ratio >= 1.0);
        let sets: Vec<IntervalUnion> = build_a_sets(&sys, &psi, &ball, &[1, 2, 3, 4]).unwrap().into_iter().map(|x| x.1).collect();
        assert_eq!(fixed_to_f64(pair_sum_exact(&sets)), rep.rows[3].pair_sum);
        for w in rep.rows.windows(2) {
            assert!(w[1].single_sum >= w[0].single_sum);
        }
    }
}
