use num::rational::{BigRational, Ratio};
use num::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::build::{frac_diff, to_big, to_frac};
use super::{Branch, CantorError, CantorTree, Funcs};
use crate::geometry::{mdp_lower_bound, Ball, MdpBound};

/// Relative slack on radius comparisons; radii are `f64` values of `ψ`.
const RADIUS_TOL: f64 = 1e-12;
const MAX_VIOLATIONS: usize = 50;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub balls: usize,
    pub nesting: bool,
    pub disjointness: bool,
    pub membership: bool,
    pub conservation: bool,
    pub thickening_guard: bool,
    pub violations: Vec<String>,
}

impl InvariantReport {
    pub fn all_hold(&self) -> bool {
        self.nesting && self.disjointness && self.membership && self.conservation && self.thickening_guard
    }

    fn fail(&mut self, msg: String) {
        if self.violations.len() < MAX_VIOLATIONS {
            self.violations.push(msg);
        }
    }
}

fn big_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Nesting, disjointness within each level, window membership, mass conservation and the
/// thickening guard `3ψ < h < ρ`.
pub fn check_invariants(tree: &CantorTree) -> InvariantReport {
    let plan = &tree.plan;
    let fx = Funcs { sys: &plan.system, psi: &plan.psi, f: &plan.f };
    let mut rep = InvariantReport {
        balls: tree.balls.len(),
        nesting: true,
        disjointness: true,
        membership: true,
        conservation: true,
        thickening_guard: true,
        violations: Vec::new(),
    };
    for b in &tree.balls {
        let (d, rp) = match b.parent {
            Some(p) => {
                let pb = &tree.balls[p];
                (frac_diff(to_frac(&b.center), to_frac(&pb.center)).abs(), pb.radius)
            }
            None => (big_to_f64(&(to_big(&b.center) - &tree.root_center)).abs(), tree.root_radius),
        };
        if !(d + b.radius <= rp * (1.0 + RADIUS_TOL)) {
            rep.nesting = false;
            rep.fail(format!("ball {} not inside its parent: |dc| + r = {:e} > {:e}", b.id, d + b.radius, rp));
        }
        let window = plan.system.window_bounds(b.u_index);
        let (p, q) = b.rep;
        let in_window = window.map_or(false, |(lo, hi)| lo < q && q <= hi);
        let value_ok = q > 0 && Ratio::new(p as i128, q as i128) == b.center;
        let radius_ok = fx.psi_at(b.u_index) == Some(b.radius);
        if !(in_window && value_ok && radius_ok) {
            rep.membership = false;
            rep.fail(format!("ball {} (rep {p}/{q}, index {}) is not a window neighbourhood", b.id, b.u_index));
        }
    }
    for (li, ids) in tree.levels.iter().enumerate() {
        let mut sorted = ids.clone();
        sorted.sort_by(|&a, &b| tree.balls[a].center.cmp(&tree.balls[b].center));
        for w in sorted.windows(2) {
            let (x, y) = (&tree.balls[w[0]], &tree.balls[w[1]]);
            let d = frac_diff(to_frac(&y.center), to_frac(&x.center));
            if !(d > x.radius + y.radius) {
                rep.disjointness = false;
                rep.fail(format!("level {}: balls {} and {} overlap", li + 1, x.id, y.id));
            }
        }
    }
    if tree.balls.iter().all(|b| b.mass.is_some()) && !tree.balls.is_empty() {
        let total: BigRational = tree.children_of(None).iter().map(|&i| tree.balls[i].mass.clone().unwrap()).sum();
        if total != BigRational::one() {
            rep.conservation = false;
            rep.fail(format!("first-level masses sum to {}", big_to_f64(&total)));
        }
        for b in &tree.balls {
            let kids = &tree.children[b.id];
            if kids.is_empty() {
                continue;
            }
            let s: BigRational = kids.iter().map(|&i| tree.balls[i].mass.clone().unwrap()).sum();
            if Some(&s) != b.mass.as_ref() {
                rep.conservation = false;
                rep.fail(format!("children of ball {} do not carry its mass", b.id));
            }
        }
    } else {
        rep.conservation = false;
        rep.fail("masses not assigned".into());
    }
    for r in &tree.records {
        if let Some(h) = r.h {
            if !(3.0 * r.psi < h && h < r.rho) {
                rep.thickening_guard = false;
                rep.fail(format!("level {} sub-level {}: h = {h:e} outside (3 psi, rho) = ({:e}, {:e})", r.level, r.sublevel, 3.0 * r.psi, r.rho));
            }
        }
    }
    rep
}

/// One inequality that the mass bound rests on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumCheck {
    pub level: u32,
    pub parent: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub held: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleAudit {
    pub seed: u64,
    pub samples: usize,
    pub max_ratio: f64,
    pub min_radius: f64,
    pub max_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub branch: Branch,
    pub eta: f64,
    /// `max μ(B) η / f(r(B))` over construction balls.
    pub construction_max_ratio: f64,
    pub construction_over_one: usize,
    /// Failed checks are listed first, then at most a few passing ones.
    pub sum_checks: Vec<SumCheck>,
    pub sum_checks_total: usize,
    pub sum_checks_failed: usize,
    /// Every sum inequality held, so the bound `μ(B) ≤ f(r(B))/η` is asserted.
    pub bound_asserted: bool,
    pub bound_holds: bool,
    pub arbitrary: SampleAudit,
    pub mdp: MdpBound,
    pub invariants: InvariantReport,
}

impl AuditReport {
    /// The bound holds whenever its supporting inequalities held.
    pub fn consistent(&self) -> bool {
        !self.bound_asserted || self.bound_holds
    }
}

/// Deepest-level balls sorted by centre, with prefix sums of their masses.
struct DeepIndex<'a> {
    tree: &'a CantorTree,
    ids: Vec<usize>,
    prefix: Vec<f64>,
    r_max: f64,
}

impl<'a> DeepIndex<'a> {
    fn new(tree: &'a CantorTree) -> Self {
        let mut ids = tree.levels.last().cloned().unwrap_or_default();
        ids.sort_by(|&a, &b| tree.balls[a].center.cmp(&tree.balls[b].center));
        let mut prefix = Vec::with_capacity(ids.len() + 1);
        prefix.push(0.0);
        let mut s = 0.0;
        for &i in &ids {
            s += tree.balls[i].mass.as_ref().map(big_to_f64).unwrap_or(0.0);
            prefix.push(s);
        }
        let r_max = ids.iter().map(|&i| tree.balls[i].radius).fold(0.0, f64::max);
        Self { tree, ids, prefix, r_max }
    }

    /// Upper bound for `μ(A)`: mass of the deepest balls meeting `A = B(anchor + offset, r)`.
    fn mass(&self, anchor: &Ratio<i128>, offset: f64, r: f64) -> f64 {
        let a = to_frac(anchor);
        let pos = |i: usize| frac_diff(to_frac(&self.tree.balls[self.ids[i]].center), a) - offset;
        let first = |pred: &dyn Fn(f64) -> bool| -> usize {
            let (mut lo, mut hi) = (0usize, self.ids.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                if pred(pos(mid)) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            lo
        };
        let reach = r + self.r_max;
        let lo_out = first(&|d| d > -reach);
        let hi_out = first(&|d| d >= reach);
        let meets = |i: usize| pos(i).abs() < r + self.tree.balls[self.ids[i]].radius;
        let inner = r - self.r_max;
        if inner <= 0.0 {
            return (lo_out..hi_out).filter(|&i| meets(i)).map(|i| self.prefix[i + 1] - self.prefix[i]).sum();
        }
        let lo_in = first(&|d| d > -inner).max(lo_out);
        let hi_in = first(&|d| d >= inner).max(lo_in);
        let edge = |range: std::ops::Range<usize>| -> f64 {
            range.filter(|&i| meets(i)).map(|i| self.prefix[i + 1] - self.prefix[i]).sum()
        };
        edge(lo_out..lo_in) + (self.prefix[hi_in] - self.prefix[lo_in]) + edge(hi_in..hi_out.max(hi_in))
    }
}

/// Upper bound for `μ(B(centre + offset, r))` from the deepest level.
pub fn mass_of_ball(tree: &CantorTree, centre: &Ratio<i128>, offset: f64, r: f64) -> f64 {
    DeepIndex::new(tree).mass(centre, offset, r)
}

fn sum_checks(tree: &CantorTree, fx: &Funcs) -> Vec<SumCheck> {
    let plan = &tree.plan;
    let f = |r: f64| fx.f_at(r).unwrap_or(f64::NAN);
    let mut out = Vec::new();
    match plan.branch {
        Branch::FiniteG => {
            let lhs: f64 = tree.children_of(None).iter().map(|&i| f(tree.balls[i].radius)).sum();
            out.push(SumCheck { level: 1, parent: None, lhs, rhs: plan.eta, held: lhs >= plan.eta });
            for lvl in 0..tree.levels.len().saturating_sub(1) {
                for &p in &tree.levels[lvl] {
                    let lhs: f64 = tree.children[p].iter().map(|&i| f(tree.balls[i].radius)).sum();
                    let rhs = f(tree.balls[p].radius);
                    out.push(SumCheck { level: lvl as u32 + 2, parent: Some(p), lhs, rhs, held: lhs >= rhs });
                }
            }
        }
        Branch::InfiniteG => {
            let c = &plan.constants;
            let mut product = 1.0;
            for lp in &plan.levels {
                let rhs = plan.eta * c.c6.powi(lp.level as i32) * product;
                let lhs = fx.g_at(lp.t).unwrap_or(f64::NAN);
                out.push(SumCheck { level: lp.level, parent: None, lhs, rhs, held: lhs >= rhs });
                let (ps, rh) = (fx.psi_at(lp.t).unwrap_or(f64::NAN), fx.rho_at(lp.t).unwrap_or(f64::NAN));
                product *= (rh / ps).powf(c.delta - c.gamma);
            }
            for r in &tree.records {
                let r_parent = match r.parent {
                    Some(p) => tree.balls[p].radius,
                    None => tree.root_radius,
                };
                let lower = 0.5 * c.c3 * (r_parent / r.rho).powf(c.delta);
                out.push(SumCheck { level: r.level, parent: r.parent, lhs: r.g_count as f64, rhs: lower, held: r.g_count as f64 >= lower });
            }
        }
    }
    out
}

/// Construction-ball ratios, the supporting sum inequalities, sampled arbitrary balls and the
/// mass distribution bound.
pub fn audit_mass(tree: &CantorTree, samples: usize, seed: u64) -> Result<AuditReport, CantorError> {
    if tree.balls.iter().any(|b| b.mass.is_none()) {
        return Err(CantorError::Precondition("masses not assigned".into()));
    }
    let plan = &tree.plan;
    let fx = Funcs { sys: &plan.system, psi: &plan.psi, f: &plan.f };
    let eta = plan.eta;
    let mut max_ratio: f64 = 0.0;
    let mut over = 0;
    let mut mdp_samples = Vec::with_capacity(tree.balls.len());
    for b in &tree.balls {
        let m = big_to_f64(b.mass.as_ref().unwrap());
        let fr = fx.f_at(b.radius).unwrap_or(f64::NAN);
        let ratio = m * eta / fr;
        if !(ratio <= 1.0 + RADIUS_TOL) {
            over += 1;
        }
        max_ratio = max_ratio.max(ratio);
        mdp_samples.push((Ball::interval(big_to_f64(&to_big(&b.center)), b.radius), m));
    }
    let checks = sum_checks(tree, &fx);
    let failed = checks.iter().filter(|c| !c.held).count();
    let mut shown: Vec<SumCheck> = checks.iter().filter(|c| !c.held).take(20).cloned().collect();
    shown.extend(checks.iter().filter(|c| c.held).take(5).cloned());

    let deep = DeepIndex::new(tree);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_lo = deep.ids.iter().map(|&i| tree.balls[i].radius).fold(f64::INFINITY, f64::min);
    let r_hi = tree.root_radius;
    let mut arb_max: f64 = 0.0;
    if !deep.ids.is_empty() {
        for _ in 0..samples {
            let anchor = &tree.balls[deep.ids[rng.gen_range(0..deep.ids.len())]].center;
            let r = (rng.gen_range(r_lo.ln()..=r_hi.ln())).exp();
            let offset = rng.gen_range(-1.0..1.0) * r;
            let m = deep.mass(anchor, offset, r);
            if let Some(fr) = fx.f_at(r) {
                arb_max = arb_max.max(m * eta / fr);
            }
        }
    }
    let mdp = mdp_lower_bound(&mdp_samples, &plan.f, 1.0).map_err(|e| CantorError::Precondition(e.to_string()))?;
    let bound_asserted = failed == 0;
    Ok(AuditReport {
        branch: plan.branch,
        eta,
        construction_max_ratio: max_ratio,
        construction_over_one: over,
        sum_checks: shown,
        sum_checks_total: checks.len(),
        sum_checks_failed: failed,
        bound_asserted,
        bound_holds: over == 0,
        arbitrary: SampleAudit { seed, samples, max_ratio: arb_max, min_radius: r_lo, max_radius: r_hi },
        mdp,
        invariants: check_invariants(tree),
    })
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::funcs::ExtendedLogPower;
    use crate::systems::ResonantSystem;
    use num::Zero;

    fn lit(s: &str) -> ExtendedLogPower {
        s.parse().unwrap()
    }

    fn build(f: &str, depth: u32) -> CantorTree {
        let sys = ResonantSystem::rationals(6.0);
        let params = CantorParams {
            eta: 10.0,
            mode: Mode::Relaxed { varpi: 0.01, kappa: 0.5 },
            depth,
            within: Ball::interval(0.414_213_56, 1e-4),
            limits: Limits { max_sublevels: if depth > 1 { 1 } else { 2 }, ..Limits::default() },
        };
        let plan = plan_construction(&sys, &lit("r^-3"), &lit(f), &params).unwrap();
        let mut tree = build_levels(&plan).unwrap();
        assign_mass(&mut tree).unwrap();
        tree
    }

    #[test]
    fn finite_depth_one_structure() {
        let tree = build("x^2/3", 1);
        let inv = check_invariants(&tree);
        assert!(inv.all_hold(), "{:?}", inv.violations);
        let sub: Vec<u32> = tree.records.iter().map(|r| r.sublevel).collect();
        assert_eq!(sub, vec![0, 1]);
        for b in &tree.balls {
            assert_eq!(b.radius, tree.plan.psi.eval(6f64.powi(b.u_index as i32)).unwrap());
        }
        // Equal radii give equal masses.
        let m0: Vec<_> = tree.balls.iter().filter(|b| b.sublevel == 0).map(|b| b.mass.clone().unwrap()).collect();
        assert!(m0.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn infinite_masses_are_products() {
        let tree = build("x^1/2", 2);
        assert_eq!(tree.plan.branch, Branch::InfiniteG);
        let inv = check_invariants(&tree);
        assert!(inv.all_hold(), "{:?}", inv.violations);
        let n1 = tree.levels[0].len();
        for &i in &tree.levels[1] {
            let b = &tree.balls[i];
            let n2 = tree.children[b.parent.unwrap()].len();
            let expect = BigRational::one() / BigRational::from_integer(((n1 * n2) as i64).into());
            assert_eq!(b.mass.as_ref().unwrap(), &expect);
        }
    }

    #[test]
    fn construction_ball_as_sample() {
        let tree = build("x^2/3", 2);
        for &i in tree.levels[0].iter().take(5).chain(tree.levels[1].iter().take(5)) {
            let b = &tree.balls[i];
            let m = mass_of_ball(&tree, &b.center, 0.0, b.radius);
            let exact = big_to_f64(b.mass.as_ref().unwrap());
            assert!((m - exact).abs() <= 1e-12 * exact, "ball {i}: {m} vs {exact}");
        }
        let all = mass_of_ball(&tree, &tree.balls[0].center, 0.0, 1.0);
        assert!((all - 1.0).abs() < 1e-12, "{all}");
        assert!(BigRational::zero() < tree.balls[0].mass.clone().unwrap());
    }

    #[test]
    fn audit_reports() {
        let tree = build("x^2/3", 2);
        let a = audit_mass(&tree, 200, 7).unwrap();
        assert!(a.invariants.all_hold());
        assert!(a.consistent());
        assert!(a.arbitrary.max_ratio.is_finite() && a.arbitrary.max_ratio > 0.0);
        assert!((a.mdp.bound - eta_over(&a)).abs() <= 1e-9 * a.mdp.bound);
    }

    fn eta_over(a: &AuditReport) -> f64 {
        a.eta / a.construction_max_ratio
    }
}
