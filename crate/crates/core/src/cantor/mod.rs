//! Cantor subsets of `Λ(ψ)` for point-like resonant sets, their mass distribution and an
//! audit of the mass bound `μ(B) ≤ f(r(B))/η`.
//!
//! [`plan_construction`] fixes the constants and the level schedule, [`build_levels`] builds
//! the tree, [`assign_mass`] spreads a probability measure over it and [`audit_mass`] checks
//! it.

mod audit;
mod build;

pub use audit::{audit_mass, check_invariants, mass_of_ball, AuditReport, InvariantReport, SampleAudit};
pub use build::{assign_mass, build_levels, write_json_lines, BallRecord, CantorBall, CantorTree, SublevelRecord};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcs::{eval_g, g_function, limsup_g, Exp, ExtendedLogPower, FuncError, GClass};
use crate::geometry::Ball;
use crate::laws::f_hypotheses;
use crate::systems::{ResonantSystem, SystemKind};

/// Largest `u_n` the schedule may use; keeps centre arithmetic inside `i128`.
pub const MAX_U: f64 = 1e15;
pub const DEFAULT_MAX_BALLS: u64 = 1_000_000;
/// A level's `u_t` must reach `GAP_FACTOR / (b r)` for parents `p/b` of radius `r`: no
/// fraction of denominator `≤ u_t` lies within `1/(b u_t)` of `p/b`.
pub const GAP_FACTOR: f64 = 4.0;
pub const DEFAULT_MAX_SUBLEVELS: u32 = 2;
/// Upper limit when counting the uncapped number of sub-levels.
pub const K_SEARCH_LIMIT: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CantorError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no admissible t at level {level} with u_t <= {max_u:e}{}", required_u.map(|u| format!(" (needs u_t ~ {u:e})")).unwrap_or_default())]
    Infeasible { level: u32, max_u: f64, required_u: Option<f64> },
    #[error("level {level} would hold ~{predicted} balls, cap {cap}")]
    ResourceCap { level: u32, predicted: u64, cap: u64 },
    #[error("no resonant point usable at level {level}, sub-level {sublevel}")]
    EmptyG { level: u32, sublevel: u32 },
    #[error("level {level}, sub-level {sublevel}: found {found} centres, expected at least {expected}")]
    Counting { level: u32, sublevel: u32, found: u64, expected: u64 },
    #[error("level {level}, sub-level {sublevel}: only {v} of {g} centres survive pruning")]
    HalfSurvival { level: u32, sublevel: u32, g: u64, v: u64 },
    #[error(transparent)]
    Func(#[from] FuncError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `G = limsup g(u_n) < ∞`: sub-levels, thickenings and pruning.
    FiniteG,
    /// `G = ∞`: one sub-level per level, uniform masses.
    InfiniteG,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    /// All constants derived from the measure constants and `κ`.
    PaperConstants { kappa: f64 },
    /// User `ϖ` and `κ`; inequalities the constants would guarantee are checked at runtime.
    Relaxed { varpi: f64, kappa: f64 },
}

impl Mode {
    pub fn kappa(&self) -> f64 {
        match *self {
            Mode::PaperConstants { kappa } | Mode::Relaxed { kappa, .. } => kappa,
        }
    }

    pub fn is_relaxed(&self) -> bool {
        matches!(self, Mode::Relaxed { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub kappa1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub varpi: f64,
    /// `ϖ` before any relaxed substitution.
    pub varpi_paper: f64,
    pub lambda_bound: f64,
    pub g_star: f64,
}

impl Constants {
    /// Constants for point-like resonant sets (`γ = 0`, `c₁ = c₂ = 1`).
    pub fn derive(a: f64, b: f64, delta: f64, kappa: f64, kappa1: f64) -> Self {
        let gamma = 0.0;
        let (c1, c2) = (1.0, 1.0);
        let c3 = (a * kappa / (b * 36f64.powf(delta))).min(kappa1 / (b * 9f64.powf(delta)));
        let c4 = c1 * a / (2f64.powf(gamma) * 9f64.powf(delta) * b);
        let c5 = c2 * b / a;
        let c6 = 2.0 / (c3 * c4);
        let varpi = c3 * c4 * a / (3f64.powf(delta) * 32.0 * b * b * c2);
        let lambda_bound = (a / (a + 3f64.powf(delta) * 8.0 * b * c2)).powf(1.0 / (delta - gamma));
        Self {
            a,
            b,
            delta,
            gamma,
            kappa,
            kappa1,
            c1,
            c2,
            c3,
            c4,
            c5,
            c6,
            varpi,
            varpi_paper: varpi,
            lambda_bound,
            g_star: 2.0,
        }
    }

    /// `3^δ·2·c₂·b/a`, the factor in front of `Σ g` in the sub-level count.
    fn k_factor(&self) -> f64 {
        3f64.powf(self.delta) * 2.0 * self.c2 * self.b / self.a
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SublevelPlan {
    pub i: u32,
    pub u_index: u32,
    pub psi: f64,
    pub rho: f64,
    /// Thickening radius (finite-G branch only).
    pub h: Option<f64>,
    /// `⌊c₃ (r/ρ)^δ⌋` for the parent radius `r`.
    pub target_count: u64,
    /// `3ψ < h < ρ`.
    pub guard_held: bool,
}

/// Sub-levels built inside every parent ball of one radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    /// `u`-index of the parent's radius; `None` for the root ball.
    pub parent_u_index: Option<u32>,
    pub parent_radius: f64,
    /// Factor `F` in `h = (F f(ψ)/ψ^γ)^{1/(δ−γ)}`: `ϖ/η` at level 1, `ϖ m(B)/f(r(B))` below.
    pub thickening_factor: f64,
    /// Sub-level count from the bracketing inequalities; `None` above the search limit.
    pub k_uncapped: Option<u64>,
    pub sublevels: Vec<SublevelPlan>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelPlan {
    pub level: u32,
    pub t: u32,
    pub blocks: Vec<BlockPlan>,
    /// Whether the level's choice inequalities hold (the `t₁`/`t_n` inequalities, or the
    /// product inequality in the infinite-G branch).
    pub choice_held: bool,
    pub notes: Vec<String>,
}

impl LevelPlan {
    pub fn block_for(&self, parent_u_index: Option<u32>) -> Option<&BlockPlan> {
        self.blocks.iter().find(|b| b.parent_u_index == parent_u_index)
    }

    /// `u`-indices of every sub-level at this level.
    pub fn u_indices(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.blocks.iter().flat_map(|b| b.sublevels.iter().map(|s| s.u_index)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub max_sublevels: u32,
    pub max_balls: u64,
    /// Smallest number of centres a block must be able to hold.
    pub min_children: u64,
    /// Forces the first level's `t`.
    pub t1: Option<u32>,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_sublevels: DEFAULT_MAX_SUBLEVELS, max_balls: DEFAULT_MAX_BALLS, min_children: 1, t1: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub system: ResonantSystem,
    pub psi: ExtendedLogPower,
    pub f: ExtendedLogPower,
    pub eta: f64,
    pub mode: Mode,
    pub branch: Branch,
    pub g_class: GClass,
    pub constants: Constants,
    /// Sub-levels use every `step`-th `u`-index.
    pub step: u32,
    pub within: Ball,
    pub depth: u32,
    pub limits: Limits,
    pub levels: Vec<LevelPlan>,
    pub notes: Vec<String>,
}

impl ConstructionPlan {
    pub fn t_schedule(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.t).collect()
    }
}

/// Inputs of [`plan_construction`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CantorParams {
    pub eta: f64,
    pub mode: Mode,
    pub depth: u32,
    pub within: Ball,
    #[serde(default)]
    pub limits: Limits,
}

/// Parents of one radius class, as seen by the planner.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct ParentClass {
    pub u_index: Option<u32>,
    pub radius: f64,
    pub count: u64,
    /// Smallest reduced denominator among the parent centres.
    pub b_min: f64,
}

pub(crate) struct Funcs<'a> {
    pub sys: &'a ResonantSystem,
    pub psi: &'a ExtendedLogPower,
    pub f: &'a ExtendedLogPower,
}

impl Funcs<'_> {
    pub fn u(&self, t: u32) -> f64 {
        self.sys.k.powi(t as i32)
    }

    pub fn psi_at(&self, t: u32) -> Option<f64> {
        self.psi.eval(self.u(t)).ok()
    }

    pub fn rho_at(&self, t: u32) -> Option<f64> {
        self.sys.rho.eval(self.u(t)).ok()
    }

    pub fn f_at(&self, x: f64) -> Option<f64> {
        self.f.eval(x).ok()
    }

    pub fn g_at(&self, t: u32) -> Option<f64> {
        eval_g(self.psi, &self.sys.rho, self.f, self.sys.gamma, self.sys.delta, self.u(t)).ok()
    }
}

fn exf(e: Exp) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}

/// `sup_n g(u_n)` over the evaluable range together with the limit.
fn sup_g(fx: &Funcs, class: GClass) -> f64 {
    let mut sup: f64 = match class {
        GClass::FinitePositive(c) => c,
        GClass::Zero => 0.0,
        GClass::Infinite => f64::INFINITY,
    };
    for t in 1..=120 {
        if let Some(g) = fx.g_at(t) {
            if g.is_finite() {
                sup = sup.max(g);
            }
        }
    }
    sup
}

fn max_index(k: f64) -> u32 {
    (MAX_U.ln() / k.ln()).floor() as u32
}

/// `⌊c₃ (r/ρ)^δ⌋`.
fn target_count(c: &Constants, r: f64, rho: f64) -> u64 {
    let x = c.c3 * (r / rho).powf(c.delta);
    if x.is_finite() && x >= 0.0 {
        x.floor().min(u64::MAX as f64 / 2.0) as u64
    } else {
        0
    }
}

/// Lebesgue measure of an interval ball of radius `r`.
fn ball_measure(r: f64) -> f64 {
    2.0 * r
}

/// Fixes constants, branch and the full level schedule.
pub fn plan_construction(
    sys: &ResonantSystem,
    psi: &ExtendedLogPower,
    f: &ExtendedLogPower,
    params: &CantorParams,
) -> Result<ConstructionPlan, CantorError> {
    if sys.kind != SystemKind::Rationals {
        return Err(CantorError::Unsupported(format!("Cantor construction needs the rationals, got {}", sys.kind)));
    }
    if sys.gamma != Exp::from_integer(0) || sys.delta <= sys.gamma {
        return Err(CantorError::Precondition("needs gamma = 0 < delta".into()));
    }
    if params.depth == 0 {
        return Err(CantorError::Precondition("depth must be at least 1".into()));
    }
    let Ball::Interval { radius: r_root, .. } = params.within else {
        return Err(CantorError::Precondition("within must be an interval ball".into()));
    };
    if !(r_root > 0.0) {
        return Err(CantorError::Precondition("within must have positive radius".into()));
    }
    let mut trace = Vec::new();
    if f_hypotheses(f, sys.gamma, sys.delta, &mut trace) != Some(true) {
        return Err(CantorError::Precondition(format!("f = {f} is not an admissible dimension function")));
    }
    let kappa = params.mode.kappa();
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(CantorError::Precondition(format!("kappa must lie in (0, 1], got {kappa}")));
    }
    let (a, b) = sys.measure_constants;
    let mut constants = Constants::derive(a, b, exf(sys.delta), kappa, kappa);
    let mut notes = Vec::new();
    if let Mode::Relaxed { varpi, .. } = params.mode {
        if !(varpi > 0.0 && varpi < 1.0) {
            return Err(CantorError::Precondition(format!("varpi must lie in (0, 1), got {varpi}")));
        }
        notes.push(format!("relaxed constants: varpi {} replaces {:e}", varpi, constants.varpi_paper));
        constants.varpi = varpi;
    }
    let u = sys.sequence();
    let g_class = limsup_g(psi, &sys.rho, f, sys.gamma, sys.delta, &u)?;
    let branch = match g_class {
        GClass::Infinite => Branch::InfiniteG,
        _ => Branch::FiniteG,
    };
    let fx = Funcs { sys, psi, f };
    constants.g_star = sup_g(&fx, g_class).max(2.0);
    match branch {
        Branch::FiniteG if params.eta <= constants.g_star => {
            return Err(CantorError::Precondition(format!("eta = {} must exceed G* = {}", params.eta, constants.g_star)));
        }
        Branch::InfiniteG if params.eta < 1.0 => {
            return Err(CantorError::Precondition("eta must be at least 1".into()));
        }
        _ => {}
    }
    if g_class == GClass::Zero {
        let gf = g_function(psi, &sys.rho, f, sys.gamma, sys.delta)?;
        notes.push(format!("G = 0: g = {gf}"));
    }

    // Thinning: ρ(u_{t+s}) ≤ λ ρ(u_t) with λ below the bound.
    let step = match params.mode {
        Mode::Relaxed { .. } => 1,
        Mode::PaperConstants { .. } => {
            let per = sys.k.powf(exf(sys.rho.p));
            let mut s = 1u32;
            while per.powi(s as i32) >= constants.lambda_bound && s < 64 {
                s += 1;
            }
            notes.push(format!("thinning: every {s}-th index, rho ratio {:e} < {:e}", per.powi(s as i32), constants.lambda_bound));
            s
        }
    };

    let mut plan = ConstructionPlan {
        system: sys.clone(),
        psi: psi.clone(),
        f: f.clone(),
        eta: params.eta,
        mode: params.mode,
        branch,
        g_class,
        constants,
        step,
        within: params.within,
        depth: params.depth,
        limits: params.limits.clone(),
        levels: Vec::new(),
        notes,
    };
    let mut parents = vec![ParentClass { u_index: None, radius: r_root, count: 1, b_min: f64::INFINITY }];
    for level in 1..=params.depth {
        let lp = plan_level(&plan, level, &parents)?;
        // Next level's parents: one class per sub-level index, with an upper bound on counts
        // and the window's lower bound standing in for the centres' denominators.
        let mut next: Vec<ParentClass> = Vec::new();
        for blk in &lp.blocks {
            let n_par = parents.iter().find(|p| p.u_index == blk.parent_u_index).map_or(0, |p| p.count);
            for s in &blk.sublevels {
                let add = n_par.saturating_mul(s.target_count);
                match next.iter_mut().find(|p| p.u_index == Some(s.u_index)) {
                    Some(p) => p.count = p.count.saturating_add(add),
                    None => {
                        let b_min = sys.window_bounds(s.u_index).map_or(1.0, |(lo, _)| (lo as f64).max(1.0));
                        next.push(ParentClass { u_index: Some(s.u_index), radius: s.psi, count: add, b_min })
                    }
                }
            }
        }
        plan.levels.push(lp);
        parents = next;
    }
    if params.depth > 1 {
        plan.notes.push("levels below the first are re-planned from the built parents".into());
    }
    Ok(plan)
}

/// Plans `level` given the parent classes; earlier levels must already be in `plan.levels`.
pub(crate) fn plan_level(plan: &ConstructionPlan, level: u32, parents: &[ParentClass]) -> Result<LevelPlan, CantorError> {
    let fx = Funcs { sys: &plan.system, psi: &plan.psi, f: &plan.f };
    let earlier = &plan.levels[..(level as usize - 1).min(plan.levels.len())];
    let prev_last = earlier.last().map_or(0, |l| l.u_indices().last().copied().unwrap_or(l.t));
    match plan.branch {
        Branch::FiniteG => plan_finite_level(plan, &fx, level, parents, prev_last),
        Branch::InfiniteG => {
            let c = &plan.constants;
            let product = earlier.iter().fold(1.0, |acc, l| {
                let (p, r) = (fx.psi_at(l.t).unwrap_or(f64::NAN), fx.rho_at(l.t).unwrap_or(f64::NAN));
                acc * (r / p).powf(c.delta - c.gamma)
            });
            plan_infinite_level(plan, &fx, level, parents, prev_last, product)
        }
    }
}

fn predicted_balls(parents: &[ParentClass], per_parent: impl Fn(f64) -> u64) -> u64 {
    parents.iter().fold(0u64, |acc, p| acc.saturating_add(p.count.saturating_mul(per_parent(p.radius))))
}

/// Whether `u_t` and `ρ(u_t)` leave room for centres inside every parent.
fn structural_ok(c: &Constants, parents: &[ParentClass], limits: &Limits, u: f64, ps: f64, rh: f64) -> bool {
    parents.iter().all(|p| {
        target_count(c, p.radius, rh) >= limits.min_children
            && rh < p.radius / 2.0
            && ps < rh
            && u * p.b_min * p.radius >= GAP_FACTOR
    })
}

/// Sub-level count `k` with `C Σ_{i<k} g(u_{t+is}) ≤ ¼ < C Σ_{i≤k} g(u_{t+is})`.
fn sublevel_count(plan: &ConstructionPlan, t: u32, factor: f64) -> Option<u64> {
    let sys = &plan.system;
    let g = g_function(&plan.psi, &sys.rho, &plan.f, sys.gamma, sys.delta).ok()?;
    let lnk = sys.k.ln();
    let c = plan.constants.k_factor() * factor;
    let mut sum = 0.0;
    for k in 0..K_SEARCH_LIMIT {
        let n = t as f64 + (k as f64) * plan.step as f64;
        let gi = g.ln_eval_at_ln(n * lnk).exp();
        if !gi.is_finite() {
            return None;
        }
        if c * (sum + gi) > 0.25 {
            return Some(k);
        }
        sum += gi;
    }
    None
}

fn plan_finite_level(
    plan: &ConstructionPlan,
    fx: &Funcs,
    level: u32,
    parents: &[ParentClass],
    prev_last: u32,
) -> Result<LevelPlan, CantorError> {
    let c = &plan.constants;
    let dg = c.delta - c.gamma;
    let eta = plan.eta;
    let limits = &plan.limits;
    let tmax = max_index(plan.system.k);
    let t_lo = if level == 1 { 1 } else { prev_last + plan.step };
    // F for a parent of radius r.
    let factor = |r: f64| -> f64 {
        if level == 1 {
            c.varpi / eta
        } else {
            c.varpi * ball_measure(r) / fx.f_at(r).unwrap_or(f64::NAN)
        }
    };
    let choice = |t: u32| -> Option<(bool, bool)> {
        let (ps, rh) = (fx.psi_at(t)?, fx.rho_at(t)?);
        let fp = fx.f_at(ps)?;
        let structural = structural_ok(c, parents, limits, fx.u(t), ps, rh);
        // f(ψ)/ψ^δ > 3^{δ−γ} / F.
        let mut inequalities = parents.iter().all(|p| fp / ps.powf(c.delta) > 3f64.powf(dg) / factor(p.radius));
        if level == 1 {
            let g = fx.g_at(t)?;
            inequalities &= g <= c.g_star && c.g_star < c.a / (3f64.powf(c.delta) * 8.0 * c.c2 * c.b) * eta / c.varpi;
        }
        Some((structural, inequalities))
    };
    let mut chosen = None;
    let mut required_u = None;
    match limits.t1.filter(|_| level == 1) {
        Some(t) => chosen = Some((t, choice(t).map(|x| x.1).unwrap_or(false))),
        None => {
            for t in t_lo..=tmax {
                if let Some((s, ok)) = choice(t) {
                    if s && ok {
                        chosen = Some((t, true));
                        break;
                    }
                }
            }
            if chosen.is_none() {
                for t in tmax + 1..tmax + 200 {
                    if matches!(choice(t), Some((true, true))) {
                        required_u = Some(fx.u(t));
                        break;
                    }
                }
            }
        }
    }
    let Some((t, choice_held)) = chosen else {
        return Err(CantorError::Infeasible { level, max_u: MAX_U, required_u });
    };
    let mut blocks = Vec::new();
    let mut notes = Vec::new();
    for p in parents {
        let (pu, r) = (p.u_index, p.radius);
        let fac = factor(r);
        let k_uncapped = sublevel_count(plan, t, fac);
        let cap = limits.max_sublevels.max(1) as u64 - 1;
        let k_used = k_uncapped.unwrap_or(u64::MAX).min(cap);
        if k_uncapped.map_or(true, |k| k > cap) {
            notes.push(format!(
                "parent radius {r:e}: {} sub-levels capped at {}",
                k_uncapped.map_or(format!("> {K_SEARCH_LIMIT}"), |k| (k + 1).to_string()),
                cap + 1
            ));
        }
        let mut subs = Vec::new();
        for i in 0..=k_used as u32 {
            let ui = t + i * plan.step;
            if ui > tmax {
                return Err(CantorError::Infeasible { level, max_u: MAX_U, required_u: Some(fx.u(ui)) });
            }
            let (ps, rh) = (fx.psi_at(ui).unwrap_or(f64::NAN), fx.rho_at(ui).unwrap_or(f64::NAN));
            let h = (fac * fx.f_at(ps).unwrap_or(f64::NAN) / ps.powf(c.gamma)).powf(1.0 / dg);
            subs.push(SublevelPlan {
                i,
                u_index: ui,
                psi: ps,
                rho: rh,
                h: Some(h),
                target_count: target_count(c, r, rh),
                guard_held: 3.0 * ps < h && h < rh,
            });
        }
        blocks.push(BlockPlan { parent_u_index: pu, parent_radius: r, thickening_factor: fac, k_uncapped, sublevels: subs });
    }
    let predicted = blocks.iter().fold(0u64, |acc, blk| {
        let n = parents.iter().find(|p| p.u_index == blk.parent_u_index).map_or(0, |p| p.count);
        acc.saturating_add(n.saturating_mul(blk.sublevels.iter().map(|s| s.target_count).sum()))
    });
    if predicted > limits.max_balls {
        return Err(CantorError::ResourceCap { level, predicted, cap: limits.max_balls });
    }
    if !choice_held {
        notes.push(format!("level {level}: choice inequalities fail at t = {t}"));
    }
    Ok(LevelPlan { level, t, blocks, choice_held, notes })
}

fn plan_infinite_level(
    plan: &ConstructionPlan,
    fx: &Funcs,
    level: u32,
    parents: &[ParentClass],
    prev_last: u32,
    product: f64,
) -> Result<LevelPlan, CantorError> {
    let c = &plan.constants;
    let limits = &plan.limits;
    let tmax = max_index(plan.system.k);
    let t_lo = if level == 1 { 1 } else { prev_last + plan.step };
    let structural = |t: u32| -> Option<u64> {
        let (ps, rh) = (fx.psi_at(t)?, fx.rho_at(t)?);
        structural_ok(c, parents, limits, fx.u(t), ps, rh).then(|| predicted_balls(parents, |r| target_count(c, r, rh)))
    };
    // η c₆^i Π_{j<i} (ρ/ψ)(u_{t_j})^{δ−γ} ≤ g(u_{t_i}).
    let rhs = plan.eta * c.c6.powi(level as i32) * product;
    let product_ok = |t: u32| fx.g_at(t).map_or(false, |g| rhs <= g);
    let mut notes = Vec::new();
    if let Some(t) = limits.t1.filter(|_| level == 1) {
        let blocks = infinite_blocks(fx, c, parents, t);
        return Ok(LevelPlan { level, t, blocks, choice_held: product_ok(t), notes });
    }
    let mut first_structural = None;
    let mut chosen = None;
    for t in t_lo..=tmax {
        let Some(pred) = structural(t) else { continue };
        if pred > limits.max_balls {
            if first_structural.is_none() {
                return Err(CantorError::ResourceCap { level, predicted: pred, cap: limits.max_balls });
            }
            break;
        }
        first_structural.get_or_insert(t);
        if product_ok(t) {
            chosen = Some(t);
            break;
        }
    }
    let (t, held) = match (chosen, first_structural) {
        (Some(t), _) => (t, true),
        (None, Some(t)) if plan.mode.is_relaxed() => {
            notes.push(format!("level {level}: product inequality unmet below the ball cap; using t = {t}"));
            (t, false)
        }
        _ => {
            let mut required_u = None;
            for t in t_lo..tmax + 400 {
                if product_ok(t) {
                    required_u = Some(fx.u(t));
                    break;
                }
            }
            return Err(CantorError::Infeasible { level, max_u: MAX_U, required_u });
        }
    };
    let blocks = infinite_blocks(fx, c, parents, t);
    Ok(LevelPlan { level, t, blocks, choice_held: held, notes })
}

fn infinite_blocks(fx: &Funcs, c: &Constants, parents: &[ParentClass], t: u32) -> Vec<BlockPlan> {
    let (ps, rh) = (fx.psi_at(t).unwrap_or(f64::NAN), fx.rho_at(t).unwrap_or(f64::NAN));
    parents
        .iter()
        .map(|p| BlockPlan {
            parent_u_index: p.u_index,
            parent_radius: p.radius,
            thickening_factor: 0.0,
            k_uncapped: Some(0),
            sublevels: vec![SublevelPlan {
                i: 0,
                u_index: t,
                psi: ps,
                rho: rh,
                h: None,
                target_count: target_count(c, p.radius, rh),
                guard_held: true,
            }],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(s: &str) -> ExtendedLogPower {
        s.parse().unwrap()
    }

    #[test]
    fn paper_constants() {
        let c = Constants::derive(1.0, 2.0, 1.0, 0.5, 0.5);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-15 * y;
        assert!(close(c.c3, 1.0 / 144.0));
        assert!(close(c.c4, 1.0 / 18.0));
        assert!(close(c.varpi, 1.0 / 995_328.0));
        assert!(close(c.lambda_bound, 1.0 / 49.0));
    }

    fn params(eta: f64, mode: Mode) -> CantorParams {
        CantorParams { eta, mode, depth: 2, within: Ball::interval(0.414_213_56, 1e-4), limits: Limits::default() }
    }

    #[test]
    fn branch_selection() {
        let sys = ResonantSystem::rationals(6.0);
        let relaxed = Mode::Relaxed { varpi: 0.01, kappa: 0.5 };
        let p = plan_construction(&sys, &lit("r^-3"), &lit("x^1/2"), &params(10.0, relaxed)).unwrap();
        assert_eq!(p.branch, Branch::InfiniteG);
        let mut prm = params(10.0, relaxed);
        prm.limits.max_sublevels = 1;
        let p = plan_construction(&sys, &lit("r^-3"), &lit("x^2/3"), &prm).unwrap();
        assert_eq!(p.branch, Branch::FiniteG);
        assert!(p.levels[0].t <= 6, "t1 = {}", p.levels[0].t);
        assert!(p.levels[0].choice_held);
        let ts = p.t_schedule();
        assert!(ts[1] > ts[0]);
    }

    #[test]
    fn two_sublevels_below_the_first_level_hit_the_ball_cap() {
        let sys = ResonantSystem::rationals(6.0);
        let relaxed = Mode::Relaxed { varpi: 0.01, kappa: 0.5 };
        let err = plan_construction(&sys, &lit("r^-3"), &lit("x^2/3"), &params(10.0, relaxed)).unwrap_err();
        assert!(matches!(err, CantorError::ResourceCap { level: 2, .. }), "{err}");
    }

    #[test]
    fn paper_mode_is_out_of_reach() {
        let sys = ResonantSystem::rationals(6.0);
        let err = plan_construction(&sys, &lit("r^-3"), &lit("x^2/3"), &params(10.0, Mode::PaperConstants { kappa: 0.5 }))
            .unwrap_err();
        assert!(matches!(err, CantorError::ResourceCap { .. } | CantorError::Infeasible { .. }), "{err}");
    }

    #[test]
    fn preconditions() {
        let sys = ResonantSystem::rationals(6.0);
        let relaxed = Mode::Relaxed { varpi: 0.01, kappa: 0.5 };
        assert!(matches!(
            plan_construction(&sys, &lit("r^-3"), &lit("x^2/3"), &params(1.5, relaxed)),
            Err(CantorError::Precondition(_))
        ));
        assert!(matches!(
            plan_construction(&sys, &lit("r^-3"), &lit("x^1"), &params(10.0, relaxed)),
            Err(CantorError::Precondition(_))
        ));
        let circle = ResonantSystem::new(SystemKind::Circle, 4.0);
        assert!(matches!(
            plan_construction(&circle, &lit("r^-3"), &lit("x^1/2"), &params(10.0, relaxed)),
            Err(CantorError::Unsupported(_))
        ));
    }
}
