//! Verdict engine: Lebesgue and Hausdorff measure laws for limsup sets of a resonant system,
//! and the critical dimension.
//!
//! Every hypothesis consulted is recorded in a trace with a descriptive citation tag.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcs::{
    compose_f_psi, condense_over_u, g_function, is_u_regular, lex_sign, limsup_g, Exp, ExtendedLogPower, FuncError,
    GClass, LimitClass, SeriesClass, SeriesVerdict, Variable,
};
use crate::systems::{ResonantSystem, SystemKind};
use crate::ubiquity::UbiquityStatus;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("sigma is undefined when psi has no power factor")]
    SigmaUndefined,
    #[error(transparent)]
    Func(#[from] FuncError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lebesgue {
    Zero,
    Positive,
    Full,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hausdorff {
    Zero,
    Infinite,
    NotApplicable,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Satisfied,
    Failed,
    Undecided,
}

/// Which result a trace entry appeals to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Citation {
    /// Convergence half of Borel–Cantelli on the natural cover.
    NaturalCover,
    /// Ubiquity implies positive (local: full) measure under the divergence condition.
    UbiquityLebesgue,
    /// Equal dimensions make the independence condition automatic.
    EqualDimensions,
    /// Regularity of `ψ` or `ρ` replaces the independence condition under (M2).
    RegularityShortcut,
    /// Ubiquity implies infinite `H^f` measure.
    UbiquityHausdorff,
    /// Growth condition on `f` transferring regularity from `ψ`.
    GrowthCondition,
    /// `dim ≥ γ + σ(δ − γ)`.
    DimensionFormula,
    /// Requirements on the dimension function.
    DimensionFunction,
    /// Rational points on the circle need `r²ψ(r) → 0`.
    CircleGuard,
    /// The approximating function must decrease.
    Monotonicity,
    /// How ubiquity of the system is known.
    Ubiquity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub hypothesis: String,
    pub status: Status,
    pub tag: Citation,
}

fn entry(trace: &mut Vec<TraceEntry>, hypothesis: impl Into<String>, ok: Option<bool>, tag: Citation) -> Option<bool> {
    let status = match ok {
        Some(true) => Status::Satisfied,
        Some(false) => Status::Failed,
        None => Status::Undecided,
    };
    trace.push(TraceEntry { hypothesis: hypothesis.into(), status, tag });
    ok
}

/// A system with an approximating function, an optional dimension function, and the state
/// of the system's ubiquity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub system: ResonantSystem,
    pub psi: ExtendedLogPower,
    pub f: Option<ExtendedLogPower>,
    pub ubiquity: UbiquityStatus,
}

impl Case {
    /// Ubiquity is taken as claimed when `k` reaches the system's stated minimum.
    pub fn new(system: ResonantSystem, psi: ExtendedLogPower, f: Option<ExtendedLogPower>) -> Self {
        let ubiquity = if system.claims_local_ubiquity() { UbiquityStatus::Claimed } else { UbiquityStatus::None };
        Self { system, psi, f, ubiquity }
    }

    pub fn with_ubiquity(mut self, status: UbiquityStatus) -> Self {
        self.ubiquity = status;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueReport {
    pub verdict: Lebesgue,
    pub trace: Vec<TraceEntry>,
    pub guards: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffReport {
    pub verdict: Hausdorff,
    pub g_class: Option<GClass>,
    pub trace: Vec<TraceEntry>,
    pub guards: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtDimension {
    Infinite,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub sigma: Exp,
    pub d: Exp,
    pub hausdorff_at_d: AtDimension,
    /// `ψ/ρ` does not tend to zero, so `d = δ`.
    pub capped: bool,
    pub trace: Vec<TraceEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub system: String,
    pub psi: String,
    pub f: Option<String>,
    pub lebesgue: Lebesgue,
    pub hausdorff: Option<Hausdorff>,
    pub dimension: Option<Exp>,
    pub sigma: Option<Exp>,
    pub hausdorff_at_d: Option<AtDimension>,
    pub trace: Vec<TraceEntry>,
    pub guards: Vec<String>,
}

fn ex(n: i64) -> Exp {
    Exp::from_integer(n)
}

const CIRCLE_GUARD: &str = "r^2 psi(r) -> 0 as r -> infinity";

/// `r²ψ(r) → 0` for the circle; `None` for other systems.
fn circle_guard(case: &Case, trace: &mut Vec<TraceEntry>, guards: &mut Vec<String>) -> Option<bool> {
    if case.system.kind != SystemKind::Circle {
        return None;
    }
    let psi = &case.psi;
    let ok = lex_sign(psi.p + ex(2), psi.q, psi.w) < 0;
    entry(trace, CIRCLE_GUARD, Some(ok), Citation::CircleGuard);
    if !ok {
        guards.push(format!("{CIRCLE_GUARD} fails for psi = {psi}; circle verdicts need it"));
    }
    Some(ok)
}

/// `#J(r) · ψ(r)^{-γ} · f(ψ(r))`, as a function of `r`.
fn cover_term(sys: &ResonantSystem, psi: &ExtendedLogPower, f: &ExtendedLogPower) -> Result<ExtendedLogPower, FuncError> {
    sys.card_function().mul(&psi.pow(-sys.gamma))?.mul(&compose_f_psi(f, psi)?)
}

/// Classifies `Σ_n #J(n) ψ(u_n)^{-γ} f(ψ(u_n))`.
pub fn natural_cover_sum(sys: &ResonantSystem, psi: &ExtendedLogPower, f: &ExtendedLogPower) -> Result<SeriesVerdict, FuncError> {
    condense_over_u(&cover_term(sys, psi, f)?, &sys.sequence(), ex(0))
}

/// Lebesgue cover sum: [`natural_cover_sum`] with `f = x^{δ}`.
pub fn lebesgue_cover_sum(sys: &ResonantSystem, psi: &ExtendedLogPower) -> Result<SeriesVerdict, FuncError> {
    natural_cover_sum(sys, psi, &ExtendedLogPower::dim_power(1.0, sys.delta))
}

/// For lines, `ρ = r^{-3} ω(r)`: picks a slower `ω` when `ln r` loses a divergent sum
/// `Σ base(u_n)/ω(u_n)` whose `base` already diverges.
fn lines_rho(sys: &ResonantSystem, base: &ExtendedLogPower) -> Option<ExtendedLogPower> {
    if sys.kind != SystemKind::Lines21 || !base.p.is_integer() || base.p != ex(0) {
        return None;
    }
    let m1 = ex(-1);
    let (a, b) = if base.q > m1 {
        if base.q > ex(0) {
            return None;
        }
        ((base.q + ex(1)) / ex(2), ex(0))
    } else if base.q == m1 && base.w > m1 {
        (ex(0), (base.w + ex(1)) / ex(2))
    } else {
        return None;
    };
    ExtendedLogPower::new(sys.rho.coeff, ex(-3), a, b).ok()
}

/// Lebesgue measure of `Λ(ψ)`: zero by the natural cover, positive or full by ubiquity.
pub fn lebesgue_verdict(case: &Case) -> LebesgueReport {
    let (mut trace, mut guards) = (Vec::new(), Vec::new());
    let verdict = lebesgue_inner(case, &mut trace, &mut guards);
    LebesgueReport { verdict, trace, guards }
}

fn lebesgue_inner(case: &Case, trace: &mut Vec<TraceEntry>, guards: &mut Vec<String>) -> Lebesgue {
    let sys = &case.system;
    let psi = &case.psi;
    let u = sys.sequence();
    if circle_guard(case, trace, guards) == Some(false) {
        return Lebesgue::Unknown;
    }
    if entry(trace, "psi decreases to zero", Some(psi.eventually_decreasing()), Citation::Monotonicity) == Some(false) {
        return Lebesgue::Unknown;
    }
    let cover = match lebesgue_cover_sum(sys, psi) {
        Ok(v) => v,
        Err(e) => {
            guards.push(format!("natural cover sum: {e}"));
            entry(trace, "natural cover sum classifiable", None, Citation::NaturalCover);
            return Lebesgue::Unknown;
        }
    };
    if cover.converges() {
        entry(trace, "sum of #J(n) psi(u_n)^delta-gamma converges", Some(true), Citation::NaturalCover);
        return Lebesgue::Zero;
    }
    entry(trace, "sum of #J(n) psi(u_n)^delta-gamma converges", Some(false), Citation::NaturalCover);

    let dg = sys.delta - sys.gamma;
    let ratio_sum = |rho: &ExtendedLogPower| -> Result<SeriesVerdict, FuncError> {
        let term = psi.mul(&rho.recip())?.pow(dg);
        condense_over_u(&term, &u, ex(0))
    };
    let mut rho = sys.rho.clone();
    let mut div = match ratio_sum(&rho) {
        Ok(v) => v.class,
        Err(_) => SeriesClass::Unknown,
    };
    if div != SeriesClass::Diverges {
        let base = sys.card_function().mul(&psi.pow(dg)).ok();
        if let Some(alt) = base.as_ref().and_then(|b| lines_rho(sys, b)) {
            if ratio_sum(&alt).map(|v| v.diverges()).unwrap_or(false) {
                guards.push(format!("omega re-chosen: rho = {alt}"));
                rho = alt;
                div = SeriesClass::Diverges;
            }
        }
    }
    let div_ok = match div {
        SeriesClass::Diverges => Some(true),
        SeriesClass::Converges => Some(false),
        SeriesClass::Unknown => None,
    };
    if entry(trace, format!("sum of (psi/rho)(u_n)^delta-gamma diverges, rho = {rho}"), div_ok, Citation::UbiquityLebesgue) != Some(true) {
        return Lebesgue::Unknown;
    }
    let indep = if sys.gamma == sys.delta {
        entry(trace, "gamma = delta", Some(true), Citation::EqualDimensions)
    } else {
        let reg = is_u_regular(&rho, &u).regular || is_u_regular(psi, &u).regular;
        entry(trace, "psi or rho is u-regular", Some(reg), Citation::RegularityShortcut)
    };
    if indep != Some(true) {
        return Lebesgue::Unknown;
    }
    match case.ubiquity {
        s if s.is_local() => {
            entry(trace, format!("local ubiquity ({s:?})"), Some(true), Citation::Ubiquity);
            Lebesgue::Full
        }
        UbiquityStatus::GlobalOnly => {
            entry(trace, "local ubiquity", Some(false), Citation::Ubiquity);
            entry(trace, "global ubiquity", Some(true), Citation::Ubiquity);
            Lebesgue::Positive
        }
        _ => {
            entry(trace, "ubiquity", Some(false), Citation::Ubiquity);
            Lebesgue::Unknown
        }
    }
}

/// Checks the three requirements on `f`; `Some(false)` routes to `NotApplicable`.
pub(crate) fn f_hypotheses(f: &ExtendedLogPower, gamma: Exp, delta: Exp, trace: &mut Vec<TraceEntry>) -> Option<bool> {
    if f.var != Variable::Small || f.p <= ex(0) {
        return entry(trace, "f is a dimension function x^s (log factors allowed), s > 0", Some(false), Citation::DimensionFunction);
    }
    // x^{p-δ}(ln 1/x)^q … → ∞ as x → 0 iff (δ − p, q, w) is lexicographically positive.
    let big = lex_sign(delta - f.p, f.q, f.w) > 0;
    entry(trace, "x^-delta f(x) -> infinity as x -> 0", Some(big), Citation::DimensionFunction);
    entry(trace, "x^-delta f(x) is decreasing", Some(big), Citation::DimensionFunction);
    let inc = lex_sign(gamma - f.p, f.q, f.w) < 0;
    entry(trace, "x^-gamma f(x) is increasing", Some(inc), Citation::DimensionFunction);
    Some(big && inc)
}

/// Hausdorff `f`-measure of `Λ(ψ)`.
pub fn hausdorff_verdict(case: &Case, f: &ExtendedLogPower) -> HausdorffReport {
    let (mut trace, mut guards) = (Vec::new(), Vec::new());
    let (verdict, g_class) = hausdorff_inner(case, f, &mut trace, &mut guards);
    HausdorffReport { verdict, g_class, trace, guards }
}

fn hausdorff_inner(
    case: &Case,
    f: &ExtendedLogPower,
    trace: &mut Vec<TraceEntry>,
    guards: &mut Vec<String>,
) -> (Hausdorff, Option<GClass>) {
    let sys = &case.system;
    let psi = &case.psi;
    let u = sys.sequence();
    if circle_guard(case, trace, guards) == Some(false) {
        return (Hausdorff::Unknown, None);
    }
    if sys.gamma == sys.delta {
        entry(trace, "gamma < delta", Some(false), Citation::EqualDimensions);
        guards.push("gamma = delta: use the Lebesgue verdict".into());
        return (Hausdorff::NotApplicable, None);
    }
    if f_hypotheses(f, sys.gamma, sys.delta, trace) != Some(true) {
        guards.push("f fails the dimension-function requirements".into());
        return (Hausdorff::NotApplicable, None);
    }
    if entry(trace, "psi decreases to zero", Some(psi.eventually_decreasing()), Citation::Monotonicity) == Some(false) {
        return (Hausdorff::Unknown, None);
    }
    let base = match cover_term(sys, psi, f) {
        Ok(t) => t,
        Err(e) => {
            guards.push(format!("f(psi) not representable: {e}"));
            entry(trace, "natural cover sum classifiable", None, Citation::NaturalCover);
            return (Hausdorff::Unknown, None);
        }
    };
    let cover = condense_over_u(&base, &u, ex(0)).map(|v| v.class).unwrap_or(SeriesClass::Unknown);
    if cover == SeriesClass::Converges {
        entry(trace, "sum of #J(n) psi(u_n)^-gamma f(psi(u_n)) converges", Some(true), Citation::NaturalCover);
        return (Hausdorff::Zero, None);
    }
    entry(trace, "sum of #J(n) psi(u_n)^-gamma f(psi(u_n)) converges", Some(false), Citation::NaturalCover);
    if !case.ubiquity.is_local() {
        entry(trace, "local ubiquity", Some(false), Citation::Ubiquity);
        return (Hausdorff::Unknown, None);
    }
    entry(trace, format!("local ubiquity ({:?})", case.ubiquity), Some(true), Citation::Ubiquity);

    let mut rho = sys.rho.clone();
    let g_of = |rho: &ExtendedLogPower| -> Option<(GClass, ExtendedLogPower)> {
        let g = g_function(psi, rho, f, sys.gamma, sys.delta).ok()?;
        let class = limsup_g(psi, rho, f, sys.gamma, sys.delta, &u).ok()?;
        Some((class, g))
    };
    let Some((mut class, mut g)) = g_of(&rho) else {
        entry(trace, "g = f(psi) psi^-gamma rho^(gamma-delta) representable", None, Citation::UbiquityHausdorff);
        return (Hausdorff::Unknown, None);
    };
    if class == GClass::Zero && !condense_over_u(&g, &u, ex(0)).map(|v| v.diverges()).unwrap_or(false) {
        if let Some(alt) = lines_rho(sys, &base) {
            if let Some((c2, g2)) = g_of(&alt) {
                if condense_over_u(&g2, &u, ex(0)).map(|v| v.diverges()).unwrap_or(false) {
                    guards.push(format!("omega re-chosen: rho = {alt}"));
                    rho = alt;
                    class = c2;
                    g = g2;
                }
            }
        }
    }
    match class {
        GClass::FinitePositive(_) | GClass::Infinite => {
            entry(trace, format!("G = limsup g(u_n) > 0 ({class:?})"), Some(true), Citation::UbiquityHausdorff);
            (Hausdorff::Infinite, Some(class))
        }
        GClass::Zero => {
            entry(trace, "G = limsup g(u_n) > 0", Some(false), Citation::UbiquityHausdorff);
            let rho_reg = is_u_regular(&rho, &u).regular;
            let regular = if rho_reg {
                entry(trace, format!("rho = {rho} is u-regular"), Some(true), Citation::UbiquityHausdorff)
            } else {
                entry(trace, "rho is u-regular", Some(false), Citation::UbiquityHausdorff);
                let psi_reg = is_u_regular(psi, &u).regular;
                entry(trace, "psi is u-regular", Some(psi_reg), Citation::GrowthCondition);
                let growth = f.p > sys.gamma;
                entry(trace, "f(l1 x) <= l2 f(x) (l1)^gamma for some l1, l2 < 1", Some(growth), Citation::GrowthCondition);
                Some(psi_reg && growth)
            };
            if regular != Some(true) {
                return (Hausdorff::Unknown, Some(class));
            }
            let div = condense_over_u(&g, &u, ex(0)).map(|v| v.class).unwrap_or(SeriesClass::Unknown);
            let ok = match div {
                SeriesClass::Diverges => Some(true),
                SeriesClass::Converges => Some(false),
                SeriesClass::Unknown => None,
            };
            entry(trace, format!("sum of g(u_n) diverges, g = {g}"), ok, Citation::UbiquityHausdorff);
            if ok == Some(true) {
                (Hausdorff::Infinite, Some(class))
            } else {
                (Hausdorff::Unknown, Some(class))
            }
        }
    }
}

/// `σ = lim ln ρ(u_n) / ln ψ(u_n)`, `d = γ + σ(δ − γ)` and whether `H^d = ∞` is established.
pub fn critical_dimension(case: &Case) -> Result<DimensionReport, LawError> {
    let sys = &case.system;
    let psi = &case.psi;
    let mut trace = Vec::new();
    if psi.p == ex(0) {
        return Err(LawError::SigmaUndefined);
    }
    let sigma = sys.rho.p / psi.p;
    let ratio = psi.mul(&sys.rho.recip())?;
    let tends_to_zero = ratio.limit() == LimitClass::Zero;
    let dg = sys.delta - sys.gamma;
    let (d, capped) = if sys.gamma == sys.delta || !tends_to_zero {
        entry(&mut trace, "psi(u_n)/rho(u_n) -> 0 and gamma < delta", Some(false), Citation::DimensionFormula);
        (sys.delta, true)
    } else {
        entry(&mut trace, "psi(u_n)/rho(u_n) -> 0 and gamma < delta", Some(true), Citation::DimensionFormula);
        let d = sys.gamma + sigma * dg;
        (if d > sys.delta { sys.delta } else { d }, false)
    };
    let mut at_d = AtDimension::Unknown;
    if !capped && case.ubiquity.is_local() {
        // ρ/ψ^σ has no power factor left; bounded iff its log exponents are non-positive.
        let lead = sys.rho.mul(&psi.pow(-sigma))?;
        let bounded = lead.limit() != LimitClass::Infinite;
        entry(&mut trace, "liminf rho(u_n)/psi(u_n)^sigma < infinity", Some(bounded), Citation::DimensionFormula);
        if bounded {
            at_d = AtDimension::Infinite;
        } else if d > sys.gamma {
            let f = ExtendedLogPower::dim_power(1.0, d);
            let h = hausdorff_verdict(case, &f);
            if h.verdict == Hausdorff::Infinite {
                at_d = AtDimension::Infinite;
            }
            trace.extend(h.trace);
        }
    }
    Ok(DimensionReport { sigma, d, hausdorff_at_d: at_d, capped, trace })
}

/// Lebesgue verdict, Hausdorff verdict (when `f` is given) and dimension for one case.
pub fn classify(case: &Case) -> Verdict {
    let leb = lebesgue_verdict(case);
    let mut trace = leb.trace;
    let mut guards = leb.guards;
    let hausdorff = case.f.as_ref().map(|f| {
        let h = hausdorff_verdict(case, f);
        trace.extend(h.trace);
        for g in h.guards {
            if !guards.contains(&g) {
                guards.push(g);
            }
        }
        h.verdict
    });
    let circle_ok = case.system.kind != SystemKind::Circle || lex_sign(case.psi.p + ex(2), case.psi.q, case.psi.w) < 0;
    let dim = if circle_ok { critical_dimension(case).ok() } else { None };
    if let Some(dr) = &dim {
        trace.extend(dr.trace.iter().cloned());
    }
    Verdict {
        system: case.system.kind.to_string(),
        psi: case.psi.to_string(),
        f: case.f.as_ref().map(|f| f.to_string()),
        lebesgue: leb.verdict,
        hausdorff,
        dimension: dim.as_ref().map(|d| d.d),
        sigma: dim.as_ref().map(|d| d.sigma),
        hausdorff_at_d: dim.as_ref().map(|d| d.hausdorff_at_d),
        trace,
        guards,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(s: &str) -> ExtendedLogPower {
        s.parse().unwrap()
    }

    fn rationals(psi: &str, f: Option<&str>) -> Case {
        Case::new(ResonantSystem::rationals(6.0), lit(psi), f.map(lit))
    }

    #[test]
    fn khintchine_both_branches() {
        assert_eq!(lebesgue_verdict(&rationals("r^-2", None)).verdict, Lebesgue::Full);
        let z = lebesgue_verdict(&rationals("r^-2 * logr^-2", None));
        assert_eq!(z.verdict, Lebesgue::Zero);
        assert_eq!(z.trace.last().unwrap().tag, Citation::NaturalCover);
    }

    #[test]
    fn degrades_with_ubiquity() {
        let c = rationals("r^-2", None);
        assert_eq!(lebesgue_verdict(&c.clone().with_ubiquity(UbiquityStatus::GlobalOnly)).verdict, Lebesgue::Positive);
        assert_eq!(lebesgue_verdict(&c.with_ubiquity(UbiquityStatus::None)).verdict, Lebesgue::Unknown);
    }

    #[test]
    fn jarnik_pair() {
        let f = "x^2/3 * logx^1/5";
        let h1 = hausdorff_verdict(&rationals("r^-3 * logr^-9/5", None), &lit(f));
        assert_eq!(h1.verdict, Hausdorff::Infinite, "{:?}", h1.trace);
        let h2 = hausdorff_verdict(&rationals("r^-3 * logr^-21/10", None), &lit(f));
        assert_eq!(h2.verdict, Hausdorff::Zero);
    }

    #[test]
    fn f_equal_to_delta_is_not_applicable() {
        let h = hausdorff_verdict(&rationals("r^-3", None), &lit("x^1"));
        assert_eq!(h.verdict, Hausdorff::NotApplicable);
    }

    #[test]
    fn dimension_values() {
        let d = critical_dimension(&rationals("r^-3", None)).unwrap();
        assert_eq!((d.sigma, d.d, d.hausdorff_at_d), (Exp::new(2, 3), Exp::new(2, 3), AtDimension::Infinite));
        let lines = Case::new(ResonantSystem::new(SystemKind::Lines21, 2.0), lit("r^-4"), None);
        assert_eq!(critical_dimension(&lines).unwrap().d, Exp::new(7, 4));
        assert_eq!(critical_dimension(&rationals("logr^-2", None)), Err(LawError::SigmaUndefined));
        let cap = critical_dimension(&rationals("r^-1", None)).unwrap();
        assert!(cap.capped);
        assert_eq!(cap.d, ex(1));
    }

    #[test]
    fn circle_guard_triggers() {
        let sys = ResonantSystem::new(SystemKind::Circle, 4.0);
        let v = classify(&Case::new(sys.clone(), lit("r^-2"), Some(lit("x^1/2"))));
        assert_eq!(v.lebesgue, Lebesgue::Unknown);
        assert_eq!(v.hausdorff, Some(Hausdorff::Unknown));
        assert!(v.guards.iter().any(|g| g.contains("r^2 psi(r)")));
        let v = classify(&Case::new(sys, lit("r^-3"), Some(lit("x^1/3"))));
        assert_eq!(v.dimension, Some(Exp::new(1, 3)));
        assert_eq!(v.hausdorff, Some(Hausdorff::Infinite));
    }

    #[test]
    fn lines_omega_adapts() {
        let sys = ResonantSystem::new(SystemKind::Lines21, 2.0);
        let v = lebesgue_verdict(&Case::new(sys, lit("r^-3 * logr^-1"), None));
        assert_eq!(v.verdict, Lebesgue::Full, "{:?}", v.trace);
        assert!(v.guards.iter().any(|g| g.contains("omega")));
    }
}
