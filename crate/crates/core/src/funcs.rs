//! Functions of the shape `c · r^p · (ln r)^q · (ln ln r)^w` and the series built from them.
//!
//! Approximating functions, ubiquity functions, dimension functions and every series term
//! used by the verdict engine live in this family. Exponents are exact rationals, so series
//! classification is decided symbolically.
//!
//! Dimension functions are read near zero: a [`Variable::Small`] value stands for
//! `c · x^p · (ln(1/x))^q · (ln ln(1/x))^w`.

use std::fmt;
use std::str::FromStr;

use num::rational::Ratio;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational exponent.
pub type Exp = Ratio<i64>;

/// Smallest admissible domain bound; keeps `ln ln r > 1`.
pub const MIN_R_MIN: f64 = 16.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuncError {
    #[error("coefficient must be positive and finite, got {0}")]
    BadCoefficient(f64),
    #[error("argument {arg} outside the domain (bound {bound})")]
    Domain { arg: f64, bound: f64 },
    #[error("composition leaves the representable family: {0}")]
    Composition(String),
    #[error("mixed variables: {0}")]
    Variable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("sequence base must exceed 1, got {0}")]
    BadBase(f64),
}

/// Which end of the axis the function is read at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variable {
    /// `r → ∞`, logs of `r`.
    Large,
    /// `x → 0`, logs of `1/x`.
    Small,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ExtendedLogPower {
    pub coeff: f64,
    pub p: Exp,
    pub q: Exp,
    pub w: Exp,
    pub r_min: f64,
    pub var: Variable,
    /// Set when the value only agrees with its source up to a bounded factor.
    pub asymptotic: bool,
}

/// Limit of a function along its variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LimitClass {
    Zero,
    Finite(f64),
    Infinite,
}

fn ex(n: i64) -> Exp {
    Exp::from_integer(n)
}

fn to_f(e: Exp) -> f64 {
    e.to_f64().unwrap_or(f64::NAN)
}

/// Sign of the lexicographic leading term of `(p, q, w)`.
pub fn lex_sign(p: Exp, q: Exp, w: Exp) -> i32 {
    for e in [p, q, w] {
        if e.is_positive() {
            return 1;
        }
        if e.is_negative() {
            return -1;
        }
    }
    0
}

impl ExtendedLogPower {
    pub fn new(coeff: f64, p: Exp, q: Exp, w: Exp) -> Result<Self, FuncError> {
        Self::with_var(coeff, p, q, w, Variable::Large)
    }

    /// A dimension function `c · x^p · (ln 1/x)^q · (ln ln 1/x)^w`.
    pub fn dimension(coeff: f64, p: Exp, q: Exp, w: Exp) -> Result<Self, FuncError> {
        Self::with_var(coeff, p, q, w, Variable::Small)
    }

    pub fn with_var(coeff: f64, p: Exp, q: Exp, w: Exp, var: Variable) -> Result<Self, FuncError> {
        if !(coeff > 0.0 && coeff.is_finite()) {
            return Err(FuncError::BadCoefficient(coeff));
        }
        Ok(Self { coeff, p, q, w, r_min: MIN_R_MIN, var, asymptotic: false })
    }

    /// `c · r^p`.
    pub fn power(coeff: f64, p: Exp) -> Self {
        Self::new(coeff, p, Exp::zero(), Exp::zero()).expect("positive coefficient")
    }

    /// `c · x^p` read near zero.
    pub fn dim_power(coeff: f64, p: Exp) -> Self {
        Self::dimension(coeff, p, Exp::zero(), Exp::zero()).expect("positive coefficient")
    }

    pub fn with_r_min(mut self, r_min: f64) -> Self {
        self.r_min = r_min.max(MIN_R_MIN);
        self
    }

    pub fn has_logs(&self) -> bool {
        !self.q.is_zero() || !self.w.is_zero()
    }

    /// Lower domain bound in the function's own variable scale (for `Small`, an upper bound on `x`).
    pub fn domain_bound(&self) -> f64 {
        match (self.var, self.has_logs()) {
            (Variable::Large, true) => self.r_min,
            (Variable::Large, false) => 0.0,
            (Variable::Small, true) => 1.0 / self.r_min,
            (Variable::Small, false) => f64::INFINITY,
        }
    }

    fn check_domain(&self, r: f64) -> Result<(), FuncError> {
        let bound = self.domain_bound();
        let ok = match self.var {
            Variable::Large => r > 0.0 && r >= bound,
            Variable::Small => r > 0.0 && r <= bound,
        };
        if ok && r.is_finite() {
            Ok(())
        } else {
            Err(FuncError::Domain { arg: r, bound })
        }
    }

    /// `ln h(r)`; safe for arguments whose value would overflow.
    pub fn ln_eval(&self, r: f64) -> Result<f64, FuncError> {
        self.check_domain(r)?;
        let l = match self.var {
            Variable::Large => r.ln(),
            Variable::Small => -r.ln(),
        };
        let mut s = self.coeff.ln();
        match self.var {
            Variable::Large => s += to_f(self.p) * l,
            Variable::Small => s += to_f(self.p) * r.ln(),
        }
        if !self.q.is_zero() {
            s += to_f(self.q) * l.ln();
        }
        if !self.w.is_zero() {
            s += to_f(self.w) * l.ln().ln();
        }
        Ok(s)
    }

    /// Same as [`ln_eval`](Self::ln_eval) but takes `ln r` directly, for radii beyond `f64`.
    pub fn ln_eval_at_ln(&self, ln_r: f64) -> f64 {
        let l = match self.var {
            Variable::Large => ln_r,
            Variable::Small => -ln_r,
        };
        let mut s = self.coeff.ln() + to_f(self.p) * ln_r;
        if !self.q.is_zero() {
            s += to_f(self.q) * l.ln();
        }
        if !self.w.is_zero() {
            s += to_f(self.w) * l.ln().ln();
        }
        s
    }

    pub fn eval(&self, r: f64) -> Result<f64, FuncError> {
        self.check_domain(r)?;
        let l = match self.var {
            Variable::Large => r.ln(),
            Variable::Small => -r.ln(),
        };
        let mut v = self.coeff * pow_exp(r, self.p);
        if !self.q.is_zero() {
            v *= pow_exp(l, self.q);
        }
        if !self.w.is_zero() {
            v *= pow_exp(l.ln(), self.w);
        }
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Ok(self.ln_eval(r)?.exp())
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FuncError> {
        if self.var != other.var {
            return Err(FuncError::Variable("cannot multiply functions of different variables".into()));
        }
        Ok(Self {
            coeff: self.coeff * other.coeff,
            p: self.p + other.p,
            q: self.q + other.q,
            w: self.w + other.w,
            r_min: self.r_min.max(other.r_min),
            var: self.var,
            asymptotic: self.asymptotic || other.asymptotic,
        })
    }

    /// `h^e`.
    pub fn pow(&self, e: Exp) -> Self {
        Self {
            coeff: self.coeff.powf(to_f(e)),
            p: self.p * e,
            q: self.q * e,
            w: self.w * e,
            ..self.clone()
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { coeff: self.coeff * c, ..self.clone() }
    }

    pub fn recip(&self) -> Self {
        self.pow(ex(-1))
    }

    /// `r ↦ r^p · h(r)`.
    pub fn times_power(&self, p: Exp) -> Self {
        Self { p: self.p + p, ..self.clone() }
    }

    /// Re-read a `Small` function at `x = 1/r` (or the converse).
    pub fn flip_variable(&self) -> Self {
        Self {
            p: -self.p,
            var: match self.var {
                Variable::Large => Variable::Small,
                Variable::Small => Variable::Large,
            },
            ..self.clone()
        }
    }

    /// Limit along the variable (`r → ∞` or `x → 0`).
    pub fn limit(&self) -> LimitClass {
        let sp = match self.var {
            Variable::Large => self.p,
            Variable::Small => -self.p,
        };
        match lex_sign(sp, self.q, self.w) {
            1 => LimitClass::Infinite,
            -1 => LimitClass::Zero,
            _ => LimitClass::Finite(self.coeff),
        }
    }

    /// Eventually strictly decreasing in `r` (`Large`) or eventually strictly increasing in `x` (`Small`).
    pub fn eventually_decreasing(&self) -> bool {
        let sp = match self.var {
            Variable::Large => self.p,
            Variable::Small => -self.p,
        };
        lex_sign(sp, self.q, self.w) < 0
    }

    /// Radius beyond which `h` is strictly monotone (decreasing in `r`, or increasing in `x` for
    /// `Small`); `None` when not eventually so. For `Small` the witness is an upper bound on `x`.
    pub fn monotone_from(&self) -> Option<f64> {
        if !self.eventually_decreasing() {
            return None;
        }
        // d/dt ln h(e^t) = p' + q/t + w/(t ln t) with t = ln r; strict negativity once the
        // log terms are dominated by the leading one.
        let sp = match self.var {
            Variable::Large => self.p,
            Variable::Small => -self.p,
        };
        let (pa, qa, wa) = (to_f(sp), to_f(self.q), to_f(self.w));
        let ok = |t: f64| -> bool {
            let lt = t.ln();
            if pa < 0.0 {
                qa.abs() / t + wa.abs() / (t * lt) < pa.abs()
            } else if qa < 0.0 {
                wa.abs() / lt < qa.abs()
            } else {
                true
            }
        };
        let mut t = self.r_min.max(MIN_R_MIN).ln();
        while !ok(t) {
            t *= 2.0;
        }
        let r = t.exp();
        Some(match self.var {
            Variable::Large => r,
            Variable::Small => 1.0 / r,
        })
    }

    /// Series literal, `c * r^p * logr^q * loglogr^w` (or the `x` form).
    pub fn literal(&self) -> String {
        self.to_string()
    }
}

fn pow_exp(base: f64, e: Exp) -> f64 {
    if e.is_integer() {
        let n = *e.numer();
        if n.abs() <= i32::MAX as i64 {
            return base.powi(n as i32);
        }
    }
    base.powf(to_f(e))
}

fn fmt_exp(e: &Exp) -> String {
    if e.is_integer() {
        format!("{}", e.numer())
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

impl fmt::Display for ExtendedLogPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (v, l, ll) = match self.var {
            Variable::Large => ("r", "logr", "loglogr"),
            Variable::Small => ("x", "logx", "loglogx"),
        };
        write!(f, "{}", self.coeff)?;
        for (name, e) in [(v, &self.p), (l, &self.q), (ll, &self.w)] {
            if !e.is_zero() {
                write!(f, " * {}^{}", name, fmt_exp(e))?;
            }
        }
        if self.p.is_zero() && self.q.is_zero() && self.w.is_zero() && self.var == Variable::Small {
            write!(f, " * x^0")?;
        }
        Ok(())
    }
}

impl From<ExtendedLogPower> for String {
    fn from(h: ExtendedLogPower) -> String {
        h.to_string()
    }
}

impl TryFrom<String> for ExtendedLogPower {
    type Error = FuncError;
    fn try_from(s: String) -> Result<Self, FuncError> {
        s.parse()
    }
}

/// Parses `-3`, `2/3`, `-1.5`, `(-2/3)`.
pub fn parse_exp(s: &str) -> Result<Exp, FuncError> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
    let bad = || FuncError::Parse(format!("bad exponent `{s}`"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((a, b)) = t.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Exp::new(a, b));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if int_part.len() + frac_part.len() > 15 {
        return Err(FuncError::Parse(format!("exponent `{s}` has too many digits")));
    }
    let digits = format!("{int_part}{frac_part}");
    let num: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
    let den = 10i64.pow(frac_part.len() as u32);
    let e = Exp::new(num, den);
    Ok(if neg { -e } else { e })
}

impl FromStr for ExtendedLogPower {
    type Err = FuncError;

    fn from_str(s: &str) -> Result<Self, FuncError> {
        let mut coeff = 1.0f64;
        let (mut p, mut q, mut w) = (Exp::zero(), Exp::zero(), Exp::zero());
        let mut var: Option<Variable> = None;
        let mut set_var = |v: Variable| -> Result<(), FuncError> {
            match var {
                Some(old) if old != v => Err(FuncError::Parse(format!("`{s}` mixes r and x factors"))),
                _ => {
                    var = Some(v);
                    Ok(())
                }
            }
        };
        if s.trim().is_empty() {
            return Err(FuncError::Parse("empty function literal".into()));
        }
        for raw in s.split('*') {
            let tok = raw.trim();
            if tok.is_empty() {
                return Err(FuncError::Parse(format!("empty factor in `{s}`")));
            }
            let (base, e) = match tok.split_once('^') {
                Some((b, e)) => (b.trim(), Some(parse_exp(e)?)),
                None => (tok, None),
            };
            let e1 = e.unwrap_or_else(Exp::one);
            match base {
                "r" => {
                    set_var(Variable::Large)?;
                    p += e1;
                }
                "logr" => {
                    set_var(Variable::Large)?;
                    q += e1;
                }
                "loglogr" => {
                    set_var(Variable::Large)?;
                    w += e1;
                }
                "x" => {
                    set_var(Variable::Small)?;
                    p += e1;
                }
                "logx" => {
                    set_var(Variable::Small)?;
                    q += e1;
                }
                "loglogx" => {
                    set_var(Variable::Small)?;
                    w += e1;
                }
                other => {
                    if e.is_some() {
                        return Err(FuncError::Parse(format!("unknown factor `{tok}`")));
                    }
                    let c: f64 = other
                        .parse()
                        .map_err(|_| FuncError::Parse(format!("unknown factor `{tok}`")))?;
                    coeff *= c;
                }
            }
        }
        Self::with_var(coeff, p, q, w, var.unwrap_or(Variable::Large))
            .map_err(|e| FuncError::Parse(e.to_string()))
    }
}

/// `f(ψ(r))` up to a bounded factor, as a function of `r`.
///
/// `f` must be a dimension function (read near zero, `p > 0`) and `ψ` must decrease to zero.
/// The result is exact when `f` carries no log factors.
pub fn compose_f_psi(f: &ExtendedLogPower, psi: &ExtendedLogPower) -> Result<ExtendedLogPower, FuncError> {
    if f.var != Variable::Small {
        return Err(FuncError::Variable("f must be a dimension function in x".into()));
    }
    if psi.var != Variable::Large {
        return Err(FuncError::Variable("psi must be a function of r".into()));
    }
    if f.p.is_zero() {
        return Err(FuncError::Composition("f has zero power exponent".into()));
    }
    if !f.p.is_positive() {
        return Err(FuncError::Composition("f must have a positive power exponent".into()));
    }
    if !psi.eventually_decreasing() {
        return Err(FuncError::Composition("psi does not decrease to zero".into()));
    }
    let fp = f.p;
    let base_coeff = f.coeff * psi.coeff.powf(to_f(fp));
    let asymptotic = f.has_logs() || psi.asymptotic;
    let out = if psi.p.is_negative() {
        // ln(1/ψ) ~ |p_ψ| ln r and ln ln(1/ψ) ~ ln ln r.
        let a = to_f(-psi.p);
        ExtendedLogPower {
            coeff: base_coeff * a.powf(to_f(f.q)),
            p: fp * psi.p,
            q: fp * psi.q + f.q,
            w: fp * psi.w + f.w,
            r_min: psi.r_min,
            var: Variable::Large,
            asymptotic,
        }
    } else if psi.q.is_negative() {
        // ln(1/ψ) ~ |q_ψ| ln ln r; a further log would need ln ln ln r.
        if !f.w.is_zero() {
            return Err(FuncError::Composition("f log-log factor composes to ln ln ln r".into()));
        }
        let b = to_f(-psi.q);
        ExtendedLogPower {
            coeff: base_coeff * b.powf(to_f(f.q)),
            p: Exp::zero(),
            q: fp * psi.q,
            w: fp * psi.w + f.q,
            r_min: psi.r_min,
            var: Variable::Large,
            asymptotic,
        }
    } else {
        if f.has_logs() {
            return Err(FuncError::Composition("f log factors compose to ln ln ln r".into()));
        }
        ExtendedLogPower {
            coeff: base_coeff,
            p: Exp::zero(),
            q: Exp::zero(),
            w: fp * psi.w,
            r_min: psi.r_min,
            var: Variable::Large,
            asymptotic,
        }
    };
    Ok(out)
}

/// `u_n = k^n`, `l_n = k^{n-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricSequence {
    pub k: f64,
    pub n_max: u32,
}

impl GeometricSequence {
    pub fn new(k: f64, n_max: u32) -> Result<Self, FuncError> {
        if !(k > 1.0 && k.is_finite()) {
            return Err(FuncError::BadBase(k));
        }
        Ok(Self { k, n_max: n_max.max(1) })
    }

    pub fn u(&self, n: u32) -> f64 {
        self.k.powi(n as i32)
    }

    pub fn l(&self, n: u32) -> f64 {
        self.k.powi(n as i32 - 1)
    }

    pub fn ln_u(&self, n: u32) -> f64 {
        n as f64 * self.k.ln()
    }

    /// Exact `u_n` when `k` is an integer and the power fits.
    pub fn u_int(&self, n: u32) -> Option<u128> {
        if self.k.fract() != 0.0 {
            return None;
        }
        (self.k as u128).checked_pow(n)
    }

    /// `(floor(l_n), floor(u_n))`: integer weights in the window satisfy `lo < β ≤ hi`.
    pub fn window(&self, n: u32) -> (u128, u128) {
        match (self.u_int(n.saturating_sub(1)), self.u_int(n)) {
            (Some(a), Some(b)) if n >= 1 => (a, b),
            _ => (self.l(n).floor() as u128, self.u(n).floor() as u128),
        }
    }

    /// First index at which `u_n ≥ r`.
    pub fn first_index_at_least(&self, r: f64) -> u32 {
        let mut n = 1;
        while self.u(n) < r {
            n += 1;
        }
        n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesClass {
    Converges,
    Diverges,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesMethod {
    SymbolicRule,
    PartialSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub class: SeriesClass,
    pub method: SeriesMethod,
    /// `(N, S(N))` pairs for partial-sum verdicts.
    pub evidence: Vec<(f64, f64)>,
}

impl SeriesVerdict {
    fn symbolic(converges: bool) -> Self {
        Self {
            class: if converges { SeriesClass::Converges } else { SeriesClass::Diverges },
            method: SeriesMethod::SymbolicRule,
            evidence: Vec::new(),
        }
    }

    pub fn converges(&self) -> bool {
        self.class == SeriesClass::Converges
    }

    pub fn diverges(&self) -> bool {
        self.class == SeriesClass::Diverges
    }
}

/// Convergence of `Σ_r r^p (ln r)^q (ln ln r)^w`.
fn log_power_rule(p: Exp, q: Exp, w: Exp) -> bool {
    let m1 = ex(-1);
    p < m1 || (p == m1 && (q < m1 || (q == m1 && w < m1)))
}

/// Classifies `Σ_r term(r)` by the exact exponent rule.
pub fn classify_series(term: &ExtendedLogPower) -> SeriesVerdict {
    SeriesVerdict::symbolic(log_power_rule(term.p, term.q, term.w))
}

/// Half-decade checkpoints from `10^3` to `10^6`.
pub const PARTIAL_SUM_CHECKPOINTS: [u64; 7] = [1_000, 3_162, 10_000, 31_623, 100_000, 316_228, 1_000_000];

/// Estimated growth exponents below this in magnitude leave the power undecided.
pub const PARTIAL_SUM_MARGIN: f64 = 0.05;

/// Heuristic verdict for a tabulated term from partial sums at fixed checkpoints.
///
/// Block sums between consecutive checkpoints are fitted as
/// `ln(S_{j+1}/S_j) = c + q·ln(ln N_{j+1}/ln N_j)`. The intercept estimates `(p+1)·ln s` for a
/// block spacing `s`, so its sign decides the verdict. A flat intercept falls back on the fitted
/// log exponent against `-1`. Non-positive blocks and undecided fits give `Unknown`.
pub fn classify_partial_sums<F: Fn(f64) -> f64>(term: F, start: u64) -> SeriesVerdict {
    let cps = PARTIAL_SUM_CHECKPOINTS;
    let mut evidence = Vec::with_capacity(cps.len());
    let mut blocks = Vec::with_capacity(cps.len() - 1);
    let (mut total, mut total_comp) = (0.0f64, 0.0f64);
    let mut r = start.max(1);
    for (j, &n) in cps.iter().enumerate() {
        let (mut block, mut comp) = (0.0f64, 0.0f64);
        while r <= n {
            let y = term(r as f64) - comp;
            let t = block + y;
            comp = (t - block) - y;
            block = t;
            r += 1;
        }
        let y = block - total_comp;
        let t = total + y;
        total_comp = (t - total) - y;
        total = t;
        evidence.push((n as f64, total));
        if j > 0 {
            blocks.push(block);
        }
    }
    let class = if blocks.iter().any(|b| !b.is_finite() || *b < 0.0) {
        SeriesClass::Unknown
    } else if blocks.iter().all(|b| *b == 0.0) {
        SeriesClass::Converges
    } else if blocks.iter().any(|b| *b == 0.0) {
        SeriesClass::Unknown
    } else {
        let ln_ln = |n: u64| (n as f64).ln().ln();
        let mut xs = Vec::with_capacity(blocks.len() - 1);
        let mut ys = Vec::with_capacity(blocks.len() - 1);
        let mut spacing = 0.0;
        for j in 0..blocks.len() - 1 {
            xs.push(ln_ln(cps[j + 2]) - ln_ln(cps[j + 1]));
            ys.push((blocks[j + 1] / blocks[j]).ln());
            spacing += (cps[j + 2] as f64 / cps[j + 1] as f64).ln();
        }
        spacing /= xs.len() as f64;
        let m = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let q = sxy / sxx;
        let growth = (my - q * mx) / spacing;
        if growth > PARTIAL_SUM_MARGIN {
            SeriesClass::Diverges
        } else if growth < -PARTIAL_SUM_MARGIN {
            SeriesClass::Converges
        } else if q > -0.8 {
            SeriesClass::Diverges
        } else if q < -1.2 {
            SeriesClass::Converges
        } else {
            SeriesClass::Unknown
        }
    };
    SeriesVerdict { class, method: SeriesMethod::PartialSum, evidence }
}

/// Classifies `Σ_n u_n^α · term(u_n)` along a geometric sequence.
///
/// Works in the index variable: with `r = k^n` the summand is
/// `k^{n(α+p)} · (n ln k)^q · (ln(n ln k))^w`.
pub fn condense_over_u(term: &ExtendedLogPower, u: &GeometricSequence, alpha: Exp) -> Result<SeriesVerdict, FuncError> {
    if term.var != Variable::Large {
        return Err(FuncError::Variable("condensation needs a function of r".into()));
    }
    if !(u.k > 1.0) {
        return Err(FuncError::BadBase(u.k));
    }
    let growth = alpha + term.p;
    let converges = if growth.is_negative() {
        true
    } else if growth.is_positive() {
        false
    } else {
        let m1 = ex(-1);
        term.q < m1 || (term.q == m1 && term.w < m1)
    };
    Ok(SeriesVerdict::symbolic(converges))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub regular: bool,
    pub lambda: Option<f64>,
    /// Index past which every ratio `h(u_{n+1})/h(u_n)` is at most `lambda + 1e-6`.
    pub witness_n: Option<u32>,
}

pub const REGULARITY_SLACK: f64 = 1e-6;

/// `h(u_{n+1}) ≤ λ h(u_n)` eventually, with `λ = lim h(u_{n+1})/h(u_n) = k^p`.
pub fn is_u_regular(h: &ExtendedLogPower, u: &GeometricSequence) -> RegularityReport {
    let sp = match h.var {
        Variable::Large => h.p,
        Variable::Small => -h.p,
    };
    if !sp.is_negative() {
        return RegularityReport { regular: false, lambda: None, witness_n: None };
    }
    let lnk = u.k.ln();
    let lambda = (to_f(sp) * lnk).exp();
    let qp = to_f(h.q).max(0.0);
    let wp = to_f(h.w).max(0.0);
    let n0 = u.first_index_at_least(h.r_min.max(MIN_R_MIN)).max(2);
    // Upper bound for the ratio at every index ≥ n; decreasing in n.
    let bound = |n: u32| -> f64 {
        let nf = n as f64;
        let mut s = to_f(sp) * lnk + qp * (1.0 / nf).ln_1p();
        if wp > 0.0 {
            s += wp * (((nf + 1.0) * lnk).ln() / (nf * lnk).ln()).ln();
        }
        s.exp()
    };
    // Half the slack is kept back for rounding in callers that sample the ratio.
    let target = lambda + 0.5 * REGULARITY_SLACK;
    let witness = if bound(n0) <= target {
        n0
    } else {
        let mut hi = n0.max(1);
        while bound(hi) > target {
            hi = hi.saturating_mul(2);
            if hi == u32::MAX {
                break;
            }
        }
        let mut lo = hi / 2;
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if bound(mid) <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi.max(n0)
    };
    RegularityReport { regular: true, lambda: Some(lambda), witness_n: Some(witness) }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GClass {
    Zero,
    FinitePositive(f64),
    Infinite,
}

/// `g(r) = f(ψ(r)) ψ(r)^{-γ} ρ(r)^{γ-δ}` as a member of the family (asymptotic when `f` has logs).
pub fn g_function(
    psi: &ExtendedLogPower,
    rho: &ExtendedLogPower,
    f: &ExtendedLogPower,
    gamma: Exp,
    delta: Exp,
) -> Result<ExtendedLogPower, FuncError> {
    let fpsi = compose_f_psi(f, psi)?;
    fpsi.mul(&psi.pow(-gamma))?.mul(&rho.pow(gamma - delta))
}

/// Direct evaluation of `g` at `r` (no asymptotic replacement).
pub fn eval_g(
    psi: &ExtendedLogPower,
    rho: &ExtendedLogPower,
    f: &ExtendedLogPower,
    gamma: Exp,
    delta: Exp,
    r: f64,
) -> Result<f64, FuncError> {
    let ps = psi.eval(r)?;
    let v = f.eval(ps)? * ps.powf(-to_f(gamma)) * rho.eval(r)?.powf(to_f(gamma - delta));
    Ok(v)
}

/// Limit class of `g(u_n)`.
pub fn limsup_g(
    psi: &ExtendedLogPower,
    rho: &ExtendedLogPower,
    f: &ExtendedLogPower,
    gamma: Exp,
    delta: Exp,
    _u: &GeometricSequence,
) -> Result<GClass, FuncError> {
    let g = g_function(psi, rho, f, gamma, delta)?;
    Ok(match g.limit() {
        LimitClass::Zero => GClass::Zero,
        LimitClass::Infinite => GClass::Infinite,
        LimitClass::Finite(c) => GClass::FinitePositive(c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn e(a: i64, b: i64) -> Exp {
        Exp::new(a, b)
    }

    #[test]
    fn pure_power_below_r_min() {
        let h: ExtendedLogPower = "r^-2".parse().unwrap();
        assert_relative_eq!(h.eval(10.0).unwrap(), 0.01, max_relative = 1e-15);
    }

    #[test]
    fn log_factor_enforces_domain() {
        let h: ExtendedLogPower = "r^-1 * logr^-1".parse().unwrap();
        assert!(matches!(h.eval(10.0), Err(FuncError::Domain { .. })));
        let r = std::f64::consts::E.powf(std::f64::consts::E) * 10.0;
        assert_relative_eq!(h.eval(r).unwrap(), 1.0 / (r * r.ln()), max_relative = 1e-14);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["1 * r^-3 * logr^-3/2", "0.24 * r^-2", "2 * x^2/3 * logx^1/5", "6 * r^-3 * logr^1"] {
            let h: ExtendedLogPower = s.parse().unwrap();
            let back: ExtendedLogPower = h.to_string().parse().unwrap();
            assert_eq!(h, back, "{s}");
        }
        let h: ExtendedLogPower = "1 * r^-3 * logr^-1.5".parse().unwrap();
        assert_eq!(h.q, e(-3, 2));
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "r^", "r^a", "z^2", "r^2 * x^1", "1 ** r", "r^1/0"] {
            assert!(s.parse::<ExtendedLogPower>().is_err(), "{s}");
        }
    }

    #[test]
    fn power_composition() {
        let f = ExtendedLogPower::dim_power(1.0, e(2, 3));
        let psi = ExtendedLogPower::power(1.0, ex(-3));
        let c = compose_f_psi(&f, &psi).unwrap();
        assert_eq!((c.p, c.q, c.w), (ex(-2), ex(0), ex(0)));
        assert!(!c.asymptotic);
    }

    #[test]
    fn identity_dimension_function() {
        let f = ExtendedLogPower::dim_power(1.0, ex(1));
        let psi: ExtendedLogPower = "3 * r^-2 * logr^-1 * loglogr^2".parse().unwrap();
        let c = compose_f_psi(&f, &psi).unwrap();
        assert_eq!((c.coeff, c.p, c.q, c.w), (psi.coeff, psi.p, psi.q, psi.w));
    }

    #[test]
    fn log_corrected_composition() {
        // f = x^{2/τ}(ln 1/x)^{ε1}, ψ = r^{-τ}(ln r)^{-τ(1+ε)/2}
        let (tau, eps, eps1) = (ex(3), e(2, 5), e(1, 5));
        let f = ExtendedLogPower::dimension(1.0, ex(2) / tau, eps1, ex(0)).unwrap();
        let psi = ExtendedLogPower::new(1.0, -tau, -tau * (ex(1) + eps) / ex(2), ex(0)).unwrap();
        let c = compose_f_psi(&f, &psi).unwrap();
        assert_eq!(c.p, ex(-2));
        assert_eq!(c.q, -(ex(1) + eps - eps1));
        assert!(c.asymptotic);
    }

    #[test]
    fn zero_exponent_f_rejected() {
        let f = ExtendedLogPower::dimension(1.0, ex(0), ex(-1), ex(0)).unwrap();
        let psi = ExtendedLogPower::power(1.0, ex(-2));
        assert!(matches!(compose_f_psi(&f, &psi), Err(FuncError::Composition(_))));
    }

    #[test]
    fn series_examples() {
        let c = |s: &str| classify_series(&s.parse().unwrap()).class;
        assert_eq!(c("r^-1"), SeriesClass::Diverges);
        assert_eq!(c("r^-1 * logr^-2"), SeriesClass::Converges);
        assert_eq!(c("r^-1 * logr^-1 * loglogr^-1"), SeriesClass::Diverges);
        assert_eq!(c("r^-1 * logr^-1 * loglogr^-2"), SeriesClass::Converges);
    }

    #[test]
    fn condensation_examples() {
        let u = GeometricSequence::new(2.0, 50).unwrap();
        let r2 = ExtendedLogPower::power(1.0, ex(-2));
        assert!(condense_over_u(&r2, &u, ex(2)).unwrap().diverges());
        assert!(condense_over_u(&r2, &u, ex(1)).unwrap().converges());
        assert!(classify_series(&r2.times_power(ex(0))).converges());
        let psi: ExtendedLogPower = "r^-2 * logr^-1".parse().unwrap();
        let term = psi.times_power(ex(1));
        assert!(condense_over_u(&term, &u, ex(1)).unwrap().diverges());
    }

    #[test]
    fn regularity_examples() {
        let u = GeometricSequence::new(2.0, 100).unwrap();
        let rep = is_u_regular(&"r^-2".parse().unwrap(), &u);
        assert!(rep.regular);
        assert_relative_eq!(rep.lambda.unwrap(), 0.25, max_relative = 1e-12);
        assert!(!is_u_regular(&"logr^-1".parse().unwrap(), &u).regular);
        let h: ExtendedLogPower = "r^-1 * logr^3".parse().unwrap();
        let rep = is_u_regular(&h, &u);
        assert!(rep.regular);
        assert_relative_eq!(rep.lambda.unwrap(), 0.5, max_relative = 1e-12);
        let n0 = rep.witness_n.unwrap();
        for n in n0..n0 + 200 {
            let ratio = (h.ln_eval_at_ln(u.ln_u(n + 1)) - h.ln_eval_at_ln(u.ln_u(n))).exp();
            assert!(ratio <= 0.5 + REGULARITY_SLACK, "n={n} n0={n0} ratio={ratio}");
        }
    }

    #[test]
    fn g_examples() {
        let u = GeometricSequence::new(6.0, 50).unwrap();
        let rho = ExtendedLogPower::power(1.0, ex(-2));
        let (g0, d1) = (ex(0), ex(1));
        let f23 = ExtendedLogPower::dim_power(1.0, e(2, 3));
        let f12 = ExtendedLogPower::dim_power(1.0, e(1, 2));
        let p3 = ExtendedLogPower::power(1.0, ex(-3));
        let p4 = ExtendedLogPower::power(1.0, ex(-4));
        assert!(matches!(limsup_g(&p3, &rho, &f23, g0, d1, &u).unwrap(), GClass::FinitePositive(c) if (c - 1.0).abs() < 1e-12));
        assert_eq!(limsup_g(&p4, &rho, &f23, g0, d1, &u).unwrap(), GClass::Zero);
        assert_eq!(limsup_g(&p3, &rho, &f12, g0, d1, &u).unwrap(), GClass::Infinite);
    }

    #[test]
    fn partial_sums_on_clear_cases() {
        assert_eq!(classify_partial_sums(|r| r.powf(-2.0), 1).class, SeriesClass::Converges);
        assert_eq!(classify_partial_sums(|r| r.powf(-0.5), 1).class, SeriesClass::Diverges);
        assert_eq!(classify_partial_sums(|r| 1.0 / r, 1).class, SeriesClass::Diverges);
        assert_eq!(classify_partial_sums(|r| r.powf(-2.0), 1).evidence.len(), 7);
    }

    #[test]
    fn monotone_witness_checks_out() {
        let h: ExtendedLogPower = "r^-1 * logr^5 * loglogr^3".parse().unwrap();
        let r0 = h.monotone_from().unwrap();
        let mut prev = h.eval(r0).unwrap();
        let mut r = r0;
        for _ in 0..200 {
            r *= 1.3;
            let v = h.eval(r).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(ExtendedLogPower::power(1.0, ex(1)).monotone_from().is_none());
    }
}
