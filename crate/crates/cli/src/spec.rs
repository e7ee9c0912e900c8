//! Case specifications: one table per case in TOML, or JSON objects.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use limsup::cantor::{CantorParams, Limits, Mode};
use limsup::funcs::ExtendedLogPower;
use limsup::geometry::Ball;
use limsup::systems::{RationalMode, ResonantSystem, SystemKind};
use limsup::ubiquity::UbiquityStatus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{0}")]
    Invalid(String),
    #[error("missing `{field}` for {command}")]
    Missing { field: &'static str, command: Command },
    #[error("`seed` is required: {0} samples at random")]
    SeedRequired(&'static str),
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    Dimension,
    VerifyUbiquity,
    QuasiIndependence,
    BuildCantor,
    Measure,
    Enumerate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Dimension => "dimension",
            Command::VerifyUbiquity => "verify-ubiquity",
            Command::QuasiIndependence => "quasi-independence",
            Command::BuildCantor => "build-cantor",
            Command::Measure => "measure",
            Command::Enumerate => "enumerate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Paper,
    Relaxed,
}

/// One case. Unset fields take the command's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// `rationals`, `primes`, `algebraic:<d>`, `circle` or `lines21`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    /// Base of `u_n = k^n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_coeff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational_mode: Option<RationalMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_quadrant: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ubiquity: Option<UbiquityStatus>,
    /// Window indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<u32>>,
    /// Quasi-independence horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varpi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sublevels: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_balls: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<u32>,
    /// Ball: `lo..hi`, `interval:c,r`, `arc:c,r`, `disc:x,y,r` or `all`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub within: Option<String>,
    /// Neighbourhood radius for `measure`, instead of `psi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Farey-step cap for quasi-independence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json_out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_out: Option<PathBuf>,
    /// JSON-lines dump of the Cantor tree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_out: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl CaseSpec {
    /// Fields set in `other` replace those in `self`.
    pub fn overlay(&mut self, other: &CaseSpec) {
        overlay!(self, other; id, command, system, k, rho_coeff, rational_mode, first_quadrant, window_cap,
            psi, f, ubiquity, n, q, depth, eta, mode, varpi, kappa, max_sublevels, max_balls, t1, within,
            radius, threshold, samples, seed, stream_cap, json_out, csv_out, tree_out);
    }

    /// The case without its output paths, as embedded in reports.
    pub fn without_outputs(&self) -> CaseSpec {
        CaseSpec { json_out: None, csv_out: None, tree_out: None, ..self.clone() }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("case specs serialize")
    }

    pub fn command(&self) -> Result<Command, SpecError> {
        self.command.ok_or_else(|| SpecError::Invalid("missing `command`".into()))
    }

    pub fn system(&self, command: Command) -> Result<ResonantSystem, SpecError> {
        let name = self.system.as_deref().ok_or(SpecError::Missing { field: "system", command })?;
        let kind = SystemKind::from_str(name).map_err(|e| SpecError::Invalid(e.to_string()))?;
        let default_k = if kind == SystemKind::Rationals { 6.0 } else { 10.0 };
        let k = self.k.unwrap_or(default_k);
        if !(k > 1.0) {
            return Err(SpecError::Invalid(format!("k must exceed 1, got {k}")));
        }
        let mut sys = ResonantSystem::new(kind, k);
        if let Some(c) = self.rho_coeff {
            if !(c > 0.0) {
                return Err(SpecError::Invalid(format!("rho_coeff must be positive, got {c}")));
            }
            sys = sys.with_rho_coeff(c);
        }
        if let Some(m) = self.rational_mode {
            sys = sys.with_mode(m);
        }
        if let Some(q) = self.first_quadrant {
            sys = sys.with_first_quadrant(q);
        }
        if let Some(c) = self.window_cap {
            sys = sys.with_cap(c);
        }
        Ok(sys)
    }

    pub fn psi(&self, command: Command) -> Result<ExtendedLogPower, SpecError> {
        literal(self.psi.as_deref().ok_or(SpecError::Missing { field: "psi", command })?, "psi")
    }

    pub fn f(&self) -> Result<Option<ExtendedLogPower>, SpecError> {
        self.f.as_deref().map(|s| literal(s, "f")).transpose()
    }

    pub fn f_required(&self, command: Command) -> Result<ExtendedLogPower, SpecError> {
        self.f()?.ok_or(SpecError::Missing { field: "f", command })
    }

    pub fn levels(&self, command: Command) -> Result<Vec<u32>, SpecError> {
        let n = self.n.clone().ok_or(SpecError::Missing { field: "n", command })?;
        if n.is_empty() || n.contains(&0) {
            return Err(SpecError::Invalid("window indices must be non-empty and start at 1".into()));
        }
        Ok(n)
    }

    pub fn within(&self, sys: &ResonantSystem) -> Result<Option<Ball>, SpecError> {
        self.within.as_deref().map(|s| parse_ball(s, sys)).transpose()
    }

    pub fn seed(&self, why: &'static str) -> Result<u64, SpecError> {
        self.seed.ok_or(SpecError::SeedRequired(why))
    }

    pub fn cantor_params(&self, sys: &ResonantSystem, command: Command) -> Result<CantorParams, SpecError> {
        let kappa = self.kappa.unwrap_or(0.5);
        let mode = match self.mode.unwrap_or(ModeName::Relaxed) {
            ModeName::Paper => Mode::PaperConstants { kappa },
            ModeName::Relaxed => Mode::Relaxed { varpi: self.varpi.unwrap_or(0.01), kappa },
        };
        let within = self.within(sys)?.ok_or(SpecError::Missing { field: "within", command })?;
        let d = Limits::default();
        Ok(CantorParams {
            eta: self.eta.ok_or(SpecError::Missing { field: "eta", command })?,
            mode,
            depth: self.depth.unwrap_or(1),
            within,
            limits: Limits {
                max_sublevels: self.max_sublevels.unwrap_or(d.max_sublevels),
                max_balls: self.max_balls.unwrap_or(d.max_balls),
                min_children: d.min_children,
                t1: self.t1,
            },
        })
    }
}

fn literal(s: &str, field: &str) -> Result<ExtendedLogPower, SpecError> {
    s.parse().map_err(|e| SpecError::Invalid(format!("{field} = `{s}`: {e}")))
}

fn floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, SpecError> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(SpecError::Invalid(format!("bad {what} `{s}`: expected {n} numbers"))),
    }
}

/// Parses a ball in the ambient space of `sys`.
pub fn parse_ball(s: &str, sys: &ResonantSystem) -> Result<Ball, SpecError> {
    let t = s.trim();
    if t == "all" {
        return Ok(sys.ambient_ball());
    }
    let ball = if let Some((a, b)) = t.split_once("..") {
        let v = floats(&format!("{a},{b}"), 2, "interval")?;
        if !(v[0] < v[1]) {
            return Err(SpecError::Invalid(format!("empty interval `{s}`")));
        }
        Ball::from_endpoints(v[0], v[1])
    } else if let Some(rest) = t.strip_prefix("interval:") {
        let v = floats(rest, 2, "interval")?;
        Ball::interval(v[0], v[1])
    } else if let Some(rest) = t.strip_prefix("arc:") {
        let v = floats(rest, 2, "arc")?;
        Ball::Arc { center: v[0], radius: v[1] }
    } else if let Some(rest) = t.strip_prefix("disc:") {
        let v = floats(rest, 3, "disc")?;
        Ball::Disc { cx: v[0], cy: v[1], radius: v[2] }
    } else {
        return Err(SpecError::Invalid(format!("bad ball `{s}`")));
    };
    if !(ball.radius() > 0.0) {
        return Err(SpecError::Invalid(format!("ball `{s}` needs a positive radius")));
    }
    let kind_ok = matches!(
        (sys.ambient_ball(), ball),
        (Ball::Interval { .. }, Ball::Interval { .. }) | (Ball::Arc { .. }, Ball::Arc { .. }) | (Ball::Disc { .. }, Ball::Disc { .. })
    );
    if !kind_ok {
        return Err(SpecError::Invalid(format!("ball `{s}` does not live in the ambient space of {}", sys.kind)));
    }
    Ok(ball)
}

fn read(path: &std::path::Path) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.to_path_buf(), source })
}

fn is_json(path: &std::path::Path, text: &str) -> bool {
    if let Some(e) = path.extension() {
        return e.eq_ignore_ascii_case("json");
    }
    let t = text.trim_start();
    t.starts_with('{') || (t.starts_with('[') && t[1..].trim_start().starts_with(['{', ']']))
}

/// Parses a case file: TOML tables keyed by case id, or JSON (an object keyed by id, or an
/// array of cases with `id`). Cases keep file order.
pub fn parse_cases(text: &str, json: bool) -> Result<Vec<CaseSpec>, SpecError> {
    let mut out = Vec::new();
    if json {
        match serde_json::from_str::<serde_json::Value>(text)? {
            serde_json::Value::Array(items) => {
                for (i, v) in items.into_iter().enumerate() {
                    let mut c: CaseSpec = serde_json::from_value(v)?;
                    c.id.get_or_insert_with(|| format!("case{}", i + 1));
                    out.push(c);
                }
            }
            serde_json::Value::Object(map) => {
                for (id, v) in map {
                    let mut c: CaseSpec = serde_json::from_value(v)?;
                    c.id.get_or_insert(id);
                    out.push(c);
                }
            }
            _ => return Err(SpecError::Invalid("JSON cases must be an object or an array".into())),
        }
    } else {
        let table: toml::Table = text.parse()?;
        for (id, v) in table {
            if !v.is_table() {
                return Err(SpecError::Invalid(format!("top-level key `{id}` is not a case table")));
            }
            let mut c: CaseSpec = v.try_into()?;
            c.id.get_or_insert(id);
            out.push(c);
        }
    }
    let mut seen = std::collections::HashSet::new();
    for c in &out {
        let id = c.id.as_deref().unwrap_or_default();
        if !seen.insert(id.to_string()) {
            return Err(SpecError::Invalid(format!("duplicate case id `{id}`")));
        }
    }
    Ok(out)
}

pub fn load_cases(path: &std::path::Path) -> Result<Vec<CaseSpec>, SpecError> {
    let text = read(path)?;
    parse_cases(&text, is_json(path, &text))
}

/// Renders cases back as TOML tables keyed by id.
pub fn cases_to_toml(cases: &[CaseSpec]) -> String {
    let mut table = toml::Table::new();
    for c in cases {
        let mut c = c.clone();
        let id = c.id.take().unwrap_or_default();
        table.insert(id, toml::Value::try_from(&c).expect("case specs serialize"));
    }
    toml::to_string(&table).expect("tables serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[khintchine]
command = "classify"
system = "rationals"
psi = "r^-2"

[circle_dim]
command = "dimension"
system = "circle"
k = 2.0
psi = "r^-3"
n = [2, 3]
within = "arc:0.5,0.1"
"#;

    #[test]
    fn toml_round_trip() {
        let cases = parse_cases(SAMPLE, false).unwrap();
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[0].id.as_deref(), Some("khintchine"));
        assert_eq!(cases[1].command, Some(Command::Dimension));
        let again = parse_cases(&cases_to_toml(&cases), false).unwrap();
        assert_eq!(again, cases);
    }

    #[test]
    fn json_round_trip() {
        let cases = parse_cases(SAMPLE, false).unwrap();
        let text = serde_json::to_string(&cases).unwrap();
        assert_eq!(parse_cases(&text, true).unwrap(), cases);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_cases("[a]\ncommand = \"classify\"\nsytem = \"rationals\"\n", false).is_err());
        assert!(parse_cases("[a]\ncommand = \"classify\"\n[a.b]\n", false).is_err());
    }

    #[test]
    fn balls() {
        let r = ResonantSystem::rationals(6.0);
        assert_eq!(parse_ball("0.25..0.75", &r).unwrap(), Ball::from_endpoints(0.25, 0.75));
        assert_eq!(parse_ball("interval:0.5,0.1", &r).unwrap(), Ball::interval(0.5, 0.1));
        assert!(parse_ball("arc:0.5,0.1", &r).is_err());
        assert!(parse_ball("0.5..0.25", &r).is_err());
        assert!(parse_ball("interval:0.5", &r).is_err());
        let c = ResonantSystem::new(SystemKind::Circle, 2.0);
        assert_eq!(parse_ball("all", &c).unwrap(), Ball::full_circle());
    }

    #[test]
    fn bad_literal_is_a_spec_error() {
        let c = CaseSpec { system: Some("rationals".into()), psi: Some("r^^2".into()), ..Default::default() };
        let e = c.psi(Command::Classify).unwrap_err();
        assert!(e.to_string().contains("psi"), "{e}");
    }
}
