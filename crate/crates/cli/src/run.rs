//! Runs one case and renders its report.

use std::io::Write;
use std::path::Path;

use limsup::cantor::{self, CantorError};
use limsup::funcs::{lex_sign, Exp, FuncError};
use limsup::geometry::strip::{DEFAULT_SAMPLES, EXACT_STRIPS};
use limsup::geometry::{self, GeometryError, Region};
use limsup::laws::{self, Case, Hausdorff, LawError, Lebesgue};
use limsup::systems::{self, ResonantElement, SystemError, SystemKind};
use limsup::ubiquity::{self, UbiquityError, DEFAULT_STREAM_CAP};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache;
use crate::spec::{CaseSpec, Command, SpecError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Unknown,
    Infeasible,
    ResourceCap,
    Usage,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Usage => 1,
            Status::Unknown => 2,
            Status::Infeasible => 3,
            Status::ResourceCap => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Unknown => "unknown",
            Status::Infeasible => "infeasible",
            Status::ResourceCap => "resource_cap",
            Status::Usage => "usage",
        }
    }
}

/// Columns a case contributes to the batch summary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub lebesgue: Option<Lebesgue>,
    pub hausdorff: Option<Hausdorff>,
    pub dimension: Option<String>,
    pub kappa_min: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub message: Option<String>,
    pub report: Value,
    pub summary: Summary,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure(pub Status, pub String);

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure(Status::Usage, e.to_string())
    }
}

impl From<FuncError> for Failure {
    fn from(e: FuncError) -> Self {
        Failure(Status::Usage, e.to_string())
    }
}

impl From<SystemError> for Failure {
    fn from(e: SystemError) -> Self {
        let s = match e {
            SystemError::ResourceCap { .. } => Status::ResourceCap,
            _ => Status::Usage,
        };
        Failure(s, e.to_string())
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::System(s) => s.into(),
            other => Failure(Status::Usage, other.to_string()),
        }
    }
}

impl From<UbiquityError> for Failure {
    fn from(e: UbiquityError) -> Self {
        match e {
            UbiquityError::System(s) => s.into(),
            UbiquityError::Geometry(g) => g.into(),
            UbiquityError::StreamCap { .. } => Failure(Status::ResourceCap, e.to_string()),
            UbiquityError::PsiTooLarge { .. } => Failure(Status::Infeasible, e.to_string()),
            other => Failure(Status::Usage, other.to_string()),
        }
    }
}

impl From<CantorError> for Failure {
    fn from(e: CantorError) -> Self {
        let s = match e {
            CantorError::ResourceCap { .. } => Status::ResourceCap,
            CantorError::Unsupported(_) | CantorError::Func(_) => Status::Usage,
            _ => Status::Infeasible,
        };
        Failure(s, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(Status::Usage, format!("io: {e}"))
    }
}

pub fn schema_id(command: Option<Command>) -> String {
    format!("limsup/{}/v1", command.map_or("unknown", Command::name))
}

fn exp_str(e: Exp) -> String {
    if e.is_integer() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

struct Done {
    status: Status,
    message: Option<String>,
    result: Value,
    summary: Summary,
}

impl Done {
    fn ok(result: Value) -> Self {
        Done { status: Status::Ok, message: None, result, summary: Summary::default() }
    }
}

/// Runs a case, writing any artifacts it names. The report itself is returned, not written.
pub fn run(spec: &CaseSpec) -> Outcome {
    let command = spec.command;
    let res = match command {
        None => Err(Failure(Status::Usage, "missing `command`".into())),
        Some(c) => dispatch(c, spec),
    };
    let (status, message, result, summary) = match res {
        Ok(d) => (d.status, d.message, d.result, d.summary),
        Err(Failure(s, m)) => (s, Some(m), Value::Null, Summary::default()),
    };
    let mut report = json!({
        "schema": schema_id(command),
        "case": spec.without_outputs(),
        "status": status,
        "result": result,
    });
    if let Some(m) = &message {
        report["message"] = json!(m);
    }
    Outcome { status, message, report, summary }
}

fn dispatch(c: Command, spec: &CaseSpec) -> Result<Done, Failure> {
    match c {
        Command::Classify => classify(spec),
        Command::Dimension => dimension(spec),
        Command::VerifyUbiquity => verify_ubiquity(spec),
        Command::QuasiIndependence => quasi_independence(spec),
        Command::BuildCantor => build_cantor(spec),
        Command::Measure => measure(spec),
        Command::Enumerate => enumerate(spec),
    }
}

fn case_of(spec: &CaseSpec, c: Command) -> Result<Case, Failure> {
    let sys = spec.system(c)?;
    let mut case = Case::new(sys, spec.psi(c)?, spec.f()?);
    if let Some(u) = spec.ubiquity {
        case = case.with_ubiquity(u);
    }
    Ok(case)
}

fn classify(spec: &CaseSpec) -> Result<Done, Failure> {
    let case = case_of(spec, Command::Classify)?;
    let v = laws::classify(&case);
    let unknown = v.lebesgue == Lebesgue::Unknown || v.hausdorff == Some(Hausdorff::Unknown);
    let summary = Summary {
        lebesgue: Some(v.lebesgue),
        hausdorff: v.hausdorff,
        dimension: v.dimension.map(exp_str),
        kappa_min: None,
    };
    let result = json!({
        "system": v.system,
        "psi": v.psi,
        "f": v.f,
        "lebesgue": v.lebesgue,
        "hausdorff": v.hausdorff,
        "dimension": v.dimension.map(exp_str),
        "sigma": v.sigma.map(exp_str),
        "hausdorff_at_d": v.hausdorff_at_d,
        "trace": v.trace,
        "guards": v.guards,
    });
    Ok(Done {
        status: if unknown { Status::Unknown } else { Status::Ok },
        message: unknown.then(|| "verdict is unknown".to_string()),
        result,
        summary,
    })
}

fn dimension(spec: &CaseSpec) -> Result<Done, Failure> {
    let case = case_of(spec, Command::Dimension)?;
    let p = &case.psi;
    if case.system.kind == SystemKind::Circle && lex_sign(p.p + Exp::from_integer(2), p.q, p.w) >= 0 {
        return Ok(Done {
            status: Status::Unknown,
            message: Some("circle guard: r^2 psi(r) does not tend to 0".into()),
            result: Value::Null,
            summary: Summary::default(),
        });
    }
    match laws::critical_dimension(&case) {
        Ok(d) => {
            let mut done = Done::ok(json!({
                "system": case.system.kind.to_string(),
                "psi": case.psi.to_string(),
                "sigma": exp_str(d.sigma),
                "d": exp_str(d.d),
                "hausdorff_at_d": d.hausdorff_at_d,
                "capped": d.capped,
                "trace": d.trace,
            }));
            done.summary.dimension = Some(exp_str(d.d));
            Ok(done)
        }
        Err(LawError::SigmaUndefined) => Ok(Done {
            status: Status::Unknown,
            message: Some(LawError::SigmaUndefined.to_string()),
            result: Value::Null,
            summary: Summary::default(),
        }),
        Err(LawError::Func(e)) => Err(e.into()),
    }
}

fn verify_ubiquity(spec: &CaseSpec) -> Result<Done, Failure> {
    let c = Command::VerifyUbiquity;
    let sys = spec.system(c)?;
    let ns = spec.levels(c)?;
    let balls = match spec.within(&sys)? {
        Some(b) => vec![b],
        None => ubiquity::default_sample_balls(&sys, spec.seed("default sample balls")?),
    };
    let rep = ubiquity::verify_local_ubiquity(&sys, &balls, &ns, spec.threshold)?;
    let intersection = if sys.kind == SystemKind::Lines21 {
        let seed = spec.seed("intersection samples")?;
        let samples = ubiquity::sample_intersection_cases(&sys, ns[0], spec.samples.unwrap_or(20) as usize, &[0.01, 0.1], seed)?;
        Some(ubiquity::verify_intersection_conditions(&sys, &samples)?)
    } else {
        None
    };
    if let Some(path) = &spec.csv_out {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["ball", "n", "rho", "ratio", "ratio_unrestricted", "error_bound", "fits"]).map_err(csv_err)?;
        for r in &rep.records {
            w.write_record([
                serde_json::to_string(&r.ball).expect("balls serialize"),
                r.n.to_string(),
                r.rho.to_string(),
                r.ratio.to_string(),
                r.ratio_unrestricted.to_string(),
                r.error_bound.to_string(),
                r.fits.to_string(),
            ])
            .map_err(csv_err)?;
        }
        write_atomic(path, &w.into_inner().map_err(|e| Failure(Status::Usage, e.to_string()))?)?;
    }
    let mut done = Done::ok(json!({ "ubiquity": rep, "intersection": intersection }));
    done.summary.kappa_min = Some(rep.kappa_min);
    Ok(done)
}

fn csv_err(e: csv::Error) -> Failure {
    Failure(Status::Usage, format!("csv: {e}"))
}

fn quasi_independence(spec: &CaseSpec) -> Result<Done, Failure> {
    let c = Command::QuasiIndependence;
    let sys = spec.system(c)?;
    let psi = spec.psi(c)?;
    let ball = spec.within(&sys)?.unwrap_or_else(|| sys.ambient_ball());
    let q = spec.q.ok_or(SpecError::Missing { field: "q", command: c })?;
    let rep = ubiquity::verify_quasi_independence(&sys, &psi, &ball, q, spec.stream_cap.unwrap_or(DEFAULT_STREAM_CAP))?;
    if let Some(path) = &spec.csv_out {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &rep.rows {
            w.serialize(row).map_err(csv_err)?;
        }
        write_atomic(path, &w.into_inner().map_err(|e| Failure(Status::Usage, e.to_string()))?)?;
    }
    let capped = rep.capped.clone();
    let mut done = Done::ok(json!(rep));
    if let Some(m) = capped {
        done.status = Status::ResourceCap;
        done.message = Some(m);
    }
    Ok(done)
}

fn build_cantor(spec: &CaseSpec) -> Result<Done, Failure> {
    let c = Command::BuildCantor;
    let sys = spec.system(c)?;
    let psi = spec.psi(c)?;
    let f = spec.f_required(c)?;
    let params = spec.cantor_params(&sys, c)?;
    let seed = spec.seed("the mass audit")?;
    let plan = cantor::plan_construction(&sys, &psi, &f, &params)?;
    let mut tree = cantor::build_levels(&plan)?;
    cantor::assign_mass(&mut tree)?;
    let audit = cantor::audit_mass(&tree, spec.samples.unwrap_or(200) as usize, seed)?;
    if let Some(path) = &spec.tree_out {
        let mut buf = Vec::new();
        cantor::write_json_lines(&tree, &mut buf)?;
        write_atomic(path, &buf)?;
    }
    let counts: Vec<usize> = tree.levels.iter().map(Vec::len).collect();
    Ok(Done::ok(json!({
        "plan": tree.plan,
        "t_schedule": tree.plan.t_schedule(),
        "level_counts": counts,
        "records": tree.records,
        "audit": audit,
    })))
}

fn measure(spec: &CaseSpec) -> Result<Done, Failure> {
    let c = Command::Measure;
    let sys = spec.system(c)?;
    let ns = spec.levels(c)?;
    let within = spec.within(&sys)?;
    let psi = match spec.radius {
        Some(_) => None,
        None => Some(spec.psi(c)?),
    };
    let u = sys.sequence();
    let mut rows = Vec::new();
    for &n in &ns {
        let r = match (&psi, spec.radius) {
            (Some(p), _) => p.eval(u.u(n))?,
            (None, Some(r)) => r,
            (None, None) => unreachable!("psi or radius is set"),
        };
        let (lo, hi) = sys.window_bounds(n)?;
        let (m, err) = if sys.kind == SystemKind::Rationals {
            geometry::delta_measure(&sys, n, r, &within.unwrap_or_else(|| sys.ambient_ball()))?
        } else {
            let mut region = geometry::build_delta_radius(&sys, n, r, within.as_ref())?;
            if let Region::Strips { union, .. } = &mut region {
                if union.strips.len() > EXACT_STRIPS {
                    let seed = spec.seed("strip unions are measured by Monte Carlo")?;
                    *union = union.clone().with_sampling(spec.samples.unwrap_or(DEFAULT_SAMPLES), seed);
                }
            }
            geometry::region_measure(&region, within.as_ref())?
        };
        rows.push(json!({ "n": n, "window": [lo, hi], "radius": r, "measure": m, "error_bound": err }));
    }
    Ok(Done::ok(json!({ "system": sys.kind.to_string(), "levels": rows })))
}

fn csv_header(kind: SystemKind) -> &'static str {
    match kind {
        SystemKind::Rationals | SystemKind::PrimeRationals => "n,p,q,weight,value",
        SystemKind::Algebraic(_) => "n,coefficients,weight,root",
        SystemKind::Circle => "n,p1,p2,q,weight,angle",
        SystemKind::Lines21 => "n,p,q1,q2,weight,line",
    }
}

fn window_elements(
    sys: &systems::ResonantSystem,
    lo: u64,
    hi: u64,
    within: Option<&geometry::Ball>,
) -> Result<Vec<ResonantElement>, Failure> {
    let Some(dir) = cache::cache_dir() else {
        return Ok(systems::enumerate_weights(sys, lo, hi, within)?);
    };
    let path = dir.join(cache::key(sys, lo, hi, within));
    match cache::load(&path) {
        Ok(els) => {
            eprintln!("cache hit: {}", path.display());
            Ok(els)
        }
        Err(_) => {
            let els = systems::enumerate_weights(sys, lo, hi, within)?;
            if let Err(e) = cache::store(&path, &els) {
                eprintln!("warning: could not write cache {}: {e}", path.display());
            }
            Ok(els)
        }
    }
}

fn enumerate(spec: &CaseSpec) -> Result<Done, Failure> {
    let c = Command::Enumerate;
    let sys = spec.system(c)?;
    let ns = spec.levels(c)?;
    let within = spec.within(&sys)?;
    let mut windows = Vec::new();
    let mut csv_text = format!("{}\n", csv_header(sys.kind));
    for &n in &ns {
        let (lo, hi) = sys.window_bounds(n)?;
        let els = window_elements(&sys, lo, hi, within.as_ref())?;
        if spec.csv_out.is_some() {
            for el in &els {
                csv_text.push_str(&format!("{n},{}\n", el.csv_row()));
            }
        }
        windows.push(json!({ "n": n, "window": [lo, hi], "count": els.len() }));
    }
    if let Some(path) = &spec.csv_out {
        write_atomic(path, csv_text.as_bytes())?;
    }
    Ok(Done::ok(json!({ "system": sys.kind.to_string(), "windows": windows })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(toml_text: &str) -> CaseSpec {
        toml::from_str(toml_text).unwrap()
    }

    #[test]
    fn khintchine_divergence_is_full() {
        let o = run(&spec("command = \"classify\"\nsystem = \"rationals\"\npsi = \"r^-2\"\n"));
        assert_eq!(o.status, Status::Ok);
        assert_eq!(o.report["result"]["lebesgue"], "full");
        assert_eq!(o.report["schema"], "limsup/classify/v1");
    }

    #[test]
    fn circle_dimension() {
        let o = run(&spec("command = \"dimension\"\nsystem = \"circle\"\npsi = \"r^-3\"\n"));
        assert_eq!(o.status, Status::Ok);
        assert_eq!(o.report["result"]["d"], "1/3");
        let o = run(&spec("command = \"dimension\"\nsystem = \"circle\"\npsi = \"r^-2\"\n"));
        assert_eq!(o.status, Status::Unknown);
    }

    #[test]
    fn failures_map_to_statuses() {
        let o = run(&spec("command = \"classify\"\nsystem = \"rationals\"\npsi = \"r^-2 *\"\n"));
        assert_eq!(o.status.exit_code(), 1);
        assert!(o.message.unwrap().contains("psi"));
        let o = run(&spec("command = \"dimension\"\nsystem = \"rationals\"\npsi = \"logr^-2\"\n"));
        assert_eq!(o.status.exit_code(), 2);
        let o = run(&spec("command = \"enumerate\"\nsystem = \"rationals\"\nn = [9]\nwindow_cap = 1000\n"));
        assert_eq!(o.status.exit_code(), 4);
        let o = run(&spec(
            "command = \"build-cantor\"\nsystem = \"rationals\"\npsi = \"r^-3\"\nf = \"x^2/3\"\neta = 10.0\nmode = \"paper\"\n\
             depth = 2\nwithin = \"interval:0.41421356,1e-4\"\nseed = 1\n",
        ));
        assert!(matches!(o.status.exit_code(), 3 | 4), "{:?}", o.message);
    }

    #[test]
    fn statistical_paths_need_a_seed() {
        let o = run(&spec("command = \"verify-ubiquity\"\nsystem = \"rationals\"\nn = [2]\n"));
        assert_eq!(o.status, Status::Usage);
        assert!(o.message.unwrap().contains("seed"));
    }
}
