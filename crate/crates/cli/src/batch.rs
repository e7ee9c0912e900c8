//! Runs a file of cases and tabulates them.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::run::{self, render, write_atomic, Outcome};
use crate::spec::CaseSpec;

/// One summary row per case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub case_id: String,
    pub command: String,
    pub status: String,
    pub lebesgue: String,
    pub hausdorff: String,
    pub dimension: String,
    pub kappa_min: String,
    pub runtime_ms: String,
    pub message: String,
}

fn name<T: Serialize>(v: Option<T>) -> String {
    v.and_then(|v| serde_json::to_value(v).ok())
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn row(spec: &CaseSpec, out: &Option<Outcome>, panic_msg: Option<String>, ms: Option<u128>) -> Row {
    let (status, message, s) = match (out, panic_msg) {
        (Some(o), _) => (o.status.name().to_string(), o.message.clone().unwrap_or_default(), o.summary.clone()),
        (None, m) => ("error".to_string(), m.unwrap_or_else(|| "case panicked".into()), Default::default()),
    };
    Row {
        case_id: spec.id.clone().unwrap_or_default(),
        command: spec.command.map(|c| c.name().to_string()).unwrap_or_default(),
        status,
        lebesgue: name(s.lebesgue),
        hausdorff: name(s.hausdorff),
        dimension: s.dimension.unwrap_or_default(),
        kappa_min: s.kappa_min.map(|k| k.to_string()).unwrap_or_default(),
        runtime_ms: ms.map(|m| m.to_string()).unwrap_or_default(),
        message: message.replace(['\n', '\r'], " "),
    }
}

fn run_one(spec: &CaseSpec, reports_dir: Option<&Path>, timing: bool) -> Row {
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(|| run::run(spec)));
    let ms = timing.then(|| start.elapsed().as_millis());
    match res {
        Ok(o) => {
            let text = render(&o.report);
            let mut write_err = None;
            let id = spec.id.clone().unwrap_or_default();
            let targets = [spec.json_out.clone(), reports_dir.map(|d| d.join(format!("{id}.json")))];
            for p in targets.into_iter().flatten() {
                if let Err(e) = write_atomic(&p, text.as_bytes()) {
                    write_err = Some(format!("writing {}: {e}", p.display()));
                }
            }
            let mut r = row(spec, &Some(o), None, ms);
            if let Some(e) = write_err {
                r.message = if r.message.is_empty() { e } else { format!("{}; {e}", r.message) };
            }
            r
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .map(|m| format!("panic: {m}"));
            row(spec, &None, msg, ms)
        }
    }
}

/// Runs every case (in parallel) and returns rows in input order.
pub fn run_batch(cases: &[CaseSpec], reports_dir: Option<&Path>, timing: bool) -> Vec<Row> {
    cases.par_iter().map(|c| run_one(c, reports_dir, timing)).collect()
}

pub fn summary_csv(rows: &[Row]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(["case_id", "command", "status", "lebesgue", "hausdorff", "dimension", "kappa_min", "runtime_ms", "message"])
            .expect("in-memory csv");
    }
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_cases;

    #[test]
    fn empty_batch_has_a_header_only() {
        let csv = summary_csv(&run_batch(&[], None, true));
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("case_id,"));
    }

    #[test]
    fn failures_stay_in_their_rows() {
        let cases = parse_cases(
            r#"
[good]
command = "classify"
system = "rationals"
psi = "r^-2"

[infeasible]
command = "build-cantor"
system = "rationals"
psi = "r^-3"
f = "x^2/3"
eta = 10.0
mode = "paper"
depth = 2
within = "interval:0.41421356,1e-4"
seed = 1

[bad]
command = "classify"
system = "rationals"
psi = "r^"
"#,
            false,
        )
        .unwrap();
        let rows = run_batch(&cases, None, false);
        assert_eq!(rows[0].status, "ok");
        assert_eq!(rows[0].lebesgue, "full");
        assert!(rows[1].status == "infeasible" || rows[1].status == "resource_cap", "{:?}", rows[1]);
        assert_eq!(rows[2].status, "usage");
        assert!(rows.iter().all(|r| r.runtime_ms.is_empty()));
        assert_eq!(summary_csv(&rows), summary_csv(&run_batch(&cases, None, false)));
    }
}
