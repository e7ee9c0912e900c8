use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use limsup::systems::RationalMode;
use limsup::ubiquity::UbiquityStatus;
use limsup_cli::batch;
use limsup_cli::run::{self, render, write_atomic, Status};
use limsup_cli::spec::{load_cases, CaseSpec, Command, ModeName};

/// Limsup sets of resonant systems: verdicts, dimensions, ubiquity checks and Cantor sets.
#[derive(Parser)]
#[command(name = "limsup", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lebesgue and Hausdorff verdicts with their hypothesis trace.
    Classify(CaseArgs),
    /// Critical exponent and dimension.
    Dimension(CaseArgs),
    /// Local ubiquity ratios on sample balls.
    VerifyUbiquity(CaseArgs),
    /// Pairwise sums of the sets A_n(psi, B) up to a horizon.
    QuasiIndependence(CaseArgs),
    /// Plans, builds and audits a Cantor set with its mass distribution.
    BuildCantor(CaseArgs),
    /// Measure of the neighbourhoods of a window.
    Measure(CaseArgs),
    /// Lists the elements of a window.
    Enumerate(CaseArgs),
    /// Runs every case of a file and writes a summary CSV.
    Batch(BatchArgs),
}

#[derive(Args)]
struct BatchArgs {
    /// TOML (one table per case) or JSON case file.
    file: PathBuf,
    /// Summary CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Writes each case's report to `<dir>/<case_id>.json`.
    #[arg(long)]
    reports_dir: Option<PathBuf>,
    /// Leaves `runtime_ms` empty so summaries compare byte for byte.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Clone)]
struct Levels(Vec<u32>);

fn parse_levels(s: &str) -> Result<Levels, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once('-') {
            let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| format!("bad range `{part}`"))?, b.trim().parse().map_err(|_| format!("bad range `{part}`"))?);
            if a > b {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad index `{part}`"))?);
        }
    }
    Ok(Levels(out))
}

fn snake<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|_| format!("unknown value `{s}`"))
}

#[derive(Args, Default)]
struct CaseArgs {
    /// Case file (TOML or JSON); flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Case id inside the file, when it holds several.
    #[arg(long)]
    case: Option<String>,
    /// rationals, primes, algebraic:<d>, circle or lines21.
    #[arg(long)]
    system: Option<String>,
    /// Base of u_n = k^n.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    rho_coeff: Option<f64>,
    /// all-pairs or reduced.
    #[arg(long, value_parser = snake::<RationalMode>)]
    rational_mode: Option<RationalMode>,
    #[arg(long)]
    first_quadrant: Option<bool>,
    #[arg(long)]
    window_cap: Option<u64>,
    /// Approximating function, e.g. "r^-2 * logr^-1".
    #[arg(long, allow_hyphen_values = true)]
    psi: Option<String>,
    /// Dimension function, e.g. "x^2/3 * logx^1/5".
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    /// claimed, verified, global-only or none.
    #[arg(long, value_parser = snake::<UbiquityStatus>)]
    ubiquity: Option<UbiquityStatus>,
    /// Window indices: "2,3" or "2-5".
    #[arg(long, value_parser = parse_levels)]
    n: Option<Levels>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
    #[arg(long)]
    varpi: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    max_sublevels: Option<u32>,
    #[arg(long)]
    max_balls: Option<u64>,
    #[arg(long)]
    t1: Option<u32>,
    /// Ball: "lo..hi", "interval:c,r", "arc:c,r", "disc:x,y,r" or "all".
    #[arg(long)]
    within: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stream_cap: Option<f64>,
    /// JSON report; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON-lines dump of the Cantor tree.
    #[arg(long)]
    tree_out: Option<PathBuf>,
}

impl CaseArgs {
    fn flags(self) -> CaseSpec {
        CaseSpec {
            id: None,
            command: None,
            system: self.system,
            k: self.k,
            rho_coeff: self.rho_coeff,
            rational_mode: self.rational_mode,
            first_quadrant: self.first_quadrant,
            window_cap: self.window_cap,
            psi: self.psi,
            f: self.f,
            ubiquity: self.ubiquity,
            n: self.n.map(|l| l.0),
            q: self.q,
            depth: self.depth,
            eta: self.eta,
            mode: self.mode,
            varpi: self.varpi,
            kappa: self.kappa,
            max_sublevels: self.max_sublevels,
            max_balls: self.max_balls,
            t1: self.t1,
            within: self.within,
            radius: self.radius,
            threshold: self.threshold,
            samples: self.samples,
            seed: self.seed,
            stream_cap: self.stream_cap,
            json_out: self.out,
            csv_out: self.csv,
            tree_out: self.tree_out,
        }
    }

    fn into_spec(self, command: Command) -> Result<CaseSpec, String> {
        let mut spec = match &self.spec {
            None => CaseSpec::default(),
            Some(path) => {
                let cases = load_cases(path).map_err(|e| e.to_string())?;
                match &self.case {
                    Some(id) => cases
                        .into_iter()
                        .find(|c| c.id.as_deref() == Some(id.as_str()))
                        .ok_or_else(|| format!("no case `{id}` in {}", path.display()))?,
                    None if cases.len() == 1 => cases.into_iter().next().expect("one case"),
                    None => return Err(format!("{} holds {} cases; pick one with --case", path.display(), cases.len())),
                }
            }
        };
        if spec.command.is_some_and(|c| c != command) {
            return Err(format!("case is for `{}`, not `{command}`", spec.command.expect("checked")));
        }
        spec.overlay(&self.flags());
        spec.command = Some(command);
        Ok(spec)
    }
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn single(command: Command, args: CaseArgs) -> ExitCode {
    let spec = match args.into_spec(command) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(Status::Usage.exit_code());
        }
    };
    let outcome = run::run(&spec);
    let text = render(&outcome.report);
    match &spec.json_out {
        Some(path) => {
            if let Err(e) = write_atomic(path, text.as_bytes()) {
                eprintln!("error: writing {}: {e}", path.display());
                return exit(Status::Usage.exit_code());
            }
        }
        None => print!("{text}"),
    }
    if let Some(m) = &outcome.message {
        eprintln!("{}: {m}", outcome.status.name());
    }
    exit(outcome.status.exit_code())
}

fn run_batch(args: BatchArgs) -> ExitCode {
    let cases = match load_cases(&args.file) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(Status::Usage.exit_code());
        }
    };
    let rows = batch::run_batch(&cases, args.reports_dir.as_deref(), !args.no_timing);
    let csv = batch::summary_csv(&rows);
    match &args.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, csv.as_bytes()) {
                eprintln!("error: writing {}: {e}", path.display());
                return exit(Status::Usage.exit_code());
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Status::Usage.exit_code() } else { 0 };
            let _ = e.print();
            return exit(code);
        }
    };
    match cli.cmd {
        Cmd::Classify(a) => single(Command::Classify, a),
        Cmd::Dimension(a) => single(Command::Dimension, a),
        Cmd::VerifyUbiquity(a) => single(Command::VerifyUbiquity, a),
        Cmd::QuasiIndependence(a) => single(Command::QuasiIndependence, a),
        Cmd::BuildCantor(a) => single(Command::BuildCantor, a),
        Cmd::Measure(a) => single(Command::Measure, a),
        Cmd::Enumerate(a) => single(Command::Enumerate, a),
        Cmd::Batch(a) => run_batch(a),
    }
}
