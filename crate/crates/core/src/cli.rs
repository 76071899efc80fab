//! Batch front end: load a triple, run the solver, write a report and
//! plot data. The `kvadeig` binary is a thin wrapper around [`main_with_args`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::deflation::DeflationMode;
use crate::error::{Error, Result};
use crate::fixtures::mobile_manipulator;
use crate::io::{load_bundle, load_triple};
use crate::linearization::QuadPencil;
use crate::scaling::{ScalingKind, ScalingParams};
use crate::solver::{solve, DeflationLedger, QepSolution, RankChoice, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Reference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    MobileManipulator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scale: ScalingKind,
    pub balance: bool,
    pub balance_weights: [f64; 3],
    pub rank_strategy: RankChoice,
    pub tau: Option<f64>,
    pub mode: DeflationMode,
    pub backend: Backend,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Record wall-clock timings (makes reports non-reproducible).
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let o = SolveOptions::default();
        Self {
            scale: o.scale,
            balance: o.balance,
            balance_weights: o.balance_weights,
            rank_strategy: o.rank_strategy,
            tau: o.tau,
            mode: o.mode,
            backend: Backend::Reference,
            seed: o.seed,
            output: None,
            format: Format::Json,
            timings: false,
        }
    }
}

impl RunConfig {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            scale: self.scale,
            balance: self.balance,
            balance_weights: self.balance_weights,
            rank_strategy: self.rank_strategy,
            tau: self.tau,
            mode: self.mode,
            seed: self.seed,
        }
    }
}

/// JSON has no infinity: write non-finite values as `null` and read `null`
/// back as `+∞`.
mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub index: usize,
    pub tag: String,
    /// Absent for infinite eigenvalues.
    pub re: Option<f64>,
    pub im: Option<f64>,
    #[serde(with = "inf_as_null")]
    pub modulus: f64,
    #[serde(with = "inf_as_null")]
    pub eta_right: f64,
    #[serde(with = "inf_as_null")]
    pub eta_left: f64,
    #[serde(with = "inf_as_null")]
    pub omega_right: f64,
    #[serde(with = "inf_as_null")]
    pub omega_left: f64,
    pub right_source: String,
    pub left_source: String,
    pub deflated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n: usize,
    pub finite: usize,
    pub zero: usize,
    pub infinite: usize,
    pub rows: Vec<ReportRow>,
    pub ledger: DeflationLedger,
    pub scaling: ScalingParams,
    pub left_exponents: Vec<i32>,
    pub right_exponents: Vec<i32>,
    pub backend: String,
    pub seed: u64,
    pub timings: Option<Timings>,
}

impl Report {
    pub fn from_solution(s: &QepSolution, timings: Option<Timings>) -> Self {
        let rows = s
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let v = p.value.value();
                ReportRow {
                    index: i,
                    tag: p.value.tag().to_string(),
                    re: v.map(|z| z.re),
                    im: v.map(|z| z.im),
                    modulus: p.value.modulus(),
                    eta_right: p.eta_right,
                    eta_left: p.eta_left,
                    omega_right: p.omega_right,
                    omega_left: p.omega_left,
                    right_source: p.right_source.clone(),
                    left_source: p.left_source.clone(),
                    deflated: p.deflated,
                }
            })
            .collect();
        Report {
            n: s.n,
            finite: s.finite_count(),
            zero: s.zero_count(),
            infinite: s.infinite_count(),
            rows,
            ledger: s.ledger.clone(),
            scaling: s.scaling,
            left_exponents: s.balancing.left_exponents.clone(),
            right_exponents: s.balancing.right_exponents.clone(),
            backend: s.backend.clone(),
            seed: s.options.seed,
            timings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per eigenpair.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record([
            "index",
            "tag",
            "re",
            "im",
            "abs",
            "eta_right",
            "eta_left",
            "omega_right",
            "omega_left",
            "right_source",
            "left_source",
            "deflated",
        ])
        .expect("in-memory write");
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
        for r in &self.rows {
            w.write_record([
                r.index.to_string(),
                r.tag.clone(),
                opt(r.re),
                opt(r.im),
                format!("{:e}", r.modulus),
                format!("{:e}", r.eta_right),
                format!("{:e}", r.eta_left),
                format!("{:e}", r.omega_right),
                format!("{:e}", r.omega_left),
                r.right_source.clone(),
                r.left_source.clone(),
                r.deflated.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

pub fn run(config: &RunConfig, p: &QuadPencil) -> Result<Report> {
    let t0 = Instant::now();
    let s = solve(p, &config.solve_options())?;
    let timings = config.timings.then(|| Timings {
        total_ms: t0.elapsed().as_secs_f64() * 1e3,
    });
    Ok(Report::from_solution(&s, timings))
}

/// Backward errors clamped below at ε, as plotted on a log scale.
pub fn plot_clamp(x: f64) -> f64 {
    x.max(f64::EPSILON)
}

/// CSV with columns `index, abs_lambda, eta_right, omega_right, tag`.
/// With `sort`, rows are ordered by nondecreasing `|λ|`.
pub fn plot_data(report: &Report, sort: bool) -> String {
    let mut rows: Vec<&ReportRow> = report.rows.iter().collect();
    if sort {
        rows.sort_by(|a, b| a.modulus.total_cmp(&b.modulus));
    }
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["index", "abs_lambda", "eta_right", "omega_right", "tag"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.index.to_string(),
            format!("{:e}", r.modulus),
            format!("{:e}", plot_clamp(r.eta_right)),
            format!("{:e}", plot_clamp(r.omega_right)),
            r.tag.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn emit_plot_data(report: &Report, path: &Path, sort: bool) -> Result<()> {
    std::fs::write(path, plot_data(report, sort))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub const COMPARE_MODES: [(&str, DeflationMode); 3] = [
    ("plain", DeflationMode::None),
    ("one-step", DeflationMode::OneStep),
    ("full", DeflationMode::Full),
];

/// The same problem under each deflation mode.
pub fn compare(config: &RunConfig, p: &QuadPencil) -> Result<Vec<(String, Report)>> {
    COMPARE_MODES
        .iter()
        .map(|&(name, mode)| {
            let c = RunConfig {
                mode,
                ..config.clone()
            };
            Ok((name.to_string(), run(&c, p)?))
        })
        .collect()
}

/// Side-by-side table: each mode's eigenpairs sorted by `|λ|`, clamped ω.
pub fn compare_table(runs: &[(String, Report)]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    let mut header = vec!["rank".to_string()];
    for (name, _) in runs {
        header.push(format!("{name}_abs_lambda"));
        header.push(format!("{name}_omega"));
    }
    w.write_record(&header).expect("in-memory write");
    let sorted: Vec<Vec<&ReportRow>> = runs
        .iter()
        .map(|(_, r)| {
            let mut v: Vec<&ReportRow> = r.rows.iter().collect();
            v.sort_by(|a, b| a.modulus.total_cmp(&b.modulus));
            v
        })
        .collect();
    let len = sorted.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..len {
        let mut rec = vec![i.to_string()];
        for rows in &sorted {
            match rows.get(i) {
                Some(r) => {
                    rec.push(format!("{:e}", r.modulus));
                    rec.push(format!("{:e}", plot_clamp(r.omega_right)));
                }
                None => rec.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn parse_weights(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid weight '{t}'"))
        })
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|v| format!("expected three weights M,C,K, got {}", v.len()))
}

/// Command-line arguments of the `kvadeig` binary.
#[derive(Debug, Parser)]
#[command(
    name = "kvadeig",
    version,
    about = "Complete solution of quadratic eigenvalue problems"
)]
pub struct Args {
    /// Matrix Market file with M.
    #[arg(long = "m", value_name = "PATH", requires_all = ["c_path", "k_path"], conflicts_with_all = ["bundle", "fixture"])]
    pub m_path: Option<PathBuf>,
    /// Matrix Market file with C.
    #[arg(long = "c", value_name = "PATH", requires = "m_path")]
    pub c_path: Option<PathBuf>,
    /// Matrix Market file with K.
    #[arg(long = "k", value_name = "PATH", requires = "m_path")]
    pub k_path: Option<PathBuf>,
    /// JSON bundle with n, M, C, K.
    #[arg(long, value_name = "PATH", conflicts_with = "fixture")]
    pub bundle: Option<PathBuf>,
    /// Built-in problem.
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,

    #[arg(long, value_enum, default_value = "flv")]
    pub scale: ScaleArg,
    #[arg(long, default_value_t = true, action = ArgAction::Set, value_name = "BOOL")]
    pub balance: bool,
    /// Balancing weights for M, C, K.
    #[arg(long, value_name = "M,C,K", value_parser = parse_weights, default_value = "1,1,1")]
    pub alpha: [f64; 3],
    #[arg(long, value_enum, default_value = "global-triple-norm")]
    pub rank_strategy: RankArg,
    /// Rank tolerance (default n·ε on M and K, 8n·ε on the linearization).
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum, default_value = "full")]
    pub deflation: ModeArg,
    #[arg(long, value_enum, default_value = "reference")]
    pub backend: Backend,
    #[arg(long, env = "KVADEIG_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Report destination (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Write plot data CSV here.
    #[arg(long, value_name = "PATH")]
    pub plot: Option<PathBuf>,
    /// Sort plot rows by |λ|.
    #[arg(long)]
    pub sort_plot: bool,
    /// Run plain, one-step and full deflation and print an ω table.
    #[arg(long)]
    pub compare: bool,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    None,
    Flv,
    TropicalPlus,
    TropicalMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RankArg {
    RelDiag,
    AbsMatrixNorm,
    GlobalTripleNorm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    None,
    OneStep,
    Full,
}

impl Args {
    pub fn config(&self) -> RunConfig {
        RunConfig {
            scale: match self.scale {
                ScaleArg::None => ScalingKind::None,
                ScaleArg::Flv => ScalingKind::Flv,
                ScaleArg::TropicalPlus => ScalingKind::TropicalPlus,
                ScaleArg::TropicalMinus => ScalingKind::TropicalMinus,
            },
            balance: self.balance,
            balance_weights: self.alpha,
            rank_strategy: match self.rank_strategy {
                RankArg::RelDiag => RankChoice::RelDiag,
                RankArg::AbsMatrixNorm => RankChoice::AbsMatrixNorm,
                RankArg::GlobalTripleNorm => RankChoice::GlobalTripleNorm,
            },
            tau: self.tau,
            mode: match self.deflation {
                ModeArg::None => DeflationMode::None,
                ModeArg::OneStep => DeflationMode::OneStep,
                ModeArg::Full => DeflationMode::Full,
            },
            backend: self.backend,
            seed: self.seed,
            output: self.output.clone(),
            format: self.format,
            timings: self.timings,
        }
    }

    pub fn load(&self) -> Result<QuadPencil> {
        match (
            &self.m_path,
            &self.c_path,
            &self.k_path,
            &self.bundle,
            self.fixture,
        ) {
            (Some(m), Some(c), Some(k), _, _) => load_triple(m, c, k),
            (_, _, _, Some(b), _) => load_bundle(b),
            (_, _, _, _, Some(Fixture::MobileManipulator)) => Ok(mobile_manipulator()),
            _ => Err(Error::InvalidOptions(
                "no input: give --m/--c/--k, --bundle or --fixture".into(),
            )),
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_SINGULAR: i32 = 2;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SingularPencil { .. } => EXIT_SINGULAR,
        _ => EXIT_FAILURE,
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn execute(args: &Args) -> Result<()> {
    let p = args.load()?;
    let config = args.config();
    if args.compare {
        let runs = compare(&config, &p)?;
        return write_out(config.output.as_deref(), &compare_table(&runs));
    }
    let report = run(&config, &p)?;
    if let Some(path) = &args.plot {
        emit_plot_data(&report, path, args.sort_plot)?;
    }
    write_out(config.output.as_deref(), &report.render(config.format))
}

/// Parse arguments, run, and return the process exit code. Usage errors
/// exit with 1 so that 2 stays reserved for singular pencils.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_FAILURE
            } else {
                EXIT_OK
            };
        }
    };
    match execute(&args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("kvadeig: {e}");
            exit_code(&e)
        }
    }
}
