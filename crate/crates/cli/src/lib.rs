//! The `c2e` command line: argument parsing, config merging, report output
//! and the exit code contract (0 pass, 1 fail, 2 bad input or precondition).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use c2e_core::geometry::{chart_by_name, chart_names};
use c2e_core::np::{chart_scalars, summarize, NPScalars, NullFrame};
use c2e_core::suites::{run_suite, Suite, SuiteConfig};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

pub const SCHEMA: u32 = 1;

/// Petrov filtration threshold used by `classify` unless `--tol` is given.
const CLASSIFY_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] c2e_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Numerical breakdowns count as failures; everything else is a
    /// configuration or precondition problem.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(c2e_core::Error::Numeric(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "c2e", version, about = "Jet-based verification of conformal and projective compatibility complexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Petrov type, invariants and genericity of Weyl scalars.
    Classify(ClassifyArgs),
    /// List the built-in charts.
    Charts,
}

#[derive(Debug, Default, Args)]
pub struct VerifyArgs {
    /// JSON file with any of the flag fields; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub suite: Option<Suite>,
    #[arg(long)]
    pub chart: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weyl scalars `Ψ0,…,Ψ4` for the np suite, complex written `re+imi`.
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    /// Explicit sample point `x1,…,xn`; repeat for several.
    #[arg(long = "at", allow_hyphen_values = true)]
    pub at: Vec<String>,
    /// Comma-separated check names to run instead of the whole suite.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct ClassifyArgs {
    /// Weyl scalars `Ψ0,…,Ψ4`, complex written `re+imi`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "chart")]
    pub psi: Option<String>,
    /// Lorentzian chart to read the scalars from, with `--at`.
    #[arg(long, requires = "at")]
    pub chart: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<String>,
    /// Threshold below which a scalar counts as zero.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fields of a `--config` file; the same names as the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub suite: Option<Suite>,
    pub chart: Option<String>,
    pub points: Option<usize>,
    pub trials: Option<usize>,
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub psi: Option<String>,
    pub at: Option<Vec<Vec<f64>>>,
    pub only: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// `a,b,c,d,e` with each entry a real or complex number such as `1`, `-2i`
/// or `0.5-1e-3i`.
pub fn parse_psi(s: &str) -> Result<NPScalars, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(CliError::Config(format!("--psi needs 5 comma-separated values, got {}", parts.len())));
    }
    let mut psi = [Complex64::new(0.0, 0.0); 5];
    for (slot, p) in psi.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| CliError::Config(format!("malformed complex number `{p}` in --psi")))?;
        if !slot.is_finite() {
            return Err(CliError::Config(format!("non-finite value `{p}` in --psi")));
        }
    }
    Ok(NPScalars(psi))
}

pub fn parse_point(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Config(format!("malformed coordinate `{x}` in `{s}`")))
        })
        .collect()
}

/// Flags over config file over suite defaults.
pub fn resolve(args: &VerifyArgs) -> Result<SuiteConfig, CliError> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let suite = args
        .suite
        .or(file.suite)
        .ok_or_else(|| CliError::Config("no suite given; use --suite or a config file".into()))?;
    let mut cfg = SuiteConfig::new(suite);
    cfg.chart = args.chart.clone().or(file.chart);
    cfg.points = args.points.or(file.points).unwrap_or(cfg.points);
    cfg.trials = args.trials.or(file.trials).unwrap_or(cfg.trials);
    cfg.order = args.order.or(file.order);
    cfg.tol = args.tol.or(file.tol);
    cfg.seed = args.seed.or(file.seed).unwrap_or(cfg.seed);
    cfg.psi = args.psi.as_deref().or(file.psi.as_deref()).map(parse_psi).transpose()?;
    cfg.at = if args.at.is_empty() {
        file.at.unwrap_or_default()
    } else {
        args.at.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?
    };
    if !cfg.at.is_empty() {
        cfg.points = cfg.at.len();
    }
    cfg.only = if args.only.is_empty() { file.only.unwrap_or_default() } else { args.only.clone() };
    cfg.validate()?;
    Ok(cfg)
}

/// The resolved configuration with every default filled in.
fn config_echo(cfg: &SuiteConfig) -> Value {
    let mut v = json!({
        "suite": cfg.suite,
        "chart": cfg.chart_name(),
        "points": cfg.points,
        "trials": cfg.trials,
        "order": cfg.order(),
        "tol": cfg.tol(),
        "seed": cfg.seed,
    });
    if let Some(psi) = &cfg.psi {
        v["psi"] = json!(psi);
    }
    if !cfg.at.is_empty() {
        v["at"] = json!(cfg.at);
    }
    if !cfg.only.is_empty() {
        v["only"] = json!(cfg.only);
    }
    v
}

/// A report document and whether every check in it passed.
pub struct Outcome {
    pub document: Value,
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let cfg = resolve(args)?;
    let start = Instant::now();
    let report = run_suite(&cfg)?;
    let passed = report.passed();
    let document = json!({
        "schema": SCHEMA,
        "command": "verify",
        "config": config_echo(&cfg),
        "passed": passed,
        "report": report,
        "timing": { "seconds": start.elapsed().as_secs_f64() },
    });
    Ok(Outcome { document, passed })
}

pub fn classify(args: &ClassifyArgs) -> Result<Outcome, CliError> {
    let tol = args.tol.unwrap_or(CLASSIFY_TOL);
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Config("tolerance must be positive".into()));
    }
    let (psi, frame, input) = match (&args.psi, &args.chart, &args.at) {
        (Some(s), None, _) => (parse_psi(s)?, NullFrame::canonical(), json!({ "psi": s })),
        (None, Some(chart), Some(at)) => {
            let p = parse_point(at)?;
            let c = chart_by_name(chart)?;
            if p.len() != c.dim() {
                return Err(c2e_core::Error::DimensionMismatch(c.dim(), p.len()).into());
            }
            let (psi, frame) = chart_scalars(c.as_ref(), &p)?;
            (psi, frame, json!({ "chart": c.name(), "at": p }))
        }
        _ => return Err(CliError::Config("classify needs --psi, or --chart with --at".into())),
    };
    let summary = summarize(&psi, &frame, tol)?;
    let document = json!({
        "schema": SCHEMA,
        "command": "classify",
        "config": { "input": input, "tol": tol },
        "psi": psi,
        "summary": summary,
    });
    Ok(Outcome { document, passed: true })
}

pub fn charts() -> Result<String, CliError> {
    let mut s = String::new();
    for name in chart_names() {
        let c = chart_by_name(name)?;
        let bounds: Vec<String> = c.sample_box().iter().map(|(a, b)| format!("[{a}, {b}]")).collect();
        s.push_str(&format!("{name:<16} dim {}  sample box {}\n", c.dim(), bounds.join(" × ")));
    }
    s.push_str("perturbed charts accept a seed suffix, e.g. perturbed:3\n");
    Ok(s)
}

/// Everything but the timing block; equal across runs with the same config.
pub fn report_body(document: &Value) -> Value {
    let mut v = document.clone();
    if let Some(o) = v.as_object_mut() {
        o.remove("timing");
    }
    v
}

fn emit(document: &Value, out: Option<&Path>, stdout: &mut impl Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(document).map_err(|e| CliError::Config(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

/// Runs a parsed command, writing output and diagnostics to the given
/// streams, and returns the exit code.
pub fn run(cli: &Cli, stdout: &mut impl Write, stderr: &mut impl Write) -> u8 {
    let result = match &cli.command {
        Command::Verify(a) => verify(a).and_then(|o| {
            emit(&o.document, a.out.as_deref(), stdout)?;
            if let Some(path) = &a.out {
                let r = &o.document["report"];
                writeln!(stdout, "{} on {}: {} ({})", r["suite"].as_str().unwrap_or(""), r["chart"].as_str().unwrap_or(""), if o.passed { "pass" } else { "FAIL" }, path.display())?;
            }
            Ok(o.exit_code())
        }),
        Command::Classify(a) => classify(a).and_then(|o| {
            emit(&o.document, a.out.as_deref(), stdout)?;
            Ok(o.exit_code())
        }),
        Command::Charts => charts().and_then(|s| {
            write!(stdout, "{s}")?;
            Ok(0)
        }),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(stderr, "error: {e}");
        e.exit_code()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_accepts_real_and_complex_entries() {
        let p = parse_psi("0, 1+2i,-i,0.5e-1-3i,2").unwrap();
        assert_eq!(p.0[1], Complex64::new(1.0, 2.0));
        assert_eq!(p.0[2], Complex64::new(0.0, -1.0));
        assert_eq!(p.0[3], Complex64::new(0.05, -3.0));
        assert_eq!(p.0[4], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn malformed_psi_is_rejected() {
        for bad in ["1,2,3,4", "1,2,3,4,5,6", "1,2,x,4,5", "1,2,,4,5", "1,2,inf,4,5"] {
            assert!(parse_psi(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn flags_win_over_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"suite": "proj", "chart": "perturbed2", "points": 3, "seed": 9}"#).unwrap();
        let args = VerifyArgs { config: Some(path), points: Some(7), ..Default::default() };
        let cfg = resolve(&args).unwrap();
        assert_eq!(cfg.suite, Suite::Proj);
        assert_eq!(cfg.chart.as_deref(), Some("perturbed2"));
        assert_eq!((cfg.points, cfg.seed), (7, 9));
    }

    #[test]
    fn unknown_config_fields_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"suite": "np", "colour": 1}"#).unwrap();
        let err = resolve(&VerifyArgs { config: Some(path), ..Default::default() }).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn explicit_points_set_the_count() {
        let args = VerifyArgs {
            suite: Some(Suite::BggFlat),
            at: vec!["0,0,0,0".into(), "0.1,-0.2,0,0.3".into()],
            ..Default::default()
        };
        let cfg = resolve(&args).unwrap();
        assert_eq!(cfg.points, 2);
        assert_eq!(cfg.at[1], [0.1, -0.2, 0.0, 0.3]);
    }
}
