//! Command-line front end: argument parsing, config loading, run log and
//! replay.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical
//! failure, 4 domain error (also a missing record or a config digest
//! mismatch on replay), 5 replay payload mismatch.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Error;
use commands::Effective;
use config::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

/// Environment variable naming the run log.
pub const LOG_ENV: &str = "UNIVLAB_LOG";
pub const DEFAULT_LOG: &str = "univlab-runs.jsonl";

#[derive(Debug, Parser)]
#[command(
    name = "univlab",
    version,
    about = "Numerical experiments on universality of Dirichlet L-functions"
)]
struct Cli {
    /// Run log (JSON Lines); defaults to $UNIVLAB_LOG, then ./univlab-runs.jsonl.
    #[arg(long, global = true)]
    log: Option<PathBuf>,
    /// Write the JSON payload here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the plot table (ud-test: h vs |Weyl sum|; scan: shift vs distance).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the Dirichlet characters of a modulus.
    Characters(CharactersArgs),
    /// Evaluate L(s, χ), optionally with L'(s, χ).
    Lvalue(LvalueArgs),
    /// Exact pathology data (m*, A, p*, k_p*, q*) of α.
    Pathology(PathologyArgs),
    /// Weyl sums and discrepancy of a shift sequence.
    UdTest(UdArgs),
    /// Mean-square diagnostics.
    Moments(MomentsArgs),
    /// Scan shifts for simultaneous approximation of targets.
    Scan(ScanArgs),
    /// Fit a twisted truncated Euler product to a target.
    Fit(FitArgs),
    /// Re-execute a logged run and compare payloads.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// TOML file with a section named after the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CharactersArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[arg(long)]
    modulus: Option<u64>,
    #[arg(long)]
    index: Option<u64>,
}

#[derive(Debug, Args)]
struct CharacterArgs {
    #[arg(long)]
    modulus: Option<u64>,
    #[arg(long)]
    index: Option<u64>,
}

#[derive(Debug, Args)]
struct LvalueArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    chi: CharacterArgs,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long)]
    derivative: bool,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct PathologyArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    /// e.g. "2pi*1/(1*log(2/1))" or a float.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    /// Replace the configured families by a single one with this α.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "alpha")]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "alpha")]
    b: Option<f64>,
}

impl FamilyArgs {
    fn family(&self) -> Option<FamilyConfig> {
        self.alpha.as_ref().map(|alpha| FamilyConfig {
            alpha: alpha.clone(),
            a: self.a.unwrap_or(1.0),
            b: self.b.unwrap_or(0.0),
            label: None,
        })
    }
}

#[derive(Debug, Args)]
struct UdArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_enum)]
    mode: Option<ModeConfig>,
    /// Comma-separated primes.
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    quad_step: Option<f64>,
    #[arg(long)]
    max_harmonic: Option<i64>,
    #[arg(long)]
    exclude_pathologies: bool,
}

#[derive(Debug, Args)]
struct MomentsArgs {
    #[arg(value_enum)]
    kind: Option<MomentKind>,
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    chi: CharacterArgs,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long)]
    y: Option<u64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    /// Integer shifts k = 2..=N instead of continuous τ.
    #[arg(long)]
    discrete: bool,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    refine: bool,
    /// Scan even if the family set is not admissible.
    #[arg(long)]
    allow_rejected: bool,
    /// Worker threads (0 = all cores); never changes the payload.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    chi: CharacterArgs,
    #[arg(long)]
    y: Option<u64>,
    #[arg(long)]
    sweeps: Option<usize>,
    /// Fit the product with a random twist from this seed over the same primes.
    #[arg(long)]
    planted_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// Zero-based record index in the run log.
    index: usize,
    /// Override the worker count of the recorded run.
    #[arg(long)]
    workers: Option<usize>,
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    /// SHA-256 of the canonical JSON of the effective config.
    pub digest: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub payload: Value,
    pub version: String,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) => EXIT_CONFIG,
            e if e.is_numeric() => EXIT_NUMERIC,
            _ => EXIT_DOMAIN,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn failure(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    failure(EXIT_CONFIG, format!("{}: {e}", path.display()))
}

/// Runs the command line `args` (including the program name) with the
/// process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs the command line `args` (including the program name), writing the
/// payload to `out` (unless `--out` is given) and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let tail: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli, tail, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn log_path(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(LOG_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_LOG))
}

fn execute(cli: Cli, tail: Vec<String>, out: &mut dyn Write) -> Result<(), Failure> {
    let log = log_path(cli.log);
    if let Command::Replay(r) = &cli.command {
        let report = replay(&log, r.index, r.workers)?;
        return emit(
            &serde_json::to_string(&report).expect("replay report serializes"),
            cli.out.as_deref(),
            out,
        );
    }
    let workers = match &cli.command {
        Command::Scan(s) => s.workers,
        _ => 0,
    };
    let effective = resolve(&cli.command, cli.csv.is_some())?;
    let digest = digest(&effective);
    let output = effective.execute(workers)?;
    let payload = canonical(&output.payload);
    if let Some(path) = &cli.csv {
        let table = output
            .csv
            .ok_or_else(|| failure(EXIT_CONFIG, format!("{} has no plot table", effective.name())))?;
        std::fs::write(path, table).map_err(|e| io_failure(path, e))?;
    }
    emit(&payload, cli.out.as_deref(), out)?;
    let record = RunRecord {
        command: effective.name().into(),
        args: tail,
        digest,
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        payload: output.payload,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    append_record(&log, &record)
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| io_failure(p, e)),
        None => writeln!(out, "{text}").map_err(|e| failure(EXIT_CONFIG, e.to_string())),
    }
}

/// Sorted-key compact JSON.
pub fn canonical(v: &Value) -> String {
    serde_json::to_string(v).expect("JSON values serialize")
}

/// SHA-256 (hex) of the canonical JSON of `{command, config}`.
fn digest(effective: &Effective) -> String {
    let doc = serde_json::json!({
        "command": effective.name(),
        "config": serde_json::to_value(effective).expect("configs serialize"),
    });
    Sha256::digest(canonical(&doc).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn append_record(path: &Path, record: &RunRecord) -> Result<(), Failure> {
    let line = serde_json::to_string(record).expect("records serialize");
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_failure(path, e))?;
    writeln!(file, "{line}").map_err(|e| io_failure(path, e))
}

/// Reads every record of a run log.
pub fn read_log(path: &Path) -> Result<Vec<RunRecord>, Error> {
    let file = std::fs::File::open(path).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?;
    BufReader::new(file)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| {
            let l = l.map_err(|e| Error::Domain(e.to_string()))?;
            serde_json::from_str(&l).map_err(|e| Error::Domain(format!("malformed run record: {e}")))
        })
        .collect()
}

/// Flags and config file merged into the effective config.
fn resolve(command: &Command, csv: bool) -> Result<Effective, Error> {
    Ok(match command {
        Command::Characters(a) => {
            let mut c: CharactersConfig = load_section(a.cfg.config.as_deref(), "characters")?;
            c.modulus = a.modulus.or(c.modulus);
            c.index = a.index.or(c.index);
            Effective::Characters(c)
        }
        Command::Lvalue(a) => {
            let mut c: LvalueConfig = load_section(a.cfg.config.as_deref(), "lvalue")?;
            set(&mut c.modulus, a.chi.modulus);
            set(&mut c.index, a.chi.index);
            c.sigma = a.sigma.or(c.sigma);
            set(&mut c.t, a.t);
            c.derivative |= a.derivative;
            c.tol = a.tol.or(c.tol);
            Effective::Lvalue(c)
        }
        Command::Pathology(a) => {
            let mut c: PathologyConfig = load_section(a.cfg.config.as_deref(), "pathology")?;
            c.alpha = a.alpha.clone().or(c.alpha);
            Effective::Pathology(c)
        }
        Command::UdTest(a) => {
            let mut c: UdConfig = load_section(a.cfg.config.as_deref(), "ud-test")?;
            if let Some(f) = a.family.family() {
                c.families = vec![f];
            }
            set(&mut c.mode, a.mode);
            if let Some(p) = &a.primes {
                c.primes = p.clone();
            }
            set(&mut c.n, a.n);
            set(&mut c.t, a.t);
            set(&mut c.quad_step, a.quad_step);
            set(&mut c.max_harmonic, a.max_harmonic);
            c.exclude_pathologies |= a.exclude_pathologies;
            Effective::UdTest(c)
        }
        Command::Moments(a) => {
            let mut c: MomentsConfig = load_section(a.cfg.config.as_deref(), "moments")?;
            c.kind = a.kind.or(c.kind);
            set(&mut c.modulus, a.chi.modulus);
            set(&mut c.index, a.chi.index);
            if let Some(f) = a.family.family() {
                c.family = f;
            }
            set(&mut c.sigma, a.sigma);
            set(&mut c.t, a.t);
            set(&mut c.y, a.y);
            set(&mut c.t_max, a.t_max);
            set(&mut c.step, a.step);
            set(&mut c.x, a.x);
            set(&mut c.seed, a.seed);
            Effective::Moments(c)
        }
        Command::Scan(a) => {
            let mut c: ScanConfig = load_section(a.cfg.config.as_deref(), "scan")?;
            if a.discrete {
                c.mode = ModeConfig::Discrete;
            }
            set(&mut c.epsilon, a.epsilon);
            set(&mut c.t, a.t);
            set(&mut c.step, a.step);
            set(&mut c.n, a.n);
            c.refine |= a.refine;
            c.allow_rejected |= a.allow_rejected;
            c.record_samples |= csv;
            Effective::Scan(c)
        }
        Command::Fit(a) => {
            let mut c: FitConfig = load_section(a.cfg.config.as_deref(), "fit")?;
            set(&mut c.modulus, a.chi.modulus);
            set(&mut c.index, a.chi.index);
            set(&mut c.y, a.y);
            set(&mut c.sweeps, a.sweeps);
            if let Some(seed) = a.planted_seed {
                c.target = TargetConfig::Planted { seed, y: c.y };
            }
            Effective::Fit(c)
        }
        Command::Replay(_) => return Err(Error::Config("a replay cannot be replayed".into())),
    })
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

/// Outcome of a successful replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub index: usize,
    pub command: String,
    pub digest: String,
    pub payload_bytes: usize,
}

/// Re-resolves the recorded command line, checks the config digest, runs it
/// again and byte-compares the canonical payloads.
fn replay(log: &Path, index: usize, workers: Option<usize>) -> Result<ReplayReport, Failure> {
    let records = read_log(log)?;
    let record = records.get(index).ok_or_else(|| {
        failure(
            EXIT_DOMAIN,
            format!(
                "no record {index} in {} ({} records)",
                log.display(),
                records.len()
            ),
        )
    })?;
    let argv = std::iter::once("univlab".to_string()).chain(record.args.iter().cloned());
    let cli = Cli::try_parse_from(argv)
        .map_err(|e| failure(EXIT_DOMAIN, format!("recorded arguments no longer parse: {e}")))?;
    let recorded_workers = match &cli.command {
        Command::Scan(s) => s.workers,
        _ => 0,
    };
    let effective = resolve(&cli.command, cli.csv.is_some()).map_err(|e| {
        failure(
            EXIT_DOMAIN,
            format!("recorded config cannot be reconstructed: {e}"),
        )
    })?;
    let now = digest(&effective);
    if now != record.digest {
        return Err(failure(
            EXIT_DOMAIN,
            format!("config digest mismatch: recorded {}, now {now}", record.digest),
        ));
    }
    let output = effective.execute(workers.unwrap_or(recorded_workers))?;
    let fresh = canonical(&output.payload);
    if fresh != canonical(&record.payload) {
        return Err(failure(
            EXIT_MISMATCH,
            format!("payload of record {index} differs on replay"),
        ));
    }
    Ok(ReplayReport {
        index,
        command: record.command.clone(),
        digest: now,
        payload_bytes: fresh.len(),
    })
}
