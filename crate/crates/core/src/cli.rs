//! Command-line front end shared by the `covcut` binary.
//!
//! Exit codes: 0 on success (including runs where some trials failed), 2 for
//! configuration problems, 1 for runtime failures. Errors are reported on
//! stderr as a single JSON object `{"error": <code>, "message": <text>}`.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::channelgen::{save_covariance, write_covariance};
use crate::error::Error;
use crate::sim::{
    monte_carlo_summary, trial_channel, trial_rng, write_rounds_jsonl, write_solver_trace_csv, write_summary_csv,
    ExperimentConfig, RunOptions,
};

/// Environment variable holding the log filter (e.g. `info`, `covcut=debug`).
pub const LOG_ENV: &str = "COVCUT_LOG";

#[derive(Debug, Parser)]
#[command(name = "covcut", version, about = "Channel covariance reconstruction from PMI/CQI feedback")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Monte-Carlo experiment and write summary.csv, rounds.jsonl and config.resolved.json.
    Run(RunArgs),
    /// Write one trial's ground-truth covariance in the covariance CSV format.
    GenChannel(GenChannelArgs),
    /// Write the configured Type I codebook as CSV (one codeword per row, re,im interleaved).
    DumpCodebook(DumpCodebookArgs),
    /// Check a configuration and print it fully resolved.
    Validate(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Experiment configuration (JSON). Omitted keys take the desk defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set center.lambda=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to the number of available processors.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write solver_trace.csv with per-iteration solver progress.
    #[arg(long)]
    pub solver_trace: bool,
}

#[derive(Debug, Args)]
pub struct GenChannelArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trial whose channel is generated.
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
}

#[derive(Debug, Args)]
pub struct DumpCodebookArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with its exit status and machine-readable code.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub code: String,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            exit_code: 2,
            code: "config".into(),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.code, "message": self.message }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit_code = match e {
            Error::Config(_) | Error::Json(_) | Error::Parse { .. } => 2,
            _ => 1,
        };
        Self {
            exit_code,
            code: e.code().into(),
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

/// Apply `key=value` to a JSON object. Dotted keys address nested objects and
/// must already exist; the value is parsed as JSON, or taken as a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override {assignment:?} is not KEY=VALUE")))?;
    let mut node = root;
    for part in key.split('.') {
        node = node
            .as_object_mut()
            .and_then(|o| o.get_mut(part))
            .ok_or_else(|| CliError::config(format!("unknown configuration key {key:?}")))?;
    }
    *node = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok(())
}

/// Parse the config file (or defaults), then apply `--set` and flag overrides.
pub fn resolve_config(args: &ConfigArgs) -> Result<ExperimentConfig, CliError> {
    let base: ExperimentConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{} does not match the schema: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    let mut value = serde_json::to_value(&base).map_err(Error::from)?;
    for o in &args.overrides {
        apply_override(&mut value, o)?;
    }
    let mut cfg: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| CliError::config(format!("override rejected: {e}")))?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(r) = args.rounds {
        cfg.rounds = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json_pretty(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value).map_err(Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve_config(&args.config)?;
    fs::create_dir_all(&args.out)?;
    write_json_pretty(&args.out.join("config.resolved.json"), &cfg)?;
    let opts = RunOptions {
        jobs: args.jobs.unwrap_or(0),
        solver_trace: args.solver_trace,
    };
    log::info!("running {} trials of {} rounds", cfg.trials, cfg.rounds);
    let summary = monte_carlo_summary(&cfg, opts)?;

    let mut csv = BufWriter::new(File::create(args.out.join("summary.csv"))?);
    write_summary_csv(&summary, &mut csv)?;
    csv.flush()?;
    let mut jsonl = BufWriter::new(File::create(args.out.join("rounds.jsonl"))?);
    write_rounds_jsonl(&summary, &mut jsonl)?;
    jsonl.flush()?;
    if args.solver_trace {
        let mut trace = BufWriter::new(File::create(args.out.join("solver_trace.csv"))?);
        write_solver_trace_csv(&summary, &mut trace)?;
        trace.flush()?;
    }
    let failures_path = args.out.join("failures.json");
    if summary.failures.is_empty() {
        if failures_path.exists() {
            fs::remove_file(&failures_path)?;
        }
    } else {
        write_json_pretty(&failures_path, &summary.failures)?;
    }

    let report = serde_json::json!({
        "trials": cfg.trials,
        "succeeded": summary.trials.len(),
        "failed": summary.failures.len(),
        "out": args.out,
    });
    println!("{report}");
    if summary.trials.is_empty() {
        let first = &summary.failures[0];
        return Err(CliError {
            exit_code: 1,
            code: first.code.clone(),
            message: format!("all {} trials failed; first: {}", cfg.trials, first.message),
        });
    }
    Ok(())
}

fn gen_channel(args: &GenChannelArgs) -> Result<(), CliError> {
    let cfg = resolve_config(&args.config)?;
    let c = trial_channel(&cfg, &mut trial_rng(cfg.seed, args.trial))?;
    match &args.out {
        Some(p) => save_covariance(p, &c, false)?,
        None => {
            let mut out = output(None)?;
            write_covariance(&c, false, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn dump_codebook(args: &DumpCodebookArgs) -> Result<(), CliError> {
    let cfg = resolve_config(&args.config)?;
    let book = cfg.build_codebook()?;
    let mut out = output(args.out.as_deref())?;
    book.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn validate(args: &ConfigArgs) -> Result<(), CliError> {
    let cfg = resolve_config(args)?;
    println!("{}", serde_json::to_string_pretty(&cfg).map_err(Error::from)?);
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => run(a),
        Command::GenChannel(a) => gen_channel(a),
        Command::DumpCodebook(a) => dump_codebook(a),
        Command::Validate(a) => validate(a),
    }
}

/// Entry point for the binary: parse arguments, initialize logging from
/// `COVCUT_LOG`, execute and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError {
                exit_code: 2,
                code: "usage".into(),
                message: e.to_string().trim().to_string(),
            };
            eprintln!("{}", err.to_json());
            return err.exit_code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_address_existing_keys() {
        let mut v = serde_json::to_value(ExperimentConfig::default()).unwrap();
        apply_override(&mut v, "center.lambda=0.25").unwrap();
        apply_override(&mut v, "cut.sigma={\"kind\":\"geometric\",\"delta\":0.2}").unwrap();
        apply_override(&mut v, "center.reg_sign=as_printed").unwrap();
        let cfg: ExperimentConfig = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(cfg.center.lambda, 0.25);
        assert_eq!(cfg.center.reg_sign, crate::center::RegSign::AsPrinted);
        assert!(apply_override(&mut v, "center.lamda=1").is_err());
        assert!(apply_override(&mut v, "rounds").is_err());
    }

    #[test]
    fn error_codes_map_to_exit_status() {
        assert_eq!(CliError::from(Error::Config("x".into())).exit_code, 2);
        assert_eq!(CliError::from(Error::InfeasibleProblem("x".into())).exit_code, 1);
        let json: Value = serde_json::from_str(&CliError::config("bad").to_json()).unwrap();
        assert_eq!(json["error"], "config");
    }

    #[test]
    fn flags_override_config() {
        let args = ConfigArgs {
            config: None,
            overrides: vec!["antennas=16".into()],
            trials: Some(3),
            rounds: Some(2),
            seed: Some(9),
        };
        let cfg = resolve_config(&args).unwrap();
        assert_eq!((cfg.antennas, cfg.trials, cfg.rounds, cfg.seed), (16, 3, 2, 9));
        let bad = ConfigArgs {
            overrides: vec!["ports=32".into()],
            ..args
        };
        let err = resolve_config(&bad).unwrap_err();
        assert_eq!(err.exit_code, 2);
        assert!(err.message.contains("N_P ≤ N_A"));
    }
}
