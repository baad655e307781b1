//! The `triad` command line: config parsing, run orchestration and artifact
//! writing. The binary only forwards to [`main_with_args`].

mod commands;
mod config;
mod output;
mod reproduce;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::TriadError;

pub use config::{
    AnalyticConfig, CurveConfig, DatasetSource, Eta2Grid, EstimateConfig, GeneratorSource, PrivacyConfig,
    ReproduceConfig, Source, SpecRef,
};
pub use output::OutputDir;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "TRIAD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "triad", version, about = "Chernoff-difference analysis of noise, fairness and accuracy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Closed-form noisy CD curve and case report for an isotropic Gaussian quad.
    Analytic(RunArgs),
    /// Neural (or oracle) Chernoff information estimates per group and noise level.
    Estimate(RunArgs),
    /// Pareto fairness-accuracy curves and their slopes per noise level.
    Curve(RunArgs),
    /// (epsilon, delta) to noise-variance table.
    Privacy(RunArgs),
    /// All artifacts of one figure (fig1, fig2, fig3).
    Reproduce(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analytic(_) => "analytic",
            Command::Estimate(_) => "estimate",
            Command::Curve(_) => "curve",
            Command::Privacy(_) => "privacy",
            Command::Reproduce(_) => "reproduce",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Analytic(a)
            | Command::Estimate(a)
            | Command::Curve(a)
            | Command::Privacy(a)
            | Command::Reproduce(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "triad-out")]
    pub out: PathBuf,
    /// Base seed; overrides the config's `seed` (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Estimator profile; overrides the config's `profile` (default fast).
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Use the generator's exact densities instead of trained ratios.
    #[arg(long)]
    pub oracle_ratios: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Fast,
    Paper,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Fast => "fast",
            Profile::Paper => "paper",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] TriadError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Everything a command needs besides its typed config.
pub struct RunContext {
    pub command: &'static str,
    pub seed: u64,
    pub profile: Profile,
    pub oracle: bool,
    pub config_hash: String,
    /// Directory that relative paths in the config resolve against.
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl RunContext {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() { p.to_path_buf() } else { self.base_dir.join(p) }
    }

    /// Fields common to every manifest.
    pub fn manifest(&self, seeds: &[u64], files: &[String], extra: Value) -> Value {
        let mut m = json!({
            "tool": "triad",
            "version": crate::VERSION,
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "seeds": seeds,
            "profile": self.profile.name(),
            "oracle_ratios": self.oracle,
            "rng": crate::rng::RNG_NAME,
            "files": files,
        });
        if let (Value::Object(m), Value::Object(e)) = (&mut m, extra) {
            m.extend(e);
        }
        m
    }
}

/// Hex SHA-256 of the canonical (sorted-key, compact) JSON of everything that
/// determines a run's output.
pub fn config_hash(command: &str, config: &Value, seed: u64, profile: Profile, oracle: bool) -> String {
    let canonical = json!({
        "command": command,
        "config": config,
        "seed": seed,
        "profile": profile.name(),
        "oracle_ratios": oracle,
    });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    match run(&cli.command) {
        Ok(out) => {
            log::info!("wrote {}", out.display());
            0
        }
        Err(e) => {
            eprintln!("triad: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command and returns the output directory.
pub fn run(command: &Command) -> Result<PathBuf, CliError> {
    configure_threads()?;
    let args = command.args();
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| usage(format!("cannot read config {}: {e}", args.config.display())))?;
    let mut raw: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {} is not JSON: {e}", args.config.display())))?;
    let obj = raw.as_object_mut().ok_or_else(|| usage("config must be a JSON object"))?;
    let cfg_seed = match obj.remove("seed") {
        None => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| usage("config `seed` must be a non-negative integer"))?),
    };
    let cfg_profile = match obj.remove("profile") {
        None => None,
        Some(v) => Some(serde_json::from_value::<Profile>(v).map_err(|_| usage("config `profile` must be fast or paper"))?),
    };
    let seed = args.seed.or(cfg_seed).unwrap_or(0);
    let profile = args.profile.or(cfg_profile).unwrap_or_default();
    let ctx = RunContext {
        command: command.name(),
        seed,
        profile,
        oracle: args.oracle_ratios,
        config_hash: config_hash(command.name(), &raw, seed, profile, args.oracle_ratios),
        base_dir: args.config.parent().map(Path::to_path_buf).unwrap_or_default(),
        out_dir: args.out.clone(),
    };
    match command {
        Command::Analytic(_) => commands::analytic(&ctx, parse(raw)?)?,
        Command::Estimate(_) => commands::estimate(&ctx, parse(raw)?)?,
        Command::Curve(_) => commands::curve(&ctx, parse(raw)?)?,
        Command::Privacy(_) => commands::privacy(&ctx, parse(raw)?)?,
        Command::Reproduce(_) => reproduce::reproduce(&ctx, parse(raw)?)?,
    }
    Ok(ctx.out_dir)
}

fn parse<T: serde::de::DeserializeOwned>(raw: Value) -> Result<T, CliError> {
    serde_json::from_value(raw).map_err(|e| usage(format!("bad config: {e}")))
}

/// Builds the global worker pool from `TRIAD_THREADS` (once per process).
fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
    // A second call in the same process finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"quad": "gaussian-case1", "eta2": [0, 1]}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"eta2": [0, 1], "quad": "gaussian-case1"}"#).unwrap();
        let h = |v| config_hash("analytic", v, 1, Profile::Fast, false);
        assert_eq!(h(&a), h(&b));
        assert_ne!(h(&a), config_hash("analytic", &a, 2, Profile::Fast, false));
        assert_eq!(h(&a).len(), 64);
    }
}
