//! `soliton`: run identity checks, hypothesis gates, Omori-Yau sequences and
//! translator profiles from a JSON experiment config.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use soliton_core::GeomError;

use crate::config::{ExperimentConfig, ProfileConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed config. Exit code 2.
    Config(String),
    /// A numerical routine gave up. Exit code 1.
    Math(String),
}

impl CliError {
    /// Building charts and sequences: out-of-domain requests are config mistakes too.
    pub fn setup(e: GeomError) -> Self {
        match e {
            GeomError::Domain(m) => CliError::Config(format!("domain error: {m}")),
            e => e.into(),
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::InvalidInput(_) | GeomError::Parse(_) => CliError::Config(e.to_string()),
            e => CliError::Math(e.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Math(m) => write!(f, "math error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "soliton", version, about = "Experiments on translating solitons of the r-mean curvature flow")]
struct Cli {
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the JSON report and any data files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the mesh resolution (grid side, random count or radii per ray).
    #[arg(long, global = true)]
    mesh: Option<usize>,
    /// Seed for the random matrices of verify-identities.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Algebraic and differential identities on a chart.
    VerifyIdentities,
    /// Hypothesis gate, first exit and drives for each region in the config.
    TheoremCheck,
    /// Rotational translator profile.
    Profile {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Re-export a previously written profile CSV.
        #[arg(long)]
        import: Option<PathBuf>,
    },
    /// Omori-Yau sequence on the configured surface.
    OyRun,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyIdentities => "verify-identities",
            Command::TheoremCheck => "theorem-check",
            Command::Profile { .. } => "profile",
            Command::OyRun => "oy-run",
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(String, Option<PathBuf>, commands::Outcome), CliError> {
    let raw = match &cli.config {
        Some(p) => Some(read(p)?),
        None => None,
    };
    let cfg = raw.as_deref().map(config::parse).transpose()?;
    let hash = report::sha256_hex(raw.as_deref().unwrap_or("").as_bytes());
    let need = |c: &Option<ExperimentConfig>| -> Result<ExperimentConfig, CliError> {
        c.clone().ok_or_else(|| CliError::Config("this command needs --config".into()))
    };
    let outcome = match &cli.command {
        Command::VerifyIdentities => commands::verify_identities(&need(&cfg)?, cli.mesh, cli.seed)?,
        Command::TheoremCheck => commands::theorem_check(&need(&cfg)?, cli.mesh)?,
        Command::OyRun => commands::oy_run(&need(&cfg)?, cli.mesh)?,
        Command::Profile { n, r, r_max, tol, import } => {
            let base = cfg.as_ref().and_then(|c| c.profile.clone());
            let pc = match (n, base) {
                (Some(n), base) => {
                    let b = base.unwrap_or(ProfileConfig { n: *n, r: 1, r_max: 100.0, tol: 1e-10 });
                    Some(ProfileConfig { n: *n, r: r.unwrap_or(b.r), r_max: r_max.unwrap_or(b.r_max), tol: tol.unwrap_or(b.tol) })
                }
                (None, Some(b)) => Some(ProfileConfig {
                    n: b.n,
                    r: r.unwrap_or(b.r),
                    r_max: r_max.unwrap_or(b.r_max),
                    tol: tol.unwrap_or(b.tol),
                }),
                (None, None) => None,
            };
            let text = match import {
                Some(p) => Some(read(p)?),
                None => None,
            };
            commands::profile(pc.as_ref(), text.as_deref())?
        }
    };
    let out_dir = cli.out.clone().or_else(|| cfg.as_ref().and_then(|c| c.out.clone()).map(PathBuf::from));
    Ok((hash, out_dir, outcome))
}

fn write_outputs(dir: &Path, command: &str, report: &str, files: &[(String, String)]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Config(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(format!("{command}.json")), report).map_err(io)?;
    for (name, content) in files {
        std::fs::write(dir.join(name), content).map_err(io)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let command = cli.command.name();
    let (hash, out_dir, outcome) = match run(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("soliton {command}: {e}");
            return ExitCode::from(match e {
                CliError::Config(_) => 2,
                CliError::Math(_) => 1,
            });
        }
    };
    let mut doc = serde_json::Map::new();
    doc.insert("header".into(), report::header(command, &hash));
    doc.insert("result".into(), outcome.body);
    let text = report::render(&serde_json::Value::Object(doc));
    print!("{text}");
    if let Some(dir) = out_dir {
        if let Err(e) = write_outputs(&dir, command, &text, &outcome.files) {
            eprintln!("soliton {command}: {e}");
            return ExitCode::from(2);
        }
    }
    match outcome.verdict {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("soliton {command}: {msg}");
            ExitCode::from(1)
        }
    }
}
