//! Command-line front end. [`run`] parses arguments, resolves the
//! configuration and dispatches to one of the subcommands; it returns the
//! process exit status.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{
    Arg, ArgAction, ArgMatches, Command, CommandFactory, FromArgMatches, Parser, Subcommand,
};
use comir_diag::io::ExperimentConfig;
use comir_diag::{Error, Result};

mod logger;
mod mds;
mod metrics;
mod register;
mod report;
mod spectrum;
mod svg;
mod train;

pub const ENV_OUT_DIR: &str = "COMIR_OUT_DIR";
pub const ENV_THREADS: &str = "COMIR_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "comir-diag",
    version,
    about = "Contrastive representation diagnostics"
)]
pub struct Cli {
    /// TOML experiment description; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for per-pair work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Repeat for more log output on stderr.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Train the twin toy encoders and write the trace and embeddings.
    TrainToy,
    /// Register image pairs with SIFT + RANSAC and score the results.
    Register(register::RegisterArgs),
    /// Compare aligned image pairs with pixel and distance metrics.
    EvalMetrics(metrics::EvalArgs),
    /// Sammon-stress MDS layout of pooled embeddings or a dissimilarity matrix.
    Mds(mds::MdsArgs),
    /// Singular-value spectrum and collapse metrics of an embedding matrix.
    Spectrum(spectrum::SpectrumArgs),
    /// Collect the summaries of several run directories into one table.
    Report(report::ReportArgs),
}

/// Config sections each subcommand reads; their keys become flags.
const SECTIONS: [(&str, &[&str]); 6] = [
    (
        "train-toy",
        &["dataset", "encoder", "schedule", "loss", "optimizer"],
    ),
    ("register", &["registration", "sift", "ransac"]),
    ("eval-metrics", &["metrics", "ssim"]),
    ("mds", &["mds"]),
    ("spectrum", &["spectrum"]),
    ("report", &[]),
];

/// `section.key` → `--section-key`.
pub fn flag_for_key(key: &str) -> String {
    key.replace(['.', '_'], "-")
}

fn override_keys(subcommand: &str) -> Vec<String> {
    let sections = SECTIONS
        .iter()
        .find(|(n, _)| *n == subcommand)
        .map(|(_, s)| *s)
        .unwrap_or(&[]);
    ExperimentConfig::keys()
        .into_iter()
        .filter(|k| match k.split_once('.') {
            Some((section, _)) => sections.contains(&section),
            None => true,
        })
        .collect()
}

/// The full command tree, including one flag per relevant config key.
pub fn command() -> Command {
    let mut cmd = Cli::command();
    for (name, _) in SECTIONS {
        cmd = cmd.mut_subcommand(name, |mut sub| {
            for key in override_keys(name) {
                sub = sub.arg(
                    Arg::new(key.clone())
                        .long(flag_for_key(&key))
                        .value_name("VALUE")
                        .help(format!("Override config key `{key}`"))
                        .help_heading("Config overrides"),
                );
            }
            sub
        });
    }
    cmd
}

/// Resolved settings shared by the subcommands.
pub struct Context {
    pub config: ExperimentConfig,
    pub pool: rayon::ThreadPool,
}

impl Context {
    pub fn out_dir(&self) -> &std::path::Path {
        &self.config.output_dir
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }
}

/// Precedence: defaults, config file, environment, flags.
fn resolve(cli: &Cli, sub: &ArgMatches, subcommand: &str) -> Result<Context> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = std::env::var_os(ENV_OUT_DIR).filter(|d| !d.is_empty()) {
        config.output_dir = PathBuf::from(dir);
    }
    for key in override_keys(subcommand) {
        if let Some(v) = sub.get_one::<String>(&key) {
            config.set(&key, v)?;
        }
    }
    config.validate()?;

    let env_threads = match std::env::var(ENV_THREADS) {
        Ok(v) if !v.trim().is_empty() => Some(v.trim().parse::<usize>().map_err(|_| {
            Error::Config(format!(
                "{ENV_THREADS} must be a non-negative integer, got '{v}'"
            ))
        })?),
        _ => None,
    };
    let threads = cli.threads.or(env_threads).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    Ok(Context { config, pool })
}

fn dispatch(cli: &Cli, ctx: &Context) -> Result<()> {
    match &cli.command {
        Cmd::TrainToy => train::run(ctx),
        Cmd::Register(a) => register::run(ctx, a),
        Cmd::EvalMetrics(a) => metrics::run(ctx, a),
        Cmd::Mds(a) => mds::run(ctx, a),
        Cmd::Spectrum(a) => spectrum::run(ctx, a),
        Cmd::Report(a) => report::run(ctx, a),
    }
}

/// Runs the tool and returns the exit status: 0 on success, 1 for usage or
/// configuration errors, 2 for bad input data, 3 for numerical failures.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 1;
        }
    };
    logger::init(cli.verbose);
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let outcome = resolve(&cli, sub, name).and_then(|ctx| dispatch(&cli, &ctx));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("comir-diag {name}: {e}");
            e.exit_code()
        }
    }
}
