use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bosonet_cli::analyze::{self, Source};
use bosonet_cli::config::{preset, resolve, ExperimentConfig, PRESETS};
use bosonet_cli::record::Payload;
use bosonet_cli::run::{run_sweep, run_train};
use bosonet_cli::CliError;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bosonet", version, about = "Train and evaluate bosonic sensor-network classifiers")]
struct Cli {
    /// Output root; each run writes to a directory named by its config hash.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    /// Overrides `train.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigSource {
    /// JSON experiment configuration.
    #[arg(long, conflicts_with = "figure")]
    config: Option<PathBuf>,
    /// Built-in figure preset.
    #[arg(long)]
    figure: Option<String>,
}

#[derive(Args)]
struct StateSource {
    /// Trained record (`record.json` or its directory).
    #[arg(long, conflicts_with = "vacuum")]
    record: Option<PathBuf>,
    /// Analyse the vacuum instead of a record.
    #[arg(long)]
    vacuum: bool,
    /// Cutoff used with `--vacuum`.
    #[arg(long, default_value_t = 20)]
    cutoff: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration.
    Train(ConfigSource),
    /// Sweep the configured axis and write one CSV per method.
    Sweep(ConfigSource),
    #[command(subcommand)]
    Analyze(Analysis),
}

#[derive(Subcommand)]
enum Analysis {
    /// Wigner function of the trained probe on its first data mode.
    Wigner {
        #[command(flatten)]
        source: StateSource,
        #[arg(long, default_value_t = 4.0)]
        half_width: f64,
        #[arg(long, default_value_t = 81)]
        points: usize,
    },
    /// Photon-number distribution of the trained probe.
    PhotonDist {
        #[command(flatten)]
        source: StateSource,
    },
    /// Checks the symplectic transform calculus on random probes.
    TransformCheck {
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long, default_value_t = 0.4)]
        r: f64,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        b: f64,
    },
}

fn load_config(src: &ConfigSource, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let text = match (&src.config, &src.figure) {
        (Some(path), _) => std::fs::read_to_string(path)
            .map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))?,
        (None, Some(name)) => preset(name)
            .ok_or_else(|| CliError::Config(format!("unknown figure `{name}` (available: {})", PRESETS.join(", "))))?
            .to_string(),
        (None, None) => return Err(CliError::Config("pass --config <path> or --figure <preset>".into())),
    };
    resolve(&text, std::env::vars(), seed)
}

fn state_source(s: &StateSource) -> Result<Source<'_>, CliError> {
    match (&s.record, s.vacuum) {
        (Some(p), _) => Ok(Source::Record(p)),
        (None, true) => Ok(Source::Vacuum { cutoff: s.cutoff }),
        (None, false) => Err(CliError::MissingInput("pass --record <path> or --vacuum".into())),
    }
}

fn report(dir: &Path, payload: &Payload) {
    match payload {
        Payload::Train(r) => println!(
            "P_E = {:.6e}  |<n> - N_S| = {:.2e}  restart {}  -> {}",
            r.error,
            r.energy_residual,
            r.restart,
            dir.display()
        ),
        Payload::Sweep(s) => {
            for c in &s.curves {
                println!("{:<28} {} points", c.method, c.points.len());
            }
            for t in &s.thresholds {
                match t.epsilon_th {
                    Some(th) => println!("{} threshold at N_S = {}: {th:.4}", t.method, t.n_s),
                    None => println!("{} threshold at N_S = {}: none in range", t.method, t.n_s),
                }
            }
            println!("-> {}", dir.display());
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--workers: {e}")))?;
    }
    match &cli.command {
        Command::Train(src) => {
            let config = load_config(src, cli.seed)?;
            let (record, dir) = run_train(&config, &cli.out)?;
            report(&dir, &record.payload);
        }
        Command::Sweep(src) => {
            let config = load_config(src, cli.seed)?;
            let (record, dir) = run_sweep(&config, &cli.out)?;
            report(&dir, &record.payload);
        }
        Command::Analyze(Analysis::Wigner {
            source,
            half_width,
            points,
        }) => {
            analyze::run_wigner(&state_source(source)?, *half_width, *points, &cli.out)?;
            println!("-> {}", cli.out.join("wigner.csv").display());
        }
        Command::Analyze(Analysis::PhotonDist { source }) => {
            let dist = analyze::run_photon_dist(&state_source(source)?, &cli.out)?;
            let shown: Vec<String> = dist.iter().take(6).map(|p| format!("{p:.4}")).collect();
            println!("P(n) = {} ...  -> {}", shown.join(", "), cli.out.join("photon-dist.csv").display());
        }
        Command::Analyze(Analysis::TransformCheck { theta, r, a, b }) => {
            let report = analyze::run_transform_check(*theta, *r, (*a, *b), cli.seed.unwrap_or(0), &cli.out)?;
            for c in &report.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                println!("{mark} {:<52} {:.2e} (tol {:.0e})", c.name, c.deviation, c.tolerance);
            }
            if !report.passed() {
                return Err(CliError::Core(bosonet::Error::Transform("transform check failed".into())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
