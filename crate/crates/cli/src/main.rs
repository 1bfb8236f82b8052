mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{tolerance_from_env, CommandKind, ConfigError, NumOrText, Overrides, RunConfig};

/// Data generator for entanglement transfer between spin pairs.
///
/// Settings come from flags and an optional JSON file given with --config;
/// flags win. Angles accept radians or forms such as pi/4 and 3pi/32.
/// SPIN_TRANSFER_TOL overrides the algebraic tolerance used by `verify`.
#[derive(Debug, Parser)]
#[command(name = "spin-transfer", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Target-pair Schmidt angle.
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta1: Option<String>,
    /// Qubit source-pair Schmidt angle (fig2).
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta2: Option<String>,
    /// Qutrit source pair: A, B, C or amplitudes k0,k1,k2.
    #[arg(long, global = true)]
    sp: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    t_start: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    t_stop: Option<String>,
    #[arg(long, global = true)]
    t_points: Option<usize>,
    /// Initial target negativity for iterate and the fig4 fold line.
    #[arg(long, global = true)]
    e0: Option<f64>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// pure-reset or mixed.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Search budget GRID:REFINEMENTS (default 60:3).
    #[arg(long, global = true)]
    budget: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Region sample count for fig3.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Number of target angles in [0, pi/4] for fig4.
    #[arg(long, global = true)]
    theta_points: Option<usize>,
    /// Output file; `-` writes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// JSON file with default settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Subcommand)]
enum Cmd {
    /// Target negativity and reduced-state entries over time.
    Fig2,
    /// Qutrit invariant region samples and the per-angle maxima.
    Fig3,
    /// Half-period negativity curves against the target angle, plus fold line.
    Fig4,
    /// Iterated transfer with fresh source pairs.
    Iterate,
    /// Best qutrit source state for one target angle.
    Maximize,
    /// Analytic-versus-numeric self checks.
    Verify,
}

impl Cli {
    fn kind(&self) -> CommandKind {
        match self.command {
            Cmd::Fig2 => CommandKind::Fig2,
            Cmd::Fig3 => CommandKind::Fig3,
            Cmd::Fig4 => CommandKind::Fig4,
            Cmd::Iterate => CommandKind::Iterate,
            Cmd::Maximize => CommandKind::Maximize,
            Cmd::Verify => CommandKind::Verify,
        }
    }

    fn overrides(self) -> Overrides {
        Overrides {
            command: None,
            theta1: self.theta1.map(NumOrText::Text),
            theta2: self.theta2.map(NumOrText::Text),
            sp: self.sp.map(NumOrText::Text),
            t_start: self.t_start.map(NumOrText::Text),
            t_stop: self.t_stop.map(NumOrText::Text),
            t_points: self.t_points,
            e0: self.e0,
            steps: self.steps,
            mode: self.mode,
            budget: self.budget.map(NumOrText::Text),
            seed: self.seed,
            out: self.out,
            format: self.format,
            samples: self.samples,
            theta_points: self.theta_points,
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let kind = cli.kind();
    let base = match &cli.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let tolerance = tolerance_from_env(std::env::var(config::TOLERANCE_ENV).ok())?;
    let cfg = RunConfig::resolve(kind, base.overlay(cli.overrides()), tolerance)?;
    commands::run(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let broken_pipe = e
                .chain()
                .filter_map(|c| c.downcast_ref::<std::io::Error>())
                .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe);
            if broken_pipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
