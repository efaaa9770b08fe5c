use clap::{Args, Parser, Subcommand};
use reldiff_cli::{run, CliError, Experiment, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Relativistic velocity diffusion experiments.
#[derive(Parser)]
#[command(name = "reldiff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Friction run relaxing to the Juttner equilibrium.
    Equilibrium(Common),
    /// Force-free ensemble against the hyperbolic heat kernel.
    Transition(Common),
    /// Crank-Nicolson solution of the radial Fokker-Planck equation.
    Pde(Common),
    /// Lorentz boost of an equilibrium ensemble.
    Boost(Common),
    /// Relativistic and nonrelativistic kernels on a rapidity grid.
    Figure1(Common),
    /// Radial operator consistency of the photon kernel.
    PhotonCheck(Common),
    /// Quadrature and closed-form identities.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; affects wall time only.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::Equilibrium(c) => (Experiment::Equilibrium, c),
            Command::Transition(c) => (Experiment::Transition, c),
            Command::Pde(c) => (Experiment::Pde, c),
            Command::Boost(c) => (Experiment::Boost, c),
            Command::Figure1(c) => (Experiment::Figure1, c),
            Command::PhotonCheck(c) => (Experiment::PhotonCheck, c),
            Command::OracleCheck(c) => (Experiment::OracleCheck, c),
        }
    }
}

fn load(experiment: Experiment, args: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::new(experiment),
    };
    if cfg.experiment != experiment {
        return Err(CliError::Config(format!(
            "config is for `{}` but the subcommand is `{}`",
            cfg.experiment.name(),
            experiment.name()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.numerics.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output.directory = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(experiment: Experiment, args: Common) -> Result<i32, CliError> {
    let cfg = load(experiment, &args)?;
    let threads = args.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
    let report = pool.install(|| run(&cfg))?;
    for c in &report.outcome.checks {
        println!("{} {} = {:.6e} (threshold {:e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    for f in &report.files {
        log::info!("wrote {}", f.display());
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (experiment, args) = Cli::parse().command.split();
    let code = execute(experiment, args).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
