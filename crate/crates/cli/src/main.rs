use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

use rites_core::cases::BuiltinCase;
use rites_core::config::CaseConfig;
use rites_core::runner::{generate_case, run_case, validate_case, RunOutcome};
use rites_core::validation::reports_table;

#[derive(Parser)]
#[command(
    name = "rites",
    version,
    about = "Radiative transfer in enclosures with participating media"
)]
struct Cli {
    /// Worker threads for assembly (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the mesh and default configuration of a built-in case.
    Generate {
        #[arg(long, value_enum)]
        case: CaseArg,
        /// Elements per meter along each axis.
        #[arg(long, default_value_t = 4)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a configured case and write profiles and reports.
    Run(RunArgs),
    /// Solve a case and run the full oracle suite.
    Validate(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Cube,
    Lshape,
}

impl From<CaseArg> for BuiltinCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Cube => BuiltinCase::Cube,
            CaseArg::Lshape => BuiltinCase::Lshape,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    min_subdiv_area: Option<f64>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    dump_matrices: bool,
    #[arg(long)]
    dump_visibility: bool,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<CaseConfig> {
        let mut cfg = CaseConfig::load(&self.config)?;
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(v) = self.min_subdiv_area {
            cfg.visibility.min_subdiv_area = v;
        }
        if let Some(v) = self.quad_order {
            cfg.quadrature.order = v;
        }
        if let Some(v) = self.tol {
            cfg.solver.tolerance = v;
        }
        if let Some(v) = self.max_iter {
            cfg.solver.max_iterations = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.dump_matrices |= self.dump_matrices;
        cfg.dump_visibility |= self.dump_visibility;
        Ok(cfg)
    }
}

fn report(outcome: &RunOutcome) -> ExitCode {
    print!("{}", reports_table(&outcome.reports));
    println!(
        "outer iterations: {}, converged: {}",
        outcome.solution.iterations(),
        outcome.solution.converged
    );
    println!("results written to {}", outcome.output_dir.display());
    if outcome.success() {
        ExitCode::SUCCESS
    } else {
        if !outcome.solution.converged {
            error!("solver did not converge");
        }
        for r in outcome.reports.iter().filter(|r| !r.pass) {
            error!("check {} failed", r.name);
        }
        ExitCode::FAILURE
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Generate { case, resolution, out } => {
            let path = generate_case(case.into(), resolution, &out)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => Ok(report(&run_case(&args.load()?)?)),
        Command::Validate(args) => Ok(report(&validate_case(&args.load()?)?)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            error!("{e:#}");
            ExitCode::from(2)
        }
    }
}
