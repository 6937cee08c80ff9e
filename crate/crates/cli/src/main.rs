use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trm_cli::commands::ChiRangeRequest;
use trm_cli::{cmd_chi_range, cmd_run, cmd_sweep, cmd_verify, parse_config, CliError, RunManifest};

#[derive(Parser)]
#[command(name = "trm", version, about = "Time relaxation model solver and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write energy.csv and summary.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Overrides output.dir.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Repeat a run over several relaxation coefficients.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma separated values; defaults to sweep.chi from the config.
        #[arg(long, value_delimiter = ',')]
        chi: Option<Vec<f64>>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print admissible ranges for chi.
    ChiRange(ChiRangeArgs),
    /// Run the operator identity suite.
    Verify {
        /// Smaller grid and fewer random fields.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
struct ChiRangeArgs {
    #[arg(long)]
    u: f64,
    #[arg(long)]
    l: f64,
    #[arg(long)]
    re: f64,
    /// Deconvolution order N.
    #[arg(long = "n", default_value_t = 0)]
    order: usize,
    #[arg(long, conflicts_with = "mesh_dependent", required_unless_present = "mesh_dependent")]
    delta: Option<f64>,
    #[arg(long)]
    mesh_dependent: bool,
    /// Mesh width; defaults to Re^(-3/4) L.
    #[arg(long, requires = "mesh_dependent")]
    h: Option<f64>,
}

fn load(path: &PathBuf, output: Option<PathBuf>) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let mut manifest = parse_config(&text)?;
    if let Some(dir) = output {
        manifest.output_dir = dir;
    }
    Ok(manifest)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, resume, output } => {
            let manifest = load(&config, output)?;
            let outcome = cmd_run(&manifest, resume.as_deref())?;
            print!("{}", outcome.summary);
        }
        Command::Sweep { config, chi, output } => {
            let manifest = load(&config, output)?;
            let values = chi
                .or_else(|| manifest.sweep.clone())
                .ok_or_else(|| trm_core::ConfigError::Missing("sweep.chi".into()))?;
            let rows = cmd_sweep(&manifest, &values)?;
            print!(
                "{}",
                trm_cli::output::sweep_table(&trm_cli::config_hash(&manifest), &rows)
            );
        }
        Command::ChiRange(a) => {
            let request = match a.delta {
                Some(d) => ChiRangeRequest::Delta(d),
                None => ChiRangeRequest::MeshDependent { h: a.h },
            };
            print!("{}", cmd_chi_range(a.u, a.l, a.re, a.order, request)?);
        }
        Command::Verify { quick } => {
            let (listing, passed) = cmd_verify(quick)?;
            print!("{listing}");
            if !passed {
                return Err(CliError::Verification("one or more checks failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
