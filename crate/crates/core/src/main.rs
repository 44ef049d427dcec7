use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stfem::experiments::{parse_levels, run, Format, RunConfig};
use stfem::linsolve::Method;
use stfem::Error;

#[derive(Parser)]
#[command(name = "stfem", version, about = "Space-time P1 finite elements: convergence sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a refinement sweep for one example.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Example id, 1 to 4.
    #[arg(long)]
    example: Option<u32>,
    /// Level exponents `lo..hi`; level l uses N = 2^l.
    #[arg(long)]
    levels: Option<String>,
    /// Also report the mesh-dependent norm error.
    #[arg(long)]
    hnorm: bool,
    /// Linear solver: lu, gmres or auto.
    #[arg(long)]
    solver: Option<String>,
    /// Comma-separated output formats: csv, markdown, plotdata, vtk.
    #[arg(long)]
    format: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key = value configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dump each system matrix in MatrixMarket format.
    #[arg(long)]
    dump_matrices: bool,
}

fn build_config(args: &RunArgs) -> stfem::Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        config.apply_text(&text)?;
    }
    if let Some(id) = args.example {
        config.example = id;
    }
    if let Some(levels) = &args.levels {
        (config.l_min, config.l_max) = parse_levels(levels)?;
    }
    if args.hnorm {
        config.include_hnorm = true;
    }
    if let Some(s) = &args.solver {
        config.solver.method = s.parse::<Method>()?;
    }
    if let Some(f) = &args.format {
        config.formats = f.split(',').map(str::parse::<Format>).collect::<stfem::Result<_>>()?;
    }
    if let Some(out) = &args.out {
        config.out_dir = Some(out.clone());
    }
    if args.dump_matrices {
        config.dump_matrices = true;
    }
    if config.out_dir.is_none() {
        return Err(Error::InvalidArgument("an output directory is required (--out)".into()));
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    let config = match build_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(table) => {
            print!("{}", stfem::experiments::render_markdown(&table));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
