use std::path::PathBuf;
use std::process::ExitCode;

use bll_cli::{parse_config, run, CliError, Command, RunOptions};
use clap::Parser;

#[derive(Parser, Debug)]
#[command(name = "bll", version, about = "Compressible and limit convection solvers with convergence diagnostics")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the one in the scenario file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweep members.
    #[arg(long, env = "BLL_THREADS")]
    threads: Option<usize>,
    /// Suppress the summary on stdout; warnings still go to stderr.
    #[arg(long)]
    quiet: bool,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io { path: args.config.display().to_string(), msg: e.to_string() })?;
    let cfg = parse_config(&text)?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config { line: None, msg: "--threads must be at least 1".into() });
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let report = run(args.command, &cfg, &RunOptions { out: args.out.clone() })?;
    for w in &report.warnings {
        eprintln!("{w}");
    }
    if !args.quiet {
        println!("{}", report.summary.trim_end());
        println!("wrote {} files", report.files.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bll: {} error: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
