use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pumped_lindblad::cli::{self, Command, RunOptions};
use pumped_lindblad::config::RunConfig;

#[derive(Parser)]
#[command(name = "pumped-lindblad", version, about = "Effective Lindbladians of optically pumped atoms")]
struct Args {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Proceed even when the assumption check fails.
    #[arg(long)]
    force: bool,
    /// Also measure the order of the Kato residual (floquet only).
    #[arg(long)]
    order_check: bool,
    /// Run once per value, e.g. `lambda=0.1,0.05`.
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the standing assumptions and write report.json.
    Check(Common),
    /// Integrate the master equation; writes trajectory.csv and summary.json.
    Evolve(Common),
    /// Howland spectrum, gap and monodromy; writes floquet.json.
    Floquet(Common),
    /// Regularized-resolvent and principal-value cross-checks; writes oracle.json.
    Oracle(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let (cmd, common) = match args.command {
        Sub::Check(c) => (Command::Check, c),
        Sub::Evolve(c) => (Command::Evolve, c),
        Sub::Floquet(c) => (Command::Floquet, c),
        Sub::Oracle(c) => (Command::Oracle, c),
    };
    let opts = RunOptions { out: common.out, force: common.force, order_check: common.order_check };
    let result = RunConfig::from_path(&common.config).and_then(|cfg| match &common.sweep {
        Some(s) => cli::run_sweep(cmd, &cfg, &opts, s),
        None => cli::run(cmd, &cfg, &opts),
    });
    match result {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            for p in &out.written {
                println!("{}", p.display());
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
