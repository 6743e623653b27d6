use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use decaylab::cli::{self, Overrides};

/// Decay-rate experiments for mixed fractional/classical evolution equations.
///
/// Exit status: 0 when every check passes, 1 on any FAIL, 2 on invalid input.
#[derive(Parser)]
#[command(name = "decaylab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one problem; writes history.csv, report.txt and decay.svg.
    Run(Common),
    /// Run the cartesian product of the [sweep] lists; writes one directory per cell and summary.csv.
    Sweep(Common),
    /// Run the inequality, structural-constant and barrier battery.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config file.
    config: PathBuf,
    /// Output directory (overrides DECAYLAB_OUT and [output] dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent sweep cells.
    #[arg(long)]
    workers: Option<usize>,
    /// Seed for random samples.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip decay.svg.
    #[arg(long)]
    no_svg: bool,
}

fn load(c: &Common) -> decaylab::Result<cli::ExperimentConfig> {
    let cfg = cli::load_config(&c.config)?;
    let o = Overrides { out: c.out.clone(), workers: c.workers, seed: c.seed, no_svg: c.no_svg };
    let env_out = std::env::var_os(cli::OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    cli::apply_overrides(cfg, &o, env_out)
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let (common, which) = match &args.cmd {
        Command::Run(c) => (c, 0),
        Command::Sweep(c) => (c, 1),
        Command::Verify(c) => (c, 2),
    };
    let cfg = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", common.config.display());
            return ExitCode::from(2);
        }
    };
    let pass = match which {
        0 => match cli::cmd_run(&cfg) {
            Ok(r) => {
                print!("{}", r.text);
                r.pass
            }
            Err(e) => {
                eprintln!("run failed: {e}");
                return ExitCode::from(2);
            }
        },
        1 => match cli::cmd_sweep(&cfg) {
            Ok(cells) => {
                for c in &cells {
                    let status = match &c.result {
                        Ok(r) if r.pass => "PASS".to_string(),
                        Ok(_) => "FAIL".to_string(),
                        Err(e) => format!("ERROR {e}"),
                    };
                    println!("{}  {status}", c.dir);
                }
                cells.iter().all(|c| c.pass())
            }
            Err(e) => {
                eprintln!("sweep failed: {e}");
                return ExitCode::from(2);
            }
        },
        _ => {
            let rows = cli::cmd_verify(&cfg);
            print!("{}", cli::verify::format_table(&rows));
            rows.iter().all(|r| r.pass)
        }
    };
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
