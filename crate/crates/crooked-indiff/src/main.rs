//! Thin experiment-driver CLI. The library and its examples are the
//! primary interface; this binary runs configs, lists the catalog, and
//! prints the closed-form bounds.
//!
//! Exit codes: 0 ok, 1 usage, 2 an assertion-style experiment failed,
//! 3 I/O failure.

use clap::{Args, Parser, Subcommand};
use crooked_indiff::analysis::{
    exor_theorem_bound, sponge_bad_event_bound, sponge_theorem_bound, ExorBoundParams,
    SpongeBoundParams,
};
use crooked_indiff::error::Error;
use crooked_indiff::harness::{catalog, run_experiment, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "crooked-indiff", version, about = "crooked-indifferentiability simulation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config (JSON) and write its report.
    Run {
        /// Path to the config file.
        config: PathBuf,
        /// Output directory; defaults to $CROOKED_INDIFF_OUT or the
        /// current directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the experiment catalog.
    List,
    /// Print a closed-form theorem bound for the given parameters.
    Bound(BoundArgs),
}

#[derive(Args)]
struct BoundArgs {
    /// "exor" or "sponge".
    #[arg(long)]
    construction: String,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 0.0)]
    q1: f64,
    #[arg(long, default_value_t = 0.0)]
    q2: f64,
    /// EXor width.
    #[arg(long, default_value_t = 8)]
    n: u8,
    /// Sponge rate bits.
    #[arg(long, default_value_t = 4)]
    r: u8,
    /// Sponge capacity bits.
    #[arg(long, default_value_t = 10)]
    c: u8,
    /// Message length in bits.
    #[arg(long, default_value_t = 8)]
    ell: u8,
    /// Digest length in bits.
    #[arg(long, default_value_t = 4)]
    s: u8,
    /// First-stage query count.
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    /// Total simulator query count; defaults to q2 * (ell+s)/r.
    #[arg(long)]
    q: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Error::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
            let report = run_experiment(&cfg)?;
            let out_dir = out
                .or_else(|| std::env::var_os("CROOKED_INDIFF_OUT").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let file = cfg
                .output
                .clone()
                .unwrap_or_else(|| format!("{}.out", cfg.experiment));
            let path = out_dir.join(file);
            report.write(&path, cfg.format)?;
            println!(
                "{}: {} rows -> {}",
                report.experiment,
                report.rows.len(),
                path.display()
            );
            if !report.summary.is_empty() {
                println!("summary: {}", report.summary.join(" "));
            }
            match report.passed {
                Some(false) => {
                    eprintln!("{}: FAIL", report.experiment);
                    Ok(ExitCode::from(2))
                }
                _ => Ok(ExitCode::SUCCESS),
            }
        }
        Command::List => {
            for (name, desc) in catalog() {
                println!("{name:28} {desc}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bound(args) => {
            match args.construction.as_str() {
                "exor" => {
                    let b = exor_theorem_bound(&ExorBoundParams {
                        eps: args.eps,
                        q1: args.q1,
                        q2: args.q2,
                        tau: args.tau,
                        n: args.n,
                    });
                    println!("exor bound = {} (vacuous: {})", b.value, b.vacuous);
                }
                "sponge" => {
                    let blocks = (args.ell / args.r + args.s / args.r) as f64;
                    let q = args.q.unwrap_or(args.q2 * blocks);
                    let mk = |ell_plus_s: f64, label: &str| {
                        let p = SpongeBoundParams {
                            eps: args.eps,
                            q,
                            tau: args.tau,
                            q2: args.q2,
                            ell_plus_s,
                            kappa: args.kappa,
                            rate: args.r,
                            cap: args.c,
                        };
                        let t = sponge_theorem_bound(&p);
                        let b = sponge_bad_event_bound(&p);
                        println!(
                            "sponge theorem bound ({label}) = {} (vacuous: {}); bad-event bound = {} (vacuous: {})",
                            t.value, t.vacuous, b.value, b.vacuous
                        );
                    };
                    mk(blocks, "block count");
                    mk((args.ell + args.s) as f64, "bit count");
                }
                other => {
                    return Err(Error::Config(format!("unknown construction {other:?}")));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
