use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fission_cli::{config, dims, RunOptions, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "fission", version, about = "Numerical checks for quasi-Hamiltonian fission spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign file. Exit 0 pass, 1 fail, 2 inconclusive only, 3 config error.
    Run {
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the campaign seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "FISSION_THREADS")]
        threads: Option<usize>,
        /// Include wall-clock timings (the report is then no longer reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Dimension counts for GL_n and pole order k.
    Dims {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Also measure the ranks numerically.
        #[arg(long)]
        measure: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return code(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match cli.command {
        Command::Run {
            config: path,
            out,
            seed,
            threads,
            timings,
        } => {
            let opts = RunOptions { seed, threads, timings };
            let report = match config::load(&path).and_then(|c| fission_cli::run(c, &opts)) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return code(EXIT_CONFIG);
                }
            };
            let json = report.to_json();
            match out {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, json) {
                        eprintln!("cannot write {}: {e}", p.display());
                        return code(EXIT_CONFIG);
                    }
                }
                None => print!("{json}"),
            }
            let s = report.summary;
            eprintln!("{} pass, {} fail, {} inconclusive", s.pass, s.fail, s.inconclusive);
            code(report.exit_code())
        }
        Command::Dims { n, k, measure, seed, json } => {
            let counts = match (n, fission_core::additive::dims(n, k)) {
                (0 | 1, _) => Err("n must be at least 2".to_string()),
                (_, r) => r.map_err(|e| e.to_string()),
            };
            let counts = match counts {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("error: {e}");
                    return code(EXIT_CONFIG);
                }
            };
            let measured = if measure {
                match dims::measure(n, k, seed) {
                    Ok(m) => Some(m),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return code(1);
                    }
                }
            } else {
                None
            };
            if json {
                let doc = serde_json::json!({ "n": n, "k": k, "formula": counts, "measured": measured });
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
            } else {
                print!("{}", dims::table(n, k, &counts, measured.as_ref()));
            }
            code(0)
        }
    }
}
