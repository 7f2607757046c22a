//! `rwalk`: generate instances, run the algorithms, verify results and
//! benchmark suites.
//!
//! Exit codes: 0 success, 2 a valid best-effort result whose guarantee's
//! hypotheses did not all hold, 1 any error or failed check.

mod bench;
mod solve;
mod verify;

use std::io::Write;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use rwalk::io::generate;
use rwalk::params::ParamSet;

#[derive(Parser)]
#[command(name = "rwalk", version, about = "Rainbow paths and walks in properly coloured graphs")]
struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Parameter overrides, `key=value,key=value`.
    #[arg(long, global = true, default_value = "")]
    params: String,
    /// Output file; stdout when absent. `solve` appends one JSON line.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Time budget for searches (oracles) and a soft limit elsewhere.
    #[arg(long, global = true)]
    budget_ms: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "RWALK_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file from a generator spec such as
    /// `regular-proper:100:12:7`, `complete-proper:8`, `circulant:13:1,3,4`
    /// or `cayley:elem2:4:random:10:3`. Random generators take their seed
    /// from the generator string.
    Gen { spec: String },
    /// Run an algorithm on an instance file.
    Solve {
        instance: String,
        #[arg(long, default_value = "greedy")]
        algo: String,
    },
    /// Check `proper`, `rainbow:<results.jsonl>`, `graham:<p>`,
    /// `pollard:exhaustive:<n>`, `pollard:sampled:<n>:<trials>` or
    /// `sequenceable` (input is then a group spec).
    Verify { what: String, input: Option<String> },
    /// Run a suite file of `<spec> <algo> [seeds]` lines.
    Bench {
        suite: String,
        /// `csv` or `json` (one object per line).
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

/// Writes through a temporary file so readers never see a partial file.
fn write_atomic(path: &str, content: &str) -> Result<(), String> {
    let tmp = format!("{path}.tmp");
    std::fs::write(&tmp, content).map_err(|e| format!("{tmp}: {e}"))?;
    std::fs::rename(&tmp, path).map_err(|e| format!("{path}: {e}"))
}

fn emit(out: Option<&str>, content: &str, append: bool) -> Result<(), String> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(p) if append => {
            let mut f =
                std::fs::OpenOptions::new().create(true).append(true).open(p).map_err(|e| format!("{p}: {e}"))?;
            f.write_all(content.as_bytes()).map_err(|e| format!("{p}: {e}"))
        }
        Some(p) => write_atomic(p, content),
    }
}

fn run(cli: Cli) -> Result<i32, String> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| e.to_string())?;
    }
    let params = ParamSet::parse(&cli.params).map_err(|e| e.to_string())?;
    let budget = cli.budget_ms.map(Duration::from_millis);
    let out = cli.out.as_deref();
    match cli.command {
        Command::Gen { spec } => {
            let inst = generate(&spec).map_err(|e| e.to_string())?;
            emit(out, &inst.to_text(), false)?;
            Ok(0)
        }
        Command::Solve { instance, algo } => {
            let text = std::fs::read_to_string(&instance).map_err(|e| format!("{instance}: {e}"))?;
            let rec = solve::solve(&text, &algo, &params, cli.seed, budget)?;
            let line = serde_json::to_string(&rec).map_err(|e| e.to_string())?;
            emit(out, &format!("{line}\n"), true)?;
            Ok(rec.exit_code())
        }
        Command::Verify { what, input } => {
            let v = verify::verify(&what, input.as_deref(), cli.seed)?;
            let text = serde_json::to_string(&v.report).map_err(|e| e.to_string())?;
            emit(out, &format!("{text}\n"), false)?;
            Ok(if v.holds { 0 } else { 1 })
        }
        Command::Bench { suite, format } => {
            let text = std::fs::read_to_string(&suite).map_err(|e| format!("{suite}: {e}"))?;
            let jobs = bench::parse_suite(&text)?;
            let rows = bench::run(&jobs, &params, budget);
            let body = match format.as_str() {
                "csv" => bench::to_csv(&rows),
                "json" => rows
                    .iter()
                    .map(|r| serde_json::to_string(r).map(|s| s + "\n"))
                    .collect::<Result<String, _>>()
                    .map_err(|e| e.to_string())?,
                other => return Err(format!("unknown format `{other}`")),
            };
            emit(out, &body, false)?;
            Ok(if rows.iter().any(|r| r.status.starts_with("error")) { 1 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("rwalk: {e}");
            ExitCode::from(1)
        }
    }
}
