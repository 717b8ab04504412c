//! `crp` — experiment runner.
//!
//! Usage: `crp check-space|theorem1|montecarlo|np|search --config <path>
//! [--seed u64] [--out <path>] [--format csv|json]`
//!
//! Exit codes: 0 success; 1 a checked mathematical property was violated
//! (committee inequality failure, norm chain out of order, oracle mismatch);
//! 2 configuration or I/O error; 3 numerical non-convergence.
//! CRP_THREADS caps the worker count (default: machine parallelism).

mod commands;
mod config;
mod report;

use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(code) => code,
        Err((code, message)) => {
            eprintln!("crp: {message}");
            ExitCode::from(code)
        }
    }
}

fn run(args: &[String]) -> Result<ExitCode, (u8, String)> {
    let cli = config::parse_args(args).map_err(|e| (2u8, e))?;
    let text = std::fs::read_to_string(&cli.config_path)
        .map_err(|e| (2u8, format!("config {:?}: {e}", cli.config_path)))?;
    let cfg = config::resolve(&cli, &text).map_err(|e| (2u8, e))?;

    if let Ok(threads) = std::env::var("CRP_THREADS") {
        let count: usize = threads
            .parse()
            .map_err(|_| (2u8, format!("CRP_THREADS: bad thread count {threads:?}")))?;
        // a second invocation in-process would fail; that is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(count).build_global();
    }

    let outcome = commands::run_experiment(cli.command, &cfg)
        .map_err(|f| (f.exit_code as u8, f.message))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.payload)
            .map_err(|e| (2u8, format!("out {path:?}: {e}")))?,
        None => print!("{}", outcome.payload),
    }
    if let Some(note) = &outcome.note {
        eprintln!("crp: {note}");
    }
    Ok(if outcome.violation { ExitCode::from(1) } else { ExitCode::SUCCESS })
}
