mod commands;
mod config;
mod failure;
mod labels;
mod output;
mod subject;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::config::AnalysisConfig;
use crate::failure::{Failure, Outcome, EXIT_NUMERICAL};
use crate::output::{render, render_error};

/// Caps the rayon pool from `ITFLOW_THREADS`; 0 or unset leaves it automatic.
fn configure_threads() -> Outcome<()> {
    let Ok(text) = std::env::var("ITFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = text.trim().parse().map_err(|_| {
        Failure::validation(format!("ITFLOW_THREADS={text:?} is not a thread count"))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure {
                name: "ThreadPool",
                message: e.to_string(),
                exit: EXIT_NUMERICAL,
            })?;
    }
    Ok(())
}

fn emit(cfg: &AnalysisConfig, bytes: &[u8]) -> Outcome<()> {
    let io = |e: std::io::Error| Failure::validation(format!("cannot write output: {e}"));
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes).map_err(io),
        None => std::io::stdout().write_all(bytes).map_err(io),
    }
}

fn main() -> ExitCode {
    let cfg = AnalysisConfig::parse();
    let command = cfg.command.name();
    let result = configure_threads().and_then(|()| commands::run(&cfg));
    let outcome = match result {
        Ok(table) => emit(&cfg, &render(&table, command, cfg.format)),
        Err(f) => Err(f),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("itflow {command}: {f}");
            // The record goes where the results would have; best effort.
            let _ = emit(&cfg, &render_error(f.name, &f.message, command, cfg.format));
            ExitCode::from(f.exit)
        }
    }
}
