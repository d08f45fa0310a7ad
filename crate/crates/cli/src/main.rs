//! `tqc`: batch experiments for ternary quadratic congruences.
//!
//! Exit codes: 0 on success, 2 on invalid input (one line on stderr of the
//! form `tqc: validation-error: <kind>: <message>`), 1 on any other failure.

mod args;
mod cache;
mod commands;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use anyhow::anyhow;
use clap::Parser;
use serde_json::{json, Value};
use tqc_core::Exec;

use crate::args::{Cli, Format};
use crate::cache::Cache;
use crate::commands::{prepare, Failure};
use crate::output::{emit, render, write_atomic};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // Clap's message spans several lines; keep everything before the usage block.
            let detail = e.to_string();
            let reason: Vec<&str> = detail
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            let reason = reason.join(" ");
            eprintln!("tqc: validation-error: usage: {}", reason.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation { kind, message }) => {
            eprintln!("tqc: validation-error: {kind}: {}", message.replace('\n', " "));
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("tqc: error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let start = Instant::now();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::invalid("threads must be positive"));
        }
        tqc_core::exec::configure_threads(t);
    }
    let prepared = prepare(cli.command.clone())?;
    let kind = prepared.kind;
    let key = Cache::key(kind, &prepared.params);
    let cache = Cache::open(cli.cache_dir.as_deref());

    let outcome = match cache.get(&key) {
        Some(hit) => {
            eprintln!("tqc: cache hit {key}");
            hit
        }
        None => {
            let outcome = (prepared.job)(Exec::default())?;
            if outcome.failures == 0 {
                cache.put(&key, &outcome);
            }
            outcome
        }
    };

    let config = resolved_config(&prepared.params, &cli, &key, cache.is_enabled());
    let wall_time = start.elapsed().as_secs_f64();
    let bytes = render(cli.format, kind, &config, &outcome, wall_time)?;
    emit(cli.output.as_deref(), &bytes)?;

    if let Some(summary) = &outcome.summary {
        eprintln!("tqc: {kind} summary: {summary}");
        if let (Some(path), Format::Csv) = (&cli.output, cli.format) {
            let mut side = path.as_os_str().to_owned();
            side.push(".summary.json");
            let mut body = serde_json::to_vec_pretty(&json!({"kind": kind, "config": config, "summary": summary}))
                .map_err(|e| Failure::Internal(e.into()))?;
            body.push(b'\n');
            write_atomic(std::path::Path::new(&side), &body)?;
        }
    }
    if outcome.failures > 0 {
        return Err(Failure::Internal(anyhow!("{kind}: {} checks failed", outcome.failures)));
    }
    Ok(())
}

fn resolved_config(params: &Value, cli: &Cli, key: &str, cached: bool) -> Value {
    json!({
        "params": params,
        "output": cli.output.as_ref().map(|p| p.display().to_string()),
        "format": match cli.format { Format::Csv => "csv", Format::Json => "json" },
        "threads": cli.threads,
        "parallel": cfg!(feature = "parallel"),
        "cache_enabled": cached,
        "cache_key": key,
    })
}
