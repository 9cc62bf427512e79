//! Command-line driver.
//!
//! ```text
//! paraspec <simulate|correlate|conditions|spectrum> --config PATH
//!          [--seed N] [--workers N] [--out DIR]
//! paraspec report --out RUN_DIR
//! ```
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 numerical
//! failure (the module error name goes to stderr). `PARASPEC_WORKERS`
//! sets the default worker count; `--workers` overrides it.

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::experiment::{
    cmd_conditions, cmd_correlate, cmd_report, cmd_simulate, cmd_spectrum, RunContext,
};
use crate::numerics::effective_workers;
use std::path::PathBuf;

const USAGE: &str = "usage: paraspec <simulate|correlate|conditions|spectrum|report> \
[--config PATH] [--seed N] [--workers N] [--out DIR]";

struct Flags {
    config: Option<String>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<String>,
}

fn parse_flags(args: &[String]) -> Result<Flags> {
    let mut flags = Flags {
        config: None,
        seed: None,
        workers: None,
        out: None,
    };
    let mut i = 0;
    while i < args.len() {
        let need_value = |i: usize| -> Result<&String> {
            args.get(i + 1).ok_or_else(|| {
                Error::InvalidConfig(format!("flag {} needs a value\n{USAGE}", args[i]))
            })
        };
        match args[i].as_str() {
            "--config" => {
                flags.config = Some(need_value(i)?.clone());
                i += 2;
            }
            "--seed" => {
                let v = need_value(i)?;
                flags.seed = Some(v.parse().map_err(|_| {
                    Error::InvalidConfig(format!("--seed expects an unsigned integer, got `{v}`"))
                })?);
                i += 2;
            }
            "--workers" => {
                let v = need_value(i)?;
                flags.workers = Some(v.parse().map_err(|_| {
                    Error::InvalidConfig(format!("--workers expects a positive integer, got `{v}`"))
                })?);
                i += 2;
            }
            "--out" => {
                flags.out = Some(need_value(i)?.clone());
                i += 2;
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown flag `{other}`\n{USAGE}"
                )))
            }
        }
    }
    Ok(flags)
}

fn build_context(flags: &Flags) -> Result<RunContext> {
    let config_path = flags
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("--config is required\n{USAGE}")))?;
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {config_path}: {e}")))?;
    let mut config = ExperimentConfig::parse(&text)?;
    if let Some(seed) = flags.seed {
        config.master_seed = seed;
    }
    let workers = effective_workers(flags.workers);
    let out_dir = flags
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| format!("runs/{}-{}", config.scenario.name(), &config.hash()[..8]));
    Ok(RunContext::new(config, workers, PathBuf::from(out_dir)))
}

/// Run the CLI with pre-split arguments; returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return 2;
    };
    let flags = match parse_flags(&args[1..]) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };

    let outcome: Result<Vec<PathBuf>> = match command.as_str() {
        "report" => {
            let dir = flags.out.clone().or_else(|| {
                // Fall back to the config's output dir if one was given.
                flags.config.as_ref().and_then(|p| {
                    std::fs::read_to_string(p)
                        .ok()
                        .and_then(|t| ExperimentConfig::parse(&t).ok())
                        .and_then(|c| c.output_dir)
                })
            });
            match dir {
                None => Err(Error::InvalidConfig(format!(
                    "report needs --out RUN_DIR\n{USAGE}"
                ))),
                Some(d) => {
                    let dir = PathBuf::from(d);
                    cmd_report(&dir).map(|text| {
                        println!("{text}");
                        vec![dir.join("report.md")]
                    })
                }
            }
        }
        "simulate" | "correlate" | "conditions" | "spectrum" => match build_context(&flags) {
            Err(e) => Err(e),
            Ok(ctx) => {
                if let Some(w) = flags.workers {
                    // Give the same default to library internals.
                    std::env::set_var("PARASPEC_WORKERS", w.to_string());
                }
                match command.as_str() {
                    "simulate" => cmd_simulate(&ctx),
                    "correlate" => cmd_correlate(&ctx),
                    "conditions" => cmd_conditions(&ctx),
                    _ => cmd_spectrum(&ctx),
                }
            }
        },
        other => {
            eprintln!("unknown command `{other}`\n{USAGE}");
            return 2;
        }
    };

    match outcome {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
