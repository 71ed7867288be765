mod commands;
mod config;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use config::{Cli, ConfigError, ExperimentConfig, FileConfig, Format};

const GIT_DESCRIBE: &str = env!("PHYCRYPT_GIT_DESCRIBE");

#[derive(Serialize)]
struct ExperimentRecord<'a> {
    config: &'a ExperimentConfig,
    results: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transcripts: Option<&'a [phycrypt::protocols::Transcript]>,
    wall_time_s: f64,
    version: &'static str,
    git_describe: &'static str,
}

fn is_config_error(e: &anyhow::Error) -> bool {
    use phycrypt::Error as E;
    if e.downcast_ref::<ConfigError>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<E>(),
        Some(
            E::Config(_)
                | E::InvalidParameter(_)
                | E::Domain(_)
                | E::DimensionTooLarge { .. }
                | E::SearchSpaceTooLarge { .. }
        )
    )
}

fn open_output(cfg: &ExperimentConfig) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> anyhow::Result<Option<String>> {
    let file = match &cli.common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = ExperimentConfig::resolve(cli.command, cli.common, file)?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("thread pool")?;
    }
    // fail on an unwritable path before spending time on the experiment
    let mut out = open_output(&cfg)?;

    let start = Instant::now();
    let outcome = commands::run(&cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    match cfg.format {
        Format::Csv => outcome.table.write_csv(&mut out)?,
        Format::Json => {
            let record = ExperimentRecord {
                config: &cfg,
                results: outcome.table.json_rows(),
                transcripts: outcome.transcripts.as_deref(),
                wall_time_s,
                version: env!("CARGO_PKG_VERSION"),
                git_describe: GIT_DESCRIBE,
            };
            serde_json::to_writer_pretty(&mut out, &record)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if let Some(path) = &cfg.out {
        log::info!("wrote {}", path.display());
    }
    Ok(outcome.check_failed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(msg)) => {
            log::error!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
