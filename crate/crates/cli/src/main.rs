// SPDX-License-Identifier: Apache-2.0

//! `retrace`: capture a device's boundary activity in simulation, encode it
//! into a replay artifact, re-drive the device from that artifact, compare
//! memory results against the golden reference, and generate a synthesizable
//! replay ROM.
//!
//! Exit codes: 0 success, 2 usage, 3 config, 4 run-ip, 5 encode/inspect,
//! 6 replay, 7 compare, 8 romgen, 9 file IO.

mod config;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{load_config, Config};
use stages::{StageError, EXIT_CONFIG, EXIT_ENCODE};

#[derive(Parser)]
#[command(
    name = "retrace",
    version,
    about = "Capture, encode, replay, compare, and ROM generation for boundary replay"
)]
struct Cli {
    /// YAML configuration file.
    #[arg(short, long, global = true, default_value = "retrace.yaml")]
    config: PathBuf,
    /// Override the stall-randomization seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Disable stall randomization regardless of the config.
    #[arg(long, global = true)]
    no_randomization: bool,
    /// Override the encode period tolerance, in ticks.
    #[arg(long, global = true)]
    period_tolerance: Option<u64>,
    /// Override the ROM word width (8, 16, 32, or 64); implies ROM generation
    /// during `flow`.
    #[arg(long, global = true)]
    word_width: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the device with its live agent; write capture.vcd and
    /// golden.txt.
    RunIp,
    /// Encode capture.vcd into the replay artifact capture.rpaf.
    Encode,
    /// Pretty-print a replay artifact file.
    Inspect {
        /// Artifact file to inspect.
        artifact: PathBuf,
        /// Also print frames in the half-open range A..B.
        #[arg(long, value_name = "A..B")]
        frames: Option<String>,
    },
    /// Re-drive the device from capture.rpaf; write replay_report.txt and
    /// replay_dump.txt.
    Replay,
    /// Compare replay_dump.txt against golden.txt; write compare_report.txt.
    Compare,
    /// Generate the Verilog replay module and hex init files from
    /// capture.rpaf.
    Romgen,
    /// Run run-ip, encode, replay, compare, and (when configured) romgen.
    Flow,
}

fn apply_overrides(cfg: &mut Config, cli: &Cli) {
    if let Some(seed) = cli.seed {
        cfg.testbench.randomization.seed = seed;
    }
    if cli.no_randomization {
        cfg.testbench.randomization.enabled = false;
    }
    if let Some(t) = cli.period_tolerance {
        cfg.flow.period_tolerance = t;
    }
    if let Some(w) = cli.word_width {
        cfg.flow.romgen.get_or_insert_with(Default::default).word_width = w;
    }
}

/// Loads the config, applies CLI overrides, and validates the parts every
/// stage depends on, so bad configs fail before any stage runs.
fn load(cli: &Cli) -> Result<Config, StageError> {
    let mut cfg = load_config(&cli.config).map_err(|e| StageError {
        exit_code: EXIT_CONFIG,
        message: format!("config {}: {e}", cli.config.display()),
    })?;
    apply_overrides(&mut cfg, cli);
    cfg.interface.to_spec().map_err(|e| StageError {
        exit_code: EXIT_CONFIG,
        message: format!("config {}: {e}", cli.config.display()),
    })?;
    if let Some(r) = &cfg.flow.romgen {
        r.romgen_options().map_err(|e| StageError {
            exit_code: EXIT_CONFIG,
            message: format!("config {}: {e}", cli.config.display()),
        })?;
    }
    Ok(cfg)
}

/// Parses "A..B" as a half-open frame range.
fn parse_frame_range(text: &str) -> Result<(u64, u64), StageError> {
    let bad = || StageError {
        exit_code: EXIT_ENCODE,
        message: format!("inspect: bad frame range '{text}', expected A..B"),
    };
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn dispatch(cli: &Cli) -> Result<(), StageError> {
    match &cli.command {
        Command::Inspect { artifact, frames } => {
            let range = frames.as_deref().map(parse_frame_range).transpose()?;
            let text = stages::inspect(artifact, range)?;
            print!("{text}");
            Ok(())
        }
        Command::RunIp => stages::run_ip(&load(cli)?),
        Command::Encode => stages::encode(&load(cli)?),
        Command::Replay => stages::replay(&load(cli)?),
        Command::Compare => stages::compare(&load(cli)?),
        Command::Romgen => stages::romgen(&load(cli)?),
        Command::Flow => stages::flow(&load(cli)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit_code as u8)
        }
    }
}
