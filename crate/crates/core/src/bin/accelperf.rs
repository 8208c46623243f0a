//! Command-line front end: run or compare sweep scenarios and emit reports.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use accelperf::error::Error;
use accelperf::scenario::{self, ReportFormat, ReportTable};
use accelperf::{presets, DeviceSpec, ScenarioSpec};

#[derive(Parser)]
#[command(
    name = "accelperf",
    version,
    about = "Analytical accelerator performance sweeps",
    after_help = "Device and scenario arguments accept a builtin name, a path to a TOML \
                  file, or a name resolved against the directory in ACCELPERF_SPEC_DIR."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario on one device and print the report.
    Run {
        /// Scenario name or path.
        scenario: String,
        /// Device name or path; defaults to the scenario's device.
        #[arg(long)]
        device: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Evaluate a scenario on two devices and print per-row ratios.
    Compare {
        /// Scenario name or path.
        scenario: String,
        #[arg(long)]
        device_a: String,
        #[arg(long)]
        device_b: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// List the bundled device specs and scenarios.
    ListPresets,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> ReportFormat {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

fn scenario_device(scenario: &ScenarioSpec, flag: Option<&str>) -> Result<DeviceSpec, Error> {
    let name = match flag {
        Some(name) => name,
        None => scenario.device.as_deref().ok_or_else(|| {
            Error::invalid(
                "device",
                "scenario names no default device; pass --device",
            )
        })?,
    };
    presets::resolve_device(name)
}

fn emit(table: &ReportTable, format: Format, out: Option<&std::path::Path>) -> Result<(), Error> {
    let text = table.emit(format.into());
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            // Stdout may be a closed pipe; surface that as an I/O error.
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            scenario,
            device,
            format,
            out,
        } => {
            let scenario = presets::resolve_scenario(&scenario)?;
            let device = scenario_device(&scenario, device.as_deref())?;
            let table = scenario::run_scenario(&scenario, &device)?;
            emit(&table, format, out.as_deref())
        }
        Command::Compare {
            scenario,
            device_a,
            device_b,
            format,
            out,
        } => {
            let scenario = presets::resolve_scenario(&scenario)?;
            let a = presets::resolve_device(&device_a)?;
            let b = presets::resolve_device(&device_b)?;
            let table = scenario::compare_devices(&scenario, &a, &b)?;
            emit(&table, format, out.as_deref())
        }
        Command::ListPresets => {
            let mut text = String::from("devices:\n");
            for name in presets::builtin_devices() {
                text.push_str(&format!("  {name}\n"));
            }
            text.push_str("scenarios:\n");
            for name in presets::builtin_scenarios() {
                text.push_str(&format!("  {name}\n"));
            }
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
