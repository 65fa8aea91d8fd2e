use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ichan_cli::commands::{fit, generate_cir, generate_lsp, resolve_scenario, resolve_scenario_file, CirOptions};
use ichan_cli::track::{parse_point, parse_points, TrackSpec, TxPlacement};
use ichan_cli::validate::{builtin_tables, report, run_all};
use ichan_cli::{CliError, Result};
use ichan_core::params::Condition;
use ichan_core::smallscale::{DEFAULT_PATHS, DEFAULT_RX_HEIGHT_M};

/// Industrial indoor channel simulator.
#[derive(Parser)]
#[command(name = "ichan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Large-scale parameters along a track, as CSV.
    GenerateLsp {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Path sets and tapped delay lines along a track.
    GenerateCir {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 200e6)]
        bandwidth_hz: f64,
        #[arg(long, default_value_t = DEFAULT_PATHS)]
        paths: usize,
        #[arg(long, default_value_t = DEFAULT_RX_HEIGHT_M)]
        rx_height: f64,
    },
    /// Fit model coefficients to generate-lsp CSV files.
    Fit {
        /// CSV file; repeat for several tracks.
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
        /// Scenario whose fixed coefficients and delay factor are kept.
        #[arg(long, default_value = "industrial_combined")]
        fixed: String,
        /// Average records over intervals of this many meters first.
        #[arg(long)]
        average_m: Option<f64>,
        /// Scenario file fragment; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fit report; stderr when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the built-in acceptance checks.
    Validate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario name or scenario file path.
    #[arg(long, default_value = "industrial_combined")]
    scenario: String,
    /// LOS or NLOS.
    #[arg(long)]
    condition: Condition,
    #[arg(long, default_value_t = 5.4)]
    freq_ghz: f64,
    #[arg(long, default_value_t = 2.0)]
    tx_height: f64,
    /// Fixed transmitter, "x,y".
    #[arg(long, required_unless_present = "tx_track", conflicts_with = "tx_track")]
    tx_pos: Option<String>,
    /// Transmitter moving in step with the receiver, "x,y;x,y;...".
    #[arg(long)]
    tx_track: Option<String>,
    /// Receiver waypoints, "x,y;x,y;...".
    #[arg(long)]
    track: String,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn spec(&self) -> Result<TrackSpec> {
        let tx = match (&self.tx_pos, &self.tx_track) {
            (Some(p), _) => TxPlacement::Fixed(parse_point(p)?),
            (None, Some(t)) => TxPlacement::Track(parse_points(t)?),
            (None, None) => return Err(CliError::Usage("one of --tx-pos or --tx-track is required".into())),
        };
        let spec = TrackSpec {
            waypoints: parse_points(&self.track)?,
            sample_spacing_m: self.spacing,
            tx,
            tx_height_m: self.tx_height,
            f_ghz: self.freq_ghz,
            condition: self.condition,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn emit(path: Option<&Path>, text: &str, to_stderr: bool) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.into(), source }),
        None if to_stderr => {
            eprint!("{text}");
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateLsp { run } => {
            let spec = run.spec()?;
            let table = resolve_scenario(&run.scenario, spec.condition)?;
            emit(run.out.as_deref(), &generate_lsp(&table, &spec)?, false)
        }
        Command::GenerateCir { run, bandwidth_hz, paths, rx_height } => {
            let spec = run.spec()?;
            let table = resolve_scenario(&run.scenario, spec.condition)?;
            let opts = CirOptions { bandwidth_hz, n_paths: paths, rx_height_m: rx_height };
            emit(run.out.as_deref(), &generate_cir(&table, &spec, opts)?, false)
        }
        Command::Fit { inputs, fixed, average_m, out, report } => {
            let texts = inputs
                .iter()
                .map(|p| Ok((p.display().to_string(), read(p)?)))
                .collect::<Result<Vec<_>>>()?;
            let config = resolve_scenario_file(&fixed)?;
            let outcome = fit(&texts, &config, average_m)?;
            emit(out.as_deref(), &outcome.fragment, false)?;
            emit(report.as_deref(), &outcome.report, true)?;
            if outcome.problems.is_empty() {
                Ok(())
            } else {
                Err(CliError::Failed(format!("fit incomplete: {}", outcome.problems.join("; "))))
            }
        }
        Command::Validate { out } => {
            let results = run_all(&builtin_tables);
            emit(out.as_deref(), &report(&results), false)?;
            let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Failed(format!("failed criteria: {}", failed.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
