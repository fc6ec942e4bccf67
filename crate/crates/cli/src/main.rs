//! `qslp` — slow-light / stationary-light-pulse simulator and photon-pair
//! statistics toolkit.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use qslp_cli::config::{parse_config, AppConfig, ConfigError};
use qslp_cli::csvio;
use qslp_cli::runner::{self, ReproduceTarget, RunnerError};
use qslp_core::solver::{Solver, SolverError};
use qslp_core::stats::{
    build_histogram, dc_offset, g2_conditional_from_events, g2_from_histogram, monte_carlo_events,
    windows, StatsError,
};

#[derive(Parser)]
#[command(name = "qslp", version, about = "Maxwell-Bloch stationary-light-pulse simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (key = value with [section] headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for emitted files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Random seed for every stochastic stage.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override a configuration key, e.g. --set medium.od=50 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario and write the boundary-output trace.
    Simulate,
    /// Run a named end-to-end reproduction: fig3a, fig3b, or fig4.
    Reproduce { target: String },
    /// Evaluate the configured scenario over the [sweep] parameter grid.
    Sweep,
    /// Generate Monte Carlo coincidence event streams.
    Events,
    /// Analyze an event-stream CSV: histogram, DC offset, correlations.
    Analyze { events_file: PathBuf },
}

/// Errors mapped onto the exit-code contract: 1 for configuration problems,
/// 2 for numerical failures.
enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Invalid { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<RunnerError> for CliError {
    fn from(e: RunnerError) -> Self {
        match e {
            RunnerError::Solver(inner) => inner.into(),
            RunnerError::Stats(inner) => inner.into(),
            RunnerError::FlatTrace => CliError::Numerical(e.to_string()),
            RunnerError::Config(m) => CliError::Config(m),
        }
    }
}

fn load_config(cli: &Cli) -> Result<AppConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            parse_config(&text)?
        }
        None => AppConfig::default(),
    };
    for (i, pair) in cli.set.iter().enumerate() {
        let Some((key, value)) = pair.split_once('=') else {
            return Err(CliError::Config(format!(
                "--set #{}: expected KEY=VALUE, got `{pair}`",
                i + 1
            )));
        };
        cfg.set(key.trim(), value, 0)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit_reproduce(
    out_dir: &Path,
    output: &runner::ReproduceOutput,
    meta: &str,
) -> Result<(), CliError> {
    for (name, rec) in &output.traces {
        csvio::write_record(&out_dir.join(name), rec, meta)?;
        println!("wrote {}", out_dir.join(name).display());
    }
    for (name, h) in &output.histograms {
        csvio::write_histogram(&out_dir.join(name), h, meta)?;
        println!("wrote {}", out_dir.join(name).display());
    }
    for (name, (heralds, signals)) in &output.event_streams {
        csvio::write_events(&out_dir.join(name), heralds, signals, meta)?;
        println!("wrote {}", out_dir.join(name).display());
    }
    csvio::write_metrics(&out_dir.join("metrics.csv"), &output.report.metrics, meta)?;
    csvio::write_report(&out_dir.join("report.txt"), &output.report, meta)?;
    println!("wrote {}", out_dir.join("metrics.csv").display());
    println!("wrote {}", out_dir.join("report.txt").display());
    for m in &output.report.metrics {
        println!("  {} = {:.6e} {}", m.name, m.value, m.unit);
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let out_dir = &cli.out;

    match &cli.command {
        Command::Simulate => {
            let meta = csvio::metadata_block("simulate", cli.seed, &cfg);
            let rec = Solver::run(&cfg.solver, cfg.scenario)?;
            let name = format!("trace_{}.csv", cfg.scenario.name());
            csvio::write_record(&out_dir.join(&name), &rec, &meta)?;
            println!("wrote {}", out_dir.join(&name).display());
        }
        Command::Reproduce { target } => {
            let target = ReproduceTarget::from_str(target)?;
            let meta =
                csvio::metadata_block(&format!("reproduce {}", target.name()), cli.seed, &cfg);
            let output = runner::reproduce(&cfg, target, cli.seed)?;
            emit_reproduce(out_dir, &output, &meta)?;
        }
        Command::Sweep => {
            let meta = csvio::metadata_block("sweep", cli.seed, &cfg);
            let table = runner::sweep(&cfg)?;
            csvio::write_sweep(&out_dir.join("sweep.csv"), &table, &meta)?;
            let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
            println!(
                "wrote {} ({} points, {} failed)",
                out_dir.join("sweep.csv").display(),
                table.rows.len(),
                failed
            );
        }
        Command::Events => {
            let meta = csvio::metadata_block("events", cli.seed, &cfg);
            let (heralds, signals) =
                monte_carlo_events(&cfg.source, cfg.events.n_repetitions, cli.seed)?;
            csvio::write_events(&out_dir.join("events.csv"), &heralds, &signals, &meta)?;
            println!(
                "wrote {} ({} heralds, {} signals)",
                out_dir.join("events.csv").display(),
                heralds.len(),
                signals.len()
            );
        }
        Command::Analyze { events_file } => {
            let meta = csvio::metadata_block("analyze", cli.seed, &cfg);
            let (heralds, signals) = csvio::read_events(events_file)?;
            if heralds.is_empty() {
                return Err(CliError::Numerical("event stream has no heralds".into()));
            }
            let h = build_histogram(&heralds, &signals, cfg.stats.bin_width, cfg.stats.span)?;
            let period = cfg.source.repetition_period;
            let floor = dc_offset(&h, &runner::plateau_windows(period))?;
            let first = windows::first_peak();
            let reference = windows::reference_peak(period);
            let g2_raw = g2_from_histogram(&h, &first, &reference, 0.0)?;
            let g2_sub = g2_from_histogram(&h, &first, &reference, floor)?;
            let g2_cond = g2_conditional_from_events(
                &heralds,
                &signals,
                cli.seed ^ 0x7370_6c69,
                cfg.events.coincidence_window,
            )?;
            csvio::write_histogram(&out_dir.join("histogram.csv"), &h, &meta)?;
            let metrics = [
                ("dc_offset_counts_per_bin", floor),
                ("g2_cross_raw", g2_raw),
                ("g2_cross_noise_subtracted", g2_sub),
                ("g2_conditional", g2_cond),
            ];
            let mut text = meta.clone();
            text.push_str("name,value\n");
            for (name, value) in metrics {
                text.push_str(&format!("{name},{value:e}\n"));
                println!("  {name} = {value:.6}");
            }
            std::fs::create_dir_all(out_dir)?;
            std::fs::write(out_dir.join("analysis.csv"), text)?;
            println!("wrote {}", out_dir.join("histogram.csv").display());
            println!("wrote {}", out_dir.join("analysis.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
