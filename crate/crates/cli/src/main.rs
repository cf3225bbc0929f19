use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use drst::demand::CensusTract;
use drst::io::{self, IoError};
use drst::net::RouteNetwork;
use drst::report::{aggregate, emit_results, Provenance, ReportError};
use drst::scenarios;
use drst::sim::{ScenarioConfig, SimError};
use drst::sweep::{run_point, run_sweep, SweepAxis, SweepError, SweepOptions, SweepPoint, SweepRow};

#[derive(Parser)]
#[command(name = "drst", version, about = "Demand responsive shared transport simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    /// Network file (defaults to the bundled synthetic town)
    #[arg(long)]
    network: Option<PathBuf>,
    /// Census tract file (defaults to the bundled synthetic town)
    #[arg(long)]
    tracts: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario
    Run {
        /// Scenario file (defaults to the bundled default scenario)
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        inputs: Inputs,
        /// Override the scenario seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write the event log
        #[arg(long)]
        keep_logs: bool,
    },
    /// Run an experiment grid
    Sweep {
        /// Sweep file
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        inputs: Inputs,
        /// Override the sweep's seed_base
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write one event log per run
        #[arg(long)]
        keep_logs: bool,
        /// Worker threads (default: all cores)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check input files without running anything
    Validate {
        /// Scenario file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sweep file
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[command(flatten)]
        inputs: Inputs,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Input(#[from] IoError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Input(e) => e.category(),
            CliError::Sim(_) => "simulation",
            CliError::Sweep(SweepError::Spec(_)) => "validation",
            CliError::Sweep(_) => "simulation",
            CliError::Report(_) => "output",
        }
    }

    fn exit_code(&self) -> u8 {
        match self.category() {
            "io" => 3,
            "parse" => 4,
            "validation" => 5,
            "network" => 6,
            "tracts" => 7,
            "simulation" => 8,
            _ => 9,
        }
    }
}

fn display(path: &Option<PathBuf>, fallback: &str) -> String {
    path.as_ref()
        .map_or_else(|| fallback.to_string(), |p| p.display().to_string())
}

fn load_inputs(inputs: &Inputs) -> Result<(RouteNetwork, Vec<CensusTract>), CliError> {
    let network = match &inputs.network {
        Some(p) => io::load_network(p)?,
        None => scenarios::network(),
    };
    let tracts = match &inputs.tracts {
        Some(p) => io::load_tracts(p)?,
        None => scenarios::tracts(),
    };
    Ok((network, tracts))
}

fn provenance(config: &str, inputs: &Inputs, seed: u64) -> Provenance {
    Provenance {
        config: Some(config.to_string()),
        network: Some(display(&inputs.network, "<bundled ragusa_network.json>")),
        tracts: Some(display(&inputs.tracts, "<bundled ragusa_tracts.json>")),
        seed: Some(seed),
    }
}

fn print_rows(rows: &[SweepRow]) {
    println!(
        "{:<6} {:>8} {:>4} {:>4} {:>6} {:>8} {:>7} {:>7} {:>7} {:>8}",
        "strat", "axis", "veh", "cap", "runs", "NP", "AWT", "ALF", "TDD", "TUC"
    );
    for p in aggregate(rows) {
        let mean = |name: &str| p.get(name).map_or(f64::NAN, |i| i.mean);
        println!(
            "{:<6} {:>8} {:>4} {:>4} {:>6} {:>8.1} {:>7.2} {:>7.3} {:>7.1} {:>8.3}",
            p.strategy.to_string(),
            p.axis_value,
            p.n_vehicles,
            p.capacity,
            p.runs,
            mean("NP"),
            mean("AWT"),
            mean("ALF"),
            mean("TDD"),
            mean("TUC"),
        );
    }
}

fn run_single(
    config: Option<PathBuf>,
    inputs: Inputs,
    seed: Option<u64>,
    out: &Path,
    keep_logs: bool,
) -> Result<(), CliError> {
    let mut scenario: ScenarioConfig = match &config {
        Some(p) => io::parse_scenario(p)?,
        None => scenarios::default_scenario(),
    };
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let (network, tracts) = load_inputs(&inputs)?;
    let point = SweepPoint {
        axis_value: scenario.randomness_p,
        replication: 0,
        config: scenario.clone(),
    };
    let row = run_point(SweepAxis::RandomnessP, &point, &network, &tracts, keep_logs)?;
    let rows = vec![row];
    let files = emit_results(
        &rows,
        out,
        &provenance(&display(&config, "<bundled default.json>"), &inputs, scenario.seed),
    )?;
    print_rows(&rows);
    println!("wrote {}", files.csv.display());
    Ok(())
}

fn run_grid(
    config: PathBuf,
    inputs: Inputs,
    seed: Option<u64>,
    out: &Path,
    keep_logs: bool,
    workers: Option<usize>,
) -> Result<(), CliError> {
    let mut spec = io::parse_sweep(&config)?;
    if let Some(seed) = seed {
        spec.seed_base = seed;
    }
    let (network, tracts) = load_inputs(&inputs)?;
    let rows = run_sweep(&spec, &network, &tracts, SweepOptions { workers, keep_logs })?;
    let files = emit_results(
        &rows,
        out,
        &provenance(&config.display().to_string(), &inputs, spec.seed_base),
    )?;
    print_rows(&rows);
    println!("wrote {} ({} runs)", files.csv.display(), rows.len());
    Ok(())
}

fn validate(config: Option<PathBuf>, sweep: Option<PathBuf>, inputs: Inputs) -> Result<(), CliError> {
    let (network, tracts) = load_inputs(&inputs)?;
    if let Some(p) = &config {
        io::parse_scenario(p)?;
    }
    if let Some(p) = &sweep {
        io::parse_sweep(p)?;
    }
    println!(
        "ok: {} nodes, {} stops, {} flexible routes, {} tracts",
        network.nodes().count(),
        network.stops().len(),
        network.flex_routes().len(),
        tracts.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            inputs,
            seed,
            out,
            keep_logs,
        } => run_single(config, inputs, seed, &out, keep_logs),
        Command::Sweep {
            config,
            inputs,
            seed,
            out,
            keep_logs,
            workers,
        } => run_grid(config, inputs, seed, &out, keep_logs, workers),
        Command::Validate {
            config,
            sweep,
            inputs,
        } => validate(config, sweep, inputs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
