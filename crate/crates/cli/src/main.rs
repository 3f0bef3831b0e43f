//! `ssvsim` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use ssvsim::scenario::report::SubsetSummary;
use ssvsim::scenario::{
    load_scenario, parse_sweep, run_with_threads, simulate, simulate_with_threads, sweep, ScenarioConfig, ScenarioError,
    SweepRow,
};

#[derive(Debug, Parser)]
#[command(name = "ssvsim", version, about = "GNSS side-lobe reception simulator for high-altitude receivers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write CSV time series and a report.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Overrides the scenario's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Availability of service versus acquisition threshold.
    Availability(SweepArgs),
    /// 95% GDOP versus acquisition threshold.
    GdopSweep(SweepArgs),
    /// Load and validate a scenario, then print it with defaults applied.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Acquisition thresholds as `lo:hi:step` in dB-Hz.
    #[arg(long, value_name = "LO:HI:STEP")]
    sweep_threshold: String,
}

fn exit_for(err: &ScenarioError) -> ExitCode {
    eprintln!("error: {err}");
    if err.is_validation() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())
}

fn print_sweep(cfg: &ScenarioConfig, rows: &[SweepRow], cell: impl Fn(&SubsetSummary) -> String) {
    let names = cfg.subsets();
    let mut header = vec!["acq_dbhz".to_string()];
    for n in &names {
        header.push(n.clone());
        header.push(format!("{n}_acqonly"));
    }
    println!("{}", header.join("\t"));
    for row in rows {
        let mut fields = vec![format!("{}", row.acquisition_dbhz)];
        for (h, a) in row.hysteresis.iter().zip(&row.acquisition_only) {
            fields.push(cell(h));
            fields.push(cell(a));
        }
        println!("{}", fields.join("\t"));
    }
}

fn run_sweep(args: &SweepArgs, cell: impl Fn(&SubsetSummary) -> String) -> Result<(), ScenarioError> {
    let cfg = load_scenario(&args.common.scenario)?;
    let range = parse_sweep(&args.sweep_threshold)?;
    let sim = match args.common.threads {
        Some(n) => simulate_with_threads(&cfg, n)?,
        None => simulate(&cfg)?,
    };
    let rows = sweep(&cfg, &sim, &range)?;
    print_sweep(&cfg, &rows, cell);
    Ok(())
}

fn execute(cli: Cli) -> Result<(), ScenarioError> {
    match cli.command {
        Command::Simulate { common, output_dir } => {
            let cfg = load_scenario(&common.scenario)?;
            let out = run_with_threads(&cfg, common.threads)?;
            let dir = output_dir.unwrap_or_else(|| cfg.output_dir.clone());
            out.write_to(&dir)?;
            info!("wrote {} files to {}", out.files.len(), dir.display());
            let r = &out.report;
            println!("scenario {} ({} epochs, {} satellites) -> {}", r.scenario, r.epochs_simulated, r.satellites, dir.display());
            println!("subset\tavailability\tmean_gdop\tgdop_95\tspherical_95_m");
            for s in &r.subsets {
                println!(
                    "{}\t{:.4}\t{}\t{}\t{}",
                    s.name,
                    s.availability_fraction,
                    opt(s.mean_gdop),
                    opt(s.gdop_95),
                    opt(s.spherical_95_m)
                );
            }
            Ok(())
        }
        Command::Availability(args) => run_sweep(&args, |s| format!("{:.4}", s.availability_fraction)),
        Command::GdopSweep(args) => run_sweep(&args, |s| opt(s.gdop_95)),
        Command::Validate { scenario } => {
            let cfg = load_scenario(&scenario)?;
            print!("{}", cfg.echo);
            eprintln!("{}: valid ({} satellites, content hash {})", scenario.display(), cfg.satellite_count(), cfg.content_hash);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
