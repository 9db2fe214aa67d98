use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gridfire::fixture::FixtureSpec;
use gridfire::AggregationPolicy;
use gridfire_cli::pipeline::{
    cmd_classify, cmd_gen_fixture, cmd_ignite, cmd_simulate_one, cmd_sweep, cmd_validate,
};
use gridfire_cli::{CliError, Overrides, RunConfig};

/// Financial risk assessment of grid-ignited wildfires: simulate one fire
/// per ignition point along every transmission branch, price the damage,
/// and emit a percentile color heatmap per line.
#[derive(Parser)]
#[command(name = "gridfire", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate every input dataset, printing a summary.
    Validate(CommonArgs),
    /// Generate ignition points and write ignitions.csv.
    Ignite(CommonArgs),
    /// Run the full scenario sweep and write all result files.
    Sweep(CommonArgs),
    /// Simulate a single scenario: write its burn raster, print its row.
    SimulateOne {
        #[command(flatten)]
        common: CommonArgs,
        /// Scenario id from the generated ignition set.
        scenario_id: u32,
    },
    /// Re-run risk aggregation and the heatmap from an existing scenarios.csv.
    Classify {
        #[command(flatten)]
        common: CommonArgs,
        /// Path of the scenarios.csv to classify (default: <out>/scenarios.csv).
        #[arg(long)]
        scenarios: Option<PathBuf>,
    },
    /// Write the bundled synthetic IEEE 30-bus fixture.
    GenFixture {
        /// Directory to create the fixture in.
        #[arg(long)]
        out: PathBuf,
        /// Generate the small fast variant instead of the 464x517 study grid.
        #[arg(long)]
        small: bool,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ignition spacing in miles (overrides the config).
    #[arg(long)]
    spacing_miles: Option<f64>,
    /// Burn duration in minutes (overrides the config).
    #[arg(long)]
    duration_min: Option<f64>,
    /// Per-line aggregation policy (overrides the config).
    #[arg(long, value_parser = parse_policy)]
    policy: Option<AggregationPolicy>,
    /// Worker thread count (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Read burn_<id>.asc rasters from this directory instead of simulating.
    #[arg(long)]
    import_burn_dir: Option<PathBuf>,
    /// Write one burn_<id>.asc raster per scenario.
    #[arg(long)]
    write_rasters: bool,
}

fn parse_policy(s: &str) -> Result<AggregationPolicy, String> {
    match s {
        "max" => Ok(AggregationPolicy::Max),
        "mean" => Ok(AggregationPolicy::Mean),
        other => Err(format!("policy must be max or mean, got {other:?}")),
    }
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let overrides = Overrides {
            out: self.out.clone(),
            spacing_miles: self.spacing_miles,
            duration_min: self.duration_min,
            policy: self.policy,
            workers: self.workers,
            import_burn_dir: self.import_burn_dir.clone(),
            write_rasters: self.write_rasters,
        };
        RunConfig::load(&self.config, &overrides)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate(common) => {
            let report = cmd_validate(&common.load()?)?;
            print!("{report}");
        }
        Command::Ignite(common) => {
            let path = cmd_ignite(&common.load()?)?;
            println!("wrote {}", path.display());
        }
        Command::Sweep(common) => {
            let cfg = common.load()?;
            cmd_sweep(&cfg)?;
            println!("outputs in {}", cfg.output_dir.display());
        }
        Command::SimulateOne {
            common,
            scenario_id,
        } => {
            let row = cmd_simulate_one(&common.load()?, scenario_id)?;
            print!("{row}");
        }
        Command::Classify { common, scenarios } => {
            let cfg = common.load()?;
            cmd_classify(&cfg, scenarios.as_deref())?;
            println!("outputs in {}", cfg.output_dir.display());
        }
        Command::GenFixture { out, small } => {
            let spec = if small {
                FixtureSpec::small()
            } else {
                FixtureSpec::full_scale()
            };
            let config = cmd_gen_fixture(&out, &spec)?;
            println!("wrote fixture, config at {}", config.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
