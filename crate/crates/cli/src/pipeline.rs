//! The five pipeline commands. Scenario simulations fan out across a rayon
//! pool and are merged in scenario-id order, never completion order, so the
//! output bytes are identical for any worker count. All products are
//! computed in memory first and written in a single phase; a failed write
//! removes everything written so far.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use gridfire::firesim::{self, BurnMatrix};
use gridfire::fixture::{self, FixtureSpec};
use gridfire::geo;
use gridfire::ignition::{self, IgnitionPoint};
use gridfire::impact::{self, LineSegmentation, ScenarioImpact, StructureDensityGrid};
use gridfire::ingest::{self, LandscapeStack, StructurePoints, Topology, WeatherRecord};
use gridfire::risk::{self, Cents, ScenarioCost};
use gridfire::SpreadParams;

use crate::config::RunConfig;

/// Errors split by exit code: input/validation problems exit 2, runtime
/// failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Runtime(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

pub struct LoadedInputs {
    pub landscape: LandscapeStack,
    pub weather: Vec<WeatherRecord>,
    pub topology: Topology,
    pub structures: StructurePoints,
}

pub fn load_inputs(cfg: &RunConfig) -> Result<LoadedInputs, CliError> {
    let landscape = ingest::load_landscape(&cfg.landscape_manifest)
        .map_err(|e| CliError::input(e.to_string()))?;
    let weather =
        ingest::load_weather(&cfg.weather_csv).map_err(|e| CliError::input(e.to_string()))?;
    let topology =
        ingest::load_topology(&cfg.topology_json).map_err(|e| CliError::input(e.to_string()))?;
    let structures =
        ingest::load_structures(&cfg.structures_csv).map_err(|e| CliError::input(e.to_string()))?;
    Ok(LoadedInputs {
        landscape,
        weather,
        topology,
        structures,
    })
}

/// Load everything and render a one-line-per-dataset summary.
pub fn cmd_validate(cfg: &RunConfig) -> Result<String, CliError> {
    let inputs = load_inputs(cfg)?;
    let grid = &inputs.landscape.grid;
    let mut report = String::new();
    report.push_str(&format!(
        "landscape: {} x {} cells ({}), cellsize {} m, lat {}..{}, lon {}..{}\n",
        grid.nrows,
        grid.ncols,
        grid.cell_count(),
        grid.cellsize_m,
        grid.lat_min,
        grid.lat_max,
        grid.lon_min,
        grid.lon_max
    ));
    report.push_str(&format!(
        "  nonburnable fuel: {} cells\n",
        ingest::nonburnable_cell_count(&inputs.landscape)
    ));
    match (inputs.weather.first(), inputs.weather.last()) {
        (Some(first), Some(last)) => report.push_str(&format!(
            "weather: {} records, {} .. {}\n",
            inputs.weather.len(),
            first.timestamp.to_rfc3339(),
            last.timestamp.to_rfc3339()
        )),
        _ => report.push_str("weather: 0 records\n"),
    }
    report.push_str(&format!(
        "topology: {} buses, {} branches\n",
        inputs.topology.buses.len(),
        inputs.topology.branches.len()
    ));
    let in_bounds = inputs
        .structures
        .points
        .iter()
        .filter(|p| grid.contains(**p))
        .count();
    report.push_str(&format!(
        "structures: {} points, {} inside the study area\n",
        inputs.structures.points.len(),
        in_bounds
    ));
    let ignitions = ignition::generate_ignition_points(&inputs.topology, cfg.spacing_miles)
        .map_err(|e| CliError::input(e.to_string()))?;
    report.push_str(&format!(
        "ignitions: {} scenarios at {} mile spacing\n",
        ignitions.len(),
        cfg.spacing_miles
    ));
    let off_grid = ignition::out_of_grid_scenarios(&ignitions, grid);
    if !off_grid.is_empty() {
        report.push_str(&format!("  off-grid ignition scenarios: {off_grid:?}\n"));
    }
    report.push_str("ok\n");
    Ok(report)
}

/// Write the ignition CSV only.
pub fn cmd_ignite(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let topology =
        ingest::load_topology(&cfg.topology_json).map_err(|e| CliError::input(e.to_string()))?;
    let ignitions = ignition::generate_ignition_points(&topology, cfg.spacing_miles)
        .map_err(|e| CliError::input(e.to_string()))?;
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::runtime(format!("{}: {e}", cfg.output_dir.display())))?;
    let path = cfg.output_dir.join("ignitions.csv");
    let mut buf = Vec::new();
    ignition::write_ignition_csv(&mut buf, &ignitions)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    fs::write(&path, buf).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    Ok(path)
}

struct ScenarioRecord {
    ignition: IgnitionPoint,
    impact: ScenarioImpact,
    cost: ScenarioCost,
    burn: Option<BurnMatrix>,
}

struct SweepPrep {
    inputs: LoadedInputs,
    ignitions: Vec<IgnitionPoint>,
    segmentation: LineSegmentation,
    density: StructureDensityGrid,
    params: SpreadParams,
    wind: (f64, f64),
    cost_model: risk::CostModel,
}

fn prepare(cfg: &RunConfig) -> Result<SweepPrep, CliError> {
    let inputs = load_inputs(cfg)?;
    let ignitions = ignition::generate_ignition_points(&inputs.topology, cfg.spacing_miles)
        .map_err(|e| CliError::input(e.to_string()))?;
    let off_grid = ignition::out_of_grid_scenarios(&ignitions, &inputs.landscape.grid);
    if !off_grid.is_empty() {
        return Err(CliError::input(format!(
            "ignition scenarios {off_grid:?} fall outside the study grid"
        )));
    }
    let window = (cfg.burn_window.start, cfg.burn_window.end());
    let wind =
        firesim::mean_wind(&inputs.weather, window).map_err(|e| CliError::input(e.to_string()))?;
    let segmentation = impact::segment_lines(&inputs.topology, &inputs.landscape.grid)
        .map_err(|e| CliError::input(e.to_string()))?;
    let (density, _) = impact::rasterize_structures(&inputs.structures, &inputs.landscape.grid);
    let params = cfg.spread.to_params(cfg.burn_window.duration_min);
    Ok(SweepPrep {
        inputs,
        ignitions,
        segmentation,
        density,
        params,
        wind,
        cost_model: cfg.costs.to_model(),
    })
}

fn run_scenario(
    prep: &SweepPrep,
    ign: &IgnitionPoint,
    import_dir: Option<&Path>,
    keep_burn: bool,
) -> Result<ScenarioRecord, CliError> {
    let fail =
        |e: &dyn fmt::Display| CliError::runtime(format!("scenario {}: {e}", ign.scenario_id));
    let grid = &prep.inputs.landscape.grid;
    let burn = match import_dir {
        Some(dir) => {
            let path = dir.join(format!("burn_{}.asc", ign.scenario_id));
            firesim::import_burn_raster(&path, grid).map_err(|e| fail(&e))?
        }
        None => {
            let cell = geo::project(ign.location, grid).map_err(|e| fail(&e))?;
            let (burn, _) =
                firesim::simulate_mtt(&prep.inputs.landscape, prep.wind, &prep.params, cell)
                    .map_err(|e| fail(&e))?;
            burn
        }
    };
    let impact = impact::assess(&burn, &prep.segmentation, &prep.density, ign.scenario_id)
        .map_err(|e| fail(&e))?;
    let cost = risk::scenario_cost(&impact, &prep.cost_model);
    Ok(ScenarioRecord {
        ignition: ign.clone(),
        impact,
        cost,
        burn: keep_burn.then_some(burn),
    })
}

pub const SCENARIOS_CSV_HEADER: &str = "scenario_id,branch_id,lat,lon,burned_acres,affected_miles,\
destroyed_structures,env_cost,line_cost,structure_cost,total_cost";

fn scenario_row(rec: &ScenarioRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        rec.ignition.scenario_id,
        rec.ignition.branch_id,
        rec.ignition.location.lat,
        rec.ignition.location.lon,
        rec.impact.burned_acres,
        rec.impact.total_affected_miles(),
        rec.impact.destroyed_structures,
        risk::format_cents(rec.cost.env_cost),
        risk::format_cents(rec.cost.line_cost),
        risk::format_cents(rec.cost.structure_cost),
        risk::format_cents(rec.cost.total)
    )
}

/// Tracks files written during the output phase so a failure removes every
/// partial product.
struct OutputPhase {
    written: Vec<PathBuf>,
}

impl OutputPhase {
    fn new() -> Self {
        OutputPhase {
            written: Vec::new(),
        }
    }

    fn write(&mut self, path: &Path, contents: &[u8]) -> Result<(), CliError> {
        fs::write(path, contents).map_err(|e| {
            let err = CliError::runtime(format!("{}: {e}", path.display()));
            self.rollback();
            err
        })?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    fn run(
        &mut self,
        path: &Path,
        action: impl FnOnce() -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        match action() {
            Ok(()) => {
                self.written.push(path.to_path_buf());
                Ok(())
            }
            Err(e) => {
                self.rollback();
                Err(e)
            }
        }
    }

    fn rollback(&mut self) {
        for path in self.written.drain(..).rev() {
            let _ = fs::remove_file(path);
        }
    }
}

/// Run every scenario, then write `scenarios.csv`, optional burn rasters,
/// `line_risk.csv`, `heatmap.geojson`, and the effective config.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let prep = prepare(cfg)?;
    let keep_burn = cfg.write_burn_rasters;
    let import_dir = cfg.import_burn_dir.as_deref();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.effective_workers())
        .build()
        .map_err(|e| CliError::runtime(format!("thread pool: {e}")))?;
    let results: Result<Vec<ScenarioRecord>, CliError> = pool.install(|| {
        prep.ignitions
            .par_iter()
            .map(|ign| run_scenario(&prep, ign, import_dir, keep_burn))
            .collect()
    });
    let records = results?;

    let branch_ids: Vec<u32> = prep.inputs.topology.branches.iter().map(|b| b.id).collect();
    let costs: Vec<ScenarioCost> = records.iter().map(|r| r.cost.clone()).collect();
    let risks = risk::aggregate_line_risk(&costs, &prep.ignitions, &branch_ids, cfg.aggregation)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    let line_risks = risk::classify(&risks).map_err(|e| CliError::runtime(e.to_string()))?;

    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::runtime(format!("{}: {e}", cfg.output_dir.display())))?;
    let mut phase = OutputPhase::new();

    let effective = serde_json::to_string_pretty(cfg)
        .map_err(|e| CliError::runtime(format!("serialize config: {e}")))?;
    phase.write(
        &cfg.output_dir.join("effective_config.json"),
        format!("{effective}\n").as_bytes(),
    )?;

    let mut scenarios_csv = String::from(SCENARIOS_CSV_HEADER);
    scenarios_csv.push('\n');
    for rec in &records {
        scenarios_csv.push_str(&scenario_row(rec));
        scenarios_csv.push('\n');
    }
    phase.write(
        &cfg.output_dir.join("scenarios.csv"),
        scenarios_csv.as_bytes(),
    )?;

    if keep_burn {
        for rec in &records {
            let path = cfg
                .output_dir
                .join(format!("burn_{}.asc", rec.ignition.scenario_id));
            let burn = rec.burn.as_ref().expect("burn kept when rasters requested");
            phase.run(&path, || {
                firesim::export_burn_raster(&path, burn)
                    .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
            })?;
        }
    }

    let mut line_risk_csv = String::from("branch_id,risk_usd,risk_class\n");
    for lr in &line_risks {
        line_risk_csv.push_str(&format!(
            "{},{},{}\n",
            lr.branch_id,
            risk::format_cents(lr.risk_cents),
            lr.risk_class.as_str()
        ));
    }
    phase.write(
        &cfg.output_dir.join("line_risk.csv"),
        line_risk_csv.as_bytes(),
    )?;

    let heatmap_path = cfg.output_dir.join("heatmap.geojson");
    phase.run(&heatmap_path, || {
        risk::emit_heatmap(&prep.inputs.topology, &line_risks, &heatmap_path)
            .map_err(|e| CliError::runtime(e.to_string()))
    })?;

    log::info!(
        "sweep complete: {} scenarios, outputs in {}",
        records.len(),
        cfg.output_dir.display()
    );
    Ok(())
}

/// Simulate a single scenario, write its burn raster, and return the
/// scenarios.csv header plus the one row.
pub fn cmd_simulate_one(cfg: &RunConfig, scenario_id: u32) -> Result<String, CliError> {
    let prep = prepare(cfg)?;
    let Some(ign) = prep.ignitions.iter().find(|p| p.scenario_id == scenario_id) else {
        return Err(CliError::input(format!(
            "unknown scenario {scenario_id}; {} scenarios exist",
            prep.ignitions.len()
        )));
    };
    let rec = run_scenario(&prep, ign, cfg.import_burn_dir.as_deref(), true)?;

    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::runtime(format!("{}: {e}", cfg.output_dir.display())))?;
    let path = cfg.output_dir.join(format!("burn_{scenario_id}.asc"));
    firesim::export_burn_raster(&path, rec.burn.as_ref().expect("burn kept"))
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;

    Ok(format!("{SCENARIOS_CSV_HEADER}\n{}\n", scenario_row(&rec)))
}

/// Re-run the risk aggregation, classification, and heatmap emission from an
/// existing scenarios.csv.
pub fn cmd_classify(cfg: &RunConfig, scenarios_csv: Option<&Path>) -> Result<(), CliError> {
    let topology =
        ingest::load_topology(&cfg.topology_json).map_err(|e| CliError::input(e.to_string()))?;
    let default_path = cfg.output_dir.join("scenarios.csv");
    let csv_path = scenarios_csv.unwrap_or(&default_path);
    let raw = fs::read_to_string(csv_path)
        .map_err(|e| CliError::input(format!("{}: {e}", csv_path.display())))?;

    let mut lines = raw.lines();
    match lines.next() {
        Some(header) if header == SCENARIOS_CSV_HEADER => {}
        other => {
            return Err(CliError::input(format!(
                "{}: unexpected header {other:?}",
                csv_path.display()
            )))
        }
    }
    let mut costs = Vec::new();
    let mut row_ignitions = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(CliError::input(format!(
                "{}:{lineno}: expected 11 fields, got {}",
                csv_path.display(),
                fields.len()
            )));
        }
        let parse_u32 = |s: &str, name: &str| {
            s.parse::<u32>().map_err(|_| {
                CliError::input(format!("{}:{lineno}: bad {name} {s:?}", csv_path.display()))
            })
        };
        let scenario_id = parse_u32(fields[0], "scenario_id")?;
        let branch_id = parse_u32(fields[1], "branch_id")?;
        let total = parse_dollars(fields[10]).ok_or_else(|| {
            CliError::input(format!(
                "{}:{lineno}: bad total_cost {:?}",
                csv_path.display(),
                fields[10]
            ))
        })?;
        costs.push(ScenarioCost {
            scenario_id,
            env_cost: 0,
            line_cost: 0,
            structure_cost: 0,
            total,
        });
        row_ignitions.push(IgnitionPoint {
            scenario_id,
            branch_id,
            location: gridfire::GeoPoint::new(0.0, 0.0),
            offset_miles: 0.0,
        });
    }

    let branch_ids: Vec<u32> = topology.branches.iter().map(|b| b.id).collect();
    let risks = risk::aggregate_line_risk(&costs, &row_ignitions, &branch_ids, cfg.aggregation)
        .map_err(|e| CliError::input(e.to_string()))?;
    let line_risks = risk::classify(&risks).map_err(|e| CliError::input(e.to_string()))?;

    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::runtime(format!("{}: {e}", cfg.output_dir.display())))?;
    let mut phase = OutputPhase::new();
    let mut line_risk_csv = String::from("branch_id,risk_usd,risk_class\n");
    for lr in &line_risks {
        line_risk_csv.push_str(&format!(
            "{},{},{}\n",
            lr.branch_id,
            risk::format_cents(lr.risk_cents),
            lr.risk_class.as_str()
        ));
    }
    phase.write(
        &cfg.output_dir.join("line_risk.csv"),
        line_risk_csv.as_bytes(),
    )?;
    let heatmap_path = cfg.output_dir.join("heatmap.geojson");
    phase.run(&heatmap_path, || {
        risk::emit_heatmap(&topology, &line_risks, &heatmap_path)
            .map_err(|e| CliError::runtime(e.to_string()))
    })?;
    Ok(())
}

/// Dollars string with two decimals to cents; `None` on malformed input.
fn parse_dollars(s: &str) -> Option<Cents> {
    let (sign, rest) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let (dollars, cents) = rest.split_once('.')?;
    if cents.len() != 2 {
        return None;
    }
    let dollars: Cents = dollars.parse().ok()?;
    let cents: Cents = cents.parse().ok()?;
    Some(sign * (dollars * 100 + cents))
}

/// Materialize the bundled synthetic fixture.
pub fn cmd_gen_fixture(out: &Path, spec: &FixtureSpec) -> Result<PathBuf, CliError> {
    fixture::write_fixture(out, spec).map_err(|e| CliError::runtime(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dollars_parse_back_to_cents() {
        assert_eq!(parse_dollars("382863990.00"), Some(38_286_399_000));
        assert_eq!(parse_dollars("0.07"), Some(7));
        assert_eq!(parse_dollars("-1.50"), Some(-150));
        assert_eq!(parse_dollars("1.5"), None);
        assert_eq!(parse_dollars("abc"), None);
        for cents in [0i64, 1, 99, 100, 12_345_678_901] {
            assert_eq!(parse_dollars(&risk::format_cents(cents)), Some(cents));
        }
    }
}
