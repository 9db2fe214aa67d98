//! Run configuration: a single JSON file plus command-line overrides
//! (overrides win). Relative paths resolve against the config file's
//! directory; the effective config is echoed into the output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use gridfire::risk::CostModel;
use gridfire::{AggregationPolicy, Connectivity, SpreadParams};

use crate::pipeline::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub landscape_manifest: PathBuf,
    pub weather_csv: PathBuf,
    pub topology_json: PathBuf,
    pub structures_csv: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_spacing")]
    pub spacing_miles: f64,
    pub burn_window: BurnWindow,
    #[serde(default)]
    pub spread: SpreadConfig,
    #[serde(default)]
    pub costs: CostConfig,
    #[serde(default = "default_policy")]
    pub aggregation: AggregationPolicy,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub write_burn_rasters: bool,
    #[serde(default)]
    pub import_burn_dir: Option<PathBuf>,
}

fn default_spacing() -> f64 {
    5.0
}

fn default_policy() -> AggregationPolicy {
    AggregationPolicy::Max
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurnWindow {
    /// Start of the weather window the mean wind is taken over.
    pub start: DateTime<Utc>,
    /// Burn duration in minutes; also the length of the weather window.
    pub duration_min: f64,
}

impl BurnWindow {
    pub fn end(&self) -> DateTime<Utc> {
        self.start + chrono::Duration::milliseconds((self.duration_min * 60_000.0).round() as i64)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpreadConfig {
    /// Overrides for the base ROS table; codes not listed keep the shipped
    /// defaults.
    pub ros_table: BTreeMap<u16, f64>,
    pub slope_coeff: f64,
    pub wind_coeff: f64,
    pub wind_exponent: f64,
    pub connectivity: Connectivity,
}

impl Default for SpreadConfig {
    fn default() -> Self {
        let p = SpreadParams::default();
        SpreadConfig {
            ros_table: BTreeMap::new(),
            slope_coeff: p.slope_coeff,
            wind_coeff: p.wind_coeff,
            wind_exponent: p.wind_exponent,
            connectivity: p.connectivity,
        }
    }
}

impl SpreadConfig {
    pub fn to_params(&self, duration_min: f64) -> SpreadParams {
        let mut ros_table = SpreadParams::default_ros_table();
        for (&code, &ros) in &self.ros_table {
            ros_table.insert(code, ros);
        }
        SpreadParams {
            ros_table,
            slope_coeff: self.slope_coeff,
            wind_coeff: self.wind_coeff,
            wind_exponent: self.wind_exponent,
            connectivity: self.connectivity,
            duration_min,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub env_cost_per_acre: f64,
    pub line_cost_per_mile: f64,
    pub structure_cost: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            env_cost_per_acre: 500.0,
            line_cost_per_mile: 250_000.0,
            structure_cost: 904_210.0,
        }
    }
}

impl CostConfig {
    pub fn to_model(&self) -> CostModel {
        CostModel::from_dollars(
            self.env_cost_per_acre,
            self.line_cost_per_mile,
            self.structure_cost,
        )
    }
}

/// Command-line overrides; every set field wins over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub spacing_miles: Option<f64>,
    pub duration_min: Option<f64>,
    pub policy: Option<AggregationPolicy>,
    pub workers: Option<usize>,
    pub import_burn_dir: Option<PathBuf>,
    pub write_rasters: bool,
}

impl RunConfig {
    /// Parse the config file, apply overrides, resolve relative paths
    /// against the config directory, and check the numeric invariants.
    pub fn load(config_path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
        let raw = std::fs::read_to_string(config_path)
            .map_err(|e| CliError::input(format!("{}: {e}", config_path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&raw)
            .map_err(|e| CliError::input(format!("{}: {e}", config_path.display())))?;

        // Paths from the config file resolve against its directory; paths
        // given on the command line stay relative to the working directory.
        let base = config_path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        cfg.landscape_manifest = resolve(&cfg.landscape_manifest);
        cfg.weather_csv = resolve(&cfg.weather_csv);
        cfg.topology_json = resolve(&cfg.topology_json);
        cfg.structures_csv = resolve(&cfg.structures_csv);
        cfg.output_dir = resolve(&cfg.output_dir);
        cfg.import_burn_dir = cfg.import_burn_dir.as_ref().map(resolve);

        if let Some(out) = &overrides.out {
            cfg.output_dir = out.clone();
        }
        if let Some(spacing) = overrides.spacing_miles {
            cfg.spacing_miles = spacing;
        }
        if let Some(duration) = overrides.duration_min {
            cfg.burn_window.duration_min = duration;
        }
        if let Some(policy) = overrides.policy {
            cfg.aggregation = policy;
        }
        if let Some(workers) = overrides.workers {
            cfg.workers = Some(workers);
        }
        if let Some(dir) = &overrides.import_burn_dir {
            cfg.import_burn_dir = Some(dir.clone());
        }
        if overrides.write_rasters {
            cfg.write_burn_rasters = true;
        }

        if cfg.spacing_miles.is_nan() || cfg.spacing_miles <= 0.0 {
            return Err(CliError::input(format!(
                "spacing_miles must be positive, got {}",
                cfg.spacing_miles
            )));
        }
        if cfg.burn_window.duration_min.is_nan() || cfg.burn_window.duration_min <= 0.0 {
            return Err(CliError::input(format!(
                "burn_window.duration_min must be positive, got {}",
                cfg.burn_window.duration_min
            )));
        }
        if cfg.workers == Some(0) {
            return Err(CliError::input("workers must be at least 1".to_string()));
        }
        Ok(cfg)
    }

    pub fn effective_workers(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(usize::from)
                .unwrap_or(1)
        })
    }
}
