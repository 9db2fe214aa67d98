//! Damage costs, per-line risk aggregation, percentile classification, and
//! the GeoJSON heatmap.
//!
//! Currency is held in integer cents throughout; the only rounding point is
//! the acre product, rounded half-away-from-zero to the cent. Percentile
//! thresholds use the inclusive linear-interpolation definition
//! (`rank = p * (N - 1)`), and boundary ties fall to the lower class.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ignition::IgnitionPoint;
use crate::impact::ScenarioImpact;
use crate::ingest::Topology;

pub type Cents = i64;

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("cannot classify an empty risk list")]
    EmptyInput,
    #[error("scenario {scenario_id} has no matching ignition point")]
    OrphanScenario { scenario_id: u32 },
    #[error("branch {branch_id} in risk list is missing from the topology")]
    UnknownBranch { branch_id: u32 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Dollars to integer cents, half-away-from-zero.
pub fn dollars_to_cents(dollars: f64) -> Cents {
    (dollars * 100.0).round() as Cents
}

/// Render cents as a dollar string with two decimals, e.g. `382863990.00`.
pub fn format_cents(cents: Cents) -> String {
    let sign = if cents < 0 { "-" } else { "" };
    let abs = cents.unsigned_abs();
    format!("{sign}{}.{:02}", abs / 100, abs % 100)
}

/// Unit damage costs. Defaults: $500 per burned acre, $250,000 per mile of
/// line reconstruction, $904,210 per structure (California median home
/// price, April 2024).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub env_cost_per_acre_cents: Cents,
    pub line_cost_per_mile_cents: Cents,
    pub structure_cost_cents: Cents,
}

impl CostModel {
    pub fn from_dollars(env_per_acre: f64, line_per_mile: f64, structure: f64) -> Self {
        CostModel {
            env_cost_per_acre_cents: dollars_to_cents(env_per_acre),
            line_cost_per_mile_cents: dollars_to_cents(line_per_mile),
            structure_cost_cents: dollars_to_cents(structure),
        }
    }
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::from_dollars(500.0, 250_000.0, 904_210.0)
    }
}

/// The total financial loss of one scenario, decomposed into environment,
/// power-line reconstruction, and structure components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioCost {
    pub scenario_id: u32,
    pub env_cost: Cents,
    pub line_cost: Cents,
    pub structure_cost: Cents,
    pub total: Cents,
}

pub fn scenario_cost(impact: &ScenarioImpact, model: &CostModel) -> ScenarioCost {
    let env_cost = (impact.burned_acres * model.env_cost_per_acre_cents as f64).round() as Cents;
    let line_cost = impact.total_affected_miles() as Cents * model.line_cost_per_mile_cents;
    let structure_cost = impact.destroyed_structures as Cents * model.structure_cost_cents;
    ScenarioCost {
        scenario_id: impact.scenario_id,
        env_cost,
        line_cost,
        structure_cost,
        total: env_cost + line_cost + structure_cost,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationPolicy {
    /// Worst-case financial exposure per line (default).
    Max,
    /// Mean over the line's ignition scenarios.
    Mean,
}

/// Group scenario totals by source branch and reduce with the policy.
/// Branches without any ignition scenario get risk 0 and a warning.
pub fn aggregate_line_risk(
    costs: &[ScenarioCost],
    ignitions: &[IgnitionPoint],
    branch_ids: &[u32],
    policy: AggregationPolicy,
) -> Result<Vec<(u32, Cents)>, RiskError> {
    let scenario_branch: BTreeMap<u32, u32> = ignitions
        .iter()
        .map(|p| (p.scenario_id, p.branch_id))
        .collect();

    let mut grouped: BTreeMap<u32, Vec<Cents>> =
        branch_ids.iter().map(|&b| (b, Vec::new())).collect();
    for cost in costs {
        let branch = scenario_branch
            .get(&cost.scenario_id)
            .ok_or(RiskError::OrphanScenario {
                scenario_id: cost.scenario_id,
            })?;
        grouped.entry(*branch).or_default().push(cost.total);
    }

    let mut out = Vec::with_capacity(grouped.len());
    for (branch_id, totals) in grouped {
        let risk = if totals.is_empty() {
            log::warn!("branch {branch_id} has no ignition scenarios; risk set to 0");
            0
        } else {
            match policy {
                AggregationPolicy::Max => *totals.iter().max().expect("non-empty"),
                AggregationPolicy::Mean => {
                    let sum: i128 = totals.iter().map(|&t| i128::from(t)).sum();
                    // Mean rounded half-away-from-zero to the cent.
                    ((sum as f64) / totals.len() as f64).round() as Cents
                }
            }
        };
        out.push((branch_id, risk));
    }
    Ok(out)
}

/// Percentile color classes, most severe first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskClass {
    Red,
    Yellow,
    Green,
    White,
}

impl RiskClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskClass::Red => "red",
            RiskClass::Yellow => "yellow",
            RiskClass::Green => "green",
            RiskClass::White => "white",
        }
    }

    pub fn color_hex(self) -> &'static str {
        match self {
            RiskClass::Red => "#d62728",
            RiskClass::Yellow => "#ffdd57",
            RiskClass::Green => "#2ca02c",
            RiskClass::White => "#ffffff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineRisk {
    pub branch_id: u32,
    pub risk_cents: Cents,
    pub risk_class: RiskClass,
}

/// Inclusive linear-interpolation percentile of pre-sorted values:
/// `rank = p/100 * (N - 1)`.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
    }
}

/// Classify per-line risks into the four percentile classes:
/// red above the 90th percentile, yellow (80, 90], green (50, 80],
/// white at or below the 50th.
pub fn classify(risks: &[(u32, Cents)]) -> Result<Vec<LineRisk>, RiskError> {
    if risks.is_empty() {
        return Err(RiskError::EmptyInput);
    }
    let mut sorted: Vec<f64> = risks.iter().map(|&(_, r)| r as f64).collect();
    sorted.sort_unstable_by(f64::total_cmp);
    let t50 = percentile(&sorted, 50.0);
    let t80 = percentile(&sorted, 80.0);
    let t90 = percentile(&sorted, 90.0);

    Ok(risks
        .iter()
        .map(|&(branch_id, risk_cents)| {
            let r = risk_cents as f64;
            let risk_class = if r > t90 {
                RiskClass::Red
            } else if r > t80 {
                RiskClass::Yellow
            } else if r > t50 {
                RiskClass::Green
            } else {
                RiskClass::White
            };
            LineRisk {
                branch_id,
                risk_cents,
                risk_class,
            }
        })
        .collect())
}

#[derive(Serialize)]
struct GeoJsonFeatureCollection {
    r#type: &'static str,
    features: Vec<GeoJsonFeature>,
}

#[derive(Serialize)]
struct GeoJsonFeature {
    r#type: &'static str,
    geometry: GeoJsonLineString,
    properties: GeoJsonProperties,
}

#[derive(Serialize)]
struct GeoJsonLineString {
    r#type: &'static str,
    coordinates: [[f64; 2]; 2],
}

#[derive(Serialize)]
struct GeoJsonProperties {
    branch_id: u32,
    risk_usd: f64,
    risk_class: &'static str,
    color: &'static str,
}

/// Write the per-line risk heatmap as a GeoJSON FeatureCollection: one
/// LineString per branch, sorted by branch id, deterministic formatting,
/// trailing newline.
pub fn emit_heatmap(
    topology: &Topology,
    line_risks: &[LineRisk],
    path: &Path,
) -> Result<(), RiskError> {
    let mut sorted: Vec<&LineRisk> = line_risks.iter().collect();
    sorted.sort_by_key(|r| r.branch_id);

    let mut features = Vec::with_capacity(sorted.len());
    for risk in sorted {
        let branch = topology
            .branches
            .iter()
            .find(|b| b.id == risk.branch_id)
            .ok_or(RiskError::UnknownBranch {
                branch_id: risk.branch_id,
            })?;
        let (from, to) = topology.branch_endpoints(branch);
        features.push(GeoJsonFeature {
            r#type: "Feature",
            geometry: GeoJsonLineString {
                r#type: "LineString",
                coordinates: [[from.lon, from.lat], [to.lon, to.lat]],
            },
            properties: GeoJsonProperties {
                branch_id: risk.branch_id,
                risk_usd: risk.risk_cents as f64 / 100.0,
                risk_class: risk.risk_class.as_str(),
                color: risk.risk_class.color_hex(),
            },
        });
    }
    let collection = GeoJsonFeatureCollection {
        r#type: "FeatureCollection",
        features,
    };

    let io_err = |source| RiskError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &collection)
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    w.write_all(b"\n").map_err(io_err)?;
    w.flush().map_err(io_err)
}
