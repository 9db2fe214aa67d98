//! Ignition point placement along transmission branches.
//!
//! A branch of length `L` receives `n = max(1, round(L / spacing))` points at
//! the interval midpoints `L * (i - 0.5) / n`, so every branch gets at least
//! one ignition and none coincides with a bus. `round` is half-away-from-zero.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{self, GeoGrid, GeoPoint};
use crate::ingest::Topology;

#[derive(Debug, Error)]
pub enum IgnitionError {
    #[error("branch {branch_id}: from-bus and to-bus share identical coordinates")]
    ZeroLengthBranch { branch_id: u32 },
    #[error("spacing must be positive, got {0}")]
    InvalidSpacing(f64),
}

/// One wildfire scenario seed: a point on a branch, `offset_miles` from the
/// from-bus. Scenario ids are dense 1..=N in (branch_id, offset) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgnitionPoint {
    pub scenario_id: u32,
    pub branch_id: u32,
    pub location: GeoPoint,
    pub offset_miles: f64,
}

pub fn generate_ignition_points(
    topology: &Topology,
    spacing_miles: f64,
) -> Result<Vec<IgnitionPoint>, IgnitionError> {
    if spacing_miles.is_nan() || spacing_miles <= 0.0 {
        return Err(IgnitionError::InvalidSpacing(spacing_miles));
    }

    let mut points = Vec::new();
    for branch in &topology.branches {
        let (from, to) = topology.branch_endpoints(branch);
        let length = geo::haversine_miles(from, to);
        if length == 0.0 {
            return Err(IgnitionError::ZeroLengthBranch {
                branch_id: branch.id,
            });
        }
        let n = point_count(length, spacing_miles);
        for i in 1..=n {
            let fraction = (f64::from(i) - 0.5) / f64::from(n);
            let location = geo::interpolate_along(from, to, fraction).expect("fraction in (0, 1)");
            points.push(IgnitionPoint {
                scenario_id: 0, // assigned after the sort
                branch_id: branch.id,
                location,
                offset_miles: length * fraction,
            });
        }
    }

    points.sort_by(|a, b| {
        a.branch_id
            .cmp(&b.branch_id)
            .then_with(|| a.offset_miles.total_cmp(&b.offset_miles))
    });
    for (i, p) in points.iter_mut().enumerate() {
        p.scenario_id = (i + 1) as u32;
    }
    Ok(points)
}

/// Points per branch: `max(1, round(L / spacing))` with half-away-from-zero
/// rounding (`f64::round` semantics, stated for cross-language parity).
fn point_count(length_miles: f64, spacing_miles: f64) -> u32 {
    (length_miles / spacing_miles).round().max(1.0) as u32
}

/// Scenario ids whose ignition location falls outside the study grid.
/// Callers report these rather than silently dropping them.
pub fn out_of_grid_scenarios(points: &[IgnitionPoint], grid: &GeoGrid) -> Vec<u32> {
    points
        .iter()
        .filter(|p| !grid.contains(p.location))
        .map(|p| p.scenario_id)
        .collect()
}

/// The ignition file: one CSV row per scenario.
pub fn write_ignition_csv<W: Write>(w: &mut W, points: &[IgnitionPoint]) -> io::Result<()> {
    writeln!(w, "scenario_id,branch_id,lat,lon,offset_miles")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.scenario_id, p.branch_id, p.location.lat, p.location.lon, p.offset_miles
        )?;
    }
    Ok(())
}
