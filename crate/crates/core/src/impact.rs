//! Overlay analysis: burned acres, affected line miles, destroyed structures.
//!
//! Lines are cut into 1-mile segments measured along the straight branch;
//! a segment touched by the burn in any of its supercover cells bills a full
//! mile of reconstruction, including the short remainder segment, so
//! per-branch affected miles are always whole numbers. All structures inside
//! a burned pixel count as destroyed.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::firesim::BurnMatrix;
use crate::geo::{self, CellIndex, GeoGrid};
use crate::ingest::{StructurePoints, Topology};

/// Square meters per acre (international acre, exact).
pub const SQUARE_METERS_PER_ACRE: f64 = 4046.8564224;

#[derive(Debug, Error)]
pub enum ImpactError {
    #[error("grid mismatch: {context} is {actual_rows}x{actual_cols}, expected {expected_rows}x{expected_cols}")]
    GridMismatch {
        context: &'static str,
        expected_rows: usize,
        expected_cols: usize,
        actual_rows: usize,
        actual_cols: usize,
    },
    #[error("branch {branch_id}: from-bus and to-bus share identical coordinates")]
    ZeroLengthBranch { branch_id: u32 },
}

fn check_grids(
    context: &'static str,
    expected: &GeoGrid,
    actual: &GeoGrid,
) -> Result<(), ImpactError> {
    if expected.nrows != actual.nrows || expected.ncols != actual.ncols {
        return Err(ImpactError::GridMismatch {
            context,
            expected_rows: expected.nrows,
            expected_cols: expected.ncols,
            actual_rows: actual.nrows,
            actual_cols: actual.ncols,
        });
    }
    Ok(())
}

/// Structure counts on the landscape grid. The sum over all cells equals the
/// number of in-bounds structure points.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureDensityGrid {
    pub grid: GeoGrid,
    pub count: Vec<u32>,
}

impl StructureDensityGrid {
    pub fn total(&self) -> u64 {
        self.count.iter().map(|&c| u64::from(c)).sum()
    }
}

/// One-mile partition of a branch with the supercover cell set per segment.
#[derive(Debug, Clone)]
pub struct LineSegment {
    pub start_miles: f64,
    pub end_miles: f64,
    pub cells: Vec<CellIndex>,
}

#[derive(Debug, Clone, Default)]
pub struct LineSegmentation {
    pub branches: BTreeMap<u32, Vec<LineSegment>>,
}

/// Per-scenario damage quantities feeding the cost model.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioImpact {
    pub scenario_id: u32,
    pub burned_acres: f64,
    pub affected_miles_by_branch: BTreeMap<u32, u32>,
    pub destroyed_structures: u64,
}

impl ScenarioImpact {
    pub fn total_affected_miles(&self) -> u64 {
        self.affected_miles_by_branch
            .values()
            .map(|&m| u64::from(m))
            .sum()
    }
}

/// Burned pixels times the pixel area, in acres.
pub fn burned_acres(burn: &BurnMatrix) -> f64 {
    let acres_per_cell = burn.grid.cellsize_m * burn.grid.cellsize_m / SQUARE_METERS_PER_ACRE;
    burn.burned_cell_count() as f64 * acres_per_cell
}

/// Count structures per cell. Out-of-bounds points are tallied in the second
/// return value and logged, not treated as errors.
pub fn rasterize_structures(
    points: &StructurePoints,
    grid: &GeoGrid,
) -> (StructureDensityGrid, usize) {
    let mut count = vec![0u32; grid.cell_count()];
    let mut out_of_bounds = 0usize;
    for &p in &points.points {
        match geo::project(p, grid) {
            Ok(cell) => count[grid.idx(cell)] += 1,
            Err(_) => out_of_bounds += 1,
        }
    }
    if out_of_bounds > 0 {
        log::warn!("{out_of_bounds} structure points fall outside the study grid");
    }
    (
        StructureDensityGrid {
            grid: grid.clone(),
            count,
        },
        out_of_bounds,
    )
}

/// Sum of structure counts over burned cells.
pub fn destroyed_structures(
    burn: &BurnMatrix,
    density: &StructureDensityGrid,
) -> Result<u64, ImpactError> {
    check_grids("structure density grid", &burn.grid, &density.grid)?;
    Ok(burn
        .status
        .iter()
        .zip(density.count.iter())
        .filter(|(&s, _)| s == 1)
        .map(|(_, &c)| u64::from(c))
        .sum())
}

/// Partition every branch into 1-mile segments (the last segment carries the
/// remainder) and rasterize each segment's sub-polyline.
pub fn segment_lines(topology: &Topology, grid: &GeoGrid) -> Result<LineSegmentation, ImpactError> {
    let mut branches = BTreeMap::new();
    for branch in &topology.branches {
        let (from, to) = topology.branch_endpoints(branch);
        let length = geo::haversine_miles(from, to);
        if length == 0.0 {
            return Err(ImpactError::ZeroLengthBranch {
                branch_id: branch.id,
            });
        }
        let n_segments = length.ceil().max(1.0) as usize;
        let mut segments = Vec::with_capacity(n_segments);
        for k in 0..n_segments {
            let start = k as f64;
            let end = length.min(start + 1.0);
            let a = geo::interpolate_along(from, to, start / length).expect("fraction in [0, 1]");
            let b = geo::interpolate_along(from, to, end / length).expect("fraction in [0, 1]");
            let mut cells = geo::supercover_cells(a, b, grid);
            cells.sort_unstable();
            cells.dedup();
            segments.push(LineSegment {
                start_miles: start,
                end_miles: end,
                cells,
            });
        }
        branches.insert(branch.id, segments);
    }
    Ok(LineSegmentation { branches })
}

/// Miles of line requiring reconstruction, per branch. A segment is affected
/// iff at least one of its cells burned, and each affected segment bills
/// exactly one mile.
pub fn affected_line_miles(
    burn: &BurnMatrix,
    seg: &LineSegmentation,
) -> Result<BTreeMap<u32, u32>, ImpactError> {
    let mut miles = BTreeMap::new();
    for (&branch_id, segments) in &seg.branches {
        let affected = segments
            .iter()
            .filter(|s| s.cells.iter().any(|&c| burn.is_burned(c)))
            .count() as u32;
        miles.insert(branch_id, affected);
    }
    Ok(miles)
}

/// Bundle the three overlay quantities for one scenario.
pub fn assess(
    burn: &BurnMatrix,
    seg: &LineSegmentation,
    density: &StructureDensityGrid,
    scenario_id: u32,
) -> Result<ScenarioImpact, ImpactError> {
    check_grids("structure density grid", &burn.grid, &density.grid)?;
    Ok(ScenarioImpact {
        scenario_id,
        burned_acres: burned_acres(burn),
        affected_miles_by_branch: affected_line_miles(burn, seg)?,
        destroyed_structures: destroyed_structures(burn, density)?,
    })
}
