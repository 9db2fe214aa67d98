//! Minimum-travel-time fire growth engine.
//!
//! Fire arrival times are the single-source shortest paths over the cell
//! graph: the travel time along an edge from cell `i` to neighbor `j` is the
//! center-to-center distance divided by the effective rate of spread
//!
//! ```text
//! ROS_eff = R0(fuel at i) * exp(a * s_ij) * (1 + c * U * max(0, cos(theta_ij - theta_towind))^b)
//! ```
//!
//! where `s_ij` is the signed slope (rise/run) along the travel direction,
//! `theta_ij` the travel bearing, `theta_towind` the direction the wind blows
//! toward, and `U` the wind speed. ROS is evaluated at the source cell of
//! each edge, so results are reproducible bit-for-bit. Fire can neither leave
//! nor enter a cell whose fuel code is nonburnable.
//!
//! A cell is burned when its arrival time is within the scenario duration.
//! Burned-area matrices round-trip through ESRI ASCII rasters byte-exactly,
//! so an external engine (e.g. FARSITE) can substitute for this one.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ascii::{read_ascii_grid, write_ascii_grid, AsciiError, AsciiGrid};
use crate::geo::{CellIndex, GeoGrid};
use crate::ingest::{ascii_header_for, LandscapeStack, WeatherRecord};

/// Fuel-model codes fire cannot enter: 0 plus the standard nonburnable
/// classes (urban, snow/ice, agriculture, water, barren).
pub const NONBURNABLE_FUEL_CODES: [u16; 6] = [0, 91, 92, 93, 98, 99];

pub fn is_nonburnable(code: u16) -> bool {
    NONBURNABLE_FUEL_CODES.contains(&code)
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("ignition cell ({row}, {col}) outside {nrows}x{ncols} grid")]
    IgnitionOutOfGrid {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("no weather records inside window {start}..{end}")]
    EmptyWindow {
        start: DateTime<Utc>,
        end: DateTime<Utc>,
    },
    #[error("burn raster header field {field} is {actual}, landscape grid has {expected}")]
    HeaderMismatch {
        field: &'static str,
        expected: f64,
        actual: f64,
    },
    #[error("burn raster cell ({row}, {col}) holds {value}, expected 0 or 1")]
    NonBinaryValue { row: usize, col: usize, value: f64 },
    #[error(transparent)]
    Ascii(#[from] AsciiError),
}

/// Neighborhood of the cell graph. Sixteen directions (the eight compass
/// moves plus the eight knight moves) cut the octagonal distortion of the
/// plain 8-neighborhood: the unit ball covers ~0.97 of the true disk rather
/// than ~0.90.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Eight,
    Sixteen,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [(i64, i64)] {
        const EIGHT: [(i64, i64); 8] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ];
        const SIXTEEN: [(i64, i64); 16] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
            (-2, -1),
            (-2, 1),
            (-1, -2),
            (-1, 2),
            (1, -2),
            (1, 2),
            (2, -1),
            (2, 1),
        ];
        match self {
            Connectivity::Eight => &EIGHT,
            Connectivity::Sixteen => &SIXTEEN,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            8 => Ok(Connectivity::Eight),
            16 => Ok(Connectivity::Sixteen),
            other => Err(format!("connectivity must be 8 or 16, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Eight => 8,
            Connectivity::Sixteen => 16,
        }
    }
}

/// Engine parameters. The ROS table and the slope/wind coefficients are
/// tuning constants shipped with the artifact, not literature values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpreadParams {
    /// Base rate of spread per fuel-model code, m/min. Codes absent from
    /// the table are treated as nonburnable (with a warning).
    pub ros_table: BTreeMap<u16, f64>,
    /// Slope response exponent `a` in `exp(a * rise/run)`.
    pub slope_coeff: f64,
    /// Wind response gain `c` in s/m.
    pub wind_coeff: f64,
    /// Wind response exponent `b` on the alignment cosine.
    pub wind_exponent: f64,
    pub connectivity: Connectivity,
    /// Burn duration in minutes.
    pub duration_min: f64,
}

impl SpreadParams {
    /// Base ROS for the 13 Anderson fuel models, m/min, under nominal
    /// mid-summer conditions; nonburnable codes map to zero.
    pub fn default_ros_table() -> BTreeMap<u16, f64> {
        let mut t = BTreeMap::new();
        let entries: [(u16, f64); 13] = [
            (1, 25.0), // short grass
            (2, 12.0), // timber grass understory
            (3, 30.0), // tall grass
            (4, 20.0), // chaparral
            (5, 6.0),  // brush
            (6, 10.0), // dormant brush
            (7, 6.0),  // southern rough
            (8, 0.8),  // closed timber litter
            (9, 2.5),  // hardwood litter
            (10, 3.0), // timber with understory
            (11, 2.0), // light logging slash
            (12, 4.0), // medium logging slash
            (13, 5.0), // heavy logging slash
        ];
        for (code, ros) in entries {
            t.insert(code, ros);
        }
        for code in NONBURNABLE_FUEL_CODES {
            t.insert(code, 0.0);
        }
        t
    }
}

impl Default for SpreadParams {
    fn default() -> Self {
        SpreadParams {
            ros_table: Self::default_ros_table(),
            slope_coeff: 3.0,
            wind_coeff: 0.5,
            wind_exponent: 2.0,
            connectivity: Connectivity::Sixteen,
            duration_min: 480.0,
        }
    }
}

/// Binary burned-area matrix: 1 = inside the final fire perimeter.
#[derive(Debug, Clone, PartialEq)]
pub struct BurnMatrix {
    pub grid: GeoGrid,
    pub status: Vec<u8>,
}

impl BurnMatrix {
    pub fn all_zero(grid: GeoGrid) -> Self {
        let n = grid.cell_count();
        BurnMatrix {
            grid,
            status: vec![0; n],
        }
    }

    #[inline]
    pub fn is_burned(&self, cell: CellIndex) -> bool {
        self.status[self.grid.idx(cell)] == 1
    }

    pub fn burned_cell_count(&self) -> usize {
        self.status.iter().filter(|&&s| s == 1).count()
    }

    pub fn burned_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        let ncols = self.grid.ncols;
        self.status
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .map(move |(i, _)| CellIndex::new(i / ncols, i % ncols))
    }
}

/// Fire arrival time per cell, minutes from ignition; +inf where the fire
/// never arrives. Diagnostic by-product of the engine.
#[derive(Debug, Clone)]
pub struct ArrivalTimeGrid {
    pub grid: GeoGrid,
    pub arrival_min: Vec<f64>,
}

/// Vector-average wind over the records inside `[start, end]` (inclusive).
/// Returns `(speed m/s, direction degrees FROM)`; full cancellation reports
/// calm `(0, 0)`.
pub fn mean_wind(
    weather: &[WeatherRecord],
    window: (DateTime<Utc>, DateTime<Utc>),
) -> Result<(f64, f64), SimError> {
    let (start, end) = window;
    let mut u_sum = 0.0;
    let mut v_sum = 0.0;
    let mut count = 0usize;
    for rec in weather {
        if rec.timestamp >= start && rec.timestamp <= end {
            let theta = rec.wind_dir_deg.to_radians();
            u_sum += -rec.wind_speed_mps * theta.sin();
            v_sum += -rec.wind_speed_mps * theta.cos();
            count += 1;
        }
    }
    if count == 0 {
        return Err(SimError::EmptyWindow { start, end });
    }
    let u = u_sum / count as f64;
    let v = v_sum / count as f64;
    let speed = u.hypot(v);
    if speed < 1e-9 {
        return Ok((0.0, 0.0));
    }
    let dir = (-u).atan2(-v).to_degrees().rem_euclid(360.0);
    Ok((speed, dir))
}

struct HeapEntry {
    time: f64,
    idx: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.idx == other.idx
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Reversed so the std max-heap pops the earliest arrival; idx breaks
    // ties deterministically.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Grow one fire from `ignition` and return the burned-area matrix together
/// with the full arrival-time field. An ignition on nonburnable fuel yields
/// an all-zero matrix and a warning.
pub fn simulate_mtt(
    landscape: &LandscapeStack,
    wind: (f64, f64),
    params: &SpreadParams,
    ignition: CellIndex,
) -> Result<(BurnMatrix, ArrivalTimeGrid), SimError> {
    let grid = &landscape.grid;
    let (nrows, ncols) = (grid.nrows, grid.ncols);
    if ignition.row >= nrows || ignition.col >= ncols {
        return Err(SimError::IgnitionOutOfGrid {
            row: ignition.row,
            col: ignition.col,
            nrows,
            ncols,
        });
    }

    // Resolve per-cell base ROS once; unknown codes spread nothing.
    let mut unknown: BTreeSet<u16> = BTreeSet::new();
    let r0: Vec<f64> = landscape
        .fuel_model
        .iter()
        .map(|code| match params.ros_table.get(code) {
            Some(&ros) => ros,
            None => {
                unknown.insert(*code);
                0.0
            }
        })
        .collect();
    if !unknown.is_empty() {
        log::warn!("fuel codes {unknown:?} missing from the ROS table; treated as nonburnable");
    }

    let mut arrival = vec![f64::INFINITY; nrows * ncols];
    let ignition_idx = grid.idx(ignition);
    if r0[ignition_idx] <= 0.0 {
        log::warn!(
            "ignition at ({}, {}) sits on nonburnable fuel code {}; nothing burns",
            ignition.row,
            ignition.col,
            landscape.fuel_model[ignition_idx]
        );
        return Ok((
            BurnMatrix::all_zero(grid.clone()),
            ArrivalTimeGrid {
                grid: grid.clone(),
                arrival_min: arrival,
            },
        ));
    }

    let offsets = params.connectivity.offsets();
    let (wind_speed, wind_from) = wind;
    let toward = (wind_from + 180.0).rem_euclid(360.0).to_radians();
    // Per-direction constants: center distance and wind alignment factor.
    // The travel bearing depends only on the offset, not the cell.
    let dist: Vec<f64> = offsets
        .iter()
        .map(|&(dr, dc)| grid.cellsize_m * ((dr * dr + dc * dc) as f64).sqrt())
        .collect();
    let wind_factor: Vec<f64> = offsets
        .iter()
        .map(|&(dr, dc)| {
            let bearing = (dc as f64).atan2(-(dr as f64)); // east, north components
            let align = (bearing - toward).cos().max(0.0);
            1.0 + params.wind_coeff * wind_speed * align.powf(params.wind_exponent)
        })
        .collect();

    arrival[ignition_idx] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        time: 0.0,
        idx: ignition_idx as u32,
    });

    while let Some(HeapEntry { time, idx }) = heap.pop() {
        let i = idx as usize;
        if time > arrival[i] {
            continue;
        }
        let row = (i / ncols) as i64;
        let col = (i % ncols) as i64;
        let elev_i = landscape.elevation[i];
        let r0_i = r0[i];
        for (k, &(dr, dc)) in offsets.iter().enumerate() {
            let (nr, nc) = (row + dr, col + dc);
            if nr < 0 || nc < 0 || nr >= nrows as i64 || nc >= ncols as i64 {
                continue;
            }
            let j = nr as usize * ncols + nc as usize;
            if r0[j] <= 0.0 {
                continue; // fire cannot enter nonburnable fuel
            }
            let slope = (landscape.elevation[j] - elev_i) / dist[k];
            let ros = r0_i * (params.slope_coeff * slope).exp() * wind_factor[k];
            let t = time + dist[k] / ros;
            if t < arrival[j] {
                arrival[j] = t;
                heap.push(HeapEntry {
                    time: t,
                    idx: j as u32,
                });
            }
        }
    }

    let status: Vec<u8> = arrival
        .iter()
        .map(|&t| u8::from(t <= params.duration_min))
        .collect();
    Ok((
        BurnMatrix {
            grid: grid.clone(),
            status,
        },
        ArrivalTimeGrid {
            grid: grid.clone(),
            arrival_min: arrival,
        },
    ))
}

/// Serialize a burn matrix as an ESRI ASCII raster of 0/1 values.
pub fn burn_to_ascii(burn: &BurnMatrix) -> AsciiGrid {
    let mut raster = ascii_header_for(&burn.grid);
    raster.values = burn.status.iter().map(|&s| f64::from(s)).collect();
    raster
}

pub fn export_burn_raster(path: &Path, burn: &BurnMatrix) -> Result<(), SimError> {
    write_ascii_grid(path, &burn_to_ascii(burn))?;
    Ok(())
}

/// Import an externally produced burned-area raster. The header must match
/// the landscape grid; values must be 0 or 1 (NODATA counts as unburned).
pub fn import_burn_raster(path: &Path, grid: &GeoGrid) -> Result<BurnMatrix, SimError> {
    let raster = read_ascii_grid(path)?;
    let expected = ascii_header_for(grid);
    if let Some((field, actual, expected)) = raster.header_mismatch(&expected) {
        if field != "NODATA_value" {
            return Err(SimError::HeaderMismatch {
                field,
                expected,
                actual,
            });
        }
    }
    let mut status = Vec::with_capacity(raster.values.len());
    for (i, &v) in raster.values.iter().enumerate() {
        let s = if v == raster.nodata || v == 0.0 {
            0u8
        } else if v == 1.0 {
            1u8
        } else {
            return Err(SimError::NonBinaryValue {
                row: i / raster.ncols,
                col: i % raster.ncols,
                value: v,
            });
        };
        status.push(s);
    }
    Ok(BurnMatrix {
        grid: grid.clone(),
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoGrid;

    /// Flat landscape with a single fuel code everywhere.
    pub(crate) fn uniform_landscape(nrows: usize, ncols: usize, fuel: u16) -> LandscapeStack {
        let grid = GeoGrid::new(nrows, ncols, 100.0, 37.0, 38.0, -121.0, -120.0).unwrap();
        let n = grid.cell_count();
        LandscapeStack {
            grid,
            elevation: vec![0.0; n],
            slope: vec![0.0; n],
            aspect: vec![0.0; n],
            fuel_model: vec![fuel; n],
            canopy_cover: vec![0.0; n],
            stand_height: vec![0.0; n],
            canopy_base_height: vec![0.0; n],
            canopy_bulk_density: vec![0.0; n],
        }
    }

    fn calm() -> (f64, f64) {
        (0.0, 0.0)
    }

    fn params(duration: f64) -> SpreadParams {
        SpreadParams {
            duration_min: duration,
            ..SpreadParams::default()
        }
    }

    #[test]
    fn mean_wind_singleton_passes_through() {
        let rec = WeatherRecord {
            timestamp: DateTime::parse_from_rfc3339("2022-07-01T00:00:00Z")
                .unwrap()
                .into(),
            temperature_c: 25.0,
            relative_humidity_pct: 30.0,
            pressure_hpa: 1013.0,
            wind_dir_deg: 270.0,
            wind_speed_mps: 5.0,
        };
        let window = (rec.timestamp, rec.timestamp);
        let (speed, dir) = mean_wind(&[rec], window).unwrap();
        assert!((speed - 5.0).abs() < 1e-12);
        assert!((dir - 270.0).abs() < 1e-9);
    }

    #[test]
    fn mean_wind_opposing_records_cancel_to_calm() {
        let t0: DateTime<Utc> = DateTime::parse_from_rfc3339("2022-07-01T00:00:00Z")
            .unwrap()
            .into();
        let t1: DateTime<Utc> = DateTime::parse_from_rfc3339("2022-07-01T01:00:00Z")
            .unwrap()
            .into();
        let mk = |timestamp, dir| WeatherRecord {
            timestamp,
            temperature_c: 25.0,
            relative_humidity_pct: 30.0,
            pressure_hpa: 1013.0,
            wind_dir_deg: dir,
            wind_speed_mps: 5.0,
        };
        let (speed, dir) = mean_wind(&[mk(t0, 0.0), mk(t1, 180.0)], (t0, t1)).unwrap();
        assert_eq!((speed, dir), (0.0, 0.0));
    }

    #[test]
    fn mean_wind_averages_components() {
        let t0: DateTime<Utc> = DateTime::parse_from_rfc3339("2022-07-01T00:00:00Z")
            .unwrap()
            .into();
        let t1: DateTime<Utc> = DateTime::parse_from_rfc3339("2022-07-01T01:00:00Z")
            .unwrap()
            .into();
        let mk = |timestamp, speed| WeatherRecord {
            timestamp,
            temperature_c: 25.0,
            relative_humidity_pct: 30.0,
            pressure_hpa: 1013.0,
            wind_dir_deg: 90.0,
            wind_speed_mps: speed,
        };
        let (speed, dir) = mean_wind(&[mk(t0, 3.0), mk(t1, 4.0)], (t0, t1)).unwrap();
        assert!((speed - 3.5).abs() < 1e-12);
        assert!((dir - 90.0).abs() < 1e-9);
    }

    #[test]
    fn mean_wind_empty_window_errors() {
        let t0: DateTime<Utc> = DateTime::parse_from_rfc3339("2022-07-01T00:00:00Z")
            .unwrap()
            .into();
        let t1: DateTime<Utc> = DateTime::parse_from_rfc3339("2022-07-01T01:00:00Z")
            .unwrap()
            .into();
        assert!(matches!(
            mean_wind(&[], (t0, t1)),
            Err(SimError::EmptyWindow { .. })
        ));
    }

    #[test]
    fn near_zero_duration_burns_only_ignition_cell() {
        let scape = uniform_landscape(11, 11, 1);
        let (burn, arrival) =
            simulate_mtt(&scape, calm(), &params(1e-9), CellIndex::new(5, 5)).unwrap();
        assert_eq!(burn.burned_cell_count(), 1);
        assert!(burn.is_burned(CellIndex::new(5, 5)));
        assert_eq!(
            arrival.arrival_min[scape.grid.idx(CellIndex::new(5, 5))],
            0.0
        );
    }

    #[test]
    fn nonburnable_ignition_burns_nothing() {
        let scape = uniform_landscape(5, 5, 98);
        let (burn, arrival) =
            simulate_mtt(&scape, calm(), &params(100.0), CellIndex::new(2, 2)).unwrap();
        assert_eq!(burn.burned_cell_count(), 0);
        assert!(arrival.arrival_min.iter().all(|t| t.is_infinite()));
    }

    #[test]
    fn ignition_outside_grid_errors() {
        let scape = uniform_landscape(5, 5, 1);
        let err = simulate_mtt(&scape, calm(), &params(100.0), CellIndex::new(9, 2)).unwrap_err();
        assert!(matches!(err, SimError::IgnitionOutOfGrid { .. }));
    }

    /// Brute-force Bellman-Ford oracle over the identical edge set. Both
    /// algorithms take minima over fold-left path sums, so agreement is
    /// exact, not approximate.
    fn bellman_ford_oracle(
        scape: &LandscapeStack,
        wind: (f64, f64),
        params: &SpreadParams,
        ignition: CellIndex,
    ) -> Vec<f64> {
        let grid = &scape.grid;
        let (nrows, ncols) = (grid.nrows, grid.ncols);
        let offsets = params.connectivity.offsets();
        let r0: Vec<f64> = scape
            .fuel_model
            .iter()
            .map(|c| params.ros_table.get(c).copied().unwrap_or(0.0))
            .collect();
        let (wind_speed, wind_from) = wind;
        let toward = (wind_from + 180.0).rem_euclid(360.0).to_radians();

        let mut dist = vec![f64::INFINITY; nrows * ncols];
        dist[grid.idx(ignition)] = 0.0;
        if r0[grid.idx(ignition)] <= 0.0 {
            return vec![f64::INFINITY; nrows * ncols];
        }
        for _ in 0..nrows * ncols {
            let mut changed = false;
            for i in 0..nrows * ncols {
                if !dist[i].is_finite() || r0[i] <= 0.0 {
                    continue;
                }
                let row = (i / ncols) as i64;
                let col = (i % ncols) as i64;
                for &(dr, dc) in offsets {
                    let (nr, nc) = (row + dr, col + dc);
                    if nr < 0 || nc < 0 || nr >= nrows as i64 || nc >= ncols as i64 {
                        continue;
                    }
                    let j = nr as usize * ncols + nc as usize;
                    if r0[j] <= 0.0 {
                        continue;
                    }
                    let d = grid.cellsize_m * ((dr * dr + dc * dc) as f64).sqrt();
                    let bearing = (dc as f64).atan2(-(dr as f64));
                    let align = (bearing - toward).cos().max(0.0);
                    let wf =
                        1.0 + params.wind_coeff * wind_speed * align.powf(params.wind_exponent);
                    let slope = (scape.elevation[j] - scape.elevation[i]) / d;
                    let ros = r0[i] * (params.slope_coeff * slope).exp() * wf;
                    let t = dist[i] + d / ros;
                    if t < dist[j] {
                        dist[j] = t;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist
    }

    #[test]
    fn arrival_matches_brute_force_oracle_on_heterogeneous_grids() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for case in 0..50 {
            let mut scape = uniform_landscape(5, 5, 1);
            for i in 0..25 {
                scape.fuel_model[i] = *[1u16, 2, 5, 9, 98].get(rng.gen_range(0..5)).unwrap();
                scape.elevation[i] = rng.gen_range(0.0..80.0);
            }
            let ignition = CellIndex::new(rng.gen_range(0..5), rng.gen_range(0..5));
            let wind_speed = rng.gen_range(0.0..8.0);
            let wind_dir = rng.gen_range(0.0..360.0);
            let connectivity = if case % 2 == 0 {
                Connectivity::Eight
            } else {
                Connectivity::Sixteen
            };
            let p = SpreadParams {
                connectivity,
                duration_min: 1e6,
                ..SpreadParams::default()
            };
            let (_, arrival) = simulate_mtt(&scape, (wind_speed, wind_dir), &p, ignition).unwrap();
            let oracle = bellman_ford_oracle(&scape, (wind_speed, wind_dir), &p, ignition);
            for (i, (a, b)) in arrival.arrival_min.iter().zip(oracle.iter()).enumerate() {
                assert!(
                    (a.is_infinite() && b.is_infinite()) || a == b,
                    "case {case} cell {i}: dijkstra {a} vs oracle {b}"
                );
            }
        }
    }

    #[test]
    fn calm_burn_area_approaches_the_sixteen_gon_ball() {
        // Uniform fuel R0 = 10 m/min, flat, calm, 16 neighbors, duration for
        // a 30-cell radius. The reachable set is the graph-distance ball,
        // an irregular 16-gon of area close to 8*sin(pi/8)*R^2 ~ 0.9745*pi*R^2.
        let mut scape = uniform_landscape(81, 81, 1);
        let mut p = params(30.0 * scape.grid.cellsize_m / 10.0);
        p.ros_table = BTreeMap::from([(1u16, 10.0)]);
        p.connectivity = Connectivity::Sixteen;
        scape.fuel_model.fill(1);
        let (burn, _) = simulate_mtt(&scape, calm(), &p, CellIndex::new(40, 40)).unwrap();
        let ratio = burn.burned_cell_count() as f64 / (std::f64::consts::PI * 30.0 * 30.0);
        assert!(
            (0.95..=1.00).contains(&ratio),
            "area ratio {ratio} outside [0.95, 1.00]"
        );
    }

    #[test]
    fn burned_set_grows_monotonically_with_duration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut scape = uniform_landscape(20, 20, 1);
            for i in 0..400 {
                scape.fuel_model[i] = *[1u16, 3, 5, 98].get(rng.gen_range(0..4)).unwrap();
                scape.elevation[i] = rng.gen_range(0.0..120.0);
            }
            let ignition = CellIndex::new(rng.gen_range(0..20), rng.gen_range(0..20));
            let t = rng.gen_range(5.0..60.0);
            let (short, _) = simulate_mtt(&scape, (4.0, 225.0), &params(t), ignition).unwrap();
            let (long, _) = simulate_mtt(&scape, (4.0, 225.0), &params(2.0 * t), ignition).unwrap();
            for i in 0..short.status.len() {
                assert!(short.status[i] <= long.status[i], "cell {i} unburned at 2t");
            }
        }
    }

    #[test]
    fn calm_flat_uniform_burn_has_fourfold_symmetry() {
        let scape = uniform_landscape(21, 21, 1);
        let (burn, _) =
            simulate_mtt(&scape, calm(), &params(30.0), CellIndex::new(10, 10)).unwrap();
        let count = burn.burned_cell_count();
        assert!(
            count > 1 && count < 21 * 21,
            "degenerate burn of {count} cells"
        );
        for row in 0..21 {
            for col in 0..21 {
                let v = burn.is_burned(CellIndex::new(row, col));
                assert_eq!(
                    v,
                    burn.is_burned(CellIndex::new(col, 20 - row)),
                    "rot90 mismatch"
                );
                assert_eq!(
                    v,
                    burn.is_burned(CellIndex::new(20 - row, 20 - col)),
                    "rot180 mismatch"
                );
            }
        }
    }

    #[test]
    fn burn_centroid_shifts_downwind() {
        // Wind FROM the west (270) blows fire toward the east: the burned
        // centroid must sit east of the ignition column, and the downwind
        // extent must exceed the upwind extent.
        let scape = uniform_landscape(41, 41, 1);
        let (burn, _) =
            simulate_mtt(&scape, (10.0, 270.0), &params(10.0), CellIndex::new(20, 20)).unwrap();
        let cells: Vec<CellIndex> = burn.burned_cells().collect();
        assert!(!cells.is_empty());
        let mean_col = cells.iter().map(|c| c.col as f64).sum::<f64>() / cells.len() as f64;
        assert!(mean_col > 20.5, "centroid col {mean_col} not downwind");
        let max_east = cells.iter().map(|c| c.col).max().unwrap() - 20;
        let min_west = 20 - cells.iter().map(|c| c.col).min().unwrap();
        assert!(
            max_east >= min_west,
            "downwind extent {max_east} < upwind {min_west}"
        );
    }

    #[test]
    fn nonburnable_ring_contains_the_fire() {
        // 8-neighbor: a one-cell-thick ring blocks every move; 16-neighbor
        // knight moves jump a single ring, so that case uses thickness 2.
        for (conn, thickness) in [
            (Connectivity::Eight, 1usize),
            (Connectivity::Sixteen, 2usize),
        ] {
            let mut scape = uniform_landscape(21, 21, 1);
            for row in 0..21usize {
                for col in 0..21usize {
                    let d = row.abs_diff(10).max(col.abs_diff(10));
                    if d > 4 && d <= 4 + thickness {
                        scape.fuel_model[row * 21 + col] = 98;
                    }
                }
            }
            let p = SpreadParams {
                connectivity: conn,
                duration_min: 1e6,
                ..SpreadParams::default()
            };
            let (burn, _) = simulate_mtt(&scape, calm(), &p, CellIndex::new(10, 10)).unwrap();
            for row in 0..21usize {
                for col in 0..21usize {
                    let d = row.abs_diff(10).max(col.abs_diff(10));
                    let burned = burn.is_burned(CellIndex::new(row, col));
                    if d > 4 {
                        assert!(!burned, "({row}, {col}) burned outside the ring ({conn:?})");
                    } else {
                        assert!(burned, "({row}, {col}) unburned inside the ring ({conn:?})");
                    }
                }
            }
        }
    }

    #[test]
    fn arrival_satisfies_relaxation_property() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut scape = uniform_landscape(12, 12, 1);
        for i in 0..144 {
            scape.fuel_model[i] = *[1u16, 5, 9, 99].get(rng.gen_range(0..4)).unwrap();
            scape.elevation[i] = rng.gen_range(0.0..60.0);
        }
        let p = params(1e6);
        let wind = (6.0, 45.0);
        let (_, arrival) = simulate_mtt(&scape, wind, &p, CellIndex::new(6, 6)).unwrap();
        let grid = &scape.grid;
        let r0: Vec<f64> = scape
            .fuel_model
            .iter()
            .map(|c| p.ros_table.get(c).copied().unwrap_or(0.0))
            .collect();
        let toward = (wind.1 + 180.0f64).rem_euclid(360.0).to_radians();
        for i in 0..144 {
            if r0[i] <= 0.0 || !arrival.arrival_min[i].is_finite() {
                continue;
            }
            let row = (i / 12) as i64;
            let col = (i % 12) as i64;
            for &(dr, dc) in p.connectivity.offsets() {
                let (nr, nc) = (row + dr, col + dc);
                if nr < 0 || nc < 0 || nr >= 12 || nc >= 12 {
                    continue;
                }
                let j = nr as usize * 12 + nc as usize;
                if r0[j] <= 0.0 {
                    continue;
                }
                let d = grid.cellsize_m * ((dr * dr + dc * dc) as f64).sqrt();
                let bearing = (dc as f64).atan2(-(dr as f64));
                let align = (bearing - toward).cos().max(0.0);
                let wf = 1.0 + p.wind_coeff * wind.0 * align.powf(p.wind_exponent);
                let slope = (scape.elevation[j] - scape.elevation[i]) / d;
                let edge = d / (r0[i] * (p.slope_coeff * slope).exp() * wf);
                assert!(
                    arrival.arrival_min[j] <= arrival.arrival_min[i] + edge + 1e-9,
                    "relaxation violated at {i} -> {j}"
                );
            }
        }
    }

    #[test]
    fn burn_raster_roundtrip_is_identical() {
        let mut scape = uniform_landscape(9, 9, 1);
        for i in [3usize, 30, 41, 55] {
            scape.fuel_model[i] = 98;
        }
        let (burn, _) =
            simulate_mtt(&scape, (5.0, 180.0), &params(30.0), CellIndex::new(4, 4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("burn_1.asc");
        export_burn_raster(&path, &burn).unwrap();
        let back = import_burn_raster(&path, &scape.grid).unwrap();
        assert_eq!(burn, back);
    }

    #[test]
    fn import_rejects_non_binary_values() {
        let grid = GeoGrid::new(2, 2, 100.0, 37.0, 38.0, -121.0, -120.0).unwrap();
        let mut raster = ascii_header_for(&grid);
        raster.values = vec![0.0, 1.0, 2.0, 0.0];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.asc");
        write_ascii_grid(&path, &raster).unwrap();
        let err = import_burn_raster(&path, &grid).unwrap_err();
        assert!(
            matches!(err, SimError::NonBinaryValue { row: 1, col: 0, value } if value == 2.0),
            "{err}"
        );
    }

    #[test]
    fn import_rejects_mismatched_header() {
        let grid = GeoGrid::new(2, 2, 100.0, 37.0, 38.0, -121.0, -120.0).unwrap();
        let other = GeoGrid::new(2, 3, 100.0, 37.0, 38.0, -121.0, -120.0).unwrap();
        let burn = BurnMatrix::all_zero(other);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.asc");
        export_burn_raster(&path, &burn).unwrap();
        let err = import_burn_raster(&path, &grid).unwrap_err();
        assert!(
            matches!(err, SimError::HeaderMismatch { field: "ncols", .. }),
            "{err}"
        );
    }

    #[test]
    fn all_zero_raster_imports_as_empty_burn() {
        let grid = GeoGrid::new(3, 3, 100.0, 37.0, 38.0, -121.0, -120.0).unwrap();
        let burn = BurnMatrix::all_zero(grid.clone());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.asc");
        export_burn_raster(&path, &burn).unwrap();
        assert_eq!(
            import_burn_raster(&path, &grid)
                .unwrap()
                .burned_cell_count(),
            0
        );
    }
}
