//! Loaders for the five input datasets: landscape raster stack, weather
//! stream, network topology, and structure locations.
//!
//! All loaders are strict: every rejected input names the file plus the
//! line or cell where the problem sits. Datasets are immutable once loaded.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Deserialize;
use thiserror::Error;

use crate::ascii::{read_ascii_grid, write_ascii_grid, AsciiError, AsciiGrid};
use crate::firesim::is_nonburnable;
use crate::geo::{GeoError, GeoGrid, GeoPoint};

/// Fuel-model code substituted for NODATA cells in the fuel layer.
pub const NODATA_FUEL_CODE: u16 = 99;

pub const LAYER_NAMES: [&str; 8] = [
    "elevation",
    "slope",
    "aspect",
    "fuel_model",
    "canopy_cover",
    "stand_height",
    "canopy_base_height",
    "canopy_bulk_density",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ascii(#[from] AsciiError),
    #[error("{path}: {source}")]
    Grid {
        path: PathBuf,
        #[source]
        source: GeoError,
    },
    #[error("{manifest}: manifest names no {name:?} layer")]
    MissingLayer { manifest: PathBuf, name: String },
    #[error("{manifest}: unknown layer {name:?} in manifest")]
    UnknownLayer { manifest: PathBuf, name: String },
    #[error("layer {layer:?} header field {field} is {actual}, reference layer has {expected}")]
    HeaderMismatch {
        layer: String,
        field: &'static str,
        expected: f64,
        actual: f64,
    },
    #[error("layer {layer:?} cell ({row}, {col}): value {value} violates {constraint}")]
    RangeViolation {
        layer: String,
        row: usize,
        col: usize,
        value: f64,
        constraint: &'static str,
    },
    #[error("{path}:{line}: {msg}")]
    ParseError {
        path: PathBuf,
        line: u64,
        msg: String,
    },
    #[error("{path}:{line}: timestamp {current} does not increase over {previous}")]
    NonMonotonicTimestamps {
        path: PathBuf,
        line: u64,
        previous: DateTime<Utc>,
        current: DateTime<Utc>,
    },
    #[error("{path}:{line}: coordinate ({lat}, {lon}) out of range")]
    CoordinateOutOfRange {
        path: PathBuf,
        line: u64,
        lat: f64,
        lon: f64,
    },
    #[error("branch {branch_id} references missing bus {bus_id}")]
    DanglingBusReference { branch_id: u32, bus_id: u32 },
    #[error("branch {branch_id} connects bus {bus_id} to itself")]
    SelfLoopBranch { branch_id: u32, bus_id: u32 },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u32 },
}

/// The eight co-registered landscape layers plus the grid georeference.
/// Values are row-major, row 0 northernmost.
#[derive(Debug, Clone)]
pub struct LandscapeStack {
    pub grid: GeoGrid,
    pub elevation: Vec<f64>,
    pub slope: Vec<f64>,
    pub aspect: Vec<f64>,
    pub fuel_model: Vec<u16>,
    pub canopy_cover: Vec<f64>,
    pub stand_height: Vec<f64>,
    pub canopy_base_height: Vec<f64>,
    pub canopy_bulk_density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeatherRecord {
    pub timestamp: DateTime<Utc>,
    pub temperature_c: f64,
    pub relative_humidity_pct: f64,
    pub pressure_hpa: f64,
    /// Meteorological convention: the direction the wind blows FROM,
    /// degrees clockwise from north.
    pub wind_dir_deg: f64,
    pub wind_speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: u32,
    pub location: GeoPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: u32,
    pub from_bus: u32,
    pub to_bus: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
}

impl Topology {
    pub fn bus(&self, id: u32) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    /// From-bus and to-bus locations of a branch. Panics on a dangling
    /// reference, which loaders reject.
    pub fn branch_endpoints(&self, branch: &Branch) -> (GeoPoint, GeoPoint) {
        let from = self
            .bus(branch.from_bus)
            .expect("validated from_bus")
            .location;
        let to = self.bus(branch.to_bus).expect("validated to_bus").location;
        (from, to)
    }
}

#[derive(Debug, Clone, Default)]
pub struct StructurePoints {
    pub points: Vec<GeoPoint>,
}

#[derive(Debug, Deserialize)]
struct ManifestFile {
    grid: ManifestGrid,
    layers: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct ManifestGrid {
    lat_min: f64,
    lat_max: f64,
    lon_min: f64,
    lon_max: f64,
    cellsize_m: f64,
}

/// Load and validate the eight-layer landscape stack named by a JSON
/// manifest. All layers must share an identical ESRI ASCII header; NODATA
/// cells are coerced to the layer's neutral value (fuel: code 99,
/// nonburnable) with a logged count.
pub fn load_landscape(manifest_path: &Path) -> Result<LandscapeStack, IngestError> {
    let raw = fs::read_to_string(manifest_path).map_err(|source| IngestError::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let manifest: ManifestFile =
        serde_json::from_str(&raw).map_err(|e| IngestError::ParseError {
            path: manifest_path.to_path_buf(),
            line: e.line() as u64,
            msg: e.to_string(),
        })?;

    for name in manifest.layers.keys() {
        if !LAYER_NAMES.contains(&name.as_str()) {
            return Err(IngestError::UnknownLayer {
                manifest: manifest_path.to_path_buf(),
                name: name.clone(),
            });
        }
    }

    let base_dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut rasters: BTreeMap<&str, AsciiGrid> = BTreeMap::new();
    for name in LAYER_NAMES {
        let rel = manifest
            .layers
            .get(name)
            .ok_or_else(|| IngestError::MissingLayer {
                manifest: manifest_path.to_path_buf(),
                name: name.to_string(),
            })?;
        rasters.insert(name, read_ascii_grid(&base_dir.join(rel))?);
    }

    let reference = &rasters["elevation"];
    for name in LAYER_NAMES {
        if let Some((field, expected, actual)) = reference.header_mismatch(&rasters[name]) {
            return Err(IngestError::HeaderMismatch {
                layer: name.to_string(),
                field,
                expected,
                actual,
            });
        }
    }

    let g = &manifest.grid;
    let grid = GeoGrid::new(
        reference.nrows,
        reference.ncols,
        g.cellsize_m,
        g.lat_min,
        g.lat_max,
        g.lon_min,
        g.lon_max,
    )
    .map_err(|source| IngestError::Grid {
        path: manifest_path.to_path_buf(),
        source,
    })?;

    let numeric = |name: &str,
                   constraint: &'static str,
                   check: fn(f64) -> bool|
     -> Result<Vec<f64>, IngestError> {
        let raster = &rasters[name];
        let mut out = Vec::with_capacity(raster.values.len());
        let mut coerced = 0usize;
        for (i, &v) in raster.values.iter().enumerate() {
            let v = if v == raster.nodata {
                coerced += 1;
                0.0
            } else {
                v
            };
            if !v.is_finite() || !check(v) {
                return Err(IngestError::RangeViolation {
                    layer: name.to_string(),
                    row: i / raster.ncols,
                    col: i % raster.ncols,
                    value: v,
                    constraint,
                });
            }
            out.push(v);
        }
        if coerced > 0 {
            log::warn!("layer {name:?}: {coerced} NODATA cells coerced to 0");
        }
        Ok(out)
    };

    let elevation = numeric("elevation", "finite", |v| v.is_finite())?;
    let slope = numeric("slope", "slope in [0, 90]", |v| (0.0..=90.0).contains(&v))?;
    let aspect = numeric("aspect", "aspect in [0, 360)", |v| {
        (0.0..360.0).contains(&v)
    })?;
    let canopy_cover = numeric("canopy_cover", "canopy cover in [0, 100]", |v| {
        (0.0..=100.0).contains(&v)
    })?;
    let stand_height = numeric("stand_height", "non-negative", |v| v >= 0.0)?;
    let canopy_base_height = numeric("canopy_base_height", "non-negative", |v| v >= 0.0)?;
    let canopy_bulk_density = numeric("canopy_bulk_density", "non-negative", |v| v >= 0.0)?;

    let fuel_raster = &rasters["fuel_model"];
    let mut fuel_model = Vec::with_capacity(fuel_raster.values.len());
    let mut nodata_fuel = 0usize;
    for (i, &v) in fuel_raster.values.iter().enumerate() {
        let code = if v == fuel_raster.nodata {
            nodata_fuel += 1;
            NODATA_FUEL_CODE
        } else {
            if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > f64::from(u16::MAX) {
                return Err(IngestError::RangeViolation {
                    layer: "fuel_model".to_string(),
                    row: i / fuel_raster.ncols,
                    col: i % fuel_raster.ncols,
                    value: v,
                    constraint: "non-negative integer fuel code",
                });
            }
            v as u16
        };
        fuel_model.push(code);
    }
    if nodata_fuel > 0 {
        log::warn!("layer \"fuel_model\": {nodata_fuel} NODATA cells coerced to nonburnable code {NODATA_FUEL_CODE}");
    }

    Ok(LandscapeStack {
        grid,
        elevation,
        slope,
        aspect,
        fuel_model,
        canopy_cover,
        stand_height,
        canopy_base_height,
        canopy_bulk_density,
    })
}

/// ESRI header used for every raster tied to a [`GeoGrid`]: the corner
/// fields carry the south-west corner in degrees and `cellsize` the cell
/// edge in meters.
pub fn ascii_header_for(grid: &GeoGrid) -> AsciiGrid {
    AsciiGrid {
        ncols: grid.ncols,
        nrows: grid.nrows,
        xllcorner: grid.lon_min,
        yllcorner: grid.lat_min,
        cellsize: grid.cellsize_m,
        nodata: -9999.0,
        values: Vec::new(),
    }
}

/// Write a landscape stack back to disk as eight ESRI ASCII layers plus a
/// manifest. Inverse of [`load_landscape`], value-exact.
pub fn write_landscape(stack: &LandscapeStack, dir: &Path) -> Result<PathBuf, IngestError> {
    fs::create_dir_all(dir).map_err(|source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut layer_paths = BTreeMap::new();
    let layers: [(&str, Vec<f64>); 8] = [
        ("elevation", stack.elevation.clone()),
        ("slope", stack.slope.clone()),
        ("aspect", stack.aspect.clone()),
        (
            "fuel_model",
            stack.fuel_model.iter().map(|&c| f64::from(c)).collect(),
        ),
        ("canopy_cover", stack.canopy_cover.clone()),
        ("stand_height", stack.stand_height.clone()),
        ("canopy_base_height", stack.canopy_base_height.clone()),
        ("canopy_bulk_density", stack.canopy_bulk_density.clone()),
    ];
    for (name, values) in layers {
        let mut raster = ascii_header_for(&stack.grid);
        raster.values = values;
        let file = format!("{name}.asc");
        write_ascii_grid(&dir.join(&file), &raster)?;
        layer_paths.insert(name.to_string(), file);
    }

    let manifest = serde_json::json!({
        "grid": {
            "lat_min": stack.grid.lat_min,
            "lat_max": stack.grid.lat_max,
            "lon_min": stack.grid.lon_min,
            "lon_max": stack.grid.lon_max,
            "cellsize_m": stack.grid.cellsize_m,
        },
        "layers": layer_paths,
    });
    let manifest_path = dir.join("landscape.json");
    fs::write(&manifest_path, format!("{:#}\n", manifest)).map_err(|source| IngestError::Io {
        path: manifest_path.clone(),
        source,
    })?;
    Ok(manifest_path)
}

const WEATHER_HEADER: [&str; 6] = [
    "timestamp",
    "temperature_c",
    "rh_pct",
    "pressure_hpa",
    "wind_dir_deg",
    "wind_speed_mps",
];

/// Load the weather stream. Timestamps must be RFC 3339 and strictly
/// increasing.
pub fn load_weather(csv_path: &Path) -> Result<Vec<WeatherRecord>, IngestError> {
    let parse_err = |line: u64, msg: String| IngestError::ParseError {
        path: csv_path.to_path_buf(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(csv_path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => IngestError::Io {
                path: csv_path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => parse_err(1, e.to_string()),
        })?;

    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != WEATHER_HEADER {
        return Err(parse_err(
            1,
            format!("expected header {WEATHER_HEADER:?}, got {got:?}"),
        ));
    }

    let mut records = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        if record.len() != 6 {
            return Err(parse_err(
                line,
                format!("expected 6 fields, got {}", record.len()),
            ));
        }
        let timestamp = DateTime::parse_from_rfc3339(&record[0])
            .map_err(|e| parse_err(line, format!("bad timestamp {:?}: {e}", &record[0])))?
            .with_timezone(&Utc);
        let field = |i: usize, name: &str| -> Result<f64, IngestError> {
            record[i]
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("bad {name} {:?}", &record[i])))
        };
        let rec = WeatherRecord {
            timestamp,
            temperature_c: field(1, "temperature_c")?,
            relative_humidity_pct: field(2, "rh_pct")?,
            pressure_hpa: field(3, "pressure_hpa")?,
            wind_dir_deg: field(4, "wind_dir_deg")?,
            wind_speed_mps: field(5, "wind_speed_mps")?,
        };
        if !(0.0..=100.0).contains(&rec.relative_humidity_pct) {
            return Err(parse_err(
                line,
                format!("rh_pct {} outside [0, 100]", rec.relative_humidity_pct),
            ));
        }
        if rec.wind_speed_mps.is_nan() || rec.wind_speed_mps < 0.0 {
            return Err(parse_err(
                line,
                format!("wind_speed_mps {} negative", rec.wind_speed_mps),
            ));
        }
        if !(0.0..360.0).contains(&rec.wind_dir_deg) {
            return Err(parse_err(
                line,
                format!("wind_dir_deg {} outside [0, 360)", rec.wind_dir_deg),
            ));
        }
        if let Some(prev) = records.last() {
            let prev: &WeatherRecord = prev;
            if rec.timestamp <= prev.timestamp {
                return Err(IngestError::NonMonotonicTimestamps {
                    path: csv_path.to_path_buf(),
                    line,
                    previous: prev.timestamp,
                    current: rec.timestamp,
                });
            }
        }
        records.push(rec);
    }
    Ok(records)
}

#[derive(Debug, Deserialize)]
struct TopologyFile {
    buses: Vec<BusRecord>,
    branches: Vec<BranchRecord>,
}

#[derive(Debug, Deserialize)]
struct BusRecord {
    id: u32,
    lat: f64,
    lon: f64,
}

#[derive(Debug, Deserialize)]
struct BranchRecord {
    id: u32,
    from: u32,
    to: u32,
}

pub fn load_topology(json_path: &Path) -> Result<Topology, IngestError> {
    let raw = fs::read_to_string(json_path).map_err(|source| IngestError::Io {
        path: json_path.to_path_buf(),
        source,
    })?;
    let file: TopologyFile = serde_json::from_str(&raw).map_err(|e| IngestError::ParseError {
        path: json_path.to_path_buf(),
        line: e.line() as u64,
        msg: e.to_string(),
    })?;

    let mut bus_ids = BTreeSet::new();
    let mut buses = Vec::with_capacity(file.buses.len());
    for b in file.buses {
        if !bus_ids.insert(b.id) {
            return Err(IngestError::DuplicateId {
                kind: "bus",
                id: b.id,
            });
        }
        let location = GeoPoint::new(b.lat, b.lon);
        if !location.is_valid() {
            return Err(IngestError::CoordinateOutOfRange {
                path: json_path.to_path_buf(),
                line: 0,
                lat: b.lat,
                lon: b.lon,
            });
        }
        buses.push(Bus { id: b.id, location });
    }

    let mut branch_ids = BTreeSet::new();
    let mut branches = Vec::with_capacity(file.branches.len());
    for br in file.branches {
        if !branch_ids.insert(br.id) {
            return Err(IngestError::DuplicateId {
                kind: "branch",
                id: br.id,
            });
        }
        for bus in [br.from, br.to] {
            if !bus_ids.contains(&bus) {
                return Err(IngestError::DanglingBusReference {
                    branch_id: br.id,
                    bus_id: bus,
                });
            }
        }
        if br.from == br.to {
            return Err(IngestError::SelfLoopBranch {
                branch_id: br.id,
                bus_id: br.from,
            });
        }
        branches.push(Branch {
            id: br.id,
            from_bus: br.from,
            to_bus: br.to,
        });
    }

    Ok(Topology { buses, branches })
}

/// Load structure locations from a `lat,lon` CSV, order preserved.
pub fn load_structures(csv_path: &Path) -> Result<StructurePoints, IngestError> {
    let parse_err = |line: u64, msg: String| IngestError::ParseError {
        path: csv_path.to_path_buf(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(csv_path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => IngestError::Io {
                path: csv_path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => parse_err(1, e.to_string()),
        })?;

    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != ["lat", "lon"] {
        return Err(parse_err(
            1,
            format!("expected header [\"lat\", \"lon\"], got {got:?}"),
        ));
    }

    let mut points = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 fields, got {}", record.len()),
            ));
        }
        let lat = record[0]
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("bad lat {:?}", &record[0])))?;
        let lon = record[1]
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("bad lon {:?}", &record[1])))?;
        let p = GeoPoint::new(lat, lon);
        if !p.is_valid() {
            return Err(IngestError::CoordinateOutOfRange {
                path: csv_path.to_path_buf(),
                line,
                lat,
                lon,
            });
        }
        points.push(p);
    }
    Ok(StructurePoints { points })
}

/// Count of fuel cells fire cannot enter; handy for validation summaries.
pub fn nonburnable_cell_count(stack: &LandscapeStack) -> usize {
    stack
        .fuel_model
        .iter()
        .filter(|&&c| is_nonburnable(c))
        .count()
}
