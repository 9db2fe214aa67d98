//! Bundled synthetic case study: the IEEE 30-bus network mapped onto a
//! 0.5 x 0.7 degree study area with a deterministic synthetic landscape,
//! a 48-hour summer weather stream, and clustered structure points.
//!
//! Everything here is generated from closed-form functions and a fixed RNG
//! seed, so repeated generation is byte-identical. The real datasets the
//! pipeline is designed for (LandFire extracts, NSRDB weather, OSM
//! structures) are not redistributable; this fixture mirrors their shape.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geo::{GeoGrid, GeoPoint};
use crate::ingest::{write_landscape, Branch, Bus, IngestError, LandscapeStack, Topology};

pub const LAT_MIN: f64 = 37.6;
pub const LAT_MAX: f64 = 38.1;
pub const LON_MIN: f64 = -120.7;
pub const LON_MAX: f64 = -120.0;

/// Size knobs for the generated fixture.
#[derive(Debug, Clone)]
pub struct FixtureSpec {
    pub nrows: usize,
    pub ncols: usize,
    pub cellsize_m: f64,
    pub structure_count: usize,
}

impl FixtureSpec {
    /// The full-scale study shape: 464 x 517 cells of 120 m.
    pub fn full_scale() -> Self {
        FixtureSpec {
            nrows: 464,
            ncols: 517,
            cellsize_m: 120.0,
            structure_count: 3000,
        }
    }

    /// A small grid for fast plumbing tests.
    pub fn small() -> Self {
        FixtureSpec {
            nrows: 72,
            ncols: 80,
            cellsize_m: 800.0,
            structure_count: 500,
        }
    }
}

/// IEEE 30-bus layout positions in a unit square (x east, y north),
/// stretched over the study area so total line length yields 60+ ignition
/// scenarios at the default 5-mile spacing.
const BUS_LAYOUT: [(u32, f64, f64); 30] = [
    (1, 0.03, 0.03),
    (2, 0.25, 0.05),
    (3, 0.02, 0.33),
    (4, 0.24, 0.35),
    (5, 0.50, 0.03),
    (6, 0.40, 0.38),
    (7, 0.48, 0.20),
    (8, 0.64, 0.30),
    (9, 0.54, 0.56),
    (10, 0.58, 0.66),
    (11, 0.40, 0.58),
    (12, 0.16, 0.62),
    (13, 0.03, 0.68),
    (14, 0.12, 0.80),
    (15, 0.28, 0.82),
    (16, 0.36, 0.70),
    (17, 0.50, 0.74),
    (18, 0.30, 0.95),
    (19, 0.46, 0.98),
    (20, 0.56, 0.90),
    (21, 0.68, 0.74),
    (22, 0.80, 0.64),
    (23, 0.44, 0.99),
    (24, 0.72, 0.88),
    (25, 0.84, 0.93),
    (26, 0.97, 0.97),
    (27, 0.90, 0.76),
    (28, 0.68, 0.44),
    (29, 0.97, 0.62),
    (30, 0.98, 0.44),
];

/// The 41 branches of the IEEE 30-bus system, standard ordering.
const BRANCHES: [(u32, u32, u32); 41] = [
    (1, 1, 2),
    (2, 1, 3),
    (3, 2, 4),
    (4, 3, 4),
    (5, 2, 5),
    (6, 2, 6),
    (7, 4, 6),
    (8, 5, 7),
    (9, 6, 7),
    (10, 6, 8),
    (11, 6, 9),
    (12, 6, 10),
    (13, 9, 11),
    (14, 9, 10),
    (15, 4, 12),
    (16, 12, 13),
    (17, 12, 14),
    (18, 12, 15),
    (19, 12, 16),
    (20, 14, 15),
    (21, 16, 17),
    (22, 15, 18),
    (23, 18, 19),
    (24, 19, 20),
    (25, 10, 20),
    (26, 10, 17),
    (27, 10, 21),
    (28, 10, 22),
    (29, 21, 22),
    (30, 15, 23),
    (31, 22, 24),
    (32, 23, 24),
    (33, 24, 25),
    (34, 25, 26),
    (35, 25, 27),
    (36, 28, 27),
    (37, 27, 29),
    (38, 27, 30),
    (39, 29, 30),
    (40, 8, 28),
    (41, 6, 28),
];

fn layout_point(x: f64, y: f64) -> GeoPoint {
    GeoPoint {
        lat: 37.62 + 0.46 * y,
        lon: -120.68 + 0.66 * x,
    }
}

pub fn ieee30_topology() -> Topology {
    Topology {
        buses: BUS_LAYOUT
            .iter()
            .map(|&(id, x, y)| Bus {
                id,
                location: layout_point(x, y),
            })
            .collect(),
        branches: BRANCHES
            .iter()
            .map(|&(id, from_bus, to_bus)| Branch {
                id,
                from_bus,
                to_bus,
            })
            .collect(),
    }
}

/// Synthetic landscape: rolling terrain, a mixed grass/brush/timber fuel
/// mosaic, one lake and one rock outcrop (both placed off the line
/// corridors), and canopy layers derived from cover.
pub fn synth_landscape(spec: &FixtureSpec) -> LandscapeStack {
    use std::f64::consts::PI;

    let grid = GeoGrid::new(
        spec.nrows,
        spec.ncols,
        spec.cellsize_m,
        LAT_MIN,
        LAT_MAX,
        LON_MIN,
        LON_MAX,
    )
    .expect("fixture grid is valid");

    let n = grid.cell_count();
    let fr_of = |row: usize| row as f64 / (spec.nrows - 1).max(1) as f64;
    let fc_of = |col: usize| col as f64 / (spec.ncols - 1).max(1) as f64;

    let elevation_at = |fr: f64, fc: f64| {
        350.0
            + 260.0 * (2.2 * fc * PI + 0.6).sin() * (1.7 * fr * PI + 0.3).cos()
            + 90.0 * (6.0 * fc * PI).sin() * (5.0 * fr * PI).sin()
    };

    let mut elevation = vec![0.0; n];
    let mut fuel_model = vec![0u16; n];
    let mut canopy_cover = vec![0.0; n];
    for row in 0..spec.nrows {
        for col in 0..spec.ncols {
            let (fr, fc) = (fr_of(row), fc_of(col));
            let i = row * spec.ncols + col;
            elevation[i] = elevation_at(fr, fc);

            let in_lake = {
                let dx = (fc - 0.15) / 0.07;
                let dy = (fr - 0.78) / 0.07;
                dx * dx + dy * dy < 1.0
            };
            let in_rock = {
                let dx = (fc - 0.10) / 0.03;
                let dy = (fr - 0.50) / 0.03;
                dx * dx + dy * dy < 1.0
            };
            let v = (4.5 * fc * PI + 1.1).sin() * (3.4 * fr * PI + 0.5).cos()
                + 0.45 * (9.1 * fc * PI).sin() * (7.3 * fr * PI).cos();
            fuel_model[i] = if in_lake {
                98
            } else if in_rock {
                99
            } else if v > 0.8 {
                8
            } else if v > 0.3 {
                5
            } else if v > -0.3 {
                1
            } else if v > -0.8 {
                2
            } else {
                9
            };

            canopy_cover[i] = match fuel_model[i] {
                8..=10 => 35.0 + 25.0 * ((5.0 * fc * PI).sin() * (3.0 * fr * PI).cos()).abs(),
                5 | 6 => 15.0,
                98 | 99 => 0.0,
                _ => 3.0,
            };
        }
    }

    // Slope/aspect from central differences of the elevation field. The
    // engine derives its own per-edge slopes; these layers are ingested
    // for completeness and validation, matching the input shape.
    let mut slope = vec![0.0; n];
    let mut aspect = vec![0.0; n];
    for row in 0..spec.nrows {
        for col in 0..spec.ncols {
            let i = row * spec.ncols + col;
            let east = elevation[row * spec.ncols + (col + 1).min(spec.ncols - 1)];
            let west = elevation[row * spec.ncols + col.saturating_sub(1)];
            let north = elevation[row.saturating_sub(1) * spec.ncols + col];
            let south = elevation[(row + 1).min(spec.nrows - 1) * spec.ncols + col];
            let dzdx = (east - west) / (2.0 * spec.cellsize_m);
            let dzdy = (north - south) / (2.0 * spec.cellsize_m);
            slope[i] = dzdx.hypot(dzdy).atan().to_degrees();
            aspect[i] = (-dzdx).atan2(-dzdy).to_degrees().rem_euclid(360.0);
        }
    }

    let stand_height: Vec<f64> = canopy_cover.iter().map(|&c| c * 0.22).collect();
    let canopy_base_height: Vec<f64> = stand_height.iter().map(|&h| h * 0.2).collect();
    let canopy_bulk_density: Vec<f64> = canopy_cover.iter().map(|&c| c * 0.0015).collect();

    LandscapeStack {
        grid,
        elevation,
        slope,
        aspect,
        fuel_model,
        canopy_cover,
        stand_height,
        canopy_base_height,
        canopy_bulk_density,
    }
}

/// 48 hourly records starting 2022-07-01T00:00Z: a diurnal temperature and
/// humidity cycle with south-westerly wind swinging 187-243 degrees.
pub fn synth_weather_csv() -> String {
    use std::f64::consts::PI;
    let mut out =
        String::from("timestamp,temperature_c,rh_pct,pressure_hpa,wind_dir_deg,wind_speed_mps\n");
    for h in 0..48i64 {
        let hh = h as f64;
        let temp = 27.0 + 9.0 * (2.0 * PI * (hh - 14.0) / 24.0).sin();
        let rh = 28.0 - 14.0 * (2.0 * PI * (hh - 14.0) / 24.0).sin();
        let pressure = 1012.0 + 3.0 * (2.0 * PI * hh / 48.0).cos();
        let dir = (215.0 + 28.0 * (2.0 * PI * hh / 24.0 + 0.7).sin()).rem_euclid(360.0);
        let speed = 5.2 + 2.8 * (2.0 * PI * (hh - 15.0) / 24.0).sin();
        let day = 1 + h / 24;
        let hour = h % 24;
        out.push_str(&format!(
            "2022-07-{day:02}T{hour:02}:00:00Z,{temp},{rh},{pressure},{dir},{speed}\n"
        ));
    }
    out
}

/// Structure points: three towns of decreasing size (the largest sits on
/// the bus 29-30 corridor) plus background scatter, seeded so generation
/// is reproducible.
pub fn synth_structures(spec: &FixtureSpec) -> Vec<GeoPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f2d_9eed);
    let total = spec.structure_count;
    let towns: [(f64, f64, usize); 3] = [
        (0.95, 0.53, total * 45 / 100),
        (0.30, 0.75, total * 30 / 100),
        (0.55, 0.25, total * 17 / 100),
    ];
    let mut points = Vec::with_capacity(total);
    for &(cx, cy, count) in &towns {
        for _ in 0..count {
            let (mut x, mut y) = (cx, cy);
            for _ in 0..100 {
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                let r = 0.035 * (-2.0 * u1.ln()).sqrt();
                let theta = 2.0 * std::f64::consts::PI * u2;
                x = cx + r * theta.cos();
                y = cy + r * theta.sin();
                if (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y) {
                    break;
                }
            }
            points.push(layout_point(x.clamp(0.0, 1.0), y.clamp(0.0, 1.0)));
        }
    }
    while points.len() < total {
        let x = rng.gen_range(0.02..0.98);
        let y = rng.gen_range(0.02..0.98);
        points.push(layout_point(x, y));
    }
    points
}

/// Materialize the complete fixture under `dir` and return the path of the
/// generated run config.
pub fn write_fixture(dir: &Path, spec: &FixtureSpec) -> Result<PathBuf, IngestError> {
    let io_err = |path: &Path, source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let landscape_dir = dir.join("landscape");
    write_landscape(&synth_landscape(spec), &landscape_dir)?;

    let weather_path = dir.join("weather.csv");
    fs::write(&weather_path, synth_weather_csv()).map_err(|e| io_err(&weather_path, e))?;

    let topo = ieee30_topology();
    let topo_json = serde_json::json!({
        "buses": topo
            .buses
            .iter()
            .map(|b| serde_json::json!({"id": b.id, "lat": b.location.lat, "lon": b.location.lon}))
            .collect::<Vec<_>>(),
        "branches": topo
            .branches
            .iter()
            .map(|b| serde_json::json!({"id": b.id, "from": b.from_bus, "to": b.to_bus}))
            .collect::<Vec<_>>(),
    });
    let topo_path = dir.join("topology.json");
    fs::write(&topo_path, format!("{topo_json:#}\n")).map_err(|e| io_err(&topo_path, e))?;

    let structures_path = dir.join("structures.csv");
    let mut s = String::from("lat,lon\n");
    for p in synth_structures(spec) {
        s.push_str(&format!("{},{}\n", p.lat, p.lon));
    }
    fs::write(&structures_path, s).map_err(|e| io_err(&structures_path, e))?;

    let config = serde_json::json!({
        "landscape_manifest": "landscape/landscape.json",
        "weather_csv": "weather.csv",
        "topology_json": "topology.json",
        "structures_csv": "structures.csv",
        "output_dir": "out",
        "spacing_miles": 5.0,
        "burn_window": {"start": "2022-07-01T10:00:00Z", "duration_min": 120.0},
    });
    let config_path = dir.join("config.json");
    let mut f = fs::File::create(&config_path).map_err(|e| io_err(&config_path, e))?;
    writeln!(f, "{config:#}").map_err(|e| io_err(&config_path, e))?;
    Ok(config_path)
}
