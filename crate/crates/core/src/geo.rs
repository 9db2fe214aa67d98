//! Grid georeferencing, projection, distance, and line rasterization
//! primitives shared by the rest of the pipeline.
//!
//! The study areas this pipeline targets span well under a degree, so an
//! equirectangular (plate carrée) mapping between lat/lon and the raster is
//! used throughout: distortion at that extent is negligible and the mapping
//! is exactly invertible.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// WGS-84 mean Earth radius in miles.
pub const EARTH_RADIUS_MILES: f64 = 3958.7613;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("point ({lat}, {lon}) lies outside the grid bounding box")]
    OutOfBounds { lat: f64, lon: f64 },
    #[error("interpolation fraction {0} outside [0, 1]")]
    InvalidFraction(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Raster georeference: `nrows x ncols` cells over a lat/lon bounding box.
/// Row 0 is the northernmost band, column 0 the westernmost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoGrid {
    pub nrows: usize,
    pub ncols: usize,
    /// Cell edge length in meters.
    pub cellsize_m: f64,
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl GeoGrid {
    pub fn new(
        nrows: usize,
        ncols: usize,
        cellsize_m: f64,
        lat_min: f64,
        lat_max: f64,
        lon_min: f64,
        lon_max: f64,
    ) -> Result<Self, GeoError> {
        if nrows < 1 || ncols < 1 {
            return Err(GeoError::InvalidGrid(format!(
                "dimensions must be at least 1x1, got {nrows}x{ncols}"
            )));
        }
        if !cellsize_m.is_finite() || cellsize_m <= 0.0 {
            return Err(GeoError::InvalidGrid(format!(
                "cellsize must be positive, got {cellsize_m}"
            )));
        }
        let bounds_ok = [lat_min, lat_max, lon_min, lon_max]
            .iter()
            .all(|v| v.is_finite())
            && lat_min < lat_max
            && lon_min < lon_max;
        if !bounds_ok {
            return Err(GeoError::InvalidGrid(format!(
                "bounding box must be non-degenerate, got lat {lat_min}..{lat_max} lon {lon_min}..{lon_max}"
            )));
        }
        Ok(GeoGrid {
            nrows,
            ncols,
            cellsize_m,
            lat_min,
            lat_max,
            lon_min,
            lon_max,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.nrows * self.ncols
    }

    /// Row-major flat index of a cell.
    #[inline]
    pub fn idx(&self, cell: CellIndex) -> usize {
        cell.row * self.ncols + cell.col
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lat >= self.lat_min
            && p.lat <= self.lat_max
            && p.lon >= self.lon_min
            && p.lon <= self.lon_max
    }

    /// Continuous grid coordinates: x grows eastward in [0, ncols],
    /// y grows southward in [0, nrows].
    fn to_xy(&self, p: GeoPoint) -> (f64, f64) {
        let x = (p.lon - self.lon_min) / (self.lon_max - self.lon_min) * self.ncols as f64;
        let y = (self.lat_max - p.lat) / (self.lat_max - self.lat_min) * self.nrows as f64;
        (x, y)
    }

    pub fn cell_center(&self, cell: CellIndex) -> GeoPoint {
        let lat = self.lat_max
            - (cell.row as f64 + 0.5) / self.nrows as f64 * (self.lat_max - self.lat_min);
        let lon = self.lon_min
            + (cell.col as f64 + 0.5) / self.ncols as f64 * (self.lon_max - self.lon_min);
        GeoPoint { lat, lon }
    }
}

/// A WGS-84 coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }
}

/// 0-based (row, col) cell address within an owning grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub fn new(row: usize, col: usize) -> Self {
        CellIndex { row, col }
    }
}

/// Project a point onto the grid. Points exactly on the max-lat/max-lon
/// boundary clamp into the last valid cell, so the mapping is total on the
/// closed bounding box.
pub fn project(p: GeoPoint, g: &GeoGrid) -> Result<CellIndex, GeoError> {
    if !g.contains(p) {
        return Err(GeoError::OutOfBounds {
            lat: p.lat,
            lon: p.lon,
        });
    }
    let (x, y) = g.to_xy(p);
    let col = (x.floor() as i64).clamp(0, g.ncols as i64 - 1) as usize;
    let row = (y.floor() as i64).clamp(0, g.nrows as i64 - 1) as usize;
    Ok(CellIndex { row, col })
}

/// Great-circle distance in miles.
pub fn haversine_miles(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();

    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    let c = 2.0 * h.sqrt().atan2((1.0 - h).sqrt());
    EARTH_RADIUS_MILES * c
}

/// Linear interpolation in lat/lon space. At sub-degree extents the error
/// versus great-circle interpolation is below 100 m.
pub fn interpolate_along(a: GeoPoint, b: GeoPoint, f: f64) -> Result<GeoPoint, GeoError> {
    if !(0.0..=1.0).contains(&f) {
        return Err(GeoError::InvalidFraction(f));
    }
    Ok(GeoPoint {
        lat: a.lat + (b.lat - a.lat) * f,
        lon: a.lon + (b.lon - a.lon) * f,
    })
}

/// Every cell whose interior the segment `a`-`b` crosses, exactly once, in
/// traversal order (supercover: diagonal corner crossings include both side
/// cells, so the result has no diagonal gaps). Endpoints outside the grid
/// are clipped to the bounding box; a segment entirely outside yields an
/// empty list.
pub fn supercover_cells(a: GeoPoint, b: GeoPoint, g: &GeoGrid) -> Vec<CellIndex> {
    let (ax, ay) = g.to_xy(a);
    let (bx, by) = g.to_xy(b);
    let Some((x0, y0, x1, y1)) = clip_to_box(ax, ay, bx, by, g.ncols as f64, g.nrows as f64) else {
        return Vec::new();
    };

    let clamp_col = |x: f64| (x.floor() as i64).clamp(0, g.ncols as i64 - 1);
    let clamp_row = |y: f64| (y.floor() as i64).clamp(0, g.nrows as i64 - 1);

    let mut col = clamp_col(x0);
    let mut row = clamp_row(y0);
    let end_col = clamp_col(x1);
    let end_row = clamp_row(y1);

    let dx = x1 - x0;
    let dy = y1 - y0;
    let step_c: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_r: i64 = if dy > 0.0 { 1 } else { -1 };

    // Parameter t at which the ray first leaves the current cell through a
    // vertical / horizontal boundary, and the per-cell increments.
    let mut t_max_x = if dx != 0.0 {
        let boundary = if step_c > 0 { col + 1 } else { col } as f64;
        (boundary - x0) / dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy != 0.0 {
        let boundary = if step_r > 0 { row + 1 } else { row } as f64;
        (boundary - y0) / dy
    } else {
        f64::INFINITY
    };
    let t_delta_x = if dx != 0.0 {
        1.0 / dx.abs()
    } else {
        f64::INFINITY
    };
    let t_delta_y = if dy != 0.0 {
        1.0 / dy.abs()
    } else {
        f64::INFINITY
    };

    let mut cells = Vec::new();
    let push = |r: i64, c: i64, out: &mut Vec<CellIndex>| {
        if r >= 0 && c >= 0 && (r as usize) < g.nrows && (c as usize) < g.ncols {
            out.push(CellIndex::new(r as usize, c as usize));
        }
    };
    push(row, col, &mut cells);

    let max_steps = 2 * (g.nrows + g.ncols) + 8;
    let mut steps = 0;
    while (row, col) != (end_row, end_col) && steps < max_steps {
        steps += 1;
        if t_max_x < t_max_y {
            col += step_c;
            t_max_x += t_delta_x;
        } else if t_max_y < t_max_x {
            row += step_r;
            t_max_y += t_delta_y;
        } else {
            // Exact corner crossing: include both side cells.
            push(row, col + step_c, &mut cells);
            push(row + step_r, col, &mut cells);
            col += step_c;
            row += step_r;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        }
        push(row, col, &mut cells);
    }
    debug_assert!(steps < max_steps, "supercover traversal did not terminate");
    cells
}

/// Liang-Barsky clip of a segment to [0, xmax] x [0, ymax]. Returns the
/// clipped endpoints, or None when the segment misses the box.
fn clip_to_box(
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    xmax: f64,
    ymax: f64,
) -> Option<(f64, f64, f64, f64)> {
    let dx = x1 - x0;
    let dy = y1 - y0;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let checks = [(-dx, x0), (dx, xmax - x0), (-dy, y0), (dy, ymax - y0)];
    for (p, q) in checks {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                if r > t1 {
                    return None;
                }
                if r > t0 {
                    t0 = r;
                }
            } else {
                if r < t0 {
                    return None;
                }
                if r < t1 {
                    t1 = r;
                }
            }
        }
    }
    Some((x0 + t0 * dx, y0 + t0 * dy, x0 + t1 * dx, y0 + t1 * dy))
}
