//! ESRI ASCII grid reader/writer.
//!
//! This is the raster interchange format for landscape layers and burned-area
//! matrices: six header lines (`ncols`, `nrows`, `xllcorner`, `yllcorner`,
//! `cellsize`, `NODATA_value`) followed by `nrows` lines of `ncols`
//! whitespace-separated numbers, row 0 northernmost. Values are written with
//! shortest round-trip formatting, so an export/import cycle is bit-exact.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AsciiError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl AsciiError {
    fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        AsciiError::Parse {
            path: path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }
}

/// An in-memory ESRI ASCII grid, values row-major with row 0 northernmost.
#[derive(Debug, Clone, PartialEq)]
pub struct AsciiGrid {
    pub ncols: usize,
    pub nrows: usize,
    pub xllcorner: f64,
    pub yllcorner: f64,
    pub cellsize: f64,
    pub nodata: f64,
    pub values: Vec<f64>,
}

impl AsciiGrid {
    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.ncols + col]
    }

    /// First header field that differs from `other`, as
    /// `(field, self value, other value)`. `None` means the headers match.
    pub fn header_mismatch(&self, other: &AsciiGrid) -> Option<(&'static str, f64, f64)> {
        let fields = [
            ("ncols", self.ncols as f64, other.ncols as f64),
            ("nrows", self.nrows as f64, other.nrows as f64),
            ("xllcorner", self.xllcorner, other.xllcorner),
            ("yllcorner", self.yllcorner, other.yllcorner),
            ("cellsize", self.cellsize, other.cellsize),
            ("NODATA_value", self.nodata, other.nodata),
        ];
        fields.into_iter().find(|(_, a, b)| a != b)
    }
}

pub fn read_ascii_grid(path: &Path) -> Result<AsciiGrid, AsciiError> {
    let file = File::open(path).map_err(|source| AsciiError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let mut ncols: Option<usize> = None;
    let mut nrows: Option<usize> = None;
    let mut xllcorner: Option<f64> = None;
    let mut yllcorner: Option<f64> = None;
    let mut cellsize: Option<f64> = None;
    let mut nodata: Option<f64> = None;

    let mut header_read = 0;
    while header_read < 6 {
        let Some((i, line)) = lines.next() else {
            return Err(AsciiError::parse(path, header_read + 1, "truncated header"));
        };
        let line = line.map_err(|source| AsciiError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let lineno = i + 1;
        let mut parts = line.split_whitespace();
        let (Some(key), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(AsciiError::parse(
                path,
                lineno,
                format!("malformed header line {line:?}"),
            ));
        };
        match key.to_ascii_lowercase().as_str() {
            "ncols" => {
                ncols = Some(value.parse::<usize>().map_err(|_| {
                    AsciiError::parse(path, lineno, format!("invalid ncols {value:?}"))
                })?)
            }
            "nrows" => {
                nrows = Some(value.parse::<usize>().map_err(|_| {
                    AsciiError::parse(path, lineno, format!("invalid nrows {value:?}"))
                })?)
            }
            "xllcorner" => xllcorner = Some(parse_num(path, lineno, value)?),
            "yllcorner" => yllcorner = Some(parse_num(path, lineno, value)?),
            "cellsize" => cellsize = Some(parse_num(path, lineno, value)?),
            "nodata_value" => nodata = Some(parse_num(path, lineno, value)?),
            other => {
                return Err(AsciiError::parse(
                    path,
                    lineno,
                    format!("unknown header key {other:?}"),
                ));
            }
        }
        header_read += 1;
    }

    let (Some(ncols), Some(nrows), Some(xllcorner), Some(yllcorner), Some(cellsize), Some(nodata)) =
        (ncols, nrows, xllcorner, yllcorner, cellsize, nodata)
    else {
        return Err(AsciiError::parse(
            path,
            6,
            "header missing one of ncols/nrows/xllcorner/yllcorner/cellsize/NODATA_value",
        ));
    };
    if ncols == 0 || nrows == 0 {
        return Err(AsciiError::parse(
            path,
            6,
            "ncols and nrows must be positive",
        ));
    }

    let mut values = Vec::with_capacity(nrows * ncols);
    let mut data_rows = 0;
    for (i, line) in lines {
        let line = line.map_err(|source| AsciiError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if data_rows == nrows {
            return Err(AsciiError::parse(
                path,
                lineno,
                format!("expected {nrows} data rows, found more"),
            ));
        }
        let mut count = 0;
        for tok in line.split_whitespace() {
            values.push(parse_num(path, lineno, tok)?);
            count += 1;
        }
        if count != ncols {
            return Err(AsciiError::parse(
                path,
                lineno,
                format!("expected {ncols} values in data row, found {count}"),
            ));
        }
        data_rows += 1;
    }
    if data_rows != nrows {
        return Err(AsciiError::parse(
            path,
            0,
            format!("expected {nrows} data rows, found {data_rows}"),
        ));
    }

    Ok(AsciiGrid {
        ncols,
        nrows,
        xllcorner,
        yllcorner,
        cellsize,
        nodata,
        values,
    })
}

fn parse_num(path: &Path, line: usize, tok: &str) -> Result<f64, AsciiError> {
    tok.parse::<f64>()
        .map_err(|_| AsciiError::parse(path, line, format!("invalid number {tok:?}")))
}

pub fn write_ascii_grid(path: &Path, grid: &AsciiGrid) -> Result<(), AsciiError> {
    let io_err = |source| AsciiError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    write_inner(&mut w, grid).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn write_inner<W: Write>(w: &mut W, grid: &AsciiGrid) -> io::Result<()> {
    writeln!(w, "ncols {}", grid.ncols)?;
    writeln!(w, "nrows {}", grid.nrows)?;
    writeln!(w, "xllcorner {}", grid.xllcorner)?;
    writeln!(w, "yllcorner {}", grid.yllcorner)?;
    writeln!(w, "cellsize {}", grid.cellsize)?;
    writeln!(w, "NODATA_value {}", grid.nodata)?;
    let mut line = String::new();
    for row in 0..grid.nrows {
        line.clear();
        for col in 0..grid.ncols {
            if col > 0 {
                line.push(' ');
            }
            line.push_str(&grid.value(row, col).to_string());
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
