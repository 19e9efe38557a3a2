//! Field exports: PGM (P2) heatmaps of 2D slices with a min/max sidecar, and
//! raw little-endian `f64` dumps with a text header.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::grid::{Geometry, Grid};
use crate::{Error, Result};

/// A 2D array of values, row-major with the first grid axis fastest.
#[derive(Debug, Clone)]
pub struct Slice {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

/// The whole field for 2D grids; for higher-dimensional grids the plane
/// spanned by the first two axes at index `at` of every remaining axis
/// (the middle when `None`).
pub fn slice(grid: &Grid, values: &[f64], at: Option<usize>) -> Result<Slice> {
    if values.len() != grid.len() {
        return Err(Error::domain("field does not match the grid"));
    }
    let (w, h) = (grid.dims[0], grid.dims[1]);
    let mut idx: Vec<usize> = grid.dims.iter().map(|&n| at.unwrap_or(n / 2).min(n - 1)).collect();
    let mut out = Vec::with_capacity(w * h);
    for j in 0..h {
        for i in 0..w {
            idx[0] = i;
            idx[1] = j;
            out.push(values[grid.index(&idx)]);
        }
    }
    Ok(Slice {
        width: w,
        height: h,
        values: out,
    })
}

fn finite_range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// P2 text with values mapped linearly onto `0..=65535`; non-finite values
/// (masked nodes) map to 0. Returns `(min, max)` of the finite values.
pub fn write_pgm_to(out: &mut impl Write, s: &Slice) -> Result<(f64, f64)> {
    let (lo, hi) = finite_range(&s.values);
    writeln!(out, "P2\n{} {}\n65535", s.width, s.height)?;
    let span = if hi > lo { hi - lo } else { 1.0 };
    // top row first: the largest second coordinate
    for j in (0..s.height).rev() {
        let row: Vec<String> = (0..s.width)
            .map(|i| {
                let v = s.values[j * s.width + i];
                if v.is_finite() {
                    (((v - lo) / span) * 65535.0).round().clamp(0.0, 65535.0).to_string()
                } else {
                    "0".to_string()
                }
            })
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok((lo, hi))
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

/// Writes `path` and `path.range` (`min`/`max` lines).
pub fn write_pgm(path: &Path, s: &Slice) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    let (lo, hi) = write_pgm_to(&mut f, s)?;
    f.flush()?;
    fs::write(sidecar(path, ".range"), format!("min {lo:e}\nmax {hi:e}\n"))?;
    Ok(())
}

pub fn binary_header(grid: &Grid) -> String {
    let join = |v: Vec<String>| v.join(" ");
    let geometry = match grid.geometry {
        Geometry::Cartesian => "cartesian",
        Geometry::Axisymmetric => "axisymmetric",
    };
    format!(
        "format f64le\ngeometry {geometry}\ndims {}\nspacing {:e}\norigin {}\norder first-axis-fastest\n",
        join(grid.dims.iter().map(|d| d.to_string()).collect()),
        grid.spacing,
        join(grid.origin.iter().map(|o| format!("{o:e}")).collect()),
    )
}

/// Writes the raw field to `path` and its header to `path.hdr`.
pub fn write_binary(path: &Path, grid: &Grid, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::domain("field does not match the grid"));
    }
    let mut bytes = Vec::with_capacity(8 * values.len());
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    fs::write(sidecar(path, ".hdr"), binary_header(grid))?;
    Ok(())
}
