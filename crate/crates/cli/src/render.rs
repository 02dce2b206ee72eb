//! PGM images of rasterized solutions and CSV sparsity curves.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use tfatom::tfr::{energy_curve, rasterize, Raster};

use crate::error::{CliError, CliResult};
use crate::solution::SolutionFile;

/// Gray level `round(255 · (db - floor) / -floor)`.
fn gray(db: f64, floor: f64) -> u8 {
    (255.0 * (db - floor) / -floor).round().clamp(0.0, 255.0) as u8
}

/// Binary PGM, frequency on rows with bin 0 at the bottom.
pub fn pgm_bytes(raster: &Raster, floor: f64) -> Vec<u8> {
    let (rows, cols) = (raster.bins(), raster.columns());
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.reserve(rows * cols);
    for bin in (0..rows).rev() {
        out.extend((0..cols).map(|n| gray(raster.get(bin, n), floor)));
    }
    out
}

/// One row per bin (bin 0 first), one column per window.
pub fn raster_csv(raster: &Raster) -> String {
    let mut out = String::from("bin");
    for n in 0..raster.columns() {
        write!(out, ",{n}").unwrap();
    }
    out.push('\n');
    for bin in 0..raster.bins() {
        write!(out, "{bin}").unwrap();
        for n in 0..raster.columns() {
            write!(out, ",{}", raster.get(bin, n)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn render(input: &Path, output: &Path, bins: usize, floor: f64, csv: Option<&Path>) -> CliResult<()> {
    if bins == 0 || !(floor.is_finite() && floor < 0.0) {
        return Err(CliError::Input(format!(
            "need bins >= 1 and a negative dB floor, got {bins} and {floor}"
        )));
    }
    let solution = SolutionFile::read(input)?;
    let tf = solution.to_sparse(input)?;
    let raster = rasterize(&tf, bins, floor)?;
    fs::write(output, pgm_bytes(&raster, floor)).map_err(|e| CliError::io(output, e))?;
    if let Some(path) = csv {
        fs::write(path, raster_csv(&raster)).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

/// Header `index,<method>...`; shorter columns are padded with 0. Repeated
/// method names get a `#k` suffix.
pub fn curve_csv(names: &[String], curves: &[Vec<f64>]) -> String {
    let mut header = vec!["index".to_string()];
    for (i, name) in names.iter().enumerate() {
        let seen = names[..i].iter().filter(|n| *n == name).count();
        header.push(if seen == 0 {
            name.clone()
        } else {
            format!("{name}#{}", seen + 1)
        });
    }
    let mut out = header.join(",");
    out.push('\n');
    let rows = curves.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..rows {
        write!(out, "{i}").unwrap();
        for c in curves {
            write!(out, ",{}", c.get(i).copied().unwrap_or(0.0)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn curve(inputs: &[impl AsRef<Path>], output: &Path) -> CliResult<()> {
    let mut names = Vec::new();
    let mut curves = Vec::new();
    for input in inputs {
        let path = input.as_ref();
        let solution = SolutionFile::read(path)?;
        curves.push(energy_curve(&solution.to_sparse(path)?));
        names.push(solution.metadata.method);
    }
    fs::write(output, curve_csv(&names, &curves)).map_err(|e| CliError::io(output, e))
}
