//! CSV artifacts. File names follow `{experiment}_{scheme}_{resolution}.csv`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::RunReport;
use crate::error::{Error, Result};
use crate::grid_fem::{fmt_sci, write_nodal_csv, Grid};

fn create(dir: &Path, name: &str, force: bool) -> Result<(PathBuf, fs::File)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    if path.exists() && !force {
        return Err(Error::Io(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    let file = fs::File::create(&path)?;
    Ok((path, file))
}

/// Columns `resolution,error,nodal_error,rate,status`; `error` is the L2
/// error and drives the rates. The rate of row `i` compares it
/// with row `i - 1` and is empty on the first row.
pub fn write_report_csv(report: &RunReport, dir: &Path, force: bool) -> Result<PathBuf> {
    let name = format!("{}_{}_{}.csv", report.experiment, report.scheme, report.tag);
    let (path, file) = create(dir, &name, force)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "resolution,error,nodal_error,rate,status")?;
    for (i, (res, err)) in report.resolutions.iter().zip(&report.errors).enumerate() {
        let rate = if i == 0 {
            String::new()
        } else {
            report.rates.get(i - 1).map_or(String::new(), |&r| fmt_sci(r))
        };
        let nodal = report.nodal_errors.get(i).map_or(String::new(), |&e| fmt_sci(e));
        writeln!(out, "{res},{},{nodal},{rate},{}", fmt_sci(*err), report.statuses[i])?;
    }
    out.flush()?;
    Ok(path)
}

/// Columns `step,rho` for the finest run of `report`.
pub fn write_rho_csv(report: &RunReport, dir: &Path, force: bool) -> Result<PathBuf> {
    let name = format!("{}_{}_{}-rho.csv", report.experiment, report.scheme, report.tag);
    let (path, file) = create(dir, &name, force)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "step,rho")?;
    for (n, rho) in report.rho_trace.iter().enumerate() {
        writeln!(out, "{},{}", n + 1, fmt_sci(*rho))?;
    }
    out.flush()?;
    Ok(path)
}

/// Nodal field in the grid CSV layout.
pub fn write_snapshot_csv(grid: &Grid, u: &[f64], dir: &Path, name: &str, force: bool) -> Result<PathBuf> {
    let (path, file) = create(dir, name, force)?;
    let mut out = std::io::BufWriter::new(file);
    write_nodal_csv(grid, u, &mut out)?;
    out.flush()?;
    Ok(path)
}
