//! Artifact files: `<command>.csv`, `<command>.json` and
//! `<command>.manifest.json` in the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use msl_core::{CMat, Error, C64};
use serde::Serialize;

use crate::config::Config;

/// Fixed-width scientific format with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex_cells(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

/// Row-major `Re, Im` cells of a matrix.
pub fn matrix_cells(a: &CMat) -> Vec<String> {
    let mut v = Vec::with_capacity(2 * a.len());
    for r in 0..a.nrows() {
        for k in 0..a.ncols() {
            v.extend(complex_cells(a[(r, k)]));
        }
    }
    v
}

/// Headers `prefix_ij_re, prefix_ij_im` (one-based) for an `m x m` matrix.
pub fn matrix_headers(prefix: &str, m: usize) -> Vec<String> {
    let mut v = Vec::with_capacity(2 * m * m);
    for r in 1..=m {
        for k in 1..=m {
            v.push(format!("{prefix}_{r}{k}_re"));
            v.push(format!("{prefix}_{r}{k}_im"));
        }
    }
    v
}

pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Table {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    tool_version: &'static str,
    core_version: &'static str,
    parallel: bool,
    config: String,
    tol_scale: f64,
    picard_tol: f64,
    picard_max_iter: usize,
    mesh: msl_core::quadrature::MeshParams,
    contour: msl_core::ContourSettings,
    oracle: msl_core::oracle::OracleSettings,
    files: [String; 2],
}

pub struct Sink {
    pub dir: PathBuf,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
}

impl Sink {
    pub fn new(dir: PathBuf) -> Result<Sink, Error> {
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        Ok(Sink { dir })
    }

    pub fn write<T: Serialize>(
        &self,
        command: &str,
        table: &Table,
        json: &T,
        cfg: &Config,
        config_path: &Path,
        tol_scale: f64,
    ) -> Result<(), Error> {
        let csv_path = self.dir.join(format!("{command}.csv"));
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| io_error(&csv_path, e))?;
        w.write_record(&table.headers).map_err(|e| io_error(&csv_path, e))?;
        for row in &table.rows {
            w.write_record(row).map_err(|e| io_error(&csv_path, e))?;
        }
        w.flush().map_err(|e| io_error(&csv_path, e))?;

        let json_path = self.dir.join(format!("{command}.json"));
        let text = serde_json::to_string_pretty(json).map_err(|e| io_error(&json_path, e))?;
        fs::write(&json_path, text + "\n").map_err(|e| io_error(&json_path, e))?;

        let s = &cfg.solver;
        let manifest = Manifest {
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            core_version: msl_core::VERSION,
            parallel: msl_core::par::is_parallel(),
            config: config_path
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            tol_scale,
            picard_tol: s.picard_tol,
            picard_max_iter: s.picard_max_iter,
            mesh: s.mesh,
            contour: s.contour,
            oracle: s.oracle,
            files: [format!("{command}.csv"), format!("{command}.json")],
        };
        let mpath = self.dir.join(format!("{command}.manifest.json"));
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| io_error(&mpath, e))?;
        fs::write(&mpath, text + "\n").map_err(|e| io_error(&mpath, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [std::f64::consts::PI, -1.0 / 3.0, 2.0 / std::f64::consts::PI, 1e-300, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn matrix_layout_is_row_major() {
        let a = CMat::from_row_slice(2, 2, &[C64::new(1.0, 2.0), C64::new(3.0, 0.0), C64::new(0.0, 0.0), C64::new(4.0, 0.0)]);
        let cells = matrix_cells(&a);
        assert_eq!(cells[2], num(3.0));
        assert_eq!(matrix_headers("w", 2)[2], "w_12_re");
    }
}
