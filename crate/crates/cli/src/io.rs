//! Plain-text snapshot and timeseries formats, and output checksums.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use phytospde_core::{Field, SpatialGrid, Trajectory};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// 17 significant digits, which round-trips every `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn create_parent(path: &Path) -> Result<(), IoError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(io_err(dir)),
        _ => Ok(()),
    }
}

/// Header lines `L`, `N`, `t`, then one value per line.
pub fn write_snapshot(field: &Field, t: f64, path: &Path) -> Result<(), IoError> {
    create_parent(path)?;
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let grid = field.grid();
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "L {}", fmt_f64(grid.length()))?;
        writeln!(w, "N {}", grid.cells())?;
        writeln!(w, "t {}", fmt_f64(t))?;
        for v in field.values() {
            writeln!(w, "{}", fmt_f64(*v))?;
        }
        w.flush()
    };
    write().map_err(io_err(path))
}

/// Reads a snapshot, rejecting it when `expected` is given and the header
/// grid differs.
pub fn read_snapshot(path: &Path, expected: Option<SpatialGrid>) -> Result<(Field, f64), IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    let mut header = |key: &str| -> Result<&str, IoError> {
        let line = lines
            .next()
            .ok_or_else(|| format_err(path, format!("missing {key} header")))?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| format_err(path, format!("expected '{key} <value>', got '{line}'")))
    };
    let length: f64 = header("L")?
        .parse()
        .map_err(|_| format_err(path, "bad L"))?;
    let cells: usize = header("N")?
        .parse()
        .map_err(|_| format_err(path, "bad N"))?;
    let t: f64 = header("t")?
        .parse()
        .map_err(|_| format_err(path, "bad t"))?;
    let grid = SpatialGrid::new(length, cells).map_err(|e| format_err(path, e.to_string()))?;
    if let Some(g) = expected {
        if g != grid {
            return Err(format_err(
                path,
                format!(
                    "grid L={} N={} does not match the expected L={} N={}",
                    length,
                    cells,
                    g.length(),
                    g.cells()
                ),
            ));
        }
    }
    let values: Vec<f64> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format_err(path, e.to_string()))?;
    if values.len() != cells {
        return Err(format_err(
            path,
            format!("expected {cells} values, found {}", values.len()),
        ));
    }
    let field = Field::new(grid, values).map_err(|e| format_err(path, e.to_string()))?;
    Ok((field, t))
}

/// A comma-separated table with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn write_table(table: &Table, path: &Path) -> Result<(), IoError> {
    create_parent(path)?;
    let csv_err = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_table(path: &Path) -> Result<Table, IoError> {
    let csv_err = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let columns = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format_err(path, e.to_string()))?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

/// `t, mass, positivity_fraction, db_norm`, one row per step.
pub fn timeseries_table(traj: &Trajectory) -> Table {
    let mut t = Table::new(&["t", "mass", "positivity_fraction", "db_norm"]);
    for k in 0..traj.times.len() {
        t.push(vec![
            traj.times[k],
            traj.mass[k],
            traj.positivity[k],
            traj.db_norm[k],
        ]);
    }
    t
}

pub fn write_timeseries(traj: &Trajectory, path: &Path) -> Result<(), IoError> {
    write_table(&timeseries_table(traj), path)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), IoError> {
    create_parent(path)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| format_err(path, e.to_string()))?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn sha256_file(path: &Path) -> Result<String, IoError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Snapshot,
    Timeseries,
    Report,
    Table,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub kind: OutputKind,
    /// Relative to the output directory.
    pub path: String,
    pub checksum: String,
}

impl OutputRecord {
    pub fn of(kind: OutputKind, out_dir: &Path, rel: &str) -> Result<Self, IoError> {
        Ok(Self {
            kind,
            path: rel.to_string(),
            checksum: sha256_file(&out_dir.join(rel))?,
        })
    }

    pub fn verify(&self, out_dir: &Path) -> Result<bool, IoError> {
        Ok(sha256_file(&out_dir.join(&self.path))? == self.checksum)
    }
}
