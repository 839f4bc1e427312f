//! Artifact writers: CSV with a `#` schema line, JSON sidecar, text summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum WriteError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

/// Column table collected in memory and written in one go.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Artifacts {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, WriteError> {
        fs::create_dir_all(dir).map_err(|source| WriteError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn create(&self, path: &Path) -> Result<BufWriter<File>, WriteError> {
        File::create(path)
            .map(BufWriter::new)
            .map_err(|source| WriteError::Io { path: path.to_path_buf(), source })
    }

    pub fn csv(&mut self, name: &str, schema: &str, seed: u64, table: &Table) -> Result<(), WriteError> {
        let path = self.path(name);
        let io = |source| WriteError::Io { path: path.clone(), source };
        let mut file = self.create(&path)?;
        writeln!(file, "# schema={schema} seed={seed} columns={}", table.columns.len()).map_err(io)?;
        let mut w = csv::Writer::from_writer(file);
        let csv_err = |source| WriteError::Csv { path: path.clone(), source };
        w.write_record(&table.columns).map_err(csv_err)?;
        for row in &table.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), WriteError> {
        let path = self.path(name);
        let mut file = self.create(&path)?;
        serde_json::to_writer_pretty(&mut file, value).map_err(|source| WriteError::Json { path: path.clone(), source })?;
        writeln!(file).and_then(|_| file.flush()).map_err(|source| WriteError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), WriteError> {
        let path = self.path(name);
        fs::write(&path, body).map_err(|source| WriteError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }
}
