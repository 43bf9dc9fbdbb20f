//! Run-directory persistence: config echo, report.json, per-field CSVs.
//!
//! Every float is written with Rust's shortest round-trip formatting, so
//! identical runs produce byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::Grid;

pub struct OutputWriter {
    dir: PathBuf,
    /// CSV file name -> column names, echoed into report.json.
    pub csv_schemas: BTreeMap<String, Vec<String>>,
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::from("nan")
    }
}

impl OutputWriter {
    pub fn new(dir: &Path) -> Result<OutputWriter> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            csv_schemas: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_csv<'a>(
        &mut self,
        name: &str,
        columns: &[&str],
        rows: impl Iterator<Item = Vec<f64>>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(f, "{}", columns.join(","))?;
        for row in rows {
            if row.len() != columns.len() {
                return Err(Error::Config(format!(
                    "csv row width {} != {} columns in {name}",
                    row.len(),
                    columns.len()
                )));
            }
            let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
            writeln!(f, "{}", cells.join(","))?;
        }
        self.csv_schemas.insert(
            name.to_string(),
            columns.iter().map(|c| c.to_string()).collect(),
        );
        Ok(())
    }

    /// Per-cell field CSV: cell center coordinates then the value.
    pub fn write_field_csv(&mut self, name: &str, grid: &Grid, field: &[f64]) -> Result<()> {
        if grid.dim() == 1 {
            self.write_csv(
                name,
                &["x", "value"],
                field
                    .iter()
                    .enumerate()
                    .map(|(i, v)| vec![grid.center(i)[0], *v]),
            )
        } else {
            self.write_csv(
                name,
                &["x", "y", "value"],
                field.iter().enumerate().map(|(i, v)| {
                    let c = grid.center(i);
                    vec![c[0], c[1], *v]
                }),
            )
        }
    }

    pub fn write_json(&self, name: &str, value: &impl serde::Serialize) -> Result<()> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Config(format!("serializing {name}: {e}")))?;
        std::fs::write(&path, text + "\n")?;
        Ok(())
    }
}
