//! CSV tables, metadata sidecars and gnuplot scripts.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{render, RunConfig};
use crate::error::CliError;

/// Column-major numeric table with `name [unit]` headers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn push(&mut self, name: &str, unit: &str, values: Vec<f64>) {
        if let Some(first) = self.columns.first() {
            assert_eq!(first.len(), values.len(), "column '{name}' has the wrong length");
        }
        self.headers.push(format!("{name} [{unit}]"));
        self.columns.push(values);
    }

    /// Adds a value column followed by its standard-error column.
    pub fn push_with_se(&mut self, name: &str, unit: &str, values: Vec<f64>, se: Vec<f64>) {
        self.push(name, unit, values);
        self.push(&format!("{name}_se"), unit, se);
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h.split(" [").next() == Some(name))
            .map(|i| self.columns[i].as_slice())
    }
}

/// Writes `table`; floats use the shortest representation that parses back exactly.
pub fn write_csv(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.headers)?;
    for r in 0..table.n_rows() {
        w.write_record(table.columns.iter().map(|c| c[r].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Table, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let headers: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let mut columns = vec![Vec::new(); headers.len()];
    for record in r.records() {
        for (c, field) in columns.iter_mut().zip(record?.iter()) {
            c.push(field.parse().map_err(|_| {
                CliError::Io(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("bad number '{field}'"),
                ))
            })?);
        }
    }
    Ok(Table { headers, columns })
}

/// Ensemble bookkeeping recorded next to simulated tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleCounts {
    pub requested: usize,
    pub included: usize,
    pub diverged: usize,
}

/// Sidecar that is itself a valid config: `sfg run <file>.meta` regenerates the CSV.
pub fn write_meta(
    path: &Path,
    config: &RunConfig,
    csv_name: &str,
    counts: Option<EnsembleCounts>,
) -> Result<(), CliError> {
    let mut text = format!(
        "# sfg-cli {} (sfg-core {})\n# artifact: {csv_name}\n",
        env!("CARGO_PKG_VERSION"),
        sfg_core::VERSION
    );
    if let Some(c) = counts {
        text.push_str(&format!(
            "# trajectories: {} requested, {} included, {} diverged\n",
            c.requested, c.included, c.diverged
        ));
    }
    text.push_str("# regenerate with: sfg run <this file>\n");
    text.push_str(&render(config));
    fs::write(path, text)?;
    Ok(())
}

/// Gnuplot script plotting every non-error column against the first.
pub fn write_plot(path: &Path, csv_name: &str, title: &str, table: &Table) -> Result<(), CliError> {
    let mut text = format!(
        "set datafile separator ','\nset title '{title}'\nset xlabel '{}'\nset key outside\n",
        table.headers[0]
    );
    let curves: Vec<String> = table
        .headers
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, h)| !h.split(" [").next().unwrap_or("").ends_with("_se"))
        .map(|(i, h)| format!("'{csv_name}' using 1:{} skip 1 with lines title '{h}'", i + 1))
        .collect();
    text.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    fs::write(path, text)?;
    Ok(())
}

/// Files produced for one table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub csv: PathBuf,
    pub meta: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Writes `<stem>.csv`, `<stem>.meta` and optionally `<stem>.gp` into the output directory.
pub fn emit(
    config: &RunConfig,
    stem: &str,
    title: &str,
    table: &Table,
    counts: Option<EnsembleCounts>,
) -> Result<Artifact, CliError> {
    let dir = Path::new(&config.output);
    fs::create_dir_all(dir)?;
    let csv_name = format!("{stem}.csv");
    let csv = dir.join(&csv_name);
    write_csv(&csv, table)?;
    let meta = dir.join(format!("{stem}.meta"));
    write_meta(&meta, config, &csv_name, counts)?;
    let plot = if config.plots {
        let p = dir.join(format!("{stem}.gp"));
        write_plot(&p, &csv_name, title, table)?;
        Some(p)
    } else {
        None
    };
    Ok(Artifact { csv, meta, plot })
}
