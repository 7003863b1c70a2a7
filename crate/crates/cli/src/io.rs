//! CSV in and out. Output files start with one `#` comment line.

use crate::error::{CliError, CliResult};
use confsense_core::DataTable;
use std::fs::File;
use std::io::Write;
use std::path::Path;

/// Provenance written as the first line of every output file.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn line(&self) -> String {
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        format!(
            "# confsense {} | command: {} | seed: {} | rng: {}",
            env!("CARGO_PKG_VERSION"),
            self.command,
            seed,
            confsense_core::scm::RNG_ALGORITHM
        )
    }
}

/// Numeric CSV with a header row; `#` lines are skipped.
pub fn read_table(path: &Path) -> CliResult<DataTable> {
    let mut rdr = open(path)?;
    let names: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut columns = vec![Vec::new(); names.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: row {}, column `{}`: `{field}` is not a number",
                    path.display(),
                    row + 1,
                    names[j]
                ))
            })?;
            columns[j].push(v);
        }
    }
    Ok(DataTable::new(names, columns)?)
}

/// Raw string records (header first) for tables with label columns.
pub fn read_records(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = open(path)?;
    let header = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec?.iter().map(|f| f.trim().to_string()).collect());
    }
    Ok((header, rows))
}

fn open(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file))
}

pub fn write_csv(
    path: &Path,
    prov: &Provenance,
    header: &[&str],
    rows: &[Vec<String>],
) -> CliResult<()> {
    let mut file =
        File::create(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    writeln!(file, "{}", prov.line())?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table(path: &Path, prov: &Provenance, data: &DataTable) -> CliResult<()> {
    let header: Vec<&str> = data.names().iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = (0..data.n_rows())
        .map(|i| data.columns().iter().map(|c| num(c[i])).collect())
        .collect();
    write_csv(path, prov, &header, &rows)
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}
