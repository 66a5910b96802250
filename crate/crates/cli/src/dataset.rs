//! CSV ingestion with named column roles.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use doublesel::numerics::{RealMatrix, RealVector};

use crate::error::{CliError, CliResult};

pub const MIN_COMPLETE_ROWS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Controls {
    Named(Vec<String>),
    /// Every column not used as outcome or treatment.
    AllOthers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roles {
    pub outcome: Option<String>,
    pub treatment: Option<String>,
    pub controls: Controls,
    pub amelioration: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Header of the source file, in order.
    pub column_names: Vec<String>,
    pub outcome: Option<String>,
    pub treatment: Option<String>,
    pub controls: Vec<String>,
    pub amelioration: Vec<String>,
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub y: Option<RealVector>,
    pub d: Option<RealVector>,
    /// `rows x controls`, columns in `controls` order.
    pub x: RealMatrix,
}

impl Dataset {
    pub fn rows(&self) -> usize {
        self.x.nrows()
    }
}

/// Splits a comma-separated flag value into trimmed, nonempty names.
pub fn parse_name_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn resolve_roles(header: &[String], roles: &Roles) -> CliResult<(Vec<String>, Vec<usize>)> {
    let mut seen = HashSet::new();
    for name in header {
        if !seen.insert(name.as_str()) {
            return Err(CliError::Data(format!("duplicate column name '{name}' in header")));
        }
    }
    let position = |name: &str| -> CliResult<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Argument(format!("column '{name}' not found in header")))
    };
    let fixed: Vec<&String> = roles.outcome.iter().chain(roles.treatment.iter()).collect();
    if let (Some(o), Some(t)) = (&roles.outcome, &roles.treatment) {
        if o == t {
            return Err(CliError::Argument(format!("column '{o}' is both outcome and treatment")));
        }
    }
    let controls: Vec<String> = match &roles.controls {
        Controls::Named(names) => names.clone(),
        Controls::AllOthers => header.iter().filter(|h| !fixed.contains(h)).cloned().collect(),
    };
    if controls.is_empty() {
        return Err(CliError::Argument("no control columns given".into()));
    }
    let mut unique = HashSet::new();
    for c in &controls {
        if fixed.contains(&c) {
            return Err(CliError::Argument(format!("column '{c}' cannot be both a control and outcome/treatment")));
        }
        if !unique.insert(c) {
            return Err(CliError::Argument(format!("control '{c}' listed twice")));
        }
    }
    for a in &roles.amelioration {
        if !controls.contains(a) {
            return Err(CliError::Argument(format!("amelioration column '{a}' is not among the controls")));
        }
    }
    let mut used = Vec::new();
    for name in fixed.iter().map(|s| s.as_str()).chain(controls.iter().map(|s| s.as_str())) {
        used.push(position(name)?);
    }
    Ok((controls, used))
}

/// Reads an RFC-4180 CSV with a header row. Rows with an empty cell in any
/// used column are dropped and counted; any other non-numeric cell in a
/// used column is an error.
pub fn ingest_csv(path: &Path, roles: &Roles) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("cannot read '{}': {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("cannot read header of '{}': {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let (controls, used) = resolve_roles(&header, roles)?;

    let mut values: Vec<f64> = Vec::new();
    let (mut rows_read, mut rows_dropped) = (0, 0);
    let mut row = vec![0.0; used.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("malformed CSV: {e}")))?;
        rows_read += 1;
        // Line numbers count the header as line 1.
        let line = i + 2;
        let mut missing = false;
        for (k, &col) in used.iter().enumerate() {
            let cell = record.get(col).unwrap_or("").trim();
            if cell.is_empty() {
                missing = true;
                continue;
            }
            row[k] = match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => {
                    return Err(CliError::Data(format!(
                        "row {line}, column '{}': cannot parse '{cell}' as a finite number",
                        header[col]
                    )))
                }
            };
        }
        if missing {
            rows_dropped += 1;
        } else {
            values.extend_from_slice(&row);
        }
    }
    let n = values.len() / used.len();
    if n < MIN_COMPLETE_ROWS {
        return Err(CliError::Data(format!(
            "need at least {MIN_COMPLETE_ROWS} complete rows, found {n} ({rows_dropped} dropped for missing cells)"
        )));
    }
    let all = RealMatrix::from_row_slice(n, used.len(), &values);
    let mut offset = 0;
    let mut take = |present: bool| {
        present.then(|| {
            let v = all.column(offset).into_owned();
            offset += 1;
            v
        })
    };
    let y = take(roles.outcome.is_some());
    let d = take(roles.treatment.is_some());
    let x = all.columns(offset, controls.len()).into_owned();
    Ok(Dataset {
        column_names: header,
        outcome: roles.outcome.clone(),
        treatment: roles.treatment.clone(),
        amelioration: roles.amelioration.clone(),
        controls,
        rows_read,
        rows_dropped,
        y,
        d,
        x,
    })
}

/// Writes the used columns back out as CSV (outcome, treatment, controls).
/// Numbers use the shortest representation that parses back to the same value.
pub fn write_csv(dataset: &Dataset, path: &Path) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(File::create(path)?);
    let mut header: Vec<&str> = Vec::new();
    header.extend(dataset.outcome.as_deref());
    header.extend(dataset.treatment.as_deref());
    header.extend(dataset.controls.iter().map(|s| s.as_str()));
    out.write_record(&header).map_err(|e| CliError::Data(e.to_string()))?;
    for i in 0..dataset.rows() {
        let mut record: Vec<String> = Vec::new();
        record.extend(dataset.y.as_ref().map(|y| y[i].to_string()));
        record.extend(dataset.d.as_ref().map(|d| d[i].to_string()));
        record.extend(dataset.x.row(i).iter().map(|v| v.to_string()));
        out.write_record(&record).map_err(|e| CliError::Data(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a plain numeric table with the given header.
pub fn write_numeric_csv(path: &Path, header: &[String], rows: &RealMatrix) -> CliResult<()> {
    let mut file = File::create(path)?;
    writeln!(file, "{}", header.join(","))?;
    for row in rows.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(file, "{}", cells.join(","))?;
    }
    Ok(())
}
