//! CSV reading and writing.
//!
//! All files share one dialect: `#`-prefixed comment lines (the resolved run
//! configuration is echoed there), a mandatory header row, then data rows.
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file and re-emitting it is byte-identical.
//!
//! Input schema: the first `d` columns are coordinates with headers
//! `c1..cd`; an optional trailing `value` column carries data values. The
//! dimension is inferred from the header.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use mprs_core::{McTrace, PointSet};

use crate::error::{CliError, CliResult};

/// A parsed input table: comment lines (without `#`), header names and rows.
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut comments = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| CliError::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            comments.push(rest.trim().to_string());
            continue;
        }
        match &header {
            None => {
                header = Some(trimmed.split(',').map(|s| s.trim().to_string()).collect());
            }
            Some(h) => {
                let fields: Vec<&str> = trimmed.split(',').collect();
                if fields.len() != h.len() {
                    return Err(CliError::input(
                        path,
                        lineno,
                        format!("expected {} fields, found {}", h.len(), fields.len()),
                    ));
                }
                let mut row = Vec::with_capacity(fields.len());
                for (col, field) in fields.iter().enumerate() {
                    let v: f64 = field.trim().parse().map_err(|_| {
                        CliError::input(
                            path,
                            lineno,
                            format!("column '{}': cannot parse '{}'", h[col], field.trim()),
                        )
                    })?;
                    if !v.is_finite() {
                        return Err(CliError::input(
                            path,
                            lineno,
                            format!("column '{}': non-finite value", h[col]),
                        ));
                    }
                    row.push(v);
                }
                rows.push(row);
            }
        }
    }

    let header = header.ok_or_else(|| CliError::input(path, 1, "missing header row"))?;
    Ok(Table {
        comments,
        header,
        rows,
    })
}

/// Interpret a table as a point set. The header must be `c1..cd` with an
/// optional final `value` column; `require_values` demands the value column.
pub fn table_to_points(path: &Path, table: &Table, require_values: bool) -> CliResult<PointSet> {
    let mut dim = 0usize;
    for (i, name) in table.header.iter().enumerate() {
        if *name == format!("c{}", i + 1) {
            dim = i + 1;
        } else {
            break;
        }
    }
    if dim == 0 {
        return Err(CliError::input(
            path,
            1,
            format!(
                "header must start with coordinate columns c1..cd, found '{}'",
                table.header.join(",")
            ),
        ));
    }
    let has_values = table.header.len() > dim && table.header[dim] == "value";
    let expected = if has_values { dim + 1 } else { dim };
    if table.header.len() != expected {
        return Err(CliError::input(
            path,
            1,
            format!("unexpected trailing columns after c{dim}: '{}'", table.header.join(",")),
        ));
    }
    if require_values && !has_values {
        return Err(CliError::input(path, 1, "a 'value' column is required"));
    }

    let n = table.rows.len();
    let mut coords = Vec::with_capacity(n * dim);
    let mut values = has_values.then(|| Vec::with_capacity(n));
    for row in &table.rows {
        coords.extend_from_slice(&row[..dim]);
        if let Some(v) = values.as_mut() {
            v.push(row[dim]);
        }
    }
    PointSet::new(dim, coords, values).map_err(CliError::from)
}

pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    /// Open `path` and write the config echo (as `# key = value` comments)
    /// followed by the header row.
    pub fn create(path: &Path, echo: &[String], header: &str) -> CliResult<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut out = BufWriter::new(file);
        for line in echo {
            writeln!(out, "# {line}").map_err(|e| CliError::io(path, e))?;
        }
        writeln!(out, "{header}").map_err(|e| CliError::io(path, e))?;
        Ok(CsvWriter { out })
    }

    pub fn row(&mut self, fields: &[String]) -> CliResult<()> {
        self.out
            .write_all(fields.join(",").as_bytes())
            .and_then(|_| self.out.write_all(b"\n"))
            .map_err(|e| CliError::Input {
                context: "output".into(),
                message: e.to_string(),
            })
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.out.flush().map_err(|e| CliError::Input {
            context: "output".into(),
            message: e.to_string(),
        })
    }
}

/// Shortest round-trip decimal representation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn coord_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("c{i}")).collect()
}

/// Predictions file: `c1..cd,mean,std`, one row per query in input order.
pub fn write_predictions(
    path: &Path,
    echo: &[String],
    queries: &PointSet,
    mean: &[f64],
    std: &[f64],
) -> CliResult<()> {
    let mut header = coord_header(queries.dim());
    header.push("mean".into());
    header.push("std".into());
    let mut w = CsvWriter::create(path, echo, &header.join(","))?;
    for q in 0..queries.len() {
        let mut fields: Vec<String> = queries.coord(q).iter().map(|&c| fmt_f64(c)).collect();
        fields.push(fmt_f64(mean[q]));
        fields.push(fmt_f64(std[q]));
        w.row(&fields)?;
    }
    w.finish()
}

/// Energy trace file: `sweep,energy,acceptance,a,slope`, slope blank on
/// sweeps without an equilibrium check.
pub fn write_trace(path: &Path, echo: &[String], trace: &McTrace) -> CliResult<()> {
    let mut w = CsvWriter::create(path, echo, "sweep,energy,acceptance,a,slope")?;
    for i in 0..trace.relax_sweeps {
        let slope = trace
            .slope
            .iter()
            .find(|(s, _)| *s == i)
            .map(|(_, k)| fmt_f64(*k))
            .unwrap_or_default();
        w.row(&[
            (i + 1).to_string(),
            fmt_f64(trace.energy[i]),
            fmt_f64(trace.acceptance[i]),
            fmt_f64(trace.a_factor[i]),
            slope,
        ])?;
    }
    w.finish()
}
