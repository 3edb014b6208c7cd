//! Wide CSV curve tables and numeric CSV output.

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DMatrix;
use std::io::Write;
use std::path::Path;

/// Response column found in a curve table.
#[derive(Debug, Clone, PartialEq)]
pub enum TableResponse {
    /// `label` column with values −1/+1.
    Labels(Vec<f64>),
    /// `y` column with real values.
    Scalar(Vec<f64>),
}

/// Sampled curves: one row per curve, one column per grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub grid: Vec<f64>,
    pub values: DMatrix<f64>,
    pub response: Option<TableResponse>,
}

impl CurveTable {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }
}

fn parse_cell(text: &str, line: usize, column: usize) -> Result<f64> {
    let value: f64 = text
        .trim()
        .parse()
        .map_err(|_| anyhow!("line {line}, column {column}: `{text}` is not a number"))?;
    if !value.is_finite() {
        bail!("line {line}, column {column}: non-finite value `{text}`");
    }
    Ok(value)
}

/// Reads a wide curve table. The header holds the grid times; an optional
/// final `label` or `y` column holds responses.
pub fn load_curves(path: &Path) -> Result<CurveTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| anyhow!("{}: empty file", path.display()))?
        .with_context(|| format!("{}: unreadable header", path.display()))?;

    let last = header.get(header.len() - 1).unwrap_or("");
    let response_name = match last {
        "label" | "y" => Some(last.to_string()),
        _ if last.parse::<f64>().is_err() => {
            bail!(
                "line 1, column {}: unknown response column `{last}` (expected `label` or `y`)",
                header.len()
            )
        }
        _ => None,
    };
    let ngrid = header.len() - usize::from(response_name.is_some());
    if ngrid == 0 {
        bail!("line 1: no grid columns");
    }
    let grid = (0..ngrid)
        .map(|j| parse_cell(&header[j], 1, j + 1))
        .collect::<Result<Vec<_>>>()?;
    if let Some(j) = grid.windows(2).position(|w| w[1] <= w[0]) {
        bail!(
            "line 1, column {}: grid must be strictly increasing ({} then {})",
            j + 2,
            grid[j],
            grid[j + 1]
        );
    }

    let mut values = Vec::new();
    let mut response = Vec::new();
    for (row, record) in records.enumerate() {
        let line = row + 2;
        let record = record.with_context(|| format!("line {line}: unreadable row"))?;
        if record.len() != header.len() {
            bail!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                record.len()
            );
        }
        for j in 0..ngrid {
            values.push(parse_cell(&record[j], line, j + 1)?);
        }
        if let Some(name) = &response_name {
            let v = parse_cell(&record[ngrid], line, ngrid + 1)?;
            if name == "label" && v != 1.0 && v != -1.0 {
                bail!("line {line}: label must be -1 or +1, found {v}");
            }
            response.push(v);
        }
    }
    let n = values.len() / ngrid;
    if n == 0 {
        bail!("{}: no curves after the header", path.display());
    }
    Ok(CurveTable {
        grid,
        values: DMatrix::from_row_slice(n, ngrid, &values),
        response: response_name.map(|name| match name.as_str() {
            "label" => TableResponse::Labels(response),
            _ => TableResponse::Scalar(response),
        }),
    })
}

/// Formats a value with 17 significant digits, enough for exact round trips.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot write in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Renders a header row and numeric rows as CSV.
pub fn render_csv(
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    writer.into_inner().map_err(|e| anyhow!("csv buffer: {e}"))
}

/// Serializes a curve table in the same wide format [`load_curves`] reads.
pub fn render_curves(table: &CurveTable) -> Result<Vec<u8>> {
    let mut header: Vec<String> = table.grid.iter().map(|&t| format_value(t)).collect();
    let responses = match &table.response {
        Some(TableResponse::Labels(v)) => {
            header.push("label".into());
            Some(v)
        }
        Some(TableResponse::Scalar(v)) => {
            header.push("y".into());
            Some(v)
        }
        None => None,
    };
    let rows = (0..table.len()).map(|i| {
        let mut row: Vec<String> = table
            .values
            .row(i)
            .iter()
            .map(|&v| format_value(v))
            .collect();
        if let Some(r) = responses {
            row.push(format_value(r[i]));
        }
        row
    });
    render_csv(&header, rows)
}
