//! CSV ingestion, chronological splitting, min-max normalization, and
//! sliding-window construction.
//!
//! CSV orientation is rows = timestamps, columns = variables; a transpose
//! option covers the opposite layout. A non-numeric first line is treated as
//! a header, and a leading non-numeric column as timestamps (parsed, unused
//! by the math). Files ending in `.gz` are decompressed transparently.
//! Missing or malformed cells are hard errors carrying their location.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MtsWindow;

/// L timestamps by N variables, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub values: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub names: Option<Vec<String>>,
    pub timestamps: Option<Vec<String>>,
}

impl SeriesTable {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::shape("series table buffer does not match (L, N)"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::non_finite("series table"));
        }
        Ok(SeriesTable {
            values,
            rows,
            cols,
            names: None,
            timestamps: None,
        })
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    fn slice_rows(&self, start: usize, len: usize) -> SeriesTable {
        SeriesTable {
            values: self.values[start * self.cols..(start + len) * self.cols].to_vec(),
            rows: len,
            cols: self.cols,
            names: self.names.clone(),
            timestamps: self
                .timestamps
                .as_ref()
                .map(|ts| ts[start..start + len].to_vec()),
        }
    }

    pub fn transposed(&self) -> SeriesTable {
        let mut values = vec![0.0; self.values.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                values[c * self.rows + r] = self.values[r * self.cols + c];
            }
        }
        SeriesTable {
            values,
            rows: self.cols,
            cols: self.rows,
            names: None,
            timestamps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Input file holds variables in rows and timestamps in columns.
    pub transpose: bool,
}

fn open_reader(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), &e))?;
    if path.extension().map(|e| e == "gz").unwrap_or(false) {
        let gz = flate2::read::GzDecoder::new(file);
        Ok(Box::new(BufReader::new(gz)))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Load a numeric CSV as a series table.
pub fn load_series(path: impl AsRef<Path>, options: LoadOptions) -> Result<SeriesTable> {
    let path = path.as_ref();
    let reader = open_reader(path)?;
    let display = path.display().to_string();

    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(display.clone(), &e))?;
        if line.trim().is_empty() {
            continue;
        }
        lines.push((idx + 1, line));
    }
    if lines.is_empty() {
        return Err(Error::Parse {
            path: display,
            row: 0,
            column: 0,
            message: "empty file".to_string(),
        });
    }

    let split_cells =
        |line: &str| -> Vec<String> { line.split(',').map(|c| c.trim().to_string()).collect() };
    let numeric =
        |cell: &str| -> Option<f64> { cell.parse::<f64>().ok().filter(|v| v.is_finite()) };

    // Header: first line whose cells are not all numeric.
    let first_cells = split_cells(&lines[0].1);
    let has_header = !first_cells.iter().all(|c| numeric(c).is_some());
    let mut names = has_header.then(|| first_cells.clone());
    let data_lines = if has_header { &lines[1..] } else { &lines[..] };
    if data_lines.is_empty() {
        return Err(Error::Parse {
            path: display,
            row: lines[0].0,
            column: 0,
            message: "no data rows after header".to_string(),
        });
    }

    // Timestamp column: first cell of the first data row is non-numeric while
    // the rest parse.
    let probe = split_cells(&data_lines[0].1);
    let has_timestamps = probe.len() > 1
        && numeric(&probe[0]).is_none()
        && probe[1..].iter().all(|c| numeric(c).is_some());
    if has_timestamps {
        if let Some(n) = names.as_mut() {
            n.remove(0);
        }
    }

    let expected_cells = probe.len();
    let n_cols = expected_cells - usize::from(has_timestamps);
    if n_cols == 0 {
        return Err(Error::Parse {
            path: display,
            row: data_lines[0].0,
            column: 1,
            message: "no numeric columns".to_string(),
        });
    }

    let mut values = Vec::with_capacity(data_lines.len() * n_cols);
    let mut timestamps = has_timestamps.then(Vec::new);
    for (line_no, line) in data_lines {
        let cells = split_cells(line);
        if cells.len() != expected_cells {
            return Err(Error::Parse {
                path: display,
                row: *line_no,
                column: cells.len().min(expected_cells) + 1,
                message: format!("expected {expected_cells} cells, found {}", cells.len()),
            });
        }
        for (col_idx, cell) in cells.iter().enumerate() {
            if has_timestamps && col_idx == 0 {
                timestamps.as_mut().unwrap().push(cell.clone());
                continue;
            }
            match numeric(cell) {
                Some(v) => values.push(v),
                None => {
                    return Err(Error::Parse {
                        path: display,
                        row: *line_no,
                        column: col_idx + 1,
                        message: format!("cannot parse '{cell}' as a number"),
                    })
                }
            }
        }
    }

    let mut table = SeriesTable::new(data_lines.len(), n_cols, values)?;
    table.names = names;
    table.timestamps = timestamps;
    if options.transpose {
        table = table.transposed();
    }
    Ok(table)
}

/// Chronological split ratios; must sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let spec = SplitSpec { train, val, test };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("train", self.train),
            ("val", self.val),
            ("test", self.test),
        ] {
            if !(0.0..=1.0).contains(&r) || !r.is_finite() {
                return Err(Error::invalid(format!("{name} ratio must be in [0, 1]")));
            }
        }
        if ((self.train + self.val + self.test) - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("split ratios must sum to 1"));
        }
        Ok(())
    }
}

/// Contiguous prefix/middle/suffix split with floor(r * L) rows for train and
/// val and the remainder for test. Length validation happens at windowing.
pub fn split_chrono(
    table: &SeriesTable,
    spec: &SplitSpec,
) -> Result<(SeriesTable, SeriesTable, SeriesTable)> {
    spec.validate()?;
    let l = table.rows;
    let n_train = (spec.train * l as f64).floor() as usize;
    let n_val = (spec.val * l as f64).floor() as usize;
    let n_test = l - n_train - n_val;
    Ok((
        table.slice_rows(0, n_train),
        table.slice_rows(n_train, n_val),
        table.slice_rows(n_train + n_val, n_test),
    ))
}

/// Per-variable min and max, to be fitted on the training split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxStats {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

pub fn minmax_fit(train: &SeriesTable) -> Result<MinMaxStats> {
    if train.rows == 0 {
        return Err(Error::invalid("cannot fit normalization on an empty split"));
    }
    let mut mins = vec![f64::INFINITY; train.cols];
    let mut maxs = vec![f64::NEG_INFINITY; train.cols];
    for r in 0..train.rows {
        for c in 0..train.cols {
            let v = train.at(r, c);
            mins[c] = mins[c].min(v);
            maxs[c] = maxs[c].max(v);
        }
    }
    Ok(MinMaxStats { mins, maxs })
}

impl MinMaxStats {
    /// x -> (x - min) / (max - min); constant variables map to 0.
    pub fn scale(&self, col: usize, v: f64) -> f64 {
        let range = self.maxs[col] - self.mins[col];
        if range == 0.0 {
            0.0
        } else {
            (v - self.mins[col]) / range
        }
    }

    /// Exact inverse of `scale`; constant variables invert to the constant.
    pub fn unscale(&self, col: usize, v: f64) -> f64 {
        let range = self.maxs[col] - self.mins[col];
        if range == 0.0 {
            self.mins[col]
        } else {
            v * range + self.mins[col]
        }
    }
}

pub fn minmax_apply(table: &SeriesTable, stats: &MinMaxStats) -> Result<SeriesTable> {
    if stats.mins.len() != table.cols {
        return Err(Error::shape(
            "normalization stats do not match column count",
        ));
    }
    let mut out = table.clone();
    for r in 0..out.rows {
        for c in 0..out.cols {
            out.values[r * out.cols + c] = stats.scale(c, table.at(r, c));
        }
    }
    Ok(out)
}

pub fn minmax_invert(table: &SeriesTable, stats: &MinMaxStats) -> Result<SeriesTable> {
    if stats.mins.len() != table.cols {
        return Err(Error::shape(
            "normalization stats do not match column count",
        ));
    }
    let mut out = table.clone();
    for r in 0..out.rows {
        for c in 0..out.cols {
            out.values[r * out.cols + c] = stats.unscale(c, table.at(r, c));
        }
    }
    Ok(out)
}

/// Sliding lookback/horizon windows over one split. Window i covers input
/// rows [i*stride, i*stride + T) and target rows [i*stride + T, i*stride + T + tau),
/// both transposed to variable-major layout.
pub fn sliding_windows(
    table: &SeriesTable,
    lookback: usize,
    horizon: usize,
    stride: usize,
) -> Result<Vec<MtsWindow>> {
    if lookback == 0 || horizon == 0 || stride == 0 {
        return Err(Error::invalid("lookback, horizon, and stride must be >= 1"));
    }
    let needed = lookback + horizon;
    if table.rows < needed {
        return Err(Error::SplitTooShort {
            context: format!(
                "{} rows cannot fit T + tau = {} observations",
                table.rows, needed
            ),
        });
    }
    let count = (table.rows - needed) / stride + 1;
    let n = table.cols;
    let mut windows = Vec::with_capacity(count);
    for i in 0..count {
        let start = i * stride;
        let mut input = vec![0.0; n * lookback];
        for v in 0..n {
            for s in 0..lookback {
                input[v * lookback + s] = table.at(start + s, v);
            }
        }
        let mut target = vec![0.0; n * horizon];
        for v in 0..n {
            for h in 0..horizon {
                target[v * horizon + h] = table.at(start + lookback + h, v);
            }
        }
        windows.push(MtsWindow::new(
            input,
            target,
            n,
            lookback,
            horizon,
            start + lookback - 1,
        )?);
    }
    Ok(windows)
}

/// Entry of a dataset manifest (structured text, one entry per dataset).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub path: String,
    pub n_vars: usize,
    pub granularity: String,
}

#[derive(Debug, Clone, Deserialize)]
struct ManifestFile {
    dataset: Vec<DatasetManifest>,
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<DatasetManifest>> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path.display().to_string(), &e))?;
    let parsed: ManifestFile =
        toml::from_str(&text).map_err(|e| Error::config("dataset", e.to_string()))?;
    Ok(parsed.dataset)
}
