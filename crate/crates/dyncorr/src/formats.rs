//! Series file formats: CSV and the `MDSC` columnar-binary layout.
//!
//! CSV: UTF-8, comma-separated, header `t,<id>,...`, one row per period with
//! consecutive integer labels ascending from the origin, cells rendered as
//! shortest round-trip decimals. CSV round-trips are value-exact.
//!
//! Columnar-binary (`.mdsc`): magic `MDSC`, format version `u32 = 1`, then
//! `n_params` and `n_periods` as `u64`, then each parameter id as a
//! `u64` byte length plus UTF-8 bytes, then the cells column-major as IEEE-754
//! `f64`. All multi-byte values little-endian. Binary round-trips are
//! bit-exact. The layout carries no period origin; loading assumes origin 1.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use dyncorr_core::{ParameterSeries, SeriesError};

pub const BINARY_MAGIC: [u8; 4] = *b"MDSC";
pub const BINARY_VERSION: u32 = 1;
/// Parameter ids longer than this are rejected when reading binary files.
const MAX_ID_BYTES: u64 = 1 << 20;

/// On-disk representation of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    Csv,
    ColumnarBinary,
}

impl SeriesFormat {
    /// Infers the format from a file extension: `.csv` or `.mdsc`.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Some(SeriesFormat::Csv),
            Some("mdsc") => Some(SeriesFormat::ColumnarBinary),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: malformed header: {detail}")]
    MalformedHeader { path: String, detail: String },
    #[error("{path}: row for period {period} has {got} values, expected {expected}")]
    RaggedRow {
        path: String,
        period: i64,
        expected: usize,
        got: usize,
    },
    #[error("{path}: non-numeric value \"{token}\" at period {period}, column \"{column}\"")]
    BadCell {
        path: String,
        period: i64,
        column: String,
        token: String,
    },
    #[error("{path}: non-finite value at period {period}, column \"{column}\"")]
    NonFiniteCell {
        path: String,
        period: i64,
        column: String,
    },
    #[error("{path}: period label \"{got}\" at data row {row}, expected {expected}")]
    BadPeriodLabel {
        path: String,
        row: usize,
        got: String,
        expected: String,
    },
    #[error("{path}: not a columnar-binary series file (bad magic)")]
    BadMagic { path: String },
    #[error("{path}: unsupported format version {version}")]
    UnsupportedVersion { path: String, version: u32 },
    #[error("{path}: malformed binary layout: {detail}")]
    BadLayout { path: String, detail: String },
    #[error("{path}: {source}")]
    Series {
        path: String,
        #[source]
        source: SeriesError,
    },
}

impl FormatError {
    fn io(path: &Path, source: io::Error) -> Self {
        FormatError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Reads a series file in the given format.
pub fn load_series(path: &Path, format: SeriesFormat) -> Result<ParameterSeries, FormatError> {
    match format {
        SeriesFormat::Csv => load_csv(path),
        SeriesFormat::ColumnarBinary => load_binary(path),
    }
}

/// Writes a series file in the given format.
pub fn write_series(
    series: &ParameterSeries,
    path: &Path,
    format: SeriesFormat,
) -> Result<(), FormatError> {
    match format {
        SeriesFormat::Csv => write_csv(series, path),
        SeriesFormat::ColumnarBinary => write_binary(series, path),
    }
}

fn load_csv(path: &Path) -> Result<ParameterSeries, FormatError> {
    let p = || path.display().to_string();
    let file = File::open(path).map_err(|e| FormatError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let headers = reader
        .headers()
        .map_err(|e| FormatError::MalformedHeader {
            path: p(),
            detail: e.to_string(),
        })?
        .clone();
    let mut fields = headers.iter();
    match fields.next() {
        Some("t") => {}
        other => {
            return Err(FormatError::MalformedHeader {
                path: p(),
                detail: format!(
                    "first column must be \"t\", got {}",
                    other.map_or_else(|| "an empty header".to_string(), |h| format!("\"{h}\""))
                ),
            });
        }
    }
    let param_ids: Vec<String> = fields.map(str::to_string).collect();
    if param_ids.is_empty() {
        return Err(FormatError::MalformedHeader {
            path: p(),
            detail: "no parameter columns after \"t\"".to_string(),
        });
    }
    let n = param_ids.len();

    let mut values: Vec<f64> = Vec::new();
    let mut origin: Option<i64> = None;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FormatError::io(path, io::Error::other(e)))?;
        let label_field = record.get(0).unwrap_or("").to_string();
        let expected_label = origin.map(|o| o + row_idx as i64);
        let period: i64 = match label_field.trim().parse() {
            Ok(t) => t,
            Err(_) => {
                return Err(FormatError::BadPeriodLabel {
                    path: p(),
                    row: row_idx + 1,
                    got: label_field,
                    expected: expected_label
                        .map_or_else(|| "an integer".to_string(), |e| e.to_string()),
                });
            }
        };
        match (origin, expected_label) {
            (None, _) => origin = Some(period),
            (Some(_), Some(expected)) if period != expected => {
                return Err(FormatError::BadPeriodLabel {
                    path: p(),
                    row: row_idx + 1,
                    got: label_field,
                    expected: expected.to_string(),
                });
            }
            _ => {}
        }
        if record.len() != n + 1 {
            return Err(FormatError::RaggedRow {
                path: p(),
                period,
                expected: n,
                got: record.len().saturating_sub(1),
            });
        }
        for (col, token) in record.iter().skip(1).enumerate() {
            let v: f64 = token.trim().parse().map_err(|_| FormatError::BadCell {
                path: p(),
                period,
                column: param_ids[col].clone(),
                token: token.to_string(),
            })?;
            if !v.is_finite() {
                return Err(FormatError::NonFiniteCell {
                    path: p(),
                    period,
                    column: param_ids[col].clone(),
                });
            }
            values.push(v);
        }
    }

    ParameterSeries::new(param_ids, values, origin.unwrap_or(1))
        .map_err(|source| FormatError::Series { path: p(), source })
}

fn write_csv(series: &ParameterSeries, path: &Path) -> Result<(), FormatError> {
    let file = File::create(path).map_err(|e| FormatError::io(path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let as_io = |e: csv::Error| FormatError::io(path, io::Error::other(e));

    let mut header = Vec::with_capacity(series.n_params() + 1);
    header.push("t".to_string());
    header.extend(series.param_ids().iter().cloned());
    writer.write_record(&header).map_err(as_io)?;

    let mut record = Vec::with_capacity(series.n_params() + 1);
    for row in 0..series.n_periods() {
        record.clear();
        record.push((series.period_origin() + row as i64).to_string());
        for &v in series.row(row) {
            record.push(v.to_string());
        }
        writer.write_record(&record).map_err(as_io)?;
    }
    writer
        .into_inner()
        .map_err(|e| FormatError::io(path, io::Error::other(e)))?
        .flush()
        .map_err(|e| FormatError::io(path, e))?;
    Ok(())
}

fn load_binary(path: &Path) -> Result<ParameterSeries, FormatError> {
    let p = || path.display().to_string();
    let file = File::open(path).map_err(|e| FormatError::io(path, e))?;
    let mut reader = BufReader::new(file);

    let mut magic = [0u8; 4];
    reader
        .read_exact(&mut magic)
        .map_err(|e| FormatError::io(path, e))?;
    if magic != BINARY_MAGIC {
        return Err(FormatError::BadMagic { path: p() });
    }
    let version = read_u32(&mut reader, path)?;
    if version != BINARY_VERSION {
        return Err(FormatError::UnsupportedVersion { path: p(), version });
    }
    let n_params = read_u64(&mut reader, path)?;
    let n_periods = read_u64(&mut reader, path)?;
    let cells = n_params
        .checked_mul(n_periods)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| FormatError::BadLayout {
            path: p(),
            detail: format!("{n_params} x {n_periods} cells overflow"),
        })?;
    let n = usize::try_from(n_params).map_err(|_| FormatError::BadLayout {
        path: p(),
        detail: format!("{n_params} parameters do not fit in memory"),
    })?;
    let t_max = usize::try_from(n_periods).map_err(|_| FormatError::BadLayout {
        path: p(),
        detail: format!("{n_periods} periods do not fit in memory"),
    })?;

    let mut param_ids = Vec::with_capacity(n);
    for idx in 0..n {
        let len = read_u64(&mut reader, path)?;
        if len > MAX_ID_BYTES {
            return Err(FormatError::BadLayout {
                path: p(),
                detail: format!("parameter id {idx} declares {len} bytes"),
            });
        }
        let mut buf = vec![0u8; len as usize];
        reader
            .read_exact(&mut buf)
            .map_err(|e| FormatError::io(path, e))?;
        let id = String::from_utf8(buf).map_err(|_| FormatError::BadLayout {
            path: p(),
            detail: format!("parameter id {idx} is not valid UTF-8"),
        })?;
        param_ids.push(id);
    }

    // Cells arrive column-major; memory layout is row-major.
    let mut values = vec![0.0f64; cells];
    let mut buf = [0u8; 8];
    for col in 0..n {
        for row in 0..t_max {
            reader
                .read_exact(&mut buf)
                .map_err(|e| FormatError::io(path, e))?;
            values[row * n + col] = f64::from_le_bytes(buf);
        }
    }
    let mut trailing = [0u8; 1];
    match reader.read(&mut trailing) {
        Ok(0) => {}
        Ok(_) => {
            return Err(FormatError::BadLayout {
                path: p(),
                detail: "trailing bytes after cell data".to_string(),
            });
        }
        Err(e) => return Err(FormatError::io(path, e)),
    }

    ParameterSeries::new(param_ids, values, 1)
        .map_err(|source| FormatError::Series { path: p(), source })
}

fn write_binary(series: &ParameterSeries, path: &Path) -> Result<(), FormatError> {
    let file = File::create(path).map_err(|e| FormatError::io(path, e))?;
    let mut writer = BufWriter::new(file);
    let as_err = |e: io::Error| FormatError::io(path, e);

    writer.write_all(&BINARY_MAGIC).map_err(as_err)?;
    writer
        .write_all(&BINARY_VERSION.to_le_bytes())
        .map_err(as_err)?;
    writer
        .write_all(&(series.n_params() as u64).to_le_bytes())
        .map_err(as_err)?;
    writer
        .write_all(&(series.n_periods() as u64).to_le_bytes())
        .map_err(as_err)?;
    for id in series.param_ids() {
        writer
            .write_all(&(id.len() as u64).to_le_bytes())
            .map_err(as_err)?;
        writer.write_all(id.as_bytes()).map_err(as_err)?;
    }
    for col in 0..series.n_params() {
        for row in 0..series.n_periods() {
            writer
                .write_all(&series.value(row, col).to_le_bytes())
                .map_err(as_err)?;
        }
    }
    writer.flush().map_err(as_err)
}

fn read_u32(reader: &mut impl Read, path: &Path) -> Result<u32, FormatError> {
    let mut buf = [0u8; 4];
    reader
        .read_exact(&mut buf)
        .map_err(|e| FormatError::io(path, e))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(reader: &mut impl Read, path: &Path) -> Result<u64, FormatError> {
    let mut buf = [0u8; 8];
    reader
        .read_exact(&mut buf)
        .map_err(|e| FormatError::io(path, e))?;
    Ok(u64::from_le_bytes(buf))
}
