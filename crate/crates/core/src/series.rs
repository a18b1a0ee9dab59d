//! The digital-copy data model: a dense rectangular table of per-period
//! financial parameter values.
//!
//! Rows are periods on a regular grid labelled from `period_origin`
//! (default 1), columns are named parameters, values are thousand rubles per
//! period. A [`ParameterSeries`] is validated on construction and immutable
//! afterwards, so every consumer can assume a finite, rectangular,
//! uniquely-named table.

use alloc::string::String;
use alloc::vec::Vec;

use crate::rng::mix64;

/// Validation failure while constructing a [`ParameterSeries`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("series must have at least one parameter column")]
    NoParams,
    #[error("series must have at least one period row")]
    NoPeriods,
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value at period {period}, column \"{column}\"")]
    NonFinite { period: i64, column: String },
    #[error("duplicate parameter id \"{0}\"")]
    DuplicateParamId(String),
    #[error("parameter ids must not be empty")]
    EmptyParamId,
    #[error("{got} values do not fill a table with {cols} columns")]
    ShapeMismatch { cols: usize, got: usize },
}

/// Dense table of per-period parameter values, row = period, column = parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSeries {
    param_ids: Vec<String>,
    /// Row-major storage: `values[row * n_params + col]`.
    values: Vec<f64>,
    n_params: usize,
    n_periods: usize,
    period_origin: i64,
}

impl ParameterSeries {
    /// Builds a series from row-major cell storage.
    ///
    /// `values.len()` must be a positive multiple of `param_ids.len()`; the
    /// period count is derived from it. All invariants (finite cells, unique
    /// non-empty ids) are checked here.
    pub fn new(
        param_ids: Vec<String>,
        values: Vec<f64>,
        period_origin: i64,
    ) -> Result<Self, SeriesError> {
        let n_params = param_ids.len();
        if n_params == 0 {
            return Err(SeriesError::NoParams);
        }
        if !values.len().is_multiple_of(n_params) {
            return Err(SeriesError::ShapeMismatch {
                cols: n_params,
                got: values.len(),
            });
        }
        let n_periods = values.len() / n_params;
        if n_periods == 0 {
            return Err(SeriesError::NoPeriods);
        }
        for (i, id) in param_ids.iter().enumerate() {
            if id.is_empty() {
                return Err(SeriesError::EmptyParamId);
            }
            if param_ids[..i].contains(id) {
                return Err(SeriesError::DuplicateParamId(id.clone()));
            }
        }
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(SeriesError::NonFinite {
                    period: period_origin + (idx / n_params) as i64,
                    column: param_ids[idx % n_params].clone(),
                });
            }
        }
        Ok(Self {
            param_ids,
            values,
            n_params,
            n_periods,
            period_origin,
        })
    }

    /// Builds a series from per-period rows, checking each row's width.
    pub fn from_rows(
        param_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        period_origin: i64,
    ) -> Result<Self, SeriesError> {
        let n_params = param_ids.len();
        if n_params == 0 {
            return Err(SeriesError::NoParams);
        }
        let mut values = Vec::with_capacity(rows.len() * n_params);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_params {
                return Err(SeriesError::RaggedRow {
                    row: r,
                    expected: n_params,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(param_ids, values, period_origin)
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn period_origin(&self) -> i64 {
        self.period_origin
    }

    /// Label of the last period row.
    pub fn last_period(&self) -> i64 {
        self.period_origin + self.n_periods as i64 - 1
    }

    pub fn param_ids(&self) -> &[String] {
        &self.param_ids
    }

    /// Column index of a parameter id, if present.
    pub fn param_index(&self, id: &str) -> Option<usize> {
        self.param_ids.iter().position(|p| p == id)
    }

    /// Row-major cell storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// One period row by 0-based row index.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_params..(row + 1) * self.n_params]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_params + col]
    }

    /// 0-based row index of a period label, if the label is in range.
    pub fn row_of_period(&self, period: i64) -> Option<usize> {
        if period < self.period_origin || period > self.last_period() {
            None
        } else {
            Some((period - self.period_origin) as usize)
        }
    }

    /// Counts, extrema and content digest over all cells.
    pub fn diagnose(&self) -> SeriesDiagnostics {
        let mut min_value = f64::INFINITY;
        let mut max_value = f64::NEG_INFINITY;
        for &v in &self.values {
            if v < min_value {
                min_value = v;
            }
            if v > max_value {
                max_value = v;
            }
        }
        let mut zero_columns = 0;
        for col in 0..self.n_params {
            let all_zero = (0..self.n_periods).all(|row| self.value(row, col) == 0.0);
            if all_zero {
                zero_columns += 1;
            }
        }
        SeriesDiagnostics {
            zero_columns,
            min_value,
            max_value,
            checksum: self.checksum(),
        }
    }

    /// Order-independent digest of the logical content: shape, origin,
    /// parameter ids and every cell with its position. Identical for the same
    /// table regardless of the storage format or traversal order it came from.
    pub fn checksum(&self) -> u64 {
        let mut acc = mix64(self.n_params as u64)
            .wrapping_add(mix64((self.n_periods as u64).wrapping_mul(0x9E37)))
            .wrapping_add(mix64(self.period_origin as u64 ^ 0xD1B5_4A32_D192_ED03));
        for (col, id) in self.param_ids.iter().enumerate() {
            // FNV-1a over the id bytes, then mixed with the column position.
            let mut h: u64 = 0xcbf2_9ce4_8422_2325;
            for b in id.as_bytes() {
                h = (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01B3);
            }
            acc = acc.wrapping_add(mix64(h ^ mix64(col as u64)));
        }
        for row in 0..self.n_periods {
            for col in 0..self.n_params {
                let cell =
                    mix64(self.value(row, col).to_bits() ^ mix64((row as u64) << 32 | col as u64));
                acc = acc.wrapping_add(cell);
            }
        }
        acc
    }
}

/// Summary produced by [`ParameterSeries::diagnose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesDiagnostics {
    /// Count of columns that are identically zero.
    pub zero_columns: usize,
    pub min_value: f64,
    pub max_value: f64,
    /// Order-independent content digest, see [`ParameterSeries::checksum`].
    pub checksum: u64,
}
