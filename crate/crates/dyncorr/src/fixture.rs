//! Loader for transcribed mode-comparison tables (`t,V_basic,V_control,delta`
//! rows followed by a `Total` row).

use std::fs;
use std::path::Path;

use dyncorr_core::{FixtureRow, FixtureTable};

/// Acceptance bound on any single row's delta discrepancy: one published
/// two-decimal rounding step beyond the flag tolerance.
pub const MAX_ROW_DISCREPANCY: f64 = 0.015;
/// Acceptance bound on the stated-total identity `base + delta = control`.
pub const MAX_IDENTITY_GAP: f64 = 0.005;
/// Acceptance bound on each column sum against its stated total
/// (57 rows, each rounded to two decimals).
pub const MAX_COLUMN_SUM_GAP: f64 = 0.3;

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: expected header \"t,V_basic,V_control,delta\", got \"{got}\"")]
    BadHeader { path: String, got: String },
    #[error("{path}: data row {row}: {detail}")]
    BadRow {
        path: String,
        row: usize,
        detail: String,
    },
    #[error("{path}: rows found after the Total row")]
    DataAfterTotal { path: String },
    #[error("{path}: missing Total row")]
    MissingTotal { path: String },
    #[error("{path}: no data rows before the Total row")]
    NoRows { path: String },
}

/// Reads a fixture CSV.
pub fn load_fixture(path: &Path) -> Result<FixtureTable, FixtureError> {
    let p = || path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| FixtureError::Io { path: p(), source })?;
    let mut lines = text.lines().enumerate();

    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or_default();
    if header != "t,V_basic,V_control,delta" {
        return Err(FixtureError::BadHeader {
            path: p(),
            got: header.to_string(),
        });
    }

    let mut rows = Vec::new();
    let mut totals: Option<(f64, f64, f64)> = None;
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if totals.is_some() {
            return Err(FixtureError::DataAfterTotal { path: p() });
        }
        let bad_row = |detail: String| FixtureError::BadRow {
            path: p(),
            row: idx + 1,
            detail,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(bad_row(format!("{} fields, expected 4", fields.len())));
        }
        let number = |field: &str| -> Result<f64, FixtureError> {
            field
                .parse::<f64>()
                .map_err(|e| bad_row(format!("\"{field}\": {e}")))
        };
        if fields[0] == "Total" {
            totals = Some((number(fields[1])?, number(fields[2])?, number(fields[3])?));
            continue;
        }
        let t: i64 = fields[0]
            .parse()
            .map_err(|e| bad_row(format!("period label \"{}\": {e}", fields[0])))?;
        rows.push(FixtureRow {
            t,
            v_base: number(fields[1])?,
            v_control: number(fields[2])?,
            stated_delta: number(fields[3])?,
        });
    }

    let (stated_total_base, stated_total_control, stated_total_delta) =
        totals.ok_or_else(|| FixtureError::MissingTotal { path: p() })?;
    if rows.is_empty() {
        return Err(FixtureError::NoRows { path: p() });
    }
    Ok(FixtureTable {
        rows,
        stated_total_base,
        stated_total_control,
        stated_total_delta,
    })
}
