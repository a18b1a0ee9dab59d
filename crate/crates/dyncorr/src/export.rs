//! CSV exports: indicator profiles, per-instant plot data, and mode ledgers.
//!
//! All floats are rendered as shortest round-trip decimals, so re-reading an
//! export recovers the exact values and identical runs produce byte-identical
//! files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use dyncorr_core::{IndicatorProfile, ModeLedger, Normalization, period_aggregate};

fn to_io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// Profile table: header `t,G_<id>,...`, one row per instant, and a `Total`
/// summary row of per-column sums.
pub fn write_profile_csv(profile: &IndicatorProfile, path: &Path) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = Vec::with_capacity(profile.n_params() + 1);
    header.push("t".to_string());
    for id in profile.param_ids() {
        header.push(format!("G_{id}"));
    }
    writer.write_record(&header).map_err(to_io)?;

    let mut record = Vec::with_capacity(profile.n_params() + 1);
    for (ti, t) in profile.instants().iter().enumerate() {
        record.clear();
        record.push(t.to_string());
        for &g in profile.g_row(ti) {
            record.push(g.to_string());
        }
        writer.write_record(&record).map_err(to_io)?;
    }
    record.clear();
    record.push("Total".to_string());
    for total in profile.column_totals() {
        record.push(total.to_string());
    }
    writer.write_record(&record).map_err(to_io)?;
    writer.into_inner().map_err(io::Error::other)?.flush()
}

/// Plot data for indicator-dynamics rendering:
/// `t,V_raw,V_mean,degenerate_count` per instant.
pub fn write_plot_csv(profile: &IndicatorProfile, path: &Path) -> io::Result<()> {
    let raw = period_aggregate(profile, Normalization::Raw, "plot");
    let mean = period_aggregate(profile, Normalization::Mean, "plot");
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    writer
        .write_record(["t", "V_raw", "V_mean", "degenerate_count"])
        .map_err(to_io)?;
    for (ti, t) in profile.instants().iter().enumerate() {
        writer
            .write_record([
                t.to_string(),
                raw.v()[ti].to_string(),
                mean.v()[ti].to_string(),
                profile.degenerate_counts()[ti].to_string(),
            ])
            .map_err(to_io)?;
    }
    writer.into_inner().map_err(io::Error::other)?.flush()
}

/// Ledger table: header `t,V_basic,V_control,delta`, one row per instant in
/// ascending t, and a `Total` row.
pub fn write_ledger_csv(ledger: &ModeLedger, path: &Path) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    writer
        .write_record(["t", "V_basic", "V_control", "delta"])
        .map_err(to_io)?;
    for (i, t) in ledger.instants().iter().enumerate() {
        writer
            .write_record([
                t.to_string(),
                ledger.v_base()[i].to_string(),
                ledger.v_control()[i].to_string(),
                ledger.delta()[i].to_string(),
            ])
            .map_err(to_io)?;
    }
    writer
        .write_record([
            "Total".to_string(),
            ledger.total_base().to_string(),
            ledger.total_control().to_string(),
            ledger.total_delta().to_string(),
        ])
        .map_err(to_io)?;
    writer.into_inner().map_err(io::Error::other)?.flush()
}
