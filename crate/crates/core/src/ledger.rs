//! Per-period mode aggregates, mode comparison, and fixture validation.
//!
//! An indicator profile collapses to one value per instant,
//! `V(t) = Σ_i G_i(t)` (optionally divided by the parameter count), and a run
//! of the system under one configuration is a *mode*. Comparing a base mode
//! against a control mode yields the per-period ledger `ΔV(t)` and its
//! totals — the shape of the published comparison table this crate also
//! validates via [`verify_fixture`].

use alloc::string::String;
use alloc::vec::Vec;

use crate::indicator::IndicatorProfile;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LedgerError {
    #[error("aggregates cover different instant counts: base {base}, control {control}")]
    LengthMismatch { base: usize, control: usize },
    #[error(
        "aggregates diverge at index {index}: base instant {base_t}, control instant {control_t}"
    )]
    InstantMismatch {
        index: usize,
        base_t: i64,
        control_t: i64,
    },
    #[error("normalization mismatch: base {base}, control {control}")]
    NormalizationMismatch {
        base: Normalization,
        control: Normalization,
    },
    #[error("profile has no instants")]
    EmptyProfile,
}

/// How `V(t)` is scaled relative to the raw indicator row sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `V(t) = Σ_i G_i(t)`.
    Raw,
    /// `V(t) = (1/n) Σ_i G_i(t)`.
    Mean,
}

impl core::fmt::Display for Normalization {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Normalization::Raw => "raw",
            Normalization::Mean => "mean",
        })
    }
}

impl core::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(Normalization::Raw),
            "mean" => Ok(Normalization::Mean),
            other => Err(alloc::format!(
                "unknown normalization \"{other}\" (expected \"raw\" or \"mean\")"
            )),
        }
    }
}

/// One mode's per-instant aggregate `V(t)` and its total.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAggregate {
    mode_name: String,
    normalization: Normalization,
    instants: Vec<i64>,
    v: Vec<f64>,
    total: f64,
}

impl ModeAggregate {
    pub fn mode_name(&self) -> &str {
        &self.mode_name
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn instants(&self) -> &[i64] {
        &self.instants
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// `Σ_t V(t)`.
    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Collapses a profile to per-instant aggregates.
pub fn period_aggregate(
    profile: &IndicatorProfile,
    normalization: Normalization,
    mode_name: &str,
) -> ModeAggregate {
    let n = profile.n_params() as f64;
    let mut v = Vec::with_capacity(profile.n_instants());
    for ti in 0..profile.n_instants() {
        let mut row_sum = 0.0;
        for &g in profile.g_row(ti) {
            row_sum += g;
        }
        v.push(match normalization {
            Normalization::Raw => row_sum,
            Normalization::Mean => row_sum / n,
        });
    }
    let mut total = 0.0;
    for &x in &v {
        total += x;
    }
    ModeAggregate {
        mode_name: String::from(mode_name),
        normalization,
        instants: profile.instants().to_vec(),
        v,
        total,
    }
}

/// Aligned comparison of a base mode against a control mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeLedger {
    base_name: String,
    control_name: String,
    normalization: Normalization,
    instants: Vec<i64>,
    v_base: Vec<f64>,
    v_control: Vec<f64>,
    delta: Vec<f64>,
    total_base: f64,
    total_control: f64,
    total_delta: f64,
}

impl ModeLedger {
    pub fn base_name(&self) -> &str {
        &self.base_name
    }

    pub fn control_name(&self) -> &str {
        &self.control_name
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn instants(&self) -> &[i64] {
        &self.instants
    }

    pub fn v_base(&self) -> &[f64] {
        &self.v_base
    }

    pub fn v_control(&self) -> &[f64] {
        &self.v_control
    }

    /// Per-instant `V_control(t) - V_base(t)`.
    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn total_base(&self) -> f64 {
        self.total_base
    }

    pub fn total_control(&self) -> f64 {
        self.total_control
    }

    pub fn total_delta(&self) -> f64 {
        self.total_delta
    }

    pub fn n_rows(&self) -> usize {
        self.instants.len()
    }
}

/// Builds the per-instant delta ledger from two aligned aggregates.
pub fn compare_modes(
    base: &ModeAggregate,
    control: &ModeAggregate,
) -> Result<ModeLedger, LedgerError> {
    if base.normalization != control.normalization {
        return Err(LedgerError::NormalizationMismatch {
            base: base.normalization,
            control: control.normalization,
        });
    }
    if base.instants.len() != control.instants.len() {
        return Err(LedgerError::LengthMismatch {
            base: base.instants.len(),
            control: control.instants.len(),
        });
    }
    for (index, (&bt, &ct)) in base.instants.iter().zip(&control.instants).enumerate() {
        if bt != ct {
            return Err(LedgerError::InstantMismatch {
                index,
                base_t: bt,
                control_t: ct,
            });
        }
    }
    let delta: Vec<f64> = base.v.iter().zip(&control.v).map(|(b, c)| c - b).collect();
    let mut total_delta = 0.0;
    for &d in &delta {
        total_delta += d;
    }
    Ok(ModeLedger {
        base_name: base.mode_name.clone(),
        control_name: control.mode_name.clone(),
        normalization: base.normalization,
        instants: base.instants.clone(),
        v_base: base.v.clone(),
        v_control: control.v.clone(),
        delta,
        total_base: base.total,
        total_control: control.total,
        total_delta,
    })
}

/// Per-row tolerance for fixture deltas: exact agreement at two decimals.
pub const FIXTURE_ROW_TOLERANCE: f64 = 0.005;

/// One transcribed fixture row: stated per-period values of both modes and
/// the stated delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureRow {
    pub t: i64,
    pub v_base: f64,
    pub v_control: f64,
    pub stated_delta: f64,
}

/// A transcribed mode-comparison table with stated totals.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureTable {
    pub rows: Vec<FixtureRow>,
    pub stated_total_base: f64,
    pub stated_total_control: f64,
    pub stated_total_delta: f64,
}

/// A fixture row whose recomputed delta disagrees with the stated one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowDiscrepancy {
    pub t: i64,
    pub stated: f64,
    pub recomputed: f64,
    pub discrepancy: f64,
}

/// Outcome of [`verify_fixture`]: every identity of the table rechecked.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureReport {
    pub row_count: usize,
    /// Rows where `|stated - recomputed| > FIXTURE_ROW_TOLERANCE`.
    pub flagged: Vec<RowDiscrepancy>,
    pub max_row_discrepancy: f64,
    /// `|total_base + total_delta - total_control|` over the stated totals.
    pub total_identity_gap: f64,
    /// `|Σ_t stated v_base(t) - stated total_base|`.
    pub base_sum_gap: f64,
    pub control_sum_gap: f64,
    pub delta_sum_gap: f64,
}

/// Recomputes every delta and total identity of a transcribed fixture.
///
/// Published tables round to two decimals, so rows are flagged only past
/// [`FIXTURE_ROW_TOLERANCE`]; the caller decides what gaps are acceptable.
pub fn verify_fixture(fixture: &FixtureTable) -> FixtureReport {
    let mut flagged = Vec::new();
    let mut max_row_discrepancy = 0.0f64;
    let mut base_sum = 0.0;
    let mut control_sum = 0.0;
    let mut delta_sum = 0.0;
    for row in &fixture.rows {
        let recomputed = row.v_control - row.v_base;
        let discrepancy = (row.stated_delta - recomputed).abs();
        if discrepancy > max_row_discrepancy {
            max_row_discrepancy = discrepancy;
        }
        if discrepancy > FIXTURE_ROW_TOLERANCE {
            flagged.push(RowDiscrepancy {
                t: row.t,
                stated: row.stated_delta,
                recomputed,
                discrepancy,
            });
        }
        base_sum += row.v_base;
        control_sum += row.v_control;
        delta_sum += row.stated_delta;
    }
    FixtureReport {
        row_count: fixture.rows.len(),
        flagged,
        max_row_discrepancy,
        total_identity_gap: (fixture.stated_total_base + fixture.stated_total_delta
            - fixture.stated_total_control)
            .abs(),
        base_sum_gap: (base_sum - fixture.stated_total_base).abs(),
        control_sum_gap: (control_sum - fixture.stated_total_control).abs(),
        delta_sum_gap: (delta_sum - fixture.stated_total_delta).abs(),
    }
}
