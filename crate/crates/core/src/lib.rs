//! Sliding-window correlation analytics for a "digital copy" of an enterprise:
//! a dense table of per-period financial parameter values.
//!
//! The crate evaluates the state of such a system through windowed correlation
//! structure. For every analysis instant `t` it standardizes the `k` preceding
//! periods of each parameter, forms pairwise Pearson correlations `r_ij(t)`,
//! and reduces them to per-parameter integral indicators
//! `G_i(t) = Σ_j |r_ij(t)|`. Indicator profiles are aggregated into per-period
//! mode values `V(t)`, and two operating modes (a base stream and a control
//! stream with scheduled cost injections) are compared as a per-period ledger
//! of `ΔV(t)` with totals.
//!
//! The heavy path, [`indicator_profile`], is computed in column tiles and
//! never materializes the full `n × n` correlation matrix. Output is bitwise
//! independent of tile width and worker count.
//!
//! This crate is `no_std`-compatible (with `alloc`). File formats, config
//! parsing and the CLI live in the companion `dyncorr` crate.
//!
//! Feature flags:
//! - `std` (default): standard library support.
//! - `parallel` (default, implies `std`): rayon-parallel tile sweep inside
//!   [`indicator_profile`].

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod indicator;
pub mod ledger;
pub mod overlay;
pub mod rng;
pub mod scenario;
pub mod series;
pub mod window;

pub use indicator::{
    IndicatorError, IndicatorProfile, ProfileOptions, indicator_profile, indicator_profile_with,
    indicator_row, pair_correlation, total_indicator,
};
pub use ledger::{
    FIXTURE_ROW_TOLERANCE, FixtureReport, FixtureRow, FixtureTable, LedgerError, ModeAggregate,
    ModeLedger, Normalization, RowDiscrepancy, compare_modes, period_aggregate, verify_fixture,
};
pub use overlay::{
    BudgetStatus, BudgetVerdict, CostAssignment, Injection, OverlayError, OverlayPlan, SkillMatrix,
    apply_overlay, check_budget, skill_cost, total_skill_cost,
};
pub use scenario::{
    DepartmentBlock, ScenarioConfig, ScenarioError, generate_scenario, replica_plan,
};
pub use series::{ParameterSeries, SeriesDiagnostics, SeriesError};
pub use window::{StandardizedWindow, WindowCursor, WindowError, WindowSpec, standardize_window};
