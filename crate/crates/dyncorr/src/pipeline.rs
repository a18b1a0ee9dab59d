//! End-to-end batch run: scenario → overlay → two profiles → ledger.

use dyncorr_core::{
    BudgetVerdict, IndicatorError, IndicatorProfile, LedgerError, ModeLedger, Normalization,
    OverlayError, OverlayPlan, ParameterSeries, ProfileOptions, ScenarioConfig, ScenarioError,
    WindowSpec, apply_overlay, check_budget, compare_modes, generate_scenario,
    indicator_profile_with, period_aggregate,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Overlay(#[from] OverlayError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub base_series: ParameterSeries,
    pub control_series: ParameterSeries,
    pub base_profile: IndicatorProfile,
    pub control_profile: IndicatorProfile,
    pub ledger: ModeLedger,
    pub budget: BudgetVerdict,
}

/// Generates the base series, applies the plan to produce the control
/// series, evaluates both profiles under the same window spec, and compares
/// the modes. The budget verdict uses the base stream total as context.
pub fn run_pipeline(
    config: &ScenarioConfig,
    plan: &OverlayPlan,
    spec: &WindowSpec,
    normalization: Normalization,
    options: &ProfileOptions,
) -> Result<PipelineResult, PipelineError> {
    let base_series = generate_scenario(config)?;
    let control_series = apply_overlay(&base_series, plan)?;
    let base_total: f64 = base_series.values().iter().sum();
    let budget = check_budget(plan, base_total);

    let base_profile = indicator_profile_with(&base_series, spec, options)?;
    let control_profile = indicator_profile_with(&control_series, spec, options)?;
    let base_aggregate = period_aggregate(&base_profile, normalization, "basic");
    let control_aggregate = period_aggregate(&control_profile, normalization, "control");
    let ledger = compare_modes(&base_aggregate, &control_aggregate)?;

    Ok(PipelineResult {
        base_series,
        control_series,
        base_profile,
        control_profile,
        ledger,
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyncorr_core::replica_plan;

    #[test]
    fn empty_plan_yields_exactly_zero_deltas() {
        let mut config = ScenarioConfig::desk_default();
        config.n_params = 40;
        config.department_blocks.truncate(1);
        let spec = WindowSpec::new(6).unwrap();
        let result = run_pipeline(
            &config,
            &OverlayPlan::empty(),
            &spec,
            Normalization::Raw,
            &ProfileOptions::default(),
        )
        .unwrap();
        assert_eq!(result.base_series, result.control_series);
        assert!(result.ledger.delta().iter().all(|&d| d == 0.0));
        assert_eq!(result.ledger.total_delta(), 0.0);
        assert!(result.budget.is_ok());
    }

    #[test]
    fn replica_plan_on_desk_scenario() {
        let spec = WindowSpec::new(6).unwrap();
        let result = run_pipeline(
            &ScenarioConfig::desk_default(),
            &replica_plan(),
            &spec,
            Normalization::Raw,
            &ProfileOptions::default(),
        )
        .unwrap();
        assert_eq!(result.ledger.n_rows(), 57);
        assert_eq!(result.budget.injected_total, 9060.0);
        assert!(result.budget.is_ok());
        assert!(
            result.ledger.total_delta() > 0.0,
            "cost injections must raise the indicator, got {}",
            result.ledger.total_delta()
        );
    }
}
