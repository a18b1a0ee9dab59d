//! Plan/scenario file grammar: shipped files parse to the built-in values,
//! and malformed input is reported with line context.

use std::path::Path;

use dyncorr::textcfg::{ConfigError, parse_plan, parse_scenario, plan_to_string};
use dyncorr_core::{ScenarioConfig, replica_plan, skill_cost, total_skill_cost};

fn repo_data(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn shipped_replica_plan_matches_builtin() {
    let plan = parse_plan(&repo_data("replica.plan")).unwrap();
    assert_eq!(plan, replica_plan());
    assert_eq!(plan.injected_total(), 9060.0);
    assert_eq!(total_skill_cost(&plan), 9060.0);
}

#[test]
fn shipped_desk_scenario_matches_builtin() {
    let config = parse_scenario(&repo_data("desk_scale.scenario")).unwrap();
    assert_eq!(config, ScenarioConfig::desk_default());
}

#[test]
fn plan_round_trips_through_renderer() {
    let plan = replica_plan();
    let rendered = plan_to_string(&plan);
    let back = parse_plan(&rendered).unwrap();
    assert_eq!(back, plan);
}

#[test]
fn minimal_plan_files() {
    let empty = parse_plan("").unwrap();
    assert_eq!(empty.schedule().len(), 0);
    assert_eq!(empty.injected_total(), 0.0);
    assert_eq!(empty.budget_cap(), None);

    let schedule_only = parse_plan(
        "
        # no skills at all
        [inject]
        target = wages
        start = 2
        end = 4
        amount = 12.5
        ",
    )
    .unwrap();
    assert_eq!(schedule_only.schedule().len(), 1);
    assert_eq!(schedule_only.injected_total(), 37.5);
}

#[test]
fn plan_skill_costs_from_file() {
    let plan = parse_plan(
        "
        processes = a, b, c
        [skill s]
        compliance = 1, 0, 1
        costs = 10, 20, 30
        ",
    )
    .unwrap();
    assert_eq!(skill_cost(&plan, 0).unwrap(), 40.0);
}

#[test]
fn plan_grammar_errors_carry_context() {
    let err = parse_plan("processes = a\nnot a key value line\n").unwrap_err();
    assert!(
        matches!(err, ConfigError::NotKeyValue { line: 2, .. }),
        "{err:?}"
    );

    let err = parse_plan("[skill s]\ncompliance = 1\ncosts = 1\n").unwrap_err();
    assert!(
        matches!(err, ConfigError::SkillsWithoutProcesses { .. }),
        "{err:?}"
    );

    let err =
        parse_plan("processes = a, b\n[skill s]\ncompliance = 1\ncosts = 1, 2\n").unwrap_err();
    match err {
        ConfigError::ListLength { expected, got, .. } => {
            assert_eq!((expected, got), (2, 1));
        }
        other => panic!("unexpected {other:?}"),
    }

    let err = parse_plan("processes = a\n[skill s]\ncompliance = 2\ncosts = 1\n").unwrap_err();
    assert!(
        matches!(err, ConfigError::BadValue { line: 3, .. }),
        "{err:?}"
    );

    let err = parse_plan("[inject]\ntarget = a\nstart = 1\namount = 5\n").unwrap_err();
    assert!(
        err.to_string().contains("missing required key \"end\""),
        "{err}"
    );

    let err = parse_plan("[inject]\ntarget = a\nstart = 5\nend = 2\namount = 5\n").unwrap_err();
    assert!(matches!(err, ConfigError::Overlay(_)), "{err:?}");

    let err = parse_plan("mystery = 1\n").unwrap_err();
    assert!(
        matches!(err, ConfigError::UnknownKey { line: 1, .. }),
        "{err:?}"
    );

    let err = parse_plan("[subsidy x]\n").unwrap_err();
    assert!(matches!(err, ConfigError::UnknownSection { .. }), "{err:?}");
}

#[test]
fn scenario_defaults_and_requirements() {
    let minimal = parse_scenario("n_params = 10\nn_periods = 20\n").unwrap();
    assert_eq!(minimal.n_params, 10);
    assert_eq!(minimal.n_periods, 20);
    assert_eq!(minimal.seed, 1);
    assert_eq!(minimal.seasonal_period, 12);
    assert_eq!(minimal.sparsity, 0.0);
    assert!(minimal.department_blocks.is_empty());

    let err = parse_scenario("n_params = 10\n").unwrap_err();
    assert!(
        err.to_string()
            .contains("missing required key \"n_periods\""),
        "{err}"
    );

    let err =
        parse_scenario("n_params = 4\nn_periods = 5\n[block big]\nsize = 9\ncoupling = 0.5\n")
            .unwrap_err();
    assert!(matches!(err, ConfigError::Scenario(_)), "{err:?}");

    let err = parse_scenario("n_params = ten\nn_periods = 5\n").unwrap_err();
    assert!(
        matches!(err, ConfigError::BadValue { line: 1, .. }),
        "{err:?}"
    );
}
