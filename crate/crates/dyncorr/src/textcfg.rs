//! Line-oriented `key = value` files for overlay plans and scenario configs.
//!
//! Shared grammar: blank lines and `#` comment lines are skipped; a section
//! starts with `[kind label]`; everything else must be `key = value`. Keys
//! before the first section belong to the top level.
//!
//! Overlay plan files:
//!
//! ```text
//! processes  = wages, servers          # ordered process columns
//! budget_cap = 9060                    # optional, inclusive
//!
//! [skill policy_implementation]
//! compliance = 1, 0                    # one 0/1 per process
//! costs      = 2280, 0                 # one nonnegative cost per process
//!
//! [inject]
//! target = wages
//! start  = 1
//! end    = 57
//! amount = 40
//! ```
//!
//! Scenario config files (`n_params` and `n_periods` required, the rest
//! default to: seed 1, seasonal_period 12, noise_scale 1, sparsity 0,
//! baseline_scale 100, signal_scale 10, no blocks):
//!
//! ```text
//! n_params  = 200
//! n_periods = 63
//! seed      = 1
//!
//! [block economic]
//! size     = 28
//! coupling = 0.7
//! ```

use std::str::FromStr;

use dyncorr_core::{
    CostAssignment, DepartmentBlock, Injection, OverlayError, OverlayPlan, ScenarioConfig,
    SkillMatrix,
};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected \"key = value\", got \"{content}\"")]
    NotKeyValue { line: usize, content: String },
    #[error("line {line}: unknown section \"[{header}]\"")]
    UnknownSection { line: usize, header: String },
    #[error("line {line}: section \"[{kind}]\" requires a label")]
    MissingLabel { line: usize, kind: String },
    #[error("line {line}: unknown key \"{key}\" in {scope}")]
    UnknownKey {
        line: usize,
        key: String,
        scope: String,
    },
    #[error("line {line}: duplicate key \"{key}\"")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value for \"{key}\": {detail}")]
    BadValue {
        line: usize,
        key: String,
        detail: String,
    },
    #[error("missing required key \"{key}\" in {scope}")]
    MissingKey { key: String, scope: String },
    #[error("[skill {skill}]: {key} lists {got} entries, expected {expected} (one per process)")]
    ListLength {
        skill: String,
        key: String,
        expected: usize,
        got: usize,
    },
    #[error("[skill {skill}] declared but the plan has no top-level \"processes\" list")]
    SkillsWithoutProcesses { skill: String },
    #[error(transparent)]
    Overlay(#[from] OverlayError),
    #[error(transparent)]
    Scenario(#[from] dyncorr_core::ScenarioError),
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

struct Section {
    line: usize,
    kind: String,
    label: Option<String>,
    entries: Vec<Entry>,
}

/// Top-level entries plus sections, in file order.
fn tokenize(text: &str) -> Result<(Vec<Entry>, Vec<Section>), ConfigError> {
    let mut top = Vec::new();
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return Err(ConfigError::NotKeyValue {
                    line,
                    content: trimmed.to_string(),
                });
            };
            let mut words = inner.split_whitespace();
            let kind = words.next().unwrap_or("").to_string();
            let label = {
                let rest = words.collect::<Vec<_>>().join(" ");
                if rest.is_empty() { None } else { Some(rest) }
            };
            sections.push(Section {
                line,
                kind,
                label,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(ConfigError::NotKeyValue {
                line,
                content: trimmed.to_string(),
            });
        };
        let entry = Entry {
            line,
            key: key.trim().to_string(),
            value: value.trim().to_string(),
        };
        match sections.last_mut() {
            Some(section) => section.entries.push(entry),
            None => top.push(entry),
        }
    }
    Ok((top, sections))
}

fn parse_value<T: FromStr>(entry: &Entry) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    entry
        .value
        .parse()
        .map_err(|e: T::Err| ConfigError::BadValue {
            line: entry.line,
            key: entry.key.clone(),
            detail: e.to_string(),
        })
}

fn comma_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Parses an overlay plan file.
pub fn parse_plan(text: &str) -> Result<OverlayPlan, ConfigError> {
    let (top, sections) = tokenize(text)?;

    let mut processes: Option<Vec<String>> = None;
    let mut budget_cap: Option<f64> = None;
    for entry in &top {
        match entry.key.as_str() {
            "processes" => {
                if processes.is_some() {
                    return Err(ConfigError::DuplicateKey {
                        line: entry.line,
                        key: entry.key.clone(),
                    });
                }
                processes = Some(comma_list(&entry.value));
            }
            "budget_cap" => {
                if budget_cap.is_some() {
                    return Err(ConfigError::DuplicateKey {
                        line: entry.line,
                        key: entry.key.clone(),
                    });
                }
                budget_cap = Some(parse_value(entry)?);
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: entry.line,
                    key: entry.key.clone(),
                    scope: "the plan top level".to_string(),
                });
            }
        }
    }

    let mut skill_ids: Vec<String> = Vec::new();
    let mut compliance: Vec<bool> = Vec::new();
    let mut costs: Vec<f64> = Vec::new();
    let mut schedule: Vec<Injection> = Vec::new();

    for section in &sections {
        match section.kind.as_str() {
            "skill" => {
                let skill = section.label.clone().ok_or(ConfigError::MissingLabel {
                    line: section.line,
                    kind: "skill".to_string(),
                })?;
                let process_count = match &processes {
                    Some(p) => p.len(),
                    None => {
                        return Err(ConfigError::SkillsWithoutProcesses { skill });
                    }
                };
                let scope = format!("[skill {skill}]");
                let mut row_compliance: Option<Vec<bool>> = None;
                let mut row_costs: Option<Vec<f64>> = None;
                for entry in &section.entries {
                    match entry.key.as_str() {
                        "compliance" => {
                            let mut row = Vec::new();
                            for token in comma_list(&entry.value) {
                                row.push(match token.as_str() {
                                    "0" => false,
                                    "1" => true,
                                    other => {
                                        return Err(ConfigError::BadValue {
                                            line: entry.line,
                                            key: entry.key.clone(),
                                            detail: format!("expected 0 or 1, got \"{other}\""),
                                        });
                                    }
                                });
                            }
                            row_compliance = Some(row);
                        }
                        "costs" => {
                            let mut row = Vec::new();
                            for token in comma_list(&entry.value) {
                                row.push(token.parse::<f64>().map_err(|e| {
                                    ConfigError::BadValue {
                                        line: entry.line,
                                        key: entry.key.clone(),
                                        detail: format!("\"{token}\": {e}"),
                                    }
                                })?);
                            }
                            row_costs = Some(row);
                        }
                        _ => {
                            return Err(ConfigError::UnknownKey {
                                line: entry.line,
                                key: entry.key.clone(),
                                scope,
                            });
                        }
                    }
                }
                let row_compliance = row_compliance.ok_or_else(|| ConfigError::MissingKey {
                    key: "compliance".to_string(),
                    scope: scope.clone(),
                })?;
                let row_costs = row_costs.ok_or_else(|| ConfigError::MissingKey {
                    key: "costs".to_string(),
                    scope: scope.clone(),
                })?;
                for (key, got) in [
                    ("compliance", row_compliance.len()),
                    ("costs", row_costs.len()),
                ] {
                    if got != process_count {
                        return Err(ConfigError::ListLength {
                            skill,
                            key: key.to_string(),
                            expected: process_count,
                            got,
                        });
                    }
                }
                skill_ids.push(skill);
                compliance.extend(row_compliance);
                costs.extend(row_costs);
            }
            "inject" => {
                let scope = "[inject]".to_string();
                let mut target: Option<String> = None;
                let mut start: Option<i64> = None;
                let mut end: Option<i64> = None;
                let mut amount: Option<f64> = None;
                for entry in &section.entries {
                    match entry.key.as_str() {
                        "target" => target = Some(entry.value.clone()),
                        "start" => start = Some(parse_value(entry)?),
                        "end" => end = Some(parse_value(entry)?),
                        "amount" => amount = Some(parse_value(entry)?),
                        _ => {
                            return Err(ConfigError::UnknownKey {
                                line: entry.line,
                                key: entry.key.clone(),
                                scope,
                            });
                        }
                    }
                }
                let missing = |key: &str| ConfigError::MissingKey {
                    key: key.to_string(),
                    scope: scope.clone(),
                };
                schedule.push(Injection {
                    target: target.ok_or_else(|| missing("target"))?,
                    start: start.ok_or_else(|| missing("start"))?,
                    end: end.ok_or_else(|| missing("end"))?,
                    amount: amount.ok_or_else(|| missing("amount"))?,
                });
            }
            other => {
                return Err(ConfigError::UnknownSection {
                    line: section.line,
                    header: other.to_string(),
                });
            }
        }
    }

    let process_ids = processes.unwrap_or_default();
    let matrix = SkillMatrix::new(skill_ids, process_ids, compliance)?;
    let assignment = CostAssignment::new(costs, &matrix)?;
    Ok(OverlayPlan::new(matrix, assignment, schedule, budget_cap)?)
}

/// Parses a scenario config file.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let (top, sections) = tokenize(text)?;

    let mut n_params: Option<usize> = None;
    let mut n_periods: Option<usize> = None;
    let mut seed: u64 = 1;
    let mut seasonal_period: usize = 12;
    let mut noise_scale: f64 = 1.0;
    let mut sparsity: f64 = 0.0;
    let mut baseline_scale: f64 = 100.0;
    let mut signal_scale: f64 = 10.0;

    for entry in &top {
        match entry.key.as_str() {
            "n_params" => n_params = Some(parse_value(entry)?),
            "n_periods" => n_periods = Some(parse_value(entry)?),
            "seed" => seed = parse_value(entry)?,
            "seasonal_period" => seasonal_period = parse_value(entry)?,
            "noise_scale" => noise_scale = parse_value(entry)?,
            "sparsity" => sparsity = parse_value(entry)?,
            "baseline_scale" => baseline_scale = parse_value(entry)?,
            "signal_scale" => signal_scale = parse_value(entry)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: entry.line,
                    key: entry.key.clone(),
                    scope: "the scenario top level".to_string(),
                });
            }
        }
    }

    let mut department_blocks = Vec::new();
    for section in &sections {
        if section.kind != "block" {
            return Err(ConfigError::UnknownSection {
                line: section.line,
                header: section.kind.clone(),
            });
        }
        let scope = match &section.label {
            Some(label) => format!("[block {label}]"),
            None => "[block]".to_string(),
        };
        let mut size: Option<usize> = None;
        let mut coupling: Option<f64> = None;
        for entry in &section.entries {
            match entry.key.as_str() {
                "size" => size = Some(parse_value(entry)?),
                "coupling" => coupling = Some(parse_value(entry)?),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: entry.line,
                        key: entry.key.clone(),
                        scope,
                    });
                }
            }
        }
        department_blocks.push(DepartmentBlock {
            size: size.ok_or_else(|| ConfigError::MissingKey {
                key: "size".to_string(),
                scope: scope.clone(),
            })?,
            coupling: coupling.ok_or_else(|| ConfigError::MissingKey {
                key: "coupling".to_string(),
                scope,
            })?,
        });
    }

    let config = ScenarioConfig {
        n_params: n_params.ok_or_else(|| ConfigError::MissingKey {
            key: "n_params".to_string(),
            scope: "the scenario top level".to_string(),
        })?,
        n_periods: n_periods.ok_or_else(|| ConfigError::MissingKey {
            key: "n_periods".to_string(),
            scope: "the scenario top level".to_string(),
        })?,
        seed,
        seasonal_period,
        noise_scale,
        sparsity,
        baseline_scale,
        signal_scale,
        department_blocks,
    };
    config.validate()?;
    Ok(config)
}

/// Renders a plan in the file grammar; `parse_plan` inverts it.
pub fn plan_to_string(plan: &OverlayPlan) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let matrix = plan.skill_matrix();
    if matrix.n_processes() > 0 {
        let _ = writeln!(out, "processes = {}", matrix.process_ids().join(", "));
    }
    if let Some(cap) = plan.budget_cap() {
        let _ = writeln!(out, "budget_cap = {cap}");
    }
    for (s, skill) in matrix.skill_ids().iter().enumerate() {
        let _ = writeln!(out, "\n[skill {skill}]");
        let compliance: Vec<String> = (0..matrix.n_processes())
            .map(|p| if matrix.complies(s, p) { "1" } else { "0" }.to_string())
            .collect();
        let costs: Vec<String> = (0..matrix.n_processes())
            .map(|p| plan.cost_assignment().cost(s, p).to_string())
            .collect();
        let _ = writeln!(out, "compliance = {}", compliance.join(", "));
        let _ = writeln!(out, "costs = {}", costs.join(", "));
    }
    for inj in plan.schedule() {
        let _ = writeln!(out, "\n[inject]");
        let _ = writeln!(out, "target = {}", inj.target);
        let _ = writeln!(out, "start = {}", inj.start);
        let _ = writeln!(out, "end = {}", inj.end);
        let _ = writeln!(out, "amount = {}", inj.amount);
    }
    out
}
