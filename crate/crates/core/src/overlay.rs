//! Control-mode overlay: skill/compliance structure, scheduled cost
//! injections, and the resource constraint.
//!
//! A control mode is the base parameter stream plus additional expenditures:
//! each [`Injection`] adds a per-period amount to one named cost line over a
//! period range. The skill side is a binary compliance matrix (skills ×
//! business processes) with a nonnegative cost per cell; [`skill_cost`] sums
//! the costs of the processes a skill covers. [`check_budget`] compares the
//! total injected cost against an inclusive cap.

use alloc::string::String;
use alloc::vec::Vec;

use crate::series::{ParameterSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OverlayError {
    #[error("compliance table has {got} entries, expected {skills} x {processes}")]
    ComplianceShape {
        skills: usize,
        processes: usize,
        got: usize,
    },
    #[error("cost table has {got} entries, expected {skills} x {processes}")]
    CostShape {
        skills: usize,
        processes: usize,
        got: usize,
    },
    #[error(
        "cost for skill \"{skill}\", process \"{process}\" must be finite and nonnegative, got {value}"
    )]
    BadCost {
        skill: String,
        process: String,
        value: f64,
    },
    #[error("duplicate id \"{0}\"")]
    DuplicateId(String),
    #[error("skill index {index} out of range for {n_skills} skills")]
    SkillOutOfRange { index: usize, n_skills: usize },
    #[error("injection for \"{target}\" has start {start} after end {end}")]
    InvertedSchedule {
        target: String,
        start: i64,
        end: i64,
    },
    #[error("injection amount for \"{target}\" must be finite and nonnegative, got {amount}")]
    BadAmount { target: String, amount: f64 },
    #[error("budget cap must be finite and nonnegative, got {0}")]
    BadBudgetCap(f64),
    #[error("injection target \"{0}\" is not a parameter of the series")]
    UnknownTarget(String),
    #[error("process id \"{0}\" is not a parameter of the series")]
    UnknownProcess(String),
    #[error(
        "injection for \"{target}\" covers periods {start}..={end}, series covers {first}..={last}"
    )]
    ScheduleOutOfRange {
        target: String,
        start: i64,
        end: i64,
        first: i64,
        last: i64,
    },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Binary compliance of skills (rows) to business processes (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SkillMatrix {
    skill_ids: Vec<String>,
    process_ids: Vec<String>,
    /// Row-major `skills x processes`.
    compliance: Vec<bool>,
}

impl SkillMatrix {
    pub fn new(
        skill_ids: Vec<String>,
        process_ids: Vec<String>,
        compliance: Vec<bool>,
    ) -> Result<Self, OverlayError> {
        if compliance.len() != skill_ids.len() * process_ids.len() {
            return Err(OverlayError::ComplianceShape {
                skills: skill_ids.len(),
                processes: process_ids.len(),
                got: compliance.len(),
            });
        }
        for (i, id) in skill_ids.iter().enumerate() {
            if skill_ids[..i].contains(id) {
                return Err(OverlayError::DuplicateId(id.clone()));
            }
        }
        for (i, id) in process_ids.iter().enumerate() {
            if process_ids[..i].contains(id) {
                return Err(OverlayError::DuplicateId(id.clone()));
            }
        }
        Ok(Self {
            skill_ids,
            process_ids,
            compliance,
        })
    }

    /// Empty matrix: no skills, no processes.
    pub fn empty() -> Self {
        Self {
            skill_ids: Vec::new(),
            process_ids: Vec::new(),
            compliance: Vec::new(),
        }
    }

    pub fn n_skills(&self) -> usize {
        self.skill_ids.len()
    }

    pub fn n_processes(&self) -> usize {
        self.process_ids.len()
    }

    pub fn skill_ids(&self) -> &[String] {
        &self.skill_ids
    }

    pub fn process_ids(&self) -> &[String] {
        &self.process_ids
    }

    pub fn complies(&self, skill: usize, process: usize) -> bool {
        self.compliance[skill * self.process_ids.len() + process]
    }
}

/// Nonnegative cost of each skill/process cell, thousand rubles.
#[derive(Debug, Clone, PartialEq)]
pub struct CostAssignment {
    /// Row-major `skills x processes`.
    costs: Vec<f64>,
    n_skills: usize,
    n_processes: usize,
}

impl CostAssignment {
    pub fn new(costs: Vec<f64>, matrix: &SkillMatrix) -> Result<Self, OverlayError> {
        let (m, p) = (matrix.n_skills(), matrix.n_processes());
        if costs.len() != m * p {
            return Err(OverlayError::CostShape {
                skills: m,
                processes: p,
                got: costs.len(),
            });
        }
        for (idx, &c) in costs.iter().enumerate() {
            if !(c.is_finite() && c >= 0.0) {
                return Err(OverlayError::BadCost {
                    skill: matrix.skill_ids()[idx / p].clone(),
                    process: matrix.process_ids()[idx % p].clone(),
                    value: c,
                });
            }
        }
        Ok(Self {
            costs,
            n_skills: m,
            n_processes: p,
        })
    }

    pub fn empty() -> Self {
        Self {
            costs: Vec::new(),
            n_skills: 0,
            n_processes: 0,
        }
    }

    pub fn cost(&self, skill: usize, process: usize) -> f64 {
        self.costs[skill * self.n_processes + process]
    }
}

/// One scheduled cost injection: `amount` added to `target` in every period
/// of `start..=end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub target: String,
    pub start: i64,
    pub end: i64,
    pub amount: f64,
}

/// A control-mode plan: skill structure, cost assignment, injection schedule
/// and an optional budget cap (inclusive).
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayPlan {
    skill_matrix: SkillMatrix,
    cost_assignment: CostAssignment,
    schedule: Vec<Injection>,
    budget_cap: Option<f64>,
}

impl OverlayPlan {
    pub fn new(
        skill_matrix: SkillMatrix,
        cost_assignment: CostAssignment,
        schedule: Vec<Injection>,
        budget_cap: Option<f64>,
    ) -> Result<Self, OverlayError> {
        if cost_assignment.n_skills != skill_matrix.n_skills()
            || cost_assignment.n_processes != skill_matrix.n_processes()
        {
            return Err(OverlayError::CostShape {
                skills: skill_matrix.n_skills(),
                processes: skill_matrix.n_processes(),
                got: cost_assignment.costs.len(),
            });
        }
        for inj in &schedule {
            if inj.start > inj.end {
                return Err(OverlayError::InvertedSchedule {
                    target: inj.target.clone(),
                    start: inj.start,
                    end: inj.end,
                });
            }
            if !(inj.amount.is_finite() && inj.amount >= 0.0) {
                return Err(OverlayError::BadAmount {
                    target: inj.target.clone(),
                    amount: inj.amount,
                });
            }
        }
        if let Some(cap) = budget_cap
            && !(cap.is_finite() && cap >= 0.0)
        {
            return Err(OverlayError::BadBudgetCap(cap));
        }
        Ok(Self {
            skill_matrix,
            cost_assignment,
            schedule,
            budget_cap,
        })
    }

    /// No skills, no injections, no cap: applying it is the identity.
    pub fn empty() -> Self {
        Self {
            skill_matrix: SkillMatrix::empty(),
            cost_assignment: CostAssignment::empty(),
            schedule: Vec::new(),
            budget_cap: None,
        }
    }

    pub fn with_budget_cap(mut self, cap: Option<f64>) -> Result<Self, OverlayError> {
        if let Some(c) = cap
            && !(c.is_finite() && c >= 0.0)
        {
            return Err(OverlayError::BadBudgetCap(c));
        }
        self.budget_cap = cap;
        Ok(self)
    }

    pub fn skill_matrix(&self) -> &SkillMatrix {
        &self.skill_matrix
    }

    pub fn cost_assignment(&self) -> &CostAssignment {
        &self.cost_assignment
    }

    pub fn schedule(&self) -> &[Injection] {
        &self.schedule
    }

    pub fn budget_cap(&self) -> Option<f64> {
        self.budget_cap
    }

    /// Total scheduled cost: `Σ amount × period count` over the schedule.
    pub fn injected_total(&self) -> f64 {
        let mut total = 0.0;
        for inj in &self.schedule {
            total += inj.amount * (inj.end - inj.start + 1) as f64;
        }
        total
    }
}

/// Cost of one skill: `Σ_j compliance[i][j] · cost[i][j]`.
pub fn skill_cost(plan: &OverlayPlan, skill: usize) -> Result<f64, OverlayError> {
    let matrix = plan.skill_matrix();
    if skill >= matrix.n_skills() {
        return Err(OverlayError::SkillOutOfRange {
            index: skill,
            n_skills: matrix.n_skills(),
        });
    }
    let mut total = 0.0;
    for process in 0..matrix.n_processes() {
        if matrix.complies(skill, process) {
            total += plan.cost_assignment().cost(skill, process);
        }
    }
    Ok(total)
}

/// Sum of [`skill_cost`] over all skills.
pub fn total_skill_cost(plan: &OverlayPlan) -> f64 {
    let mut total = 0.0;
    for skill in 0..plan.skill_matrix().n_skills() {
        total += skill_cost(plan, skill).expect("skill index in range");
    }
    total
}

/// Applies the plan's injections to a copy of `base`; `base` is untouched.
///
/// Every injection target must be a parameter of the series and every
/// schedule range must lie within the series' period range. The plan's
/// process ids must likewise name series parameters.
pub fn apply_overlay(
    base: &ParameterSeries,
    plan: &OverlayPlan,
) -> Result<ParameterSeries, OverlayError> {
    for process in plan.skill_matrix().process_ids() {
        if base.param_index(process).is_none() {
            return Err(OverlayError::UnknownProcess(process.clone()));
        }
    }
    let first = base.period_origin();
    let last = base.last_period();
    let n = base.n_params();
    let mut values = base.values().to_vec();
    for inj in plan.schedule() {
        let col = base
            .param_index(&inj.target)
            .ok_or_else(|| OverlayError::UnknownTarget(inj.target.clone()))?;
        if inj.start < first || inj.end > last {
            return Err(OverlayError::ScheduleOutOfRange {
                target: inj.target.clone(),
                start: inj.start,
                end: inj.end,
                first,
                last,
            });
        }
        for t in inj.start..=inj.end {
            let row = (t - first) as usize;
            values[row * n + col] += inj.amount;
        }
    }
    Ok(ParameterSeries::new(
        base.param_ids().to_vec(),
        values,
        first,
    )?)
}

/// Budget verdict for a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetStatus {
    Ok,
    /// Injected total exceeds the cap by `excess`.
    Violation {
        excess: f64,
    },
}

/// Result of [`check_budget`]: the injected total against the plan's cap,
/// plus the combined figure with the base stream for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetVerdict {
    pub injected_total: f64,
    pub budget_cap: Option<f64>,
    /// `base_total + injected_total`; informational only, the cap applies to
    /// injected costs alone.
    pub combined_total: f64,
    pub status: BudgetStatus,
}

impl BudgetVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self.status, BudgetStatus::Ok)
    }
}

/// Checks the plan's injected total against its cap (inclusive: a total equal
/// to the cap is within budget). Violation is a verdict, not an error.
pub fn check_budget(plan: &OverlayPlan, base_total: f64) -> BudgetVerdict {
    let injected_total = plan.injected_total();
    let status = match plan.budget_cap() {
        Some(cap) if injected_total > cap => BudgetStatus::Violation {
            excess: injected_total - cap,
        },
        _ => BudgetStatus::Ok,
    };
    BudgetVerdict {
        injected_total,
        budget_cap: plan.budget_cap(),
        combined_total: base_total + injected_total,
        status,
    }
}
