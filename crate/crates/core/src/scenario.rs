//! Synthetic digital-copy generation at desk scale.
//!
//! Real enterprise ledgers are not shippable, so end-to-end runs work on
//! generated scenarios: department blocks of columns coupled through a shared
//! seasonal-plus-AR(1) latent factor, independent noise columns, and a
//! configurable fraction of identically-zero (dormant) columns at the tail.
//!
//! Generation is bit-reproducible everywhere: the stream is the pinned
//! xoshiro256++ generator from [`crate::rng`] (SplitMix64-seeded), normals
//! come from Box–Muller over `libm`, and the draw order is fixed — first one
//! normal per block factor per period (blocks ascending, periods ascending),
//! then per column (ascending): one uniform for the baseline, then per period
//! the column's normals (block columns draw mix then noise, free columns draw
//! noise only, zero columns draw nothing).

use alloc::string::String;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::overlay::{CostAssignment, Injection, OverlayPlan, SkillMatrix};
use crate::rng::Xoshiro256PlusPlus;
use crate::series::ParameterSeries;

/// Cost lines every generated scenario names first (when it has at least
/// nine columns), in this order. The replica plan injects into these.
pub const REPLICA_COST_LINES: [&str; 9] = [
    "wages",
    "business_trips",
    "taxes",
    "personnel_training",
    "office",
    "communications",
    "org_technics",
    "servers",
    "software",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("n_params must be at least 1")]
    NoParams,
    #[error("n_periods must be at least 1")]
    NoPeriods,
    #[error("seasonal_period must be at least 1")]
    BadSeasonalPeriod,
    #[error("sparsity must be in [0, 1), got {0}")]
    BadSparsity(f64),
    #[error("{name} must be finite and nonnegative, got {value}")]
    BadScale { name: &'static str, value: f64 },
    #[error("department block {index} has size 0")]
    EmptyBlock { index: usize },
    #[error("department block {index} coupling must be in [0, 1], got {coupling}")]
    BadCoupling { index: usize, coupling: f64 },
    #[error(
        "infeasible block layout: blocks plus {zero_columns} zero columns need {required} columns, only {available} available"
    )]
    InfeasibleBlockLayout {
        zero_columns: usize,
        required: usize,
        available: usize,
    },
}

/// One department: `size` consecutive columns coupled with strength
/// `coupling` (0 = independent, 1 = the shared factor alone).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepartmentBlock {
    pub size: usize,
    pub coupling: f64,
}

/// Full description of a synthetic scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_params: usize,
    /// Total periods including window warm-up.
    pub n_periods: usize,
    pub seed: u64,
    /// Periods per seasonal cycle.
    pub seasonal_period: usize,
    /// Standard deviation of per-cell measurement noise.
    pub noise_scale: f64,
    /// Fraction of identically-zero columns (rounded to a column count).
    pub sparsity: f64,
    /// Scale of per-column baselines; 0 gives zero baselines.
    pub baseline_scale: f64,
    /// Scale of the structured (factor plus idiosyncratic) component of
    /// block columns.
    pub signal_scale: f64,
    pub department_blocks: Vec<DepartmentBlock>,
}

impl ScenarioConfig {
    /// Desk-scale default: 200 parameters over 63 periods (57 analyzable
    /// instants after a 6-period warm-up), seven department blocks, 5%
    /// dormant columns.
    pub fn desk_default() -> Self {
        let sizes = [28usize, 36, 24, 20, 14, 32, 18];
        let couplings = [0.7, 0.6, 0.65, 0.75, 0.8, 0.6, 0.7];
        Self {
            n_params: 200,
            n_periods: 63,
            seed: 1,
            seasonal_period: 12,
            noise_scale: 5.0,
            sparsity: 0.05,
            baseline_scale: 100.0,
            signal_scale: 10.0,
            department_blocks: sizes
                .iter()
                .zip(couplings)
                .map(|(&size, coupling)| DepartmentBlock { size, coupling })
                .collect(),
        }
    }

    /// Count of identically-zero tail columns this config produces.
    pub fn zero_column_count(&self) -> usize {
        libm::round(self.sparsity * self.n_params as f64) as usize
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n_params == 0 {
            return Err(ScenarioError::NoParams);
        }
        if self.n_periods == 0 {
            return Err(ScenarioError::NoPeriods);
        }
        if self.seasonal_period == 0 {
            return Err(ScenarioError::BadSeasonalPeriod);
        }
        if !(self.sparsity >= 0.0 && self.sparsity < 1.0) {
            return Err(ScenarioError::BadSparsity(self.sparsity));
        }
        for (name, value) in [
            ("noise_scale", self.noise_scale),
            ("baseline_scale", self.baseline_scale),
            ("signal_scale", self.signal_scale),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ScenarioError::BadScale { name, value });
            }
        }
        let mut block_total = 0usize;
        for (index, block) in self.department_blocks.iter().enumerate() {
            if block.size == 0 {
                return Err(ScenarioError::EmptyBlock { index });
            }
            if !(block.coupling >= 0.0 && block.coupling <= 1.0) {
                return Err(ScenarioError::BadCoupling {
                    index,
                    coupling: block.coupling,
                });
            }
            block_total += block.size;
        }
        let zero_columns = self.zero_column_count();
        if block_total + zero_columns > self.n_params {
            return Err(ScenarioError::InfeasibleBlockLayout {
                zero_columns,
                required: block_total + zero_columns,
                available: self.n_params,
            });
        }
        Ok(())
    }
}

/// Amplitude of the seasonal component inside each block factor; the AR(1)
/// part has unit stationary variance.
const SEASONAL_AMPLITUDE: f64 = 0.5;
const AR_COEFF: f64 = 0.5;

/// Generates the scenario's parameter series (period origin 1).
///
/// Column layout: department blocks first (consecutive, in declaration
/// order), then free noise columns, then the identically-zero columns at the
/// tail. Column ids are [`REPLICA_COST_LINES`] for the first nine columns
/// when the table is wide enough, `p0009`-style ids otherwise.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<ParameterSeries, ScenarioError> {
    config.validate()?;
    let n = config.n_params;
    let t_max = config.n_periods;
    let zero_columns = config.zero_column_count();
    let first_zero_col = n - zero_columns;
    let mut rng = Xoshiro256PlusPlus::new(config.seed);

    let param_ids: Vec<String> = (0..n)
        .map(|j| {
            if n >= REPLICA_COST_LINES.len() && j < REPLICA_COST_LINES.len() {
                REPLICA_COST_LINES[j].to_string()
            } else {
                alloc::format!("p{j:04}")
            }
        })
        .collect();

    // Shared latent factor per block: phase-shifted seasonal plus AR(1).
    let n_blocks = config.department_blocks.len();
    let period = config.seasonal_period as f64;
    let innovation_sd = libm::sqrt(1.0 - AR_COEFF * AR_COEFF);
    let mut factors: Vec<Vec<f64>> = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let phase = 2.0 * core::f64::consts::PI * b as f64 / n_blocks as f64;
        let mut factor = Vec::with_capacity(t_max);
        let mut w = 0.0;
        for t in 0..t_max {
            let nu = rng.next_normal();
            w = if t == 0 {
                nu
            } else {
                AR_COEFF * w + innovation_sd * nu
            };
            let seasonal = SEASONAL_AMPLITUDE
                * libm::sin(2.0 * core::f64::consts::PI * t as f64 / period + phase);
            factor.push(seasonal + w);
        }
        factors.push(factor);
    }

    // Map each column to its block, if any.
    let mut block_of: Vec<Option<usize>> = alloc::vec![None; n];
    let mut next_col = 0;
    for (b, block) in config.department_blocks.iter().enumerate() {
        for _ in 0..block.size {
            block_of[next_col] = Some(b);
            next_col += 1;
        }
    }

    let mut values = alloc::vec![0.0; t_max * n];
    for col in 0..n {
        if col >= first_zero_col {
            continue; // dormant line, stays zero, consumes no draws
        }
        let baseline = config.baseline_scale * (0.5 + rng.next_f64());
        match block_of[col] {
            Some(b) => {
                let coupling = config.department_blocks[b].coupling;
                for t in 0..t_max {
                    let mix = coupling * factors[b][t] + (1.0 - coupling) * rng.next_normal();
                    let noise = config.noise_scale * rng.next_normal();
                    values[t * n + col] = baseline + config.signal_scale * mix + noise;
                }
            }
            None => {
                for t in 0..t_max {
                    values[t * n + col] = baseline + config.noise_scale * rng.next_normal();
                }
            }
        }
    }

    Ok(ParameterSeries::new(param_ids, values, 1)
        .expect("generated table satisfies series invariants"))
}

/// The built-in control-mode plan: a security-standard implementation
/// program of five skill groups covering the nine named cost lines, a
/// schedule injecting exactly 9,060 (thousand rubles) starting at period 1,
/// and a budget cap equal to that total.
pub fn replica_plan() -> OverlayPlan {
    let skills = [
        "risk_assessment",
        "risk_treatment_plan",
        "policy_implementation",
        "controls_monitoring",
        "process_monitoring",
    ];
    // One owning skill per cost line; cell cost equals the line's scheduled
    // total, so skill costs and the injected total agree.
    #[rustfmt::skip]
    let compliance: [u8; 45] = [
        // wages trips taxes train office comms tech servers software
        0, 1, 0, 0, 1, 0, 0, 0, 0, // risk_assessment
        0, 0, 0, 1, 0, 0, 0, 0, 0, // risk_treatment_plan
        1, 0, 0, 0, 0, 0, 0, 0, 1, // policy_implementation
        0, 0, 0, 0, 0, 0, 1, 1, 0, // controls_monitoring
        0, 0, 1, 0, 0, 1, 0, 0, 0, // process_monitoring
    ];
    #[rustfmt::skip]
    let costs: [f64; 45] = [
        0.0,    900.0, 0.0,   0.0,    250.0, 0.0,   0.0,   0.0,    0.0,
        0.0,    0.0,   0.0,   2400.0, 0.0,   0.0,   0.0,   0.0,    0.0,
        2205.0, 0.0,   0.0,   0.0,    0.0,   0.0,   0.0,   0.0,    800.0,
        0.0,    0.0,   0.0,   0.0,    0.0,   0.0,   165.0, 1500.0, 0.0,
        0.0,    0.0,   630.0, 0.0,    0.0,   210.0, 0.0,   0.0,    0.0,
    ];
    let matrix = SkillMatrix::new(
        skills.iter().map(|s| s.to_string()).collect(),
        REPLICA_COST_LINES.iter().map(|s| s.to_string()).collect(),
        compliance.iter().map(|&c| c == 1).collect(),
    )
    .expect("replica skill matrix is well-formed");
    let assignment =
        CostAssignment::new(costs.to_vec(), &matrix).expect("replica costs are well-formed");

    // (target, start, end, amount): amounts × period counts sum to 9,060.
    // Wages and taxes are permanent operating costs and span the full
    // 63-period desk scenario; one-off purchases and training taper early.
    let schedule_spec: [(&str, i64, i64, f64); 9] = [
        ("wages", 1, 63, 35.0),
        ("business_trips", 1, 6, 150.0),
        ("taxes", 1, 63, 10.0),
        ("personnel_training", 1, 12, 200.0),
        ("office", 1, 10, 25.0),
        ("communications", 1, 30, 7.0),
        ("org_technics", 1, 15, 11.0),
        ("servers", 1, 3, 500.0),
        ("software", 1, 2, 400.0),
    ];
    let schedule = schedule_spec
        .iter()
        .map(|&(target, start, end, amount)| Injection {
            target: target.to_string(),
            start,
            end,
            amount,
        })
        .collect();

    OverlayPlan::new(matrix, assignment, schedule, Some(9060.0))
        .expect("replica plan is well-formed")
}
