//! Sliding analysis windows and per-column standardization.
//!
//! The window convention is fixed: the analysis instant `t` looks at the `k`
//! *previous* periods `t-k .. t-1`; the current period is excluded. Window
//! rows are stored oldest first. Each column is standardized to window mean 0
//! and unit sample variance (denominator `k - 1`), so the scaled dot product
//! of two z-score columns is their Pearson correlation over the window.
//!
//! Columns whose window standard deviation is (relatively) zero are
//! *degenerate*: their z-scores are zeroed and flagged, and they contribute
//! zero to every correlation downstream. Dormant cost lines stay visible as
//! zero indicators instead of poisoning the arithmetic with 0/0.

use alloc::vec;
use alloc::vec::Vec;

use crate::series::ParameterSeries;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WindowError {
    #[error("window length k must be at least 2, got {0}")]
    WindowTooShort(usize),
    #[error("degenerate_epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("instant {t} out of range: full windows exist for t in [{min_t}, {max_t}]")]
    OutOfRange { t: i64, min_t: i64, max_t: i64 },
    #[error("series has {n_periods} periods, need at least {needed} for window length {k}")]
    SeriesTooShort {
        n_periods: usize,
        k: usize,
        needed: usize,
    },
    #[error("cannot advance past the last analyzable instant {last}")]
    PastEnd { last: i64 },
}

/// Window length and degeneracy threshold. The row convention ("previous k",
/// current period excluded) is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    k: usize,
    degenerate_epsilon: f64,
}

impl WindowSpec {
    pub const DEFAULT_DEGENERATE_EPSILON: f64 = 1e-12;

    pub fn new(k: usize) -> Result<Self, WindowError> {
        Self::with_epsilon(k, Self::DEFAULT_DEGENERATE_EPSILON)
    }

    pub fn with_epsilon(k: usize, degenerate_epsilon: f64) -> Result<Self, WindowError> {
        if k < 2 {
            return Err(WindowError::WindowTooShort(k));
        }
        if !(degenerate_epsilon > 0.0 && degenerate_epsilon.is_finite()) {
            return Err(WindowError::BadEpsilon(degenerate_epsilon));
        }
        Ok(Self {
            k,
            degenerate_epsilon,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degenerate_epsilon(&self) -> f64 {
        self.degenerate_epsilon
    }

    /// First instant with a full window of previous periods.
    pub fn first_instant(&self, series: &ParameterSeries) -> i64 {
        series.period_origin() + self.k as i64
    }

    /// Last analyzable instant: the last period that is itself a row of the
    /// series. (A window also exists for the instant one past the last row;
    /// [`standardize_window`] accepts it, profiles stop here.)
    pub fn last_instant(&self, series: &ParameterSeries) -> i64 {
        series.last_period()
    }

    /// Instants covered by an indicator profile over `series`.
    pub fn analyzable_instants(&self, series: &ParameterSeries) -> impl Iterator<Item = i64> {
        self.first_instant(series)..=self.last_instant(series)
    }

    fn check_instant(&self, series: &ParameterSeries, t: i64) -> Result<(), WindowError> {
        let min_t = self.first_instant(series);
        let max_t = series.last_period() + 1;
        if t < min_t || t > max_t {
            return Err(WindowError::OutOfRange { t, min_t, max_t });
        }
        Ok(())
    }
}

/// Z-scores of one analysis window, column-major (`k` values per column,
/// oldest period first), with a per-column degeneracy mask.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedWindow {
    t: i64,
    k: usize,
    n_params: usize,
    z: Vec<f64>,
    degenerate: Vec<bool>,
}

impl StandardizedWindow {
    /// Instant this window was built for.
    pub fn t(&self) -> i64 {
        self.t
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Z-score column, `k` entries, oldest period first.
    pub fn z_column(&self, col: usize) -> &[f64] {
        &self.z[col * self.k..(col + 1) * self.k]
    }

    pub fn is_degenerate(&self, col: usize) -> bool {
        self.degenerate[col]
    }

    pub fn degenerate_mask(&self) -> &[bool] {
        &self.degenerate
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }

    /// Full column-major z storage, for the tiled sweep.
    pub(crate) fn z_raw(&self) -> &[f64] {
        &self.z
    }
}

/// Mean and sample standard deviation of one window column, plus the
/// degeneracy verdict under `spec`'s relative threshold.
#[inline]
fn column_stats(window: &[f64], stride: usize, k: usize, spec: &WindowSpec) -> (f64, f64, bool) {
    let mut sum = 0.0;
    for l in 0..k {
        sum += window[l * stride];
    }
    let mean = sum / k as f64;
    let mut ssd = 0.0;
    for l in 0..k {
        let d = window[l * stride] - mean;
        ssd += d * d;
    }
    let std = libm::sqrt(ssd / (k - 1) as f64);
    let scale = if mean.abs() > 1.0 { mean.abs() } else { 1.0 };
    let degenerate = std <= spec.degenerate_epsilon() * scale;
    (mean, std, degenerate)
}

/// Standardizes the `k` periods preceding instant `t`.
///
/// Accepted instants run from `period_origin + k` through `last_period + 1`
/// (the window never includes the instant's own row, so the instant just past
/// the table still has a full window).
pub fn standardize_window(
    series: &ParameterSeries,
    t: i64,
    spec: &WindowSpec,
) -> Result<StandardizedWindow, WindowError> {
    spec.check_instant(series, t)?;
    let k = spec.k();
    let n = series.n_params();
    let base_row = (t - spec.k() as i64 - series.period_origin()) as usize;
    let values = series.values();

    let mut z = vec![0.0; n * k];
    let mut degenerate = vec![false; n];
    for col in 0..n {
        let col_start = base_row * n + col;
        let window = &values[col_start..];
        let (mean, std, is_degenerate) = column_stats(window, n, k, spec);
        degenerate[col] = is_degenerate;
        if !is_degenerate {
            let zc = &mut z[col * k..(col + 1) * k];
            for (l, slot) in zc.iter_mut().enumerate() {
                *slot = (window[l * n] - mean) / std;
            }
        }
    }
    Ok(StandardizedWindow {
        t,
        k,
        n_params: n,
        z,
        degenerate,
    })
}

/// Kahan–Babuška (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Incremental window state: advancing to the next instant costs `O(n)` sum
/// maintenance instead of a fresh `O(n·k)` pass over the window.
///
/// The standardized window it yields agrees with [`standardize_window`]
/// within 1e-10 elementwise (compensated sums, not bit-exactness).
#[derive(Debug, Clone)]
pub struct WindowCursor<'a> {
    series: &'a ParameterSeries,
    spec: WindowSpec,
    t: i64,
    sum: Vec<Kahan>,
    sum_sq: Vec<Kahan>,
}

impl<'a> WindowCursor<'a> {
    /// Initializes the cursor at an analyzable instant `t`.
    pub fn new(series: &'a ParameterSeries, spec: WindowSpec, t: i64) -> Result<Self, WindowError> {
        let k = spec.k();
        if series.n_periods() < k + 1 {
            return Err(WindowError::SeriesTooShort {
                n_periods: series.n_periods(),
                k,
                needed: k + 1,
            });
        }
        let min_t = spec.first_instant(series);
        let max_t = spec.last_instant(series);
        if t < min_t || t > max_t {
            return Err(WindowError::OutOfRange { t, min_t, max_t });
        }
        let n = series.n_params();
        let mut sum = vec![Kahan::default(); n];
        let mut sum_sq = vec![Kahan::default(); n];
        let base_row = (t - k as i64 - series.period_origin()) as usize;
        for l in 0..k {
            let row = series.row(base_row + l);
            for (col, &x) in row.iter().enumerate() {
                sum[col].add(x);
                sum_sq[col].add(x * x);
            }
        }
        Ok(Self {
            series,
            spec,
            t,
            sum,
            sum_sq,
        })
    }

    /// Current instant.
    pub fn t(&self) -> i64 {
        self.t
    }

    /// Slides the window one period forward: drops row `t - k`, takes row `t`.
    pub fn advance(&mut self) -> Result<(), WindowError> {
        let last = self.spec.last_instant(self.series);
        if self.t + 1 > last {
            return Err(WindowError::PastEnd { last });
        }
        let origin = self.series.period_origin();
        let out_row = self
            .series
            .row((self.t - self.spec.k() as i64 - origin) as usize);
        let in_row = self.series.row((self.t - origin) as usize);
        for col in 0..self.series.n_params() {
            let old = out_row[col];
            let new = in_row[col];
            self.sum[col].add(-old);
            self.sum[col].add(new);
            self.sum_sq[col].add(-(old * old));
            self.sum_sq[col].add(new * new);
        }
        self.t += 1;
        Ok(())
    }

    /// Standardized window at the current instant, built from the maintained
    /// sums.
    pub fn window(&self) -> StandardizedWindow {
        let k = self.spec.k();
        let n = self.series.n_params();
        let kf = k as f64;
        let base_row = (self.t - k as i64 - self.series.period_origin()) as usize;
        let values = self.series.values();

        let mut z = vec![0.0; n * k];
        let mut degenerate = vec![false; n];
        for col in 0..n {
            let mean = self.sum[col].value() / kf;
            // Guard the subtraction: rounding can push it fractionally negative.
            let ssd = (self.sum_sq[col].value() - kf * mean * mean).max(0.0);
            let std = libm::sqrt(ssd / (k - 1) as f64);
            let scale = if mean.abs() > 1.0 { mean.abs() } else { 1.0 };
            let is_degenerate = std <= self.spec.degenerate_epsilon() * scale;
            degenerate[col] = is_degenerate;
            if !is_degenerate {
                let zc = &mut z[col * k..(col + 1) * k];
                for (l, slot) in zc.iter_mut().enumerate() {
                    *slot = (values[(base_row + l) * n + col] - mean) / std;
                }
            }
        }
        StandardizedWindow {
            t: self.t,
            k,
            n_params: n,
            z,
            degenerate,
        }
    }
}
