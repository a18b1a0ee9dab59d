//! Windowed correlation indicators.
//!
//! For an analysis instant `t` the per-parameter indicator is the row sum of
//! absolute correlation coefficients over the standardized window,
//! `G_i(t) = Σ_j |r_ij(t)|` (diagonal included). A degenerate column has
//! `G_i(t) = 0`; a non-degenerate one has `G_i(t) ≥ 1` from its own diagonal.
//!
//! [`indicator_profile`] evaluates every analyzable instant without ever
//! materializing the `n × n` correlation matrix: each output row is swept in
//! column tiles, and every `G_i` accumulates its terms in ascending `j` order
//! regardless of tile width or worker count, so results are bitwise
//! reproducible across both.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::series::ParameterSeries;
use crate::window::{StandardizedWindow, WindowError, WindowSpec, standardize_window};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndicatorError {
    #[error("column index {index} out of range for {n_params} parameters")]
    ColumnOutOfRange { index: usize, n_params: usize },
    #[error("tile width must be at least 1")]
    BadTileWidth,
    #[error(transparent)]
    Window(#[from] WindowError),
}

/// Correlation coefficient `r_ij(t)` over a standardized window.
///
/// Zero if either column is degenerate (the diagonal of a degenerate column
/// included), exactly 1 on a non-degenerate diagonal, otherwise the scaled
/// z-score dot product clamped to `[-1, 1]`. Symmetric without tolerance:
/// `(i, j)` and `(j, i)` run the identical operation sequence.
pub fn pair_correlation(w: &StandardizedWindow, i: usize, j: usize) -> Result<f64, IndicatorError> {
    check_column(w, i)?;
    check_column(w, j)?;
    Ok(correlation_term(w, i, j))
}

/// Integral indicator `G_i(t) = Σ_j |r_ij(t)|` for one column.
pub fn indicator_row(w: &StandardizedWindow, i: usize) -> Result<f64, IndicatorError> {
    check_column(w, i)?;
    if w.is_degenerate(i) {
        return Ok(0.0);
    }
    let mut acc = [0.0];
    row_sums_tile(
        w.z_raw(),
        w.degenerate_mask(),
        w.k(),
        i,
        &mut acc,
        w.n_params(),
    );
    Ok(acc[0])
}

fn check_column(w: &StandardizedWindow, index: usize) -> Result<(), IndicatorError> {
    if index >= w.n_params() {
        return Err(IndicatorError::ColumnOutOfRange {
            index,
            n_params: w.n_params(),
        });
    }
    Ok(())
}

#[inline]
fn correlation_term(w: &StandardizedWindow, i: usize, j: usize) -> f64 {
    if w.is_degenerate(i) || w.is_degenerate(j) {
        return 0.0;
    }
    if i == j {
        return 1.0;
    }
    let zi = w.z_column(i);
    let zj = w.z_column(j);
    let mut dot = 0.0;
    for l in 0..w.k() {
        dot += zi[l] * zj[l];
    }
    (dot / (w.k() - 1) as f64).clamp(-1.0, 1.0)
}

/// Accumulates `Σ_j |r_ij|` for the columns `i0 .. i0 + chunk.len()` into
/// `chunk`, sweeping `j` in ascending order in tiles of `tile_width`.
///
/// Every addend for a given `i` is produced by the identical operation
/// sequence whatever the tile width, which is what makes profile output
/// bitwise stable across tiling and thread counts. Degenerate `i` rows are
/// left untouched (the caller zeroes them).
fn row_sums_tile(
    z: &[f64],
    degenerate: &[bool],
    k: usize,
    i0: usize,
    chunk: &mut [f64],
    tile_width: usize,
) {
    let n = degenerate.len();
    let km1 = (k - 1) as f64;
    let mut j0 = 0;
    while j0 < n {
        let j1 = (j0 + tile_width).min(n);
        for (di, acc) in chunk.iter_mut().enumerate() {
            let i = i0 + di;
            if degenerate[i] {
                continue;
            }
            let zi = &z[i * k..(i + 1) * k];
            let mut s = *acc;
            for j in j0..j1 {
                if j == i {
                    s += 1.0;
                    continue;
                }
                let zj = &z[j * k..(j + 1) * k];
                let mut dot = 0.0;
                for l in 0..k {
                    dot += zi[l] * zj[l];
                }
                s += (dot / km1).clamp(-1.0, 1.0).abs();
            }
            *acc = s;
        }
        j0 = j1;
    }
}

/// Tuning knobs for [`indicator_profile_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileOptions {
    /// Column tile width for the blocked sweep. Purely a locality/scheduling
    /// knob: output is bitwise identical for every value.
    pub tile_width: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { tile_width: 512 }
    }
}

/// Per-instant, per-parameter integral indicators `G_i(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorProfile {
    param_ids: Vec<String>,
    instants: Vec<i64>,
    n_params: usize,
    /// Row-major: `g[instant_index * n_params + col]`.
    g: Vec<f64>,
    degenerate_counts: Vec<usize>,
}

impl IndicatorProfile {
    pub fn param_ids(&self) -> &[String] {
        &self.param_ids
    }

    /// Analyzable instants, ascending.
    pub fn instants(&self) -> &[i64] {
        &self.instants
    }

    pub fn n_instants(&self) -> usize {
        self.instants.len()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// `G` values for one instant, by instant index.
    pub fn g_row(&self, instant_index: usize) -> &[f64] {
        &self.g[instant_index * self.n_params..(instant_index + 1) * self.n_params]
    }

    pub fn g(&self, instant_index: usize, col: usize) -> f64 {
        self.g[instant_index * self.n_params + col]
    }

    /// Count of degenerate columns per instant.
    pub fn degenerate_counts(&self) -> &[usize] {
        &self.degenerate_counts
    }

    /// `Σ_t G_i(t)` per column, instants ascending.
    pub fn column_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.n_params];
        for ti in 0..self.instants.len() {
            for (col, total) in totals.iter_mut().enumerate() {
                *total += self.g(ti, col);
            }
        }
        totals
    }
}

/// [`indicator_profile_with`] under default options.
pub fn indicator_profile(
    series: &ParameterSeries,
    spec: &WindowSpec,
) -> Result<IndicatorProfile, IndicatorError> {
    indicator_profile_with(series, spec, &ProfileOptions::default())
}

/// Evaluates `G_i(t)` at every analyzable instant.
///
/// Peak additional memory is one standardized window (`O(n·k)`) plus the
/// output table; no `n × n` intermediate exists at any point. With the
/// `parallel` feature, tiles of the output row are swept by the ambient
/// rayon pool; workers write disjoint ranges and each `G_i` is reduced in a
/// fixed order, so tile width and worker count never change a single bit of
/// the result.
pub fn indicator_profile_with(
    series: &ParameterSeries,
    spec: &WindowSpec,
    options: &ProfileOptions,
) -> Result<IndicatorProfile, IndicatorError> {
    if options.tile_width == 0 {
        return Err(IndicatorError::BadTileWidth);
    }
    let k = spec.k();
    if series.n_periods() < k + 1 {
        return Err(WindowError::SeriesTooShort {
            n_periods: series.n_periods(),
            k,
            needed: k + 1,
        }
        .into());
    }
    let n = series.n_params();
    let instants: Vec<i64> = spec.analyzable_instants(series).collect();
    let mut g = vec![0.0; instants.len() * n];
    let mut degenerate_counts = Vec::with_capacity(instants.len());

    for (ti, &t) in instants.iter().enumerate() {
        let w = standardize_window(series, t, spec)?;
        degenerate_counts.push(w.degenerate_count());
        let row = &mut g[ti * n..(ti + 1) * n];
        sweep_row(&w, options.tile_width, row);
    }

    Ok(IndicatorProfile {
        param_ids: series.param_ids().to_vec(),
        instants,
        n_params: n,
        g,
        degenerate_counts,
    })
}

fn sweep_row(w: &StandardizedWindow, tile_width: usize, row: &mut [f64]) {
    let z = w.z_raw();
    let mask = w.degenerate_mask();
    let k = w.k();

    #[cfg(feature = "parallel")]
    row.par_chunks_mut(tile_width)
        .enumerate()
        .for_each(|(ci, chunk)| {
            row_sums_tile(z, mask, k, ci * tile_width, chunk, tile_width);
        });

    #[cfg(not(feature = "parallel"))]
    for (ci, chunk) in row.chunks_mut(tile_width).enumerate() {
        row_sums_tile(z, mask, k, ci * tile_width, chunk, tile_width);
    }
}

/// Grand total `G = Σ_t Σ_i G_i(t)`, instants ascending then columns
/// ascending.
pub fn total_indicator(profile: &IndicatorProfile) -> f64 {
    let mut total = 0.0;
    for ti in 0..profile.n_instants() {
        for col in 0..profile.n_params() {
            total += profile.g(ti, col);
        }
    }
    total
}
