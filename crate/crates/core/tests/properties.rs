//! Cross-module properties of the indicator engine: oracle equivalence,
//! invariances, determinism, and overlay composition.

use dyncorr_core::rng::Xoshiro256PlusPlus;
use dyncorr_core::{
    OverlayPlan, ParameterSeries, ProfileOptions, WindowCursor, WindowSpec, apply_overlay,
    indicator_profile_with, indicator_row, pair_correlation, standardize_window,
};
use proptest::prelude::*;

fn random_series(seed: u64, n_params: usize, n_periods: usize) -> ParameterSeries {
    let mut rng = Xoshiro256PlusPlus::new(seed);
    let ids = (0..n_params).map(|i| format!("p{i}")).collect();
    let values = (0..n_params * n_periods)
        .map(|_| 50.0 + 20.0 * rng.next_normal())
        .collect();
    ParameterSeries::new(ids, values, 1).unwrap()
}

/// Independent reference: direct Pearson arithmetic on raw window values,
/// full double loop over column pairs, no standardization, no tiling.
fn naive_profile(series: &ParameterSeries, k: usize, epsilon: f64) -> Vec<Vec<f64>> {
    let n = series.n_params();
    let origin = series.period_origin();
    let mut out = Vec::new();
    for t in (origin + k as i64)..=series.last_period() {
        let base_row = (t - k as i64 - origin) as usize;
        let col_window =
            |col: usize| -> Vec<f64> { (0..k).map(|l| series.value(base_row + l, col)).collect() };
        let mut means = vec![0.0; n];
        let mut ssds = vec![0.0; n];
        let mut degenerate = vec![false; n];
        for col in 0..n {
            let w = col_window(col);
            let mean = w.iter().sum::<f64>() / k as f64;
            let ssd: f64 = w.iter().map(|x| (x - mean) * (x - mean)).sum();
            let std = (ssd / (k - 1) as f64).sqrt();
            means[col] = mean;
            ssds[col] = ssd;
            degenerate[col] = std <= epsilon * mean.abs().max(1.0);
        }
        let mut g_row = vec![0.0; n];
        for i in 0..n {
            if degenerate[i] {
                continue;
            }
            let wi = col_window(i);
            let mut g = 0.0;
            for j in 0..n {
                if degenerate[j] {
                    continue;
                }
                if i == j {
                    g += 1.0;
                    continue;
                }
                let wj = col_window(j);
                let cov: f64 = (0..k)
                    .map(|l| (wi[l] - means[i]) * (wj[l] - means[j]))
                    .sum();
                let r = cov / (ssds[i] * ssds[j]).sqrt();
                g += r.clamp(-1.0, 1.0).abs();
            }
            g_row[i] = g;
        }
        out.push(g_row);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocked_profile_matches_naive_oracle(
        seed in 0u64..1_000_000,
        n in 1usize..14,
        extra_periods in 1usize..12,
        k in prop_oneof![Just(2usize), Just(3), Just(6)],
    ) {
        let series = random_series(seed, n, k + extra_periods);
        let spec = WindowSpec::new(k).unwrap();
        let profile = indicator_profile_with(&series, &spec, &ProfileOptions { tile_width: 4 }).unwrap();
        let oracle = naive_profile(&series, k, spec.degenerate_epsilon());
        prop_assert_eq!(profile.n_instants(), oracle.len());
        for (ti, oracle_row) in oracle.iter().enumerate() {
            for (col, want) in oracle_row.iter().enumerate() {
                let got = profile.g(ti, col);
                prop_assert!((got - want).abs() <= 1e-10,
                    "t index {}, col {}: {} vs {}", ti, col, got, want);
            }
        }
    }

    #[test]
    fn affine_rescale_preserves_indicators(
        seed in 0u64..1_000_000,
        n in 2usize..10,
        extra_periods in 1usize..10,
        col_pick in 0usize..10,
        scale in prop_oneof![(-50.0f64..-0.01), (0.01f64..50.0)],
        offset in -1000.0f64..1000.0,
    ) {
        let k = 6;
        let series = random_series(seed, n, k + extra_periods);
        let spec = WindowSpec::new(k).unwrap();
        let col = col_pick % n;
        let mut values = series.values().to_vec();
        for row in 0..series.n_periods() {
            let idx = row * n + col;
            values[idx] = scale * values[idx] + offset;
        }
        let rescaled = ParameterSeries::new(series.param_ids().to_vec(), values, 1).unwrap();

        let a = indicator_profile_with(&series, &spec, &ProfileOptions::default()).unwrap();
        let b = indicator_profile_with(&rescaled, &spec, &ProfileOptions::default()).unwrap();
        for ti in 0..a.n_instants() {
            for c in 0..n {
                prop_assert!((a.g(ti, c) - b.g(ti, c)).abs() <= 1e-9,
                    "t index {}, col {}: {} vs {}", ti, c, a.g(ti, c), b.g(ti, c));
            }
        }
    }

    #[test]
    fn column_permutation_permutes_indicators(
        seed in 0u64..1_000_000,
        n in 2usize..10,
        extra_periods in 1usize..8,
        rot in 1usize..9,
    ) {
        let k = 3;
        let series = random_series(seed, n, k + extra_periods);
        let spec = WindowSpec::new(k).unwrap();
        // Rotate columns by `rot`: permuted column p holds original column (p + rot) % n.
        let rot = rot % n;
        let perm: Vec<usize> = (0..n).map(|p| (p + rot) % n).collect();
        let ids = perm.iter().map(|&src| series.param_ids()[src].clone()).collect();
        let mut values = Vec::with_capacity(series.values().len());
        for row in 0..series.n_periods() {
            for &src in &perm {
                values.push(series.value(row, src));
            }
        }
        let permuted = ParameterSeries::new(ids, values, 1).unwrap();

        let a = indicator_profile_with(&series, &spec, &ProfileOptions::default()).unwrap();
        let b = indicator_profile_with(&permuted, &spec, &ProfileOptions::default()).unwrap();
        for ti in 0..a.n_instants() {
            for (p, &src) in perm.iter().enumerate() {
                prop_assert!((b.g(ti, p) - a.g(ti, src)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn correlations_are_symmetric_and_bounded(
        seed in 0u64..1_000_000,
        n in 1usize..8,
        k in 2usize..8,
    ) {
        let series = random_series(seed, n, k + 1);
        let spec = WindowSpec::new(k).unwrap();
        let w = standardize_window(&series, series.period_origin() + k as i64, &spec).unwrap();
        for i in 0..n {
            for j in 0..n {
                let rij = pair_correlation(&w, i, j).unwrap();
                let rji = pair_correlation(&w, j, i).unwrap();
                prop_assert_eq!(rij.to_bits(), rji.to_bits());
                prop_assert!((-1.0..=1.0).contains(&rij));
            }
            let g = indicator_row(&w, i).unwrap();
            prop_assert!(g >= 0.0 && g <= n as f64 + 1e-9);
            if !w.is_degenerate(i) {
                prop_assert!(g >= 1.0);
                prop_assert_eq!(pair_correlation(&w, i, i).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn tile_width_never_changes_bits(
        seed in 0u64..1_000_000,
        n in 1usize..20,
        extra_periods in 1usize..6,
        tile_width in 1usize..40,
    ) {
        let k = 4;
        let series = random_series(seed, n, k + extra_periods);
        let spec = WindowSpec::new(k).unwrap();
        let a = indicator_profile_with(&series, &spec, &ProfileOptions::default()).unwrap();
        let b = indicator_profile_with(&series, &spec, &ProfileOptions { tile_width }).unwrap();
        for ti in 0..a.n_instants() {
            for c in 0..n {
                prop_assert_eq!(a.g(ti, c).to_bits(), b.g(ti, c).to_bits());
            }
        }
    }

    #[test]
    fn cursor_sweep_matches_batch(
        seed in 0u64..1_000_000,
        n in 1usize..8,
        extra_periods in 2usize..12,
    ) {
        let k = 6;
        let series = random_series(seed, n, k + extra_periods);
        let spec = WindowSpec::new(k).unwrap();
        let mut cursor = WindowCursor::new(&series, spec, spec.first_instant(&series)).unwrap();
        loop {
            let incr = cursor.window();
            let batch = standardize_window(&series, cursor.t(), &spec).unwrap();
            for i in 0..n {
                prop_assert_eq!(incr.is_degenerate(i), batch.is_degenerate(i));
                for (a, b) in incr.z_column(i).iter().zip(batch.z_column(i)) {
                    prop_assert!((a - b).abs() <= 1e-10);
                }
                let gi_incr = indicator_row(&incr, i).unwrap();
                let gi_batch = indicator_row(&batch, i).unwrap();
                prop_assert!((gi_incr - gi_batch).abs() <= 1e-10);
            }
            if cursor.advance().is_err() {
                break;
            }
        }
    }

    #[test]
    fn overlay_composition_is_order_free(
        seed in 0u64..1_000_000,
        n in 2usize..6,
        n_periods in 3usize..12,
        split in 1usize..5,
    ) {
        use dyncorr_core::Injection;
        let series = random_series(seed, n, n_periods);
        let mut rng = Xoshiro256PlusPlus::new(seed ^ 0xABCD);
        let inject = |rng: &mut Xoshiro256PlusPlus| -> Injection {
            let col = (rng.next_u64() as usize) % n;
            let start = 1 + (rng.next_u64() as i64).rem_euclid(n_periods as i64);
            let end = start + (rng.next_u64() as i64).rem_euclid(n_periods as i64 - start + 1);
            Injection {
                target: format!("p{col}"),
                start,
                end,
                amount: rng.next_f64() * 500.0,
            }
        };
        let injections: Vec<Injection> = (0..6).map(|_| inject(&mut rng)).collect();
        let split = split.min(injections.len() - 1);
        let plan = |schedule: Vec<Injection>| {
            OverlayPlan::new(
                dyncorr_core::SkillMatrix::empty(),
                dyncorr_core::CostAssignment::empty(),
                schedule,
                None,
            )
            .unwrap()
        };
        let first = plan(injections[..split].to_vec());
        let second = plan(injections[split..].to_vec());
        let merged = plan(injections.clone());

        let sequential = apply_overlay(&apply_overlay(&series, &first).unwrap(), &second).unwrap();
        let at_once = apply_overlay(&series, &merged).unwrap();
        prop_assert_eq!(sequential, at_once);
    }
}

#[test]
fn coupled_blocks_correlate_above_cross_block_pairs() {
    use dyncorr_core::{DepartmentBlock, ScenarioConfig, generate_scenario};

    // Strong coupling, little noise: within-block |r| must beat cross-block
    // |r| by the 0.2 margin at every analyzable instant.
    let config = ScenarioConfig {
        n_params: 24,
        n_periods: 30,
        seed: 8,
        seasonal_period: 12,
        noise_scale: 0.05,
        sparsity: 0.0,
        baseline_scale: 100.0,
        signal_scale: 10.0,
        department_blocks: (0..4)
            .map(|_| DepartmentBlock {
                size: 6,
                coupling: 0.97,
            })
            .collect(),
    };
    let series = generate_scenario(&config).unwrap();
    let spec = WindowSpec::new(6).unwrap();
    let block_of = |col: usize| col / 6;
    for t in spec.first_instant(&series)..=spec.last_instant(&series) {
        let w = standardize_window(&series, t, &spec).unwrap();
        let (mut within, mut within_n, mut cross, mut cross_n) = (0.0, 0, 0.0, 0);
        for i in 0..24 {
            for j in (i + 1)..24 {
                let r = pair_correlation(&w, i, j).unwrap().abs();
                if block_of(i) == block_of(j) {
                    within += r;
                    within_n += 1;
                } else {
                    cross += r;
                    cross_n += 1;
                }
            }
        }
        let within_mean = within / within_n as f64;
        let cross_mean = cross / cross_n as f64;
        assert!(
            within_mean - cross_mean >= 0.2,
            "t = {t}: within {within_mean:.3} vs cross {cross_mean:.3}"
        );
    }
}

#[cfg(feature = "parallel")]
mod parallel {
    use super::*;

    #[test]
    fn thread_count_never_changes_bits() {
        let series = random_series(4242, 64, 30);
        let spec = WindowSpec::new(6).unwrap();
        let options = ProfileOptions { tile_width: 8 };
        let reference = indicator_profile_with(&series, &spec, &options).unwrap();
        for threads in [1usize, 2, 4] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let profile =
                pool.install(|| indicator_profile_with(&series, &spec, &options).unwrap());
            assert_eq!(profile, reference, "{threads} threads changed the result");
        }
    }
}
