//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with:
//!
//! ```bash
//! cargo test -p dyncorr --test acceptance -- --nocapture
//! ```

use std::alloc::{GlobalAlloc, Layout, System};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use dyncorr::fixture::{MAX_COLUMN_SUM_GAP, MAX_IDENTITY_GAP, MAX_ROW_DISCREPANCY, load_fixture};
use dyncorr::pipeline::run_pipeline;
use dyncorr::textcfg::parse_plan;
use dyncorr_core::rng::Xoshiro256PlusPlus;
use dyncorr_core::{
    Normalization, OverlayPlan, ParameterSeries, ProfileOptions, ScenarioConfig, WindowCursor,
    WindowSpec, generate_scenario, indicator_profile_with, indicator_row, replica_plan,
    standardize_window, verify_fixture,
};

/// Allocation-counting wrapper so the tiling contract's memory bound is a
/// hard assertion, not an estimate.
struct CountingAlloc;

static IN_USE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for CountingAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let ptr = unsafe { System.alloc(layout) };
        if !ptr.is_null() {
            let now = IN_USE.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        ptr
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        IN_USE.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static ALLOC: CountingAlloc = CountingAlloc;

fn reset_peak() -> usize {
    let now = IN_USE.load(Ordering::Relaxed);
    PEAK.store(now, Ordering::Relaxed);
    now
}

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn random_series(seed: u64, n_params: usize, n_periods: usize) -> ParameterSeries {
    let mut rng = Xoshiro256PlusPlus::new(seed);
    let ids = (0..n_params).map(|i| format!("p{i}")).collect();
    let values = (0..n_params * n_periods)
        .map(|_| 100.0 + 35.0 * rng.next_normal())
        .collect();
    ParameterSeries::new(ids, values, 1).unwrap()
}

/// Independent reference: direct Pearson arithmetic on raw window values,
/// full double loop, no standardization, no tiling.
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
                g += (cov / (ssds[i] * ssds[j]).sqrt()).clamp(-1.0, 1.0).abs();
            }
            g_row[i] = g;
        }
        out.push(g_row);
    }
    out
}

#[test]
fn criterion_1_fixture_arithmetic() {
    let started = Instant::now();
    let table = load_fixture(&data_file("table1.csv")).expect("shipped fixture loads");
    assert_eq!(table.rows.len(), 57, "fixture must transcribe all 57 rows");
    assert_eq!(table.stated_total_base, 5069.93);
    assert_eq!(table.stated_total_control, 5491.17);
    assert_eq!(table.stated_total_delta, 421.24);

    let report = verify_fixture(&table);
    assert!(
        report.total_identity_gap <= MAX_IDENTITY_GAP,
        "identity gap {}",
        report.total_identity_gap
    );
    assert!(
        report.max_row_discrepancy <= MAX_ROW_DISCREPANCY,
        "max row discrepancy {}",
        report.max_row_discrepancy
    );
    for (name, gap) in [
        ("base", report.base_sum_gap),
        ("control", report.control_sum_gap),
        ("delta", report.delta_sum_gap),
    ] {
        assert!(gap <= MAX_COLUMN_SUM_GAP, "{name} column sum gap {gap}");
    }

    // The CLI agrees and exits cleanly.
    let output = Command::new(env!("CARGO_BIN_EXE_dyncorr"))
        .args(["verify-fixture", "--fixture"])
        .arg(data_file("table1.csv"))
        .output()
        .expect("spawn dyncorr");
    assert_eq!(output.status.code(), Some(0));

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 fixture-arithmetic: PASS (57 rows, {} flagged, max row disc {:.3}, identity gap {:.4}, sum gaps {:.2}/{:.2}/{:.2}, {:.0} ms)",
        report.flagged.len(),
        report.max_row_discrepancy,
        report.total_identity_gap,
        report.base_sum_gap,
        report.control_sum_gap,
        report.delta_sum_gap,
        elapsed.as_secs_f64() * 1e3
    );
}

#[test]
fn criterion_2_oracle_equivalence() {
    let started = Instant::now();
    let mut dims = Xoshiro256PlusPlus::new(0xACCE97);
    let mut instances = 0;
    let mut worst = 0.0f64;
    for k in [2usize, 6, 12] {
        for round in 0..7 {
            let n = 5 + (dims.next_u64() as usize) % 96; // n <= 100
            let t_max = (k + 2) + (dims.next_u64() as usize) % (80 - k - 1); // T <= 80
            let series = random_series(0x5EED_0000 + round + k as u64 * 100, n, t_max);
            let spec = WindowSpec::new(k).unwrap();
            let profile =
                indicator_profile_with(&series, &spec, &ProfileOptions { tile_width: 32 }).unwrap();
            let oracle = naive_profile(&series, k, spec.degenerate_epsilon());
            assert_eq!(profile.n_instants(), oracle.len());
            for (ti, oracle_row) in oracle.iter().enumerate() {
                for (col, want) in oracle_row.iter().enumerate() {
                    let diff = (profile.g(ti, col) - want).abs();
                    worst = worst.max(diff);
                    assert!(
                        diff <= 1e-10,
                        "k={k} n={n} T={t_max} t-index {ti} col {col}: diff {diff:e}"
                    );
                }
            }
            instances += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(instances >= 20);
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 2 oracle-equivalence: PASS ({instances} instances, worst diff {worst:.2e}, {:.2} s)",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_3_affine_invariance() {
    let mut worst = 0.0f64;
    for round in 0u64..10 {
        let mut rng = Xoshiro256PlusPlus::new(0xAFF1_0000 + round);
        let n = 4 + (rng.next_u64() as usize) % 30;
        let t_max = 10 + (rng.next_u64() as usize) % 40;
        let series = random_series(0xBEE5 + round, n, t_max);
        let spec = WindowSpec::new(6).unwrap();

        let mut values = series.values().to_vec();
        for col in 0..n {
            if rng.next_f64() < 0.5 {
                continue; // leave this column alone
            }
            let mut factor = rng.next_f64() * 20.0 - 10.0;
            if factor.abs() < 0.05 {
                factor = 0.05; // nonzero factors only
            }
            let offset = rng.next_f64() * 2000.0 - 1000.0;
            for row in 0..series.n_periods() {
                let idx = row * n + col;
                values[idx] = factor * values[idx] + offset;
            }
        }
        let rescaled = ParameterSeries::new(series.param_ids().to_vec(), values, 1).unwrap();

        let a = indicator_profile_with(&series, &spec, &ProfileOptions::default()).unwrap();
        let b = indicator_profile_with(&rescaled, &spec, &ProfileOptions::default()).unwrap();
        for ti in 0..a.n_instants() {
            for col in 0..n {
                let diff = (a.g(ti, col) - b.g(ti, col)).abs();
                worst = worst.max(diff);
                assert!(
                    diff <= 1e-9,
                    "round {round} t-index {ti} col {col}: {diff:e}"
                );
            }
        }
    }
    println!("ACCEPTANCE 3 affine-invariance: PASS (10 instances, worst shift {worst:.2e})");
}

#[test]
fn criterion_4_tiling_and_thread_determinism() {
    let series = random_series(0xDE7E12, 120, 36);
    let spec = WindowSpec::new(6).unwrap();
    let reference =
        indicator_profile_with(&series, &spec, &ProfileOptions { tile_width: 512 }).unwrap();

    let max_threads = std::thread::available_parallelism().map_or(2, |n| n.get());
    let mut combos = 0;
    for tile_width in [1usize, 64, 512] {
        for threads in [1usize, 4, max_threads] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let profile = pool
                .install(|| indicator_profile_with(&series, &spec, &ProfileOptions { tile_width }))
                .unwrap();
            assert_eq!(
                profile, reference,
                "tile {tile_width} x {threads} threads diverged"
            );
            combos += 1;
        }
    }
    println!(
        "ACCEPTANCE 4 determinism: PASS ({combos} tile/thread combinations bitwise identical, max threads {max_threads})"
    );
}

#[test]
fn criterion_5_incremental_equivalence() {
    let series = random_series(0x1C5E, 50, 60);
    let spec = WindowSpec::new(6).unwrap();
    let mut cursor = WindowCursor::new(&series, spec, spec.first_instant(&series)).unwrap();
    let mut worst = 0.0f64;
    let mut instants = 0;
    loop {
        let incremental = cursor.window();
        let batch = standardize_window(&series, cursor.t(), &spec).unwrap();
        for col in 0..series.n_params() {
            assert_eq!(incremental.is_degenerate(col), batch.is_degenerate(col));
            for (a, b) in incremental.z_column(col).iter().zip(batch.z_column(col)) {
                let diff = (a - b).abs();
                worst = worst.max(diff);
                assert!(diff <= 1e-10, "z diverged at t={} col {col}", cursor.t());
            }
            let gi = indicator_row(&incremental, col).unwrap();
            let gb = indicator_row(&batch, col).unwrap();
            let diff = (gi - gb).abs();
            worst = worst.max(diff);
            assert!(diff <= 1e-10, "G diverged at t={} col {col}", cursor.t());
        }
        instants += 1;
        if cursor.advance().is_err() {
            break;
        }
    }
    println!(
        "ACCEPTANCE 5 incremental-equivalence: PASS (60x50 sweep, {instants} instants, worst diff {worst:.2e})"
    );
}

#[test]
fn criterion_6_null_intervention_identity() {
    let spec = WindowSpec::new(6).unwrap();
    let result = run_pipeline(
        &ScenarioConfig::desk_default(),
        &OverlayPlan::empty(),
        &spec,
        Normalization::Raw,
        &ProfileOptions::default(),
    )
    .unwrap();
    assert_eq!(result.base_series, result.control_series);
    assert!(result.ledger.delta().iter().all(|&d| d == 0.0));
    assert_eq!(result.ledger.total_delta(), 0.0);
    println!(
        "ACCEPTANCE 6 null-intervention: PASS ({} deltas all exactly zero, total_delta = {})",
        result.ledger.n_rows(),
        result.ledger.total_delta()
    );
}

#[test]
fn criterion_7_replica_plan() {
    let plan = replica_plan();
    assert_eq!(
        plan.injected_total(),
        9060.0,
        "injected total must be exact"
    );

    let shipped = parse_plan(&std::fs::read_to_string(data_file("replica.plan")).unwrap())
        .expect("shipped plan parses");
    assert_eq!(shipped, plan, "shipped plan file matches the built-in plan");

    // Lower the cap to 9,000: pipeline under --enforce-budget must exit 3.
    let tmp = tempfile::TempDir::new().unwrap();
    let tight = std::fs::read_to_string(data_file("replica.plan"))
        .unwrap()
        .replace("budget_cap = 9060", "budget_cap = 9000");
    assert!(tight.contains("budget_cap = 9000"), "cap rewrite applied");
    let tight_path = tmp.path().join("tight.plan");
    std::fs::write(&tight_path, tight).unwrap();

    let output = Command::new(env!("CARGO_BIN_EXE_dyncorr"))
        .current_dir(tmp.path())
        .args(["pipeline", "--plan"])
        .arg(&tight_path)
        .args(["--enforce-budget", "--out", "run"])
        .output()
        .expect("spawn dyncorr");
    assert_eq!(
        output.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(
        String::from_utf8_lossy(&output.stderr).contains("exceeds cap 9000 by 60"),
        "violation message must carry the excess"
    );
    println!("ACCEPTANCE 7 replica-plan: PASS (injected total 9060 exact, cap-9000 run exits 3)");
}

#[test]
fn criterion_8_desk_scale_performance() {
    let n = 20_000;
    let config = ScenarioConfig {
        n_params: n,
        n_periods: 7, // exactly one analyzable instant at k = 6
        seed: 0x9E2F,
        seasonal_period: 12,
        noise_scale: 1.0,
        sparsity: 0.0,
        baseline_scale: 100.0,
        signal_scale: 10.0,
        department_blocks: Vec::new(),
    };
    let series = generate_scenario(&config).unwrap();
    let spec = WindowSpec::new(6).unwrap();
    let options = ProfileOptions::default();

    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let baseline_bytes = reset_peak();
    let started = Instant::now();
    let profile = single
        .install(|| indicator_profile_with(&series, &spec, &options))
        .unwrap();
    let single_thread_secs = started.elapsed().as_secs_f64();
    let peak_bytes =
        PEAK.load(Ordering::Relaxed) - baseline_bytes.min(PEAK.load(Ordering::Relaxed));

    assert_eq!(profile.n_instants(), 1);
    assert!(
        single_thread_secs <= 30.0,
        "single-threaded instant took {single_thread_secs:.1} s"
    );
    let two_gib = 2usize << 30;
    assert!(
        peak_bytes < two_gib,
        "peak additional memory {peak_bytes} bytes breaches the tiling contract"
    );

    let eight = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap();
    let started = Instant::now();
    let parallel_profile = eight
        .install(|| indicator_profile_with(&series, &spec, &options))
        .unwrap();
    let eight_thread_secs = started.elapsed().as_secs_f64();
    assert_eq!(parallel_profile, profile);
    let speedup = single_thread_secs / eight_thread_secs;

    // The 3x-at-8-threads bound presumes hardware that can run at least a
    // few of those threads in parallel; measure everywhere, assert where the
    // host can express it.
    let cores = std::thread::available_parallelism().map_or(1, |v| v.get());
    let speedup_note = if cores >= 4 {
        assert!(
            speedup >= 3.0,
            "8-thread speedup {speedup:.2}x below 3x on {cores} cores"
        );
        format!("speedup {speedup:.2}x (asserted >= 3x)")
    } else {
        format!(
            "speedup {speedup:.2}x (assertion SKIPPED: host exposes {cores} cores, cannot run 8 threads in parallel)"
        )
    };

    println!(
        "ACCEPTANCE 8 desk-scale-performance: PASS (n=20000 instant in {single_thread_secs:.2} s single-threaded, peak extra memory {:.1} MiB < 2 GiB, {speedup_note})",
        peak_bytes as f64 / (1 << 20) as f64
    );
}

#[test]
fn criterion_9_degenerate_columns() {
    let config = ScenarioConfig {
        n_params: 50,
        n_periods: 20,
        seed: 0xDE6E,
        seasonal_period: 12,
        noise_scale: 2.0,
        sparsity: 0.3,
        baseline_scale: 100.0,
        signal_scale: 5.0,
        department_blocks: Vec::new(),
    };
    let zero_columns = config.zero_column_count();
    assert_eq!(zero_columns, 15, "30% of 50 columns");
    let series = generate_scenario(&config).unwrap();
    assert_eq!(series.diagnose().zero_columns, zero_columns);

    let spec = WindowSpec::new(6).unwrap();
    let profile = indicator_profile_with(&series, &spec, &ProfileOptions::default()).unwrap();
    let first_zero = series.n_params() - zero_columns;
    for ti in 0..profile.n_instants() {
        for col in first_zero..series.n_params() {
            assert_eq!(
                profile.g(ti, col),
                0.0,
                "zero column {col} must have G = 0 at every instant"
            );
        }
        assert!(profile.degenerate_counts()[ti] >= zero_columns);
    }
    println!(
        "ACCEPTANCE 9 degenerate-handling: PASS ({zero_columns} dormant columns, G exactly 0 at all {} instants)",
        profile.n_instants()
    );
}
