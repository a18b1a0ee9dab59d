//! The `dyncorr` command line: batch subcommands over series files, plans and
//! scenario configs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 budget
//! violation under `--enforce-budget`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use dyncorr_core::{
    BudgetStatus, BudgetVerdict, Normalization, OverlayPlan, ProfileOptions, ScenarioConfig,
    WindowSpec, apply_overlay, check_budget, compare_modes, generate_scenario,
    indicator_profile_with, period_aggregate, total_indicator, verify_fixture,
};

use dyncorr::export::{write_ledger_csv, write_plot_csv, write_profile_csv};
use dyncorr::fixture::{MAX_COLUMN_SUM_GAP, MAX_IDENTITY_GAP, MAX_ROW_DISCREPANCY, load_fixture};
use dyncorr::formats::{SeriesFormat, load_series, write_series};
use dyncorr::manifest::{RunManifest, WindowSettings, file_checksum};
use dyncorr::pipeline::run_pipeline;
use dyncorr::textcfg::{parse_plan, parse_scenario};

#[derive(Debug, Parser)]
#[command(
    name = "dyncorr",
    version,
    about = "Sliding-window correlation indicators and mode comparison for multivariate series"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    s.parse()
}

/// Flags shared by every profile-computing subcommand.
#[derive(Debug, Args)]
struct AnalysisFlags {
    /// Window length in periods.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(2..))]
    k: u64,

    /// Per-instant aggregate scaling: raw or mean.
    #[arg(long, default_value = "raw", value_parser = parse_normalization)]
    normalization: Normalization,

    /// Column tile width of the profile sweep (does not change results).
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u64).range(1..))]
    tile_width: u64,

    /// Worker threads (default: DYNCORR_THREADS or all cores).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute an indicator profile from a series file.
    Analyze {
        /// Input series (.csv or .mdsc).
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        flags: AnalysisFlags,
        /// Profile CSV output; plot data and manifest are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two series files as base vs control mode.
    Compare {
        /// Base-mode series (.csv or .mdsc).
        #[arg(long)]
        base: PathBuf,
        /// Control-mode series (.csv or .mdsc).
        #[arg(long)]
        control: PathBuf,
        #[command(flatten)]
        flags: AnalysisFlags,
        /// Ledger CSV output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply an overlay plan to a series, producing the control-mode series.
    Overlay {
        /// Base series (.csv or .mdsc).
        #[arg(long)]
        input: PathBuf,
        /// Overlay plan file.
        #[arg(long)]
        plan: PathBuf,
        /// Output series; format inferred from the extension.
        #[arg(long)]
        out: PathBuf,
        /// Exit with status 3 if the plan exceeds its budget cap.
        #[arg(long)]
        enforce_budget: bool,
    },
    /// Generate a synthetic scenario series (CSV and columnar-binary).
    Generate {
        /// Scenario config file (default: the built-in desk-scale scenario).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output stem: writes <stem>.csv, <stem>.mdsc and <stem>.manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Full batch run: generate, overlay, profile both modes, emit the ledger.
    Pipeline {
        /// Scenario config file (default: the built-in desk-scale scenario).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overlay plan file (default: empty plan).
        #[arg(long)]
        plan: Option<PathBuf>,
        #[command(flatten)]
        flags: AnalysisFlags,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output stem: writes <stem>.ledger.csv, <stem>.base.plot.csv,
        /// <stem>.control.plot.csv and <stem>.manifest.json.
        #[arg(long)]
        out: PathBuf,
        /// Exit with status 3 if the plan exceeds its budget cap.
        #[arg(long)]
        enforce_budget: bool,
    },
    /// Recheck the arithmetic of a transcribed comparison table.
    VerifyFixture {
        /// Fixture CSV (t,V_basic,V_control,delta with a Total row).
        #[arg(long, default_value = "data/table1.csv")]
        fixture: PathBuf,
        /// Optional report file; a manifest is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("budget violation: injected total {injected} exceeds cap {cap} by {excess}")]
    Budget {
        injected: f64,
        cap: f64,
        excess: f64,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Budget { .. } => 3,
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn series_format(path: &Path) -> Result<SeriesFormat, CliError> {
    SeriesFormat::from_path(path).ok_or_else(|| {
        CliError::Usage(format!(
            "cannot infer series format of \"{}\": expected a .csv or .mdsc extension",
            path.display()
        ))
    })
}

/// Commands never mutate their inputs; refuse an --out that resolves to one.
fn reject_overwrite(inputs: &[&Path], out: &Path) -> Result<(), CliError> {
    let Ok(out_canonical) = out.canonicalize() else {
        return Ok(()); // out does not exist yet, nothing to clobber
    };
    for input in inputs {
        if input
            .canonicalize()
            .is_ok_and(|canonical| canonical == out_canonical)
        {
            return Err(CliError::Usage(format!(
                "--out \"{}\" would overwrite the input file",
                out.display()
            )));
        }
    }
    Ok(())
}

/// --threads beats DYNCORR_THREADS beats the rayon default.
fn resolve_threads(flag: Option<u64>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return Ok(Some(n as usize));
    }
    match std::env::var("DYNCORR_THREADS") {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "invalid DYNCORR_THREADS value \"{raw}\": expected a positive integer"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Installs the requested global pool size; returns the effective count.
fn install_thread_pool(threads: Option<usize>) -> usize {
    match threads {
        Some(n) => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
            n
        }
        None => rayon::current_num_threads(),
    }
}

/// Strips a series extension so suffixed outputs can be appended.
fn output_stem(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("mdsc") => out.with_extension(""),
        _ => out.to_path_buf(),
    }
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}.{suffix}", stem.display()))
}

fn print_budget(verdict: &BudgetVerdict) {
    let cap = verdict
        .budget_cap
        .map_or_else(|| "none".to_string(), |c| c.to_string());
    let status = match verdict.status {
        BudgetStatus::Ok => "OK".to_string(),
        BudgetStatus::Violation { excess } => format!("VIOLATION (excess {excess})"),
    };
    println!(
        "budget: injected {} against cap {} -> {}; base stream + injected = {}",
        verdict.injected_total, cap, status, verdict.combined_total
    );
}

fn enforce(verdict: &BudgetVerdict) -> Result<(), CliError> {
    match verdict.status {
        BudgetStatus::Ok => Ok(()),
        BudgetStatus::Violation { excess } => Err(CliError::Budget {
            injected: verdict.injected_total,
            cap: verdict.budget_cap.unwrap_or(0.0),
            excess,
        }),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    match cli.command {
        Command::Analyze { input, flags, out } => {
            let threads = resolve_threads(flags.threads)?;
            let effective_threads = install_thread_pool(threads);
            let format = series_format(&input)?;
            reject_overwrite(&[&input], &out)?;
            let series = load_series(&input, format).map_err(data_err)?;
            let spec = WindowSpec::new(flags.k as usize).map_err(data_err)?;
            let options = ProfileOptions {
                tile_width: flags.tile_width as usize,
            };
            let profile = indicator_profile_with(&series, &spec, &options).map_err(data_err)?;

            write_profile_csv(&profile, &out).map_err(data_err)?;
            let plot = out.with_extension("plot.csv");
            write_plot_csv(&profile, &plot).map_err(data_err)?;

            let aggregate = period_aggregate(&profile, flags.normalization, "input");
            println!(
                "profile: {} instants x {} parameters; G total = {}; V total ({}) = {}",
                profile.n_instants(),
                profile.n_params(),
                total_indicator(&profile),
                flags.normalization,
                aggregate.total()
            );

            let mut manifest = RunManifest::new("analyze");
            manifest.record_input(&input, series.checksum());
            manifest.window = Some(WindowSettings {
                k: spec.k(),
                degenerate_epsilon: spec.degenerate_epsilon(),
            });
            manifest.normalization = Some(flags.normalization.to_string());
            manifest.tile_width = Some(options.tile_width);
            manifest.threads = Some(effective_threads);
            manifest.record_output(&out);
            manifest.record_output(&plot);
            manifest.duration_ms = started.elapsed().as_millis() as u64;
            manifest
                .write(&out.with_extension("manifest.json"))
                .map_err(data_err)?;
            Ok(())
        }

        Command::Compare {
            base,
            control,
            flags,
            out,
        } => {
            let threads = resolve_threads(flags.threads)?;
            let effective_threads = install_thread_pool(threads);
            reject_overwrite(&[&base, &control], &out)?;
            let base_series = load_series(&base, series_format(&base)?).map_err(data_err)?;
            let control_series =
                load_series(&control, series_format(&control)?).map_err(data_err)?;
            if base_series.n_periods() != control_series.n_periods() {
                return Err(CliError::Data(format!(
                    "base series has {} periods but control series has {}",
                    base_series.n_periods(),
                    control_series.n_periods()
                )));
            }
            let spec = WindowSpec::new(flags.k as usize).map_err(data_err)?;
            let options = ProfileOptions {
                tile_width: flags.tile_width as usize,
            };
            let base_profile =
                indicator_profile_with(&base_series, &spec, &options).map_err(data_err)?;
            let control_profile =
                indicator_profile_with(&control_series, &spec, &options).map_err(data_err)?;
            let base_aggregate = period_aggregate(&base_profile, flags.normalization, "basic");
            let control_aggregate =
                period_aggregate(&control_profile, flags.normalization, "control");
            let ledger = compare_modes(&base_aggregate, &control_aggregate).map_err(data_err)?;

            write_ledger_csv(&ledger, &out).map_err(data_err)?;
            println!(
                "ledger: {} rows; V_basic total = {}, V_control total = {}, delta total = {}",
                ledger.n_rows(),
                ledger.total_base(),
                ledger.total_control(),
                ledger.total_delta()
            );

            let mut manifest = RunManifest::new("compare");
            manifest.record_input(&base, base_series.checksum());
            manifest.record_input(&control, control_series.checksum());
            manifest.window = Some(WindowSettings {
                k: spec.k(),
                degenerate_epsilon: spec.degenerate_epsilon(),
            });
            manifest.normalization = Some(flags.normalization.to_string());
            manifest.tile_width = Some(options.tile_width);
            manifest.threads = Some(effective_threads);
            manifest.record_output(&out);
            manifest.duration_ms = started.elapsed().as_millis() as u64;
            manifest
                .write(&out.with_extension("manifest.json"))
                .map_err(data_err)?;
            Ok(())
        }

        Command::Overlay {
            input,
            plan,
            out,
            enforce_budget,
        } => {
            let in_format = series_format(&input)?;
            let out_format = series_format(&out)?;
            reject_overwrite(&[&input, &plan], &out)?;
            let series = load_series(&input, in_format).map_err(data_err)?;
            let plan_text = std::fs::read_to_string(&plan)
                .map_err(|e| CliError::Data(format!("{}: {e}", plan.display())))?;
            let overlay_plan = parse_plan(&plan_text).map_err(data_err)?;

            let base_total: f64 = series.values().iter().sum();
            let verdict = check_budget(&overlay_plan, base_total);
            print_budget(&verdict);
            if enforce_budget {
                enforce(&verdict)?;
            }

            let control = apply_overlay(&series, &overlay_plan).map_err(data_err)?;
            write_series(&control, &out, out_format).map_err(data_err)?;
            println!(
                "overlay: wrote {} ({} periods x {} parameters, injected {})",
                out.display(),
                control.n_periods(),
                control.n_params(),
                verdict.injected_total
            );

            let mut manifest = RunManifest::new("overlay");
            manifest.record_input(&input, series.checksum());
            manifest.record_input(&plan, file_checksum(&plan).map_err(data_err)?);
            manifest.record_output(&out);
            manifest.duration_ms = started.elapsed().as_millis() as u64;
            manifest
                .write(&output_stem(&out).with_extension("manifest.json"))
                .map_err(data_err)?;
            Ok(())
        }

        Command::Generate { config, seed, out } => {
            let mut scenario = match &config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                    parse_scenario(&text).map_err(data_err)?
                }
                None => ScenarioConfig::desk_default(),
            };
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            let series = generate_scenario(&scenario).map_err(data_err)?;
            let stem = output_stem(&out);
            let csv_path = with_suffix(&stem, "csv");
            let bin_path = with_suffix(&stem, "mdsc");
            write_series(&series, &csv_path, SeriesFormat::Csv).map_err(data_err)?;
            write_series(&series, &bin_path, SeriesFormat::ColumnarBinary).map_err(data_err)?;

            let diagnostics = series.diagnose();
            println!(
                "generated: {} periods x {} parameters (seed {}, {} zero columns, checksum {:016x})",
                series.n_periods(),
                series.n_params(),
                scenario.seed,
                diagnostics.zero_columns,
                diagnostics.checksum
            );

            let mut manifest = RunManifest::new("generate");
            if let Some(path) = &config {
                manifest.record_input(path, file_checksum(path).map_err(data_err)?);
            }
            manifest.seed = Some(scenario.seed);
            manifest.record_output(&csv_path);
            manifest.record_output(&bin_path);
            manifest.duration_ms = started.elapsed().as_millis() as u64;
            manifest
                .write(&with_suffix(&stem, "manifest.json"))
                .map_err(data_err)?;
            Ok(())
        }

        Command::Pipeline {
            config,
            plan,
            flags,
            seed,
            out,
            enforce_budget,
        } => {
            let threads = resolve_threads(flags.threads)?;
            let effective_threads = install_thread_pool(threads);
            let mut scenario = match &config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                    parse_scenario(&text).map_err(data_err)?
                }
                None => ScenarioConfig::desk_default(),
            };
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            let overlay_plan = match &plan {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                    parse_plan(&text).map_err(data_err)?
                }
                None => OverlayPlan::empty(),
            };
            let spec = WindowSpec::new(flags.k as usize).map_err(data_err)?;
            let options = ProfileOptions {
                tile_width: flags.tile_width as usize,
            };
            let result = run_pipeline(
                &scenario,
                &overlay_plan,
                &spec,
                flags.normalization,
                &options,
            )
            .map_err(data_err)?;

            print_budget(&result.budget);
            if enforce_budget {
                enforce(&result.budget)?;
            }

            let stem = output_stem(&out);
            let ledger_path = with_suffix(&stem, "ledger.csv");
            let base_plot = with_suffix(&stem, "base.plot.csv");
            let control_plot = with_suffix(&stem, "control.plot.csv");
            write_ledger_csv(&result.ledger, &ledger_path).map_err(data_err)?;
            write_plot_csv(&result.base_profile, &base_plot).map_err(data_err)?;
            write_plot_csv(&result.control_profile, &control_plot).map_err(data_err)?;
            println!(
                "pipeline: {} rows; V_basic total = {}, V_control total = {}, delta total = {}",
                result.ledger.n_rows(),
                result.ledger.total_base(),
                result.ledger.total_control(),
                result.ledger.total_delta()
            );

            let mut manifest = RunManifest::new("pipeline");
            if let Some(path) = &config {
                manifest.record_input(path, file_checksum(path).map_err(data_err)?);
            }
            if let Some(path) = &plan {
                manifest.record_input(path, file_checksum(path).map_err(data_err)?);
            }
            manifest.window = Some(WindowSettings {
                k: spec.k(),
                degenerate_epsilon: spec.degenerate_epsilon(),
            });
            manifest.normalization = Some(flags.normalization.to_string());
            manifest.seed = Some(scenario.seed);
            manifest.tile_width = Some(options.tile_width);
            manifest.threads = Some(effective_threads);
            manifest.record_output(&ledger_path);
            manifest.record_output(&base_plot);
            manifest.record_output(&control_plot);
            manifest.duration_ms = started.elapsed().as_millis() as u64;
            manifest
                .write(&with_suffix(&stem, "manifest.json"))
                .map_err(data_err)?;
            Ok(())
        }

        Command::VerifyFixture { fixture, out } => {
            let table = load_fixture(&fixture).map_err(data_err)?;
            let report = verify_fixture(&table);

            let mut lines = Vec::new();
            lines.push(format!(
                "fixture: {} ({} rows)",
                fixture.display(),
                report.row_count
            ));
            if report.flagged.is_empty() {
                lines.push("rounding-flagged rows: none".to_string());
            } else {
                lines.push(format!("rounding-flagged rows ({}):", report.flagged.len()));
                for flag in &report.flagged {
                    lines.push(format!(
                        "  t={}: stated delta {} vs recomputed {:.2} (discrepancy {:.3})",
                        flag.t, flag.stated, flag.recomputed, flag.discrepancy
                    ));
                }
            }
            lines.push(format!(
                "max row discrepancy: {:.4} (bound {MAX_ROW_DISCREPANCY})",
                report.max_row_discrepancy
            ));
            lines.push(format!(
                "total identity gap |base + delta - control|: {:.4} (bound {MAX_IDENTITY_GAP})",
                report.total_identity_gap
            ));
            lines.push(format!(
                "column sum gaps: base {:.4}, control {:.4}, delta {:.4} (bound {MAX_COLUMN_SUM_GAP})",
                report.base_sum_gap, report.control_sum_gap, report.delta_sum_gap
            ));
            let ok = report.max_row_discrepancy <= MAX_ROW_DISCREPANCY
                && report.total_identity_gap <= MAX_IDENTITY_GAP
                && report.base_sum_gap <= MAX_COLUMN_SUM_GAP
                && report.control_sum_gap <= MAX_COLUMN_SUM_GAP
                && report.delta_sum_gap <= MAX_COLUMN_SUM_GAP;
            lines.push(format!(
                "verdict: {}",
                if ok { "OK" } else { "OUT OF TOLERANCE" }
            ));
            let text = lines.join("\n");
            println!("{text}");

            if let Some(out) = &out {
                std::fs::write(out, format!("{text}\n"))
                    .map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
                let mut manifest = RunManifest::new("verify-fixture");
                manifest.record_input(&fixture, file_checksum(&fixture).map_err(data_err)?);
                manifest.record_output(out);
                manifest.duration_ms = started.elapsed().as_millis() as u64;
                manifest
                    .write(&output_stem(out).with_extension("manifest.json"))
                    .map_err(data_err)?;
            }
            if !ok {
                return Err(CliError::Data(
                    "fixture arithmetic is out of tolerance".to_string(),
                ));
            }
            Ok(())
        }
    }
}
