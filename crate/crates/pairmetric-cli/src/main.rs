use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pairmetric_cli::error::{CliError, CliResult};
use pairmetric_cli::formats::{
    load_dataset, parse_modalities, read_json, write_json, GenerateConfig, SweepConfig,
};
use pairmetric_cli::plot::PlotKind;
use pairmetric_cli::sweep::{run_cell, run_sweep, write_sweep_outputs};
use pairmetric_cli::verify::{run_suites, Fault, VerifyOptions};

use pairmetric_core::rng::derive_seed;
use pairmetric_core::{
    generate_dataset, model_grid, rademacher_mc, train, HypothesisSource, LossSpec, MetricCaps,
    RiskMode, SignOptConfig, StepSchedule, TrainConfig,
};

/// Pairwise multimodal metric learning under modality masking, with
/// empirical verification of its generalization-bound statements.
#[derive(Parser)]
#[command(name = "pairmetric", version, about, long_about = None)]
struct Cli {
    /// Override the seed from the config or flags, where applicable.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps and verification suites (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress progress notes on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset JSON from a generator config.
    Generate {
        /// Config JSON: {layout, n, seed, ground_truth}.
        #[arg(long)]
        config: PathBuf,
        /// Output dataset JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a diagonal metric on a dataset for one modality subset.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Modalities to use: `all`, `none`, or a comma list like `1,3`.
        #[arg(long)]
        modalities: String,
        /// Output model JSON path.
        #[arg(long)]
        out: PathBuf,
        /// Training-log CSV path; defaults to the model path plus `.log.csv`.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        max_iters: usize,
        /// Step schedule: `constant` or `inverse-sqrt`.
        #[arg(long, default_value = "inverse-sqrt")]
        schedule: String,
        #[arg(long, default_value_t = 0.3)]
        base_step: f64,
        /// Early-stop threshold on best-risk improvement per 50 iterations.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Risk mode: `ustat` or `block`.
        #[arg(long, default_value = "ustat")]
        mode: String,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        /// Loss clip bound C [default: margin + dist-cap].
        #[arg(long)]
        clip_c: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        eigen_cap: f64,
        #[arg(long, default_value_t = 512.0)]
        dist_cap: f64,
        #[arg(long, default_value_t = 16.0)]
        feature_cap: f64,
    },
    /// Evaluate the empirical risk of a model on a dataset.
    Risk {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Risk mode: `ustat` or `block`.
        #[arg(long, default_value = "ustat")]
        mode: String,
        /// Optional JSON output path (the result is always printed).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the block Rademacher complexity on a dataset.
    Rademacher {
        #[arg(long)]
        data: PathBuf,
        /// Modalities spanning the hypothesis class: `all`, `none`, `1,3`.
        #[arg(long, default_value = "all")]
        mask: String,
        #[arg(long, default_value_t = 256)]
        grid_size: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Supremum method: `grid` or `opt` (sign-weighted optimization).
        #[arg(long, default_value = "grid")]
        method: String,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        /// Loss clip bound C [default: margin + dist-cap].
        #[arg(long)]
        clip_c: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        eigen_cap: f64,
        #[arg(long, default_value_t = 512.0)]
        dist_cap: f64,
        #[arg(long, default_value_t = 16.0)]
        feature_cap: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every bound report for one sweep cell.
    Bounds {
        /// Sweep config JSON (same schema as `sweep`).
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        n_index: usize,
        #[arg(long, default_value_t = 0)]
        pair_index: usize,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full experiment sweep and write one CSV row per cell.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification suites.
    Verify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Optional JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Test-only fault injection (e.g. `decoupling-negate`).
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Aggregate a sweep CSV into plot-ready TSV data.
    PlotData {
        #[arg(long)]
        input: PathBuf,
        /// One of: `decay`, `bound-gap`, `risk-vs-modalities`.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_mode(raw: &str) -> CliResult<RiskMode> {
    match raw {
        "ustat" => Ok(RiskMode::UStat),
        "block" => Ok(RiskMode::Block),
        other => Err(CliError::invalid(format!(
            "unknown risk mode '{other}'; use ustat or block"
        ))),
    }
}

fn parse_schedule(raw: &str) -> CliResult<StepSchedule> {
    match raw {
        "constant" => Ok(StepSchedule::Constant),
        "inverse-sqrt" => Ok(StepSchedule::InverseSqrt),
        other => Err(CliError::invalid(format!(
            "unknown schedule '{other}'; use constant or inverse-sqrt"
        ))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // a later duplicate initialization is harmless; ignore it
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("pairmetric: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Generate { config, out } => {
            let mut cfg: GenerateConfig = read_json(&config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            cfg.validate_shape()?;
            let layout = cfg.layout.build()?;
            let gt = cfg.ground_truth.build(&layout)?;
            let ds = generate_dataset(&layout, cfg.n, &gt, cfg.seed)?;
            write_json(&out, &ds)?;
            if !cli.quiet {
                eprintln!("wrote {} samples to {}", ds.n(), out.display());
            }
            Ok(0)
        }
        Command::Train {
            data,
            modalities,
            out,
            log,
            max_iters,
            schedule,
            base_step,
            tol,
            mode,
            margin,
            clip_c,
            eigen_cap,
            dist_cap,
            feature_cap,
        } => {
            let ds = load_dataset(&data)?;
            let mask = parse_modalities(&modalities, ds.layout.num_modalities())?;
            let caps = MetricCaps::new(eigen_cap, dist_cap, feature_cap)
                .map_err(|e| CliError::invalid(e.to_string()))?;
            let spec = LossSpec::clipped_hinge(
                margin,
                clip_c.unwrap_or(margin + dist_cap),
                &caps,
                ds.layout.total_dim(),
            )
            .map_err(|e| CliError::invalid(e.to_string()))?;
            let cfg = TrainConfig {
                max_iters,
                schedule: parse_schedule(&schedule)?,
                base_step,
                tol,
                risk_mode: parse_mode(&mode)?,
                seed: cli.seed.unwrap_or(0),
            };
            let result = train(&ds, &mask, &spec, &caps, &cfg)?;
            write_json(&out, &result.model)?;
            let log_path = log.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".log.csv");
                PathBuf::from(p)
            });
            let mut log_doc = String::from("iter,risk,step_size\n");
            for step in &result.trace {
                log_doc.push_str(&format!(
                    "{},{},{}\n",
                    step.iter,
                    pairmetric_cli::formats::fmt_f64(step.risk),
                    pairmetric_cli::formats::fmt_f64(step.step_size)
                ));
            }
            std::fs::write(&log_path, log_doc)?;
            println!(
                "{}",
                serde_json::json!({
                    "final_empirical_risk": result.final_empirical_risk,
                    "excess_empirical_risk": result.excess_empirical_risk,
                    "iters_used": result.iters_used,
                    "converged": result.converged,
                    "model": out.display().to_string(),
                    "log": log_path.display().to_string(),
                })
            );
            Ok(0)
        }
        Command::Risk {
            data,
            model,
            mode,
            out,
        } => {
            let ds = load_dataset(&data)?;
            let m: pairmetric_core::DiagonalMetricModel = read_json(&model)?;
            m.validate_against(&ds.layout)
                .map_err(|e| CliError::invalid(e.to_string()))?;
            let mode = parse_mode(&mode)?;
            let value = match mode {
                RiskMode::UStat => pairmetric_core::ustat_risk(&risk_spec(&ds, &m)?, &m, &ds)?,
                RiskMode::Block => {
                    pairmetric_core::block_risk(&risk_spec(&ds, &m)?, &m, &ds, None)?
                }
            };
            let doc = serde_json::to_value(value)?;
            println!("{doc}");
            if let Some(path) = out {
                write_json(&path, &doc)?;
            }
            Ok(0)
        }
        Command::Rademacher {
            data,
            mask,
            grid_size,
            trials,
            method,
            margin,
            clip_c,
            eigen_cap,
            dist_cap,
            feature_cap,
            out,
        } => {
            let ds = load_dataset(&data)?;
            let mask = parse_modalities(&mask, ds.layout.num_modalities())?;
            let caps = MetricCaps::new(eigen_cap, dist_cap, feature_cap)
                .map_err(|e| CliError::invalid(e.to_string()))?;
            let spec = LossSpec::clipped_hinge(
                margin,
                clip_c.unwrap_or(margin + dist_cap),
                &caps,
                ds.layout.total_dim(),
            )
            .map_err(|e| CliError::invalid(e.to_string()))?;
            let seed = cli.seed.unwrap_or(0);
            let estimate = match method.as_str() {
                "grid" => {
                    let grid = model_grid(
                        &ds.layout,
                        &mask,
                        &caps,
                        grid_size,
                        derive_seed(seed, 0x6121D),
                    )?;
                    rademacher_mc(&ds, &spec, &HypothesisSource::Grid(&grid), trials, seed)?
                }
                "opt" => rademacher_mc(
                    &ds,
                    &spec,
                    &HypothesisSource::SignWeightedOpt {
                        mask,
                        caps,
                        opt: SignOptConfig::default(),
                    },
                    trials,
                    seed,
                )?,
                other => {
                    return Err(CliError::invalid(format!(
                        "unknown method '{other}'; use grid or opt"
                    )))
                }
            };
            let doc = serde_json::to_value(estimate)?;
            println!("{doc}");
            if let Some(path) = out {
                write_json(&path, &doc)?;
            }
            Ok(0)
        }
        Command::Bounds {
            config,
            n_index,
            pair_index,
            trial,
            out,
        } => {
            let mut cfg: SweepConfig = read_json(&config)?;
            if let Some(seed) = cli.seed {
                cfg.base_seed = seed;
            }
            let plan = cfg.build()?;
            if n_index >= plan.n_values.len() || pair_index >= plan.pairs.len() {
                return Err(CliError::invalid(format!(
                    "cell ({n_index}, {pair_index}) out of range: {} n values, {} pairs",
                    plan.n_values.len(),
                    plan.pairs.len()
                )));
            }
            let cell = run_cell(&plan, n_index, pair_index, trial);
            let flagged = !cell.row.flags.is_empty();
            let doc = serde_json::json!({
                "row": cell.row.to_csv_line(),
                "reports": cell.reports,
            });
            write_json(&out, &doc)?;
            if !cli.quiet {
                eprintln!("wrote bound reports to {}", out.display());
            }
            Ok(if flagged { 1 } else { 0 })
        }
        Command::Sweep { config, out } => {
            let mut cfg: SweepConfig = read_json(&config)?;
            if let Some(seed) = cli.seed {
                cfg.base_seed = seed;
            }
            let plan = cfg.build()?;
            let cells = plan.n_values.len() * plan.pairs.len() * plan.trials_per_cell;
            if !cli.quiet {
                eprintln!("sweep: {cells} cells");
            }
            let rows = run_sweep(&plan);
            let flagged = write_sweep_outputs(&plan, &rows, &out)?;
            if !cli.quiet {
                eprintln!("wrote {} rows to {}", rows.len(), out.display());
            }
            Ok(if flagged { 1 } else { 0 })
        }
        Command::Verify {
            suite,
            report,
            inject_fault,
        } => {
            let fault = inject_fault.as_deref().map(Fault::parse).transpose()?;
            let opts = VerifyOptions { fault };
            let outcome = run_suites(&suite, &opts)?;
            for s in &outcome.suites {
                println!(
                    "{}: {} ({:.2}s) — {}",
                    s.name,
                    if s.pass { "PASS" } else { "FAIL" },
                    s.seconds,
                    s.details
                );
            }
            if let Some(path) = report {
                write_json(&path, &outcome)?;
            }
            Ok(if outcome.all_pass { 0 } else { 1 })
        }
        Command::PlotData { input, kind, out } => {
            let kind = PlotKind::parse(&kind)?;
            pairmetric_cli::plot::emit_plot_data(&input, kind, &out)?;
            if !cli.quiet {
                eprintln!("wrote plot data to {}", out.display());
            }
            Ok(0)
        }
    }
}

/// Risk evaluation needs a loss spec; derive it from the model's own caps
/// with the standard margin so file-driven risk checks are self-contained.
fn risk_spec(
    ds: &pairmetric_core::Dataset,
    model: &pairmetric_core::DiagonalMetricModel,
) -> CliResult<LossSpec> {
    LossSpec::clipped_hinge(
        1.0,
        1.0 + model.caps().dist_cap,
        model.caps(),
        ds.layout.total_dim(),
    )
    .map_err(|e| CliError::invalid(e.to_string()))
}
