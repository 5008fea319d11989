//! Command-line interface. Diagnostics go to stderr; data to files or stdout.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use riskunlearn_core::metrics::metric_gap;
use riskunlearn_core::unlearn::{compute_saliency_mask, Method};

use crate::checkpoint;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::pipeline::{
    baseline_checkpoint_path, cell_checkpoint_path, evaluate_model, load_data, run_cell, run_experiment,
    save_checkpoints, split_for, train_baseline, unlearn_config, CellReport,
};
use crate::report::{
    emit_plot_data, emit_report, read_artifacts, result_columns, result_rows, write_artifacts, Format,
};
use crate::seeds::cell_seed;

const DEFAULT_OUT: &str = "riskunlearn-out";

#[derive(Debug, Parser)]
#[command(name = "riskunlearn", version, about = "Clinical-risk-aware machine unlearning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train the baseline model only.
    Train(Common),
    /// Apply one unlearning method to a baseline checkpoint.
    Unlearn(Common),
    /// Print the metrics of a checkpoint.
    Eval(Common),
    /// Run the full experiment.
    Run(Common),
    /// Re-emit tables and plot data from saved artifacts.
    Report(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Results format; both are written when omitted.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Unlearning method.
    #[arg(long)]
    method: Option<String>,
    /// Forget fraction.
    #[arg(long)]
    fraction: Option<f64>,
    /// Checkpoint to read instead of the one under the output directory.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn main_with_args<I, S>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            eprint!("{e}");
            return 1;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("riskunlearn: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Train(a) => train(&a),
        Command::Unlearn(a) => unlearn(&a),
        Command::Eval(a) => eval(&a, stdout),
        Command::Run(a) => run(&a),
        Command::Report(a) => report(&a),
    }
}

fn load_config(a: &Common, required: bool) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None if required => return Err(HarnessError::Config("--config is required".into())),
        None => ExperimentConfig::default_synthetic(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(a: &Common, cfg: Option<&ExperimentConfig>) -> PathBuf {
    a.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn formats(a: &Common) -> Result<Vec<Format>> {
    match &a.format {
        Some(f) => Ok(vec![f.parse()?]),
        None => Ok(vec![Format::Csv, Format::Json]),
    }
}

fn method_arg(a: &Common) -> Result<Method> {
    let name = a
        .method
        .as_deref()
        .ok_or_else(|| HarnessError::Config("--method is required".into()))?;
    name.parse()
        .map_err(|_| HarnessError::Config(format!("--method: unknown unlearning method `{name}`")))
}

fn fraction_arg(a: &Common, cfg: &ExperimentConfig) -> Result<f64> {
    match (a.fraction, cfg.fractions.as_slice()) {
        (Some(f), _) if f > 0.0 && f < 1.0 => Ok(f),
        (Some(f), _) => Err(HarnessError::Config(format!("--fraction: {f} is not in (0, 1)"))),
        (None, [only]) => Ok(*only),
        (None, _) => Err(HarnessError::Config("--fraction is required".into())),
    }
}

fn train(a: &Common) -> Result<()> {
    let cfg = load_config(a, true)?;
    let out = out_dir(a, Some(&cfg));
    let data = load_data(&cfg)?;
    let theta_o = train_baseline(&cfg, &data)?;
    let path = a.checkpoint.clone().unwrap_or_else(|| baseline_checkpoint_path(&out));
    checkpoint::save(&theta_o, &path)?;
    eprintln!("baseline written to {}", path.display());
    Ok(())
}

fn unlearn(a: &Common) -> Result<()> {
    let cfg = load_config(a, true)?;
    let method = method_arg(a)?;
    let fraction = fraction_arg(a, &cfg)?;
    let out = out_dir(a, Some(&cfg));
    let data = load_data(&cfg)?;
    let theta_o = load_checkpoint(a.checkpoint.as_deref().unwrap_or(&baseline_checkpoint_path(&out)))?;
    let split = split_for(&cfg, &data, fraction)?;
    let mask = if method.uses_mask() {
        Some(compute_saliency_mask(&theta_o, &data.train, &split.forget)?)
    } else {
        None
    };
    let theta_u = run_cell(&theta_o, &data, &split, &unlearn_config(&cfg, fraction, method), mask.as_ref())?;
    let path = cell_checkpoint_path(&out, fraction, method);
    checkpoint::save(&theta_u, &path)?;
    eprintln!("{method} model written to {}", path.display());
    Ok(())
}

/// Metrics of one checkpoint; GAP is added when the retrain checkpoint exists.
fn eval(a: &Common, stdout: &mut dyn Write) -> Result<()> {
    let cfg = load_config(a, true)?;
    let fraction = fraction_arg(a, &cfg)?;
    let out = out_dir(a, Some(&cfg));
    let method = match (&a.method, &a.checkpoint) {
        (None, Some(_)) => None,
        _ => Some(method_arg(a)?),
    };
    let path = match (&a.checkpoint, method) {
        (Some(p), _) => p.clone(),
        (None, Some(m)) => cell_checkpoint_path(&out, fraction, m),
        (None, None) => unreachable!("method is required without --checkpoint"),
    };
    let params = load_checkpoint(&path)?;
    let data = load_data(&cfg)?;
    let split = split_for(&cfg, &data, fraction)?;
    let risks = cfg.risk_configs()?;
    let mut report = evaluate_model(&params, &cfg, &data, &split, &risks)?;
    let retrain_path = cell_checkpoint_path(&out, fraction, Method::Retrain);
    if retrain_path.exists() {
        let reference = evaluate_model(&load_checkpoint(&retrain_path)?, &cfg, &data, &split, &risks)?;
        report.gap = Some(metric_gap(&report, &reference));
    } else {
        eprintln!("warning: no retrain checkpoint at {}; GAP omitted", retrain_path.display());
    }

    let method = method.unwrap_or(Method::Retrain);
    let cell = CellReport {
        dataset: cfg.dataset_id.clone(),
        fraction,
        method,
        seed: cell_seed(cfg.seed, &cfg.dataset_id, fraction, method.name()),
        report,
    };
    let names: Vec<String> = risks.iter().map(|r| r.name.clone()).collect();
    let artifacts = crate::pipeline::RunArtifacts {
        config: cfg,
        seeds: crate::pipeline::SeedRecord {
            global: 0,
            baseline: 0,
            splits: Vec::new(),
        },
        risks: names.clone(),
        baseline_report: Vec::new(),
        reports: vec![cell],
        errors: Vec::new(),
        warnings: Vec::new(),
        timing: Default::default(),
        baseline: None,
        checkpoints: Vec::new(),
    };
    let cols = result_columns(&names);
    let row = result_rows(&artifacts).remove(0);
    let text = match a.format.as_deref() {
        Some("json") => {
            let obj: Map<String, Value> = cols.into_iter().zip(row).collect();
            let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("row serializes");
            s.push('\n');
            s
        }
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&cols).expect("in-memory write");
            w.write_record(row.iter().map(crate::report::cell_text)).expect("in-memory write");
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
        }
    };
    stdout.write_all(text.as_bytes())?;
    Ok(())
}

fn run(a: &Common) -> Result<()> {
    let cfg = load_config(a, false)?;
    let out = out_dir(a, Some(&cfg));
    let artifacts = run_experiment(&cfg)?;
    save_checkpoints(&artifacts, &out)?;
    write_artifacts(&artifacts, &out)?;
    for f in formats(a)? {
        emit_report(&artifacts, &out, f)?;
    }
    emit_plot_data(&artifacts, &out)?;
    for w in &artifacts.warnings {
        eprintln!("warning: {w}");
    }
    for e in &artifacts.errors {
        eprintln!("error: fraction {} method {}: {}", e.fraction, e.method, e.error);
    }
    let t = &artifacts.timing;
    eprintln!(
        "{} reports written to {} (baseline {:.2}s, mask {:.2}s, unlearn {:.2}s, eval {:.2}s)",
        artifacts.reports.len(),
        out.display(),
        t.baseline,
        t.mask,
        t.unlearn,
        t.eval
    );
    if artifacts.reports.is_empty() && !artifacts.errors.is_empty() {
        return Err(HarnessError::Runtime("every cell failed".into()));
    }
    Ok(())
}

fn report(a: &Common) -> Result<()> {
    let out = out_dir(a, None);
    let artifacts = read_artifacts(&out)?;
    for f in formats(a)? {
        let path = emit_report(&artifacts, &out, f)?;
        eprintln!("wrote {}", path.display());
    }
    emit_plot_data(&artifacts, &out)?;
    Ok(())
}

fn load_checkpoint(path: &Path) -> Result<riskunlearn_core::ParamVector> {
    checkpoint::load(path)
}
