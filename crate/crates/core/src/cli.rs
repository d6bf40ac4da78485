// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. `main` only parses arguments and maps errors to
//! exit codes; everything else lives here so it can be driven from tests.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calibrator::{Calibrator, Method};
use crate::cdf::Interpolation;
use crate::error::{Error, Result};
use crate::forecast::ForecastSet;
use crate::interval::{pit, IntervalCalibrationPlot, IntervalCalibrator};
use crate::metrics::{default_n_bins, evaluate, CalibrationReport};
use crate::render;
use crate::scaling::fit_std_scaling;
use crate::synthetic::{
    generate_cauchy_counterexample, generate_synthetic, ScenarioKind, SyntheticScenario,
};
use crate::SCHEMA_VERSION;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "CALIBRE_REG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "calibre-reg", version, about = "Calibration diagnostics for regression uncertainty")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reliability diagram, ENCE, c_v and NLL for one forecast file.
    Evaluate(EvaluateArgs),
    /// Fit a recalibration on one split and report before/after on both.
    Calibrate(CalibrateArgs),
    /// Write a synthetic forecast set.
    Simulate(SimulateArgs),
    /// Run both recalibration methods on identical splits.
    Compare(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Number of sigma bins (default: min(15, T/50), at least 1).
    #[arg(long)]
    pub n_bins: Option<usize>,
    /// Also write SVG diagrams.
    #[arg(long)]
    pub svg: bool,
    /// Directory for output files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Forecast file (CSV `mu,sigma,y` or JSON array).
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Single input to split (see --split) or reuse (see --allow-same-set).
    #[arg(long, conflicts_with = "recal")]
    pub input: Option<PathBuf>,
    /// Recalibration set.
    #[arg(long, requires = "val")]
    pub recal: Option<PathBuf>,
    /// Validation set.
    #[arg(long, requires = "recal")]
    pub val: Option<PathBuf>,
    #[arg(long, default_value = "std_scaling")]
    pub method: String,
    /// Recalibration share of --input: a fraction in (0, 1) for a seeded
    /// random split, or a whole count >= 1 for the leading records.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fit and evaluate on the same records.
    #[arg(long)]
    pub allow_same_set: bool,
    /// Interpolation between isotonic knots for the interval method.
    #[arg(long, default_value = "linear")]
    pub interp: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioArg {
    Oracle,
    Random,
    Overconfident,
    Cauchy,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    /// Number of records.
    #[arg(long, default_value_t = 50_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overconfidence factor c (sigma = true std / c).
    #[arg(long, default_value_t = 2.0)]
    pub factor: f64,
    /// Output CSV path (default: <out-dir>/<scenario>.csv).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Sizes the global rayon pool from [`THREADS_ENV`] if set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::Usage(format!("{THREADS_ENV} must be at least 1")));
        }
        // Fails only if a pool already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs one command and returns the text to print on stdout.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Calibrate(a) => cmd_calibrate(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Compare(a) => cmd_compare(&a),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn report(set: &ForecastSet, n_bins: Option<usize>) -> Result<CalibrationReport> {
    if n_bins == Some(0) {
        return Err(Error::InvalidBinCount {
            n_bins: 0,
            len: set.len(),
        });
    }
    evaluate(set, n_bins.unwrap_or_else(|| default_n_bins(set.len())))
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<String> {
    if a.common.n_bins == Some(0) {
        return Err(Error::Usage("--n-bins must be at least 1".into()));
    }
    let set = ForecastSet::load(&a.input, "input")?;
    let rep = report(&set, a.common.n_bins)?;
    ensure_dir(&a.common.out_dir)?;
    let json = to_json(&rep);
    write(&a.common.out_dir, "report.json", &json)?;
    if a.common.svg {
        write(
            &a.common.out_dir,
            "reliability.svg",
            &render::reliability_svg(&rep, "Reliability diagram"),
        )?;
    }
    Ok(json)
}

struct Splits {
    recal: ForecastSet,
    val: ForecastSet,
    same_set: bool,
}

fn resolve_splits(a: &CalibrateArgs) -> Result<Splits> {
    if a.common.n_bins == Some(0) {
        return Err(Error::Usage("--n-bins must be at least 1".into()));
    }
    match (&a.input, &a.recal, &a.val) {
        (_, Some(r), Some(v)) => {
            if a.split.is_some() {
                return Err(Error::Usage("--split applies to --input only".into()));
            }
            Ok(Splits {
                recal: ForecastSet::load(r, "recalibration")?,
                val: ForecastSet::load(v, "validation")?,
                same_set: false,
            })
        }
        (Some(path), None, None) => match (a.split, a.allow_same_set) {
            (Some(_), true) => Err(Error::Usage(
                "--split and --allow-same-set are mutually exclusive".into(),
            )),
            (Some(f), false) => {
                let set = ForecastSet::load(path, "input")?;
                let (recal, val) = if f >= 1.0 {
                    if f.fract() != 0.0 {
                        return Err(Error::Usage(format!(
                            "--split count must be a whole number, got {f}"
                        )));
                    }
                    set.split_at(f as usize)?
                } else {
                    set.split_random(f, a.seed)?
                };
                Ok(Splits {
                    recal,
                    val,
                    same_set: false,
                })
            }
            (None, true) => {
                let set = ForecastSet::load(path, "input")?;
                Ok(Splits {
                    recal: set.clone().with_label("recalibration"),
                    val: set.with_label("validation"),
                    same_set: true,
                })
            }
            (None, false) => Err(Error::Usage(
                "fitting and evaluating need disjoint sets: pass --recal/--val or --split, \
                 or --allow-same-set to reuse --input"
                    .into(),
            )),
        },
        _ => Err(Error::Usage(
            "provide --input, or both --recal and --val".into(),
        )),
    }
}

fn fit(method: Method, recal: &ForecastSet, interp: Interpolation) -> Result<Calibrator> {
    Ok(match method {
        Method::StdScaling => Calibrator::StdScaling(fit_std_scaling(recal)?),
        Method::Interval => Calibrator::Interval(IntervalCalibrator::fit(recal, interp)?),
    })
}

#[derive(Serialize)]
struct PlotPair<'a> {
    before: &'a IntervalCalibrationPlot,
    after: &'a IntervalCalibrationPlot,
}

#[derive(Serialize)]
struct SplitSummary {
    n_records: usize,
    ence_before: f64,
    ence_after: f64,
    cv_before: f64,
    cv_after: f64,
    mean_nll_before: f64,
    mean_nll_after: f64,
    skipped: usize,
}

#[derive(Serialize)]
struct CalibrateSummary {
    schema_version: u32,
    method: Method,
    same_set: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    recalibration: SplitSummary,
    validation: SplitSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    interval_max_abs_deviation_after: Option<f64>,
}

fn summarize(before: &CalibrationReport, after: &CalibrationReport, skipped: usize) -> SplitSummary {
    SplitSummary {
        n_records: before.n_records,
        ence_before: before.ence,
        ence_after: after.ence,
        cv_before: before.cv,
        cv_after: after.cv,
        mean_nll_before: before.mean_nll,
        mean_nll_after: after.mean_nll,
        skipped,
    }
}

fn parse_method_and_interp(a: &CalibrateArgs) -> Result<(Method, Interpolation)> {
    Ok((a.method.parse()?, a.interp.parse()?))
}

pub fn cmd_calibrate(a: &CalibrateArgs) -> Result<String> {
    let (method, interp) = parse_method_and_interp(a)?;
    let splits = resolve_splits(a)?;
    let cal = fit(method, &splits.recal, interp)?;

    let recal_after = cal.apply(&splits.recal)?;
    let val_after = cal.apply(&splits.val)?;
    for (name, applied) in [("recalibration", &recal_after), ("validation", &val_after)] {
        if applied.skipped > 0 {
            eprintln!(
                "warning: {} {name} records skipped: moment integral did not converge",
                applied.skipped
            );
        }
    }

    let n_bins = a.common.n_bins;
    let rb = report(&splits.recal, n_bins)?;
    let ra = report(&recal_after.set, n_bins)?;
    let vb = report(&splits.val, n_bins)?;
    let va = report(&val_after.set, n_bins)?;

    let out = &a.common.out_dir;
    ensure_dir(out)?;
    write(out, "calibrator.json", &to_json(&cal))?;
    write(out, "recal_before.json", &to_json(&rb))?;
    write(out, "recal_after.json", &to_json(&ra))?;
    write(out, "val_before.json", &to_json(&vb))?;
    write(out, "val_after.json", &to_json(&va))?;

    let mut interval_dev = None;
    if let Calibrator::Interval(ic) = &cal {
        let before = IntervalCalibrationPlot::from_pit(&pit(&splits.val));
        let after = ic.plot(&splits.val);
        interval_dev = Some(after.max_abs_deviation);
        write(
            out,
            "val_interval_plot.json",
            &to_json(&PlotPair {
                before: &before,
                after: &after,
            }),
        )?;
        if a.common.svg {
            write(
                out,
                "val_interval_before.svg",
                &render::interval_plot_svg(&before, "Validation, before"),
            )?;
            write(
                out,
                "val_interval_after.svg",
                &render::interval_plot_svg(&after, "Validation, after"),
            )?;
        }
    }
    if a.common.svg {
        write(
            out,
            "val_reliability.svg",
            &render::reliability_row_svg(&[("Before", &vb), ("After", &va)]),
        )?;
        write(
            out,
            "recal_reliability.svg",
            &render::reliability_row_svg(&[("Before", &rb), ("After", &ra)]),
        )?;
    }

    let summary = CalibrateSummary {
        schema_version: SCHEMA_VERSION,
        method,
        same_set: splits.same_set,
        s: match &cal {
            Calibrator::StdScaling(c) => Some(c.s),
            Calibrator::Interval(_) => None,
        },
        recalibration: summarize(&rb, &ra, recal_after.skipped),
        validation: summarize(&vb, &va, val_after.skipped),
        interval_max_abs_deviation_after: interval_dev,
    };
    let json = to_json(&summary);
    write(out, "summary.json", &json)?;
    Ok(json)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<String> {
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| a.out_dir.join(format!("{}.csv", scenario_name(a.scenario))));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    let file = fs::File::create(&path)?;
    let n = match a.scenario {
        ScenarioArg::Cauchy => {
            let sample = generate_cauchy_counterexample(a.n, a.seed)?;
            sample.write_csv(std::io::BufWriter::new(file))?;
            sample.len()
        }
        other => {
            let kind = match other {
                ScenarioArg::Oracle => ScenarioKind::OracleUncertainty,
                ScenarioArg::Random => ScenarioKind::RandomUncertainty,
                ScenarioArg::Overconfident => ScenarioKind::OverconfidentByFactor { factor: a.factor },
                ScenarioArg::Cauchy => unreachable!(),
            };
            let set = generate_synthetic(&SyntheticScenario::new(kind, a.n, a.seed))?;
            set.write_csv(std::io::BufWriter::new(file))?;
            set.len()
        }
    };
    Ok(format!("wrote {n} records to {}\n", path.display()))
}

fn scenario_name(s: ScenarioArg) -> &'static str {
    match s {
        ScenarioArg::Oracle => "oracle",
        ScenarioArg::Random => "random",
        ScenarioArg::Overconfident => "overconfident",
        ScenarioArg::Cauchy => "cauchy",
    }
}

#[derive(Debug, Serialize)]
pub struct CompareColumn {
    pub name: String,
    pub ence: f64,
    pub cv: f64,
    pub mean_nll: f64,
    pub interval_max_abs_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub skipped: usize,
}

#[derive(Debug, Serialize)]
pub struct CompareTable {
    pub schema_version: u32,
    pub n_recal: usize,
    pub n_val: usize,
    pub same_set: bool,
    /// Before calibration, STD scaling, interval (isotonic) recalibration.
    pub columns: Vec<CompareColumn>,
}

pub fn cmd_compare(a: &CalibrateArgs) -> Result<String> {
    let interp: Interpolation = a.interp.parse()?;
    let splits = resolve_splits(a)?;
    let n_bins = a.common.n_bins;
    let val = &splits.val;

    let scaling = fit_std_scaling(&splits.recal)?;
    let scaled = scaling.apply(val)?;
    let interval = IntervalCalibrator::fit(&splits.recal, interp)?;
    let interval_applied = interval.apply(val)?;

    let before = report(val, n_bins)?;
    let after_scaling = report(&scaled, n_bins)?;
    let after_interval = report(&interval_applied.set, n_bins)?;

    let plot_before = IntervalCalibrationPlot::from_pit(&pit(val));
    let plot_scaling = IntervalCalibrationPlot::from_pit(&pit(&scaled));
    let plot_interval = interval.plot(val);

    let column = |name: &str, r: &CalibrationReport, p: &IntervalCalibrationPlot, s, skipped| {
        CompareColumn {
            name: name.to_string(),
            ence: r.ence,
            cv: r.cv,
            mean_nll: r.mean_nll,
            interval_max_abs_deviation: p.max_abs_deviation,
            s,
            skipped,
        }
    };
    let table = CompareTable {
        schema_version: SCHEMA_VERSION,
        n_recal: splits.recal.len(),
        n_val: val.len(),
        same_set: splits.same_set,
        columns: vec![
            column("before", &before, &plot_before, None, 0),
            column("std_scaling", &after_scaling, &plot_scaling, Some(scaling.s), 0),
            column(
                "interval",
                &after_interval,
                &plot_interval,
                None,
                interval_applied.skipped,
            ),
        ],
    };

    let out = &a.common.out_dir;
    ensure_dir(out)?;
    let json = to_json(&table);
    write(out, "compare.json", &json)?;
    eprint!("{}", format_compare(&table));
    if a.common.svg {
        write(
            out,
            "compare.svg",
            &render::reliability_row_svg(&[
                ("Before calibration", &before),
                ("STD scaling", &after_scaling),
                ("Interval (isotonic)", &after_interval),
            ]),
        )?;
    }
    Ok(json)
}

/// Human-readable version of a comparison table, one row per column.
pub fn format_compare(table: &CompareTable) -> String {
    let mut s = format!("{:<12} {:>9} {:>7} {:>9}\n", "", "ENCE", "c_v", "PIT dev");
    for c in &table.columns {
        s.push_str(&format!(
            "{:<12} {:>8.2}% {:>7.3} {:>9.4}\n",
            c.name,
            100.0 * c.ence,
            c.cv,
            c.interval_max_abs_deviation
        ));
    }
    s
}
