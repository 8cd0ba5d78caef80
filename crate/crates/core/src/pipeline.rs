//! File-to-file pipeline commands: `gen`, `train`, `partition`,
//! `thresholds`, `eval` and `roc`.
//!
//! Each command reads its inputs from disk, writes envelopes, reports and
//! CSV tables, and returns a one-line summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::boosting::train_adaboost;
use crate::cost::{CostParams, Partition, DEFAULT_CHECK_COST};
use crate::dataset::{generate, DatasetKind, GeneratorConfig, LabeledDataset};
use crate::envelope::{
    read_bytes, sha256_hex, write_bytes, CostTableRow, ModelEnvelope, Provenance, RunReport,
};
use crate::error::{Error, Result};
use crate::partition::{
    optimize_joint, optimize_local_chain, optimize_one_stage, OptimizerConfig, OptimizerMode,
};
use crate::profile::ScoreProfile;
use crate::runtime::CascadeModel;
use crate::threshold::{
    bound_thresholds, exact_detection_thresholds, learn_thresholds, LearnerConfig, DEFAULT_STEP,
};

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: DatasetKind,
    #[arg(long)]
    pub n_pos: usize,
    #[arg(long)]
    pub n_neg: usize,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Class separation; each kind has its own default.
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Inequality-check cost recorded in the envelope.
    #[arg(long, default_value_t = DEFAULT_CHECK_COST)]
    pub cost_c: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PartitionArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = OptimizerMode::Joint)]
    pub mode: OptimizerMode,
    #[arg(long, default_value_t = 8)]
    pub stages: usize,
    #[arg(long, default_value_t = DEFAULT_CHECK_COST)]
    pub cost_c: f64,
    /// Stop gap of the two-stage alternation.
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    /// Stop gap of the multi-stage alternation.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Scan full ranges, ignoring the growth bound and shrinking caps.
    #[arg(long)]
    pub exhaustive: bool,
    /// Stop scans after this many non-improving steps.
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Cost-vs-stage-count CSV.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// `t - M_r`: same decisions as the strong classifier.
    Bound,
    /// Largest thresholds passing every positive.
    Exact,
    /// Greedy learning down to a detection-rate target.
    Learn,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub cascade: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = ThresholdMode::Learn)]
    pub mode: ThresholdMode,
    /// Detection rate to keep.
    #[arg(long, default_value_t = 0.98)]
    pub target: f64,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Threshold-learning trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub cascade: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Refuse the cascade unless its classifier matches this model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RocArgs {
    #[arg(long)]
    pub cascade: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// ROC CSV with cascade and strong-classifier curves.
    #[arg(long)]
    pub out: PathBuf,
}

struct Timer(BTreeTimings);

type BTreeTimings = std::collections::BTreeMap<String, f64>;

impl Timer {
    fn new() -> Self {
        Timer(BTreeTimings::new())
    }

    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0
            .insert(name.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }
}

fn config_value<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

/// Loads a dataset and the SHA-256 of its file bytes.
pub fn load_dataset(path: &Path) -> Result<(LabeledDataset, String)> {
    let bytes = read_bytes(path)?;
    let data = LabeledDataset::read_csv(bytes.as_slice())?;
    Ok((data, sha256_hex(&bytes)))
}

pub fn run_gen(args: &GenArgs) -> Result<String> {
    let mut config = GeneratorConfig::new(args.kind, args.n_pos, args.n_neg, args.dim, args.seed);
    if let Some(sep) = args.separation {
        config = config.separation(sep);
    }
    let data = generate(&config)?;
    write_bytes(&args.out, &data.to_csv_bytes())?;
    Ok(format!(
        "wrote {} samples to {}",
        data.len(),
        args.out.display()
    ))
}

pub fn run_train(args: &TrainArgs) -> Result<String> {
    let mut timer = Timer::new();
    let (data, digest) = load_dataset(&args.data)?;
    let classifier = timer.time("train", || train_adaboost(&data, args.rounds, args.seed))?;
    let error = classifier.error_rate(&data)?;
    if !(args.cost_c > 0.0 && args.cost_c < 1.0) {
        return Err(Error::RangeError(format!(
            "cost_c = {} must lie in (0, 1)",
            args.cost_c
        )));
    }
    let members = classifier.len();
    let env = ModelEnvelope::new(classifier, args.cost_c, Provenance::new(args.seed, digest));
    env.write(&args.out)?;
    if let Some(path) = &args.report {
        let mut report = RunReport::new("train", config_value(args));
        report.traces = serde_json::json!({ "training_error": error, "members": members });
        report.timings_ms = timer.0;
        report.write(path)?;
    }
    Ok(format!(
        "trained {members} members, training error {error:.4}, wrote {}",
        args.out.display()
    ))
}

pub fn run_partition(args: &PartitionArgs) -> Result<String> {
    let mut timer = Timer::new();
    let mut env = ModelEnvelope::read(&args.model)?;
    let (data, digest) = load_dataset(&args.data)?;
    let profile = timer.time("profile", || ScoreProfile::build(&env.classifier, &data))?;
    let params = CostParams::for_profile(&profile, args.cost_c)?;
    let mut config = OptimizerConfig::new(args.mode, args.stages)
        .exhaustive(args.exhaustive)
        .patience(args.patience);
    config.mu = args.mu;
    config.eps = args.eps;

    let (partition, cost, table, traces) = match args.mode {
        OptimizerMode::OneStage => {
            let (r, f) = timer.time("optimize", || {
                optimize_one_stage(&profile, &params, &config)
            })?;
            let row = CostTableRow {
                stages: 1,
                partition: vec![r],
                cost: f,
                local_cost: None,
            };
            (
                Partition::new(vec![r], params.total())?,
                f,
                vec![row],
                serde_json::Value::Null,
            )
        }
        OptimizerMode::Local => {
            let res = timer.time("optimize", || {
                optimize_local_chain(&profile, &params, &config)
            })?;
            let table = res
                .per_stage
                .iter()
                .map(|s| CostTableRow {
                    stages: s.stages,
                    partition: s.partition.points().to_vec(),
                    cost: s.cost,
                    local_cost: None,
                })
                .collect();
            let traces = serde_json::json!({
                "growth_checks": res.growth_checks,
                "growth_violations": res.growth_violations,
                "optimizer": res.trace,
            });
            (res.partition, res.cost, table, traces)
        }
        OptimizerMode::Joint => {
            let res = timer.time("optimize", || optimize_joint(&profile, &params, &config))?;
            let local = timer.time("local_reference", || {
                optimize_local_chain(&profile, &params, &config.clone().exhaustive(false))
            })?;
            let table = res
                .per_stage
                .iter()
                .map(|s| CostTableRow {
                    stages: s.stages,
                    partition: s.partition.points().to_vec(),
                    cost: s.cost,
                    local_cost: local.per_stage.get(s.stages - 1).map(|l| l.cost),
                })
                .collect();
            let traces = serde_json::json!({ "optimizer": res.trace });
            (res.best.partition, res.best.cost, table, traces)
        }
    };

    if let Some(path) = &args.table {
        write_csv_rows(
            path,
            table.iter().map(|r| CostCsvRow {
                stages: r.stages,
                partition: join_points(&r.partition),
                cost: r.cost,
                local_cost: r.local_cost,
            }),
        )?;
    }
    let stages = partition.len();
    env.partition = Some(partition);
    env.thresholds = None;
    env.cost_c = args.cost_c;
    env.cost_table = Some(table);
    env.provenance = Provenance::new(env.provenance.seed, digest);
    env.write(&args.out)?;
    if let Some(path) = &args.report {
        let mut report = RunReport::new("partition", config_value(args));
        report.traces = traces;
        report.timings_ms = timer.0;
        report.write(path)?;
    }
    Ok(format!(
        "{stages}-stage partition {} with cost {cost:.6}, wrote {}",
        join_points(env.partition.as_ref().expect("set above").points()),
        args.out.display()
    ))
}

pub fn run_thresholds(args: &ThresholdArgs) -> Result<String> {
    let mut timer = Timer::new();
    let mut env = ModelEnvelope::read(&args.cascade)?;
    let partition = env
        .partition
        .clone()
        .ok_or_else(|| Error::Parse("cascade envelope has no partition".into()))?;
    let (data, digest) = load_dataset(&args.data)?;
    let profile = timer.time("profile", || ScoreProfile::build(&env.classifier, &data))?;
    let mut traces = serde_json::Value::Null;
    let thresholds = match args.mode {
        ThresholdMode::Bound => bound_thresholds(&profile, &partition)?,
        ThresholdMode::Exact => exact_detection_thresholds(&profile, &partition)?,
        ThresholdMode::Learn => {
            let config = LearnerConfig {
                target_detection: args.target,
                step: args.step,
                max_iterations: args.max_iterations,
            };
            let (thresholds, trace) = timer.time("learn", || {
                learn_thresholds(&profile, &partition, env.cost_c, &config)
            })?;
            if let Some(path) = &args.trace {
                write_csv_rows(
                    path,
                    trace.steps.iter().map(|s| TraceCsvRow {
                        iteration: s.iteration,
                        stage: s.stage,
                        threshold: s.threshold,
                        cost: s.cost,
                        detection: s.detection,
                    }),
                )?;
            }
            traces = serde_json::json!({ "learner": trace });
            thresholds
        }
    };
    env.thresholds = Some(thresholds);
    env.provenance = Provenance::new(env.provenance.seed, digest);
    env.write(&args.out)?;
    if let Some(path) = &args.report {
        let mut report = RunReport::new("thresholds", config_value(args));
        report.traces = traces;
        report.timings_ms = timer.0;
        report.write(path)?;
    }
    Ok(format!("wrote thresholds to {}", args.out.display()))
}

fn checked_cascade(cascade: &Path, model: Option<&Path>) -> Result<CascadeModel> {
    let env = ModelEnvelope::read(cascade)?;
    if let Some(model) = model {
        let reference = ModelEnvelope::read(model)?;
        let (a, b) = (env.classifier_digest(), reference.classifier_digest());
        if a != b {
            return Err(Error::DigestMismatch {
                cascade: a,
                model: b,
            });
        }
    }
    env.cascade()
}

pub fn run_eval(args: &EvalArgs) -> Result<String> {
    let mut timer = Timer::new();
    let model = checked_cascade(&args.cascade, args.model.as_deref())?;
    let (data, _) = load_dataset(&args.data)?;
    let eval = timer.time("evaluate", || model.batch_evaluate(&data))?;
    for w in &eval.warnings {
        log::warn!("{w}");
    }
    let summary = format!(
        "avg_cost {:.6} avg_weak_evals {:.4} detection {:.4} fpr {:.4}",
        eval.avg_cost, eval.avg_weak_evals, eval.detection_rate, eval.false_positive_rate
    );
    if let Some(path) = &args.report {
        let mut report = RunReport::new("eval", config_value(args));
        report.evaluation = Some(eval);
        report.timings_ms = timer.0;
        report.write(path)?;
    }
    Ok(summary)
}

pub fn run_roc(args: &RocArgs) -> Result<String> {
    let model = checked_cascade(&args.cascade, None)?;
    let (data, _) = load_dataset(&args.data)?;
    let strong = CascadeModel::new(
        model.classifier.clone(),
        Partition::empty(),
        crate::threshold::ThresholdVector::new(vec![], model.classifier.global_threshold())?,
        model.cost_c,
    )?;
    let mut rows = Vec::new();
    for (name, m) in [("cascade", &model), ("strong", &strong)] {
        for p in m.roc_sweep(&data, args.points)? {
            rows.push(RocCsvRow {
                curve: name,
                final_threshold: p.final_threshold,
                false_positive_rate: p.false_positive_rate,
                detection_rate: p.detection_rate,
            });
        }
    }
    let n = rows.len();
    write_csv_rows(&args.out, rows.into_iter())?;
    Ok(format!("wrote {n} ROC points to {}", args.out.display()))
}

#[derive(Serialize)]
struct CostCsvRow {
    stages: usize,
    partition: String,
    cost: f64,
    local_cost: Option<f64>,
}

#[derive(Serialize)]
struct TraceCsvRow {
    iteration: usize,
    stage: Option<usize>,
    threshold: Option<f64>,
    cost: f64,
    detection: f64,
}

#[derive(Serialize)]
struct RocCsvRow {
    curve: &'static str,
    final_threshold: f64,
    false_positive_rate: f64,
    detection_rate: f64,
}

fn join_points(points: &[usize]) -> String {
    points
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn write_csv_rows<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    write_bytes(path, &bytes)
}
