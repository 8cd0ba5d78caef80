//! Stage thresholds.
//!
//! A window is rejected at stage `i` when its prefix score satisfies
//! `P_{r_i}(x) <= t_i`, so raising `t_i` rejects more windows and lowers the
//! computation cost. Three settings are offered:
//!
//! * bound thresholds `t_i = t - M_{r_i}`, which make the cascade decide
//!   exactly like the strong classifier;
//! * detection-preserving thresholds, the largest values that still pass
//!   every training positive;
//! * greedy learning, which starts from the latter and repeatedly raises the
//!   threshold of the stage with the best cost saving per unit of detection
//!   rate lost, until the target detection rate would be violated.

use serde::{Deserialize, Serialize};

use crate::boosting::StrongClassifier;
use crate::cost::{cost_from_tally, tally_negatives, Partition};
use crate::error::{Error, Result};
use crate::profile::{tail_weights, ScoreProfile};

/// Margin below the weakest positive's prefix score; the pass rule is strict.
pub const DETECTION_MARGIN: f64 = 1e-9;

/// Default threshold step in normalized score units.
pub const DEFAULT_STEP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdVector {
    pub values: Vec<f64>,
    /// Threshold of the final full-length check, positive iff `P_T > final`.
    pub final_threshold: f64,
}

impl ThresholdVector {
    pub fn new(values: Vec<f64>, final_threshold: f64) -> Result<Self> {
        if values
            .iter()
            .chain([&final_threshold])
            .any(|v| !v.is_finite())
        {
            return Err(Error::RangeError("thresholds must be finite".into()));
        }
        Ok(Self {
            values,
            final_threshold,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Detection rate that must be kept, in `(0, 1]`.
    pub target_detection: f64,
    /// Additive threshold increment per move.
    pub step: f64,
    pub max_iterations: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            target_detection: 0.98,
            step: DEFAULT_STEP,
            max_iterations: 10_000,
        }
    }
}

impl LearnerConfig {
    fn validate(&self) -> Result<()> {
        if !(self.target_detection > 0.0 && self.target_detection <= 1.0) {
            return Err(Error::BadParams(format!(
                "target detection {} outside (0, 1]",
                self.target_detection
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::BadParams("step must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::BadParams("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// `t_i = t - M_{r_i}`, final check at the profile's threshold.
pub fn bound_thresholds(profile: &ScoreProfile, partition: &Partition) -> Result<ThresholdVector> {
    partition.validate(profile.len_weak())?;
    let t = profile.source_threshold();
    ThresholdVector::new(
        partition
            .points()
            .iter()
            .map(|&r| profile.bound_threshold(r, t))
            .collect(),
        t,
    )
}

/// [`bound_thresholds`] computed from the classifier alone.
pub fn bound_thresholds_for(
    classifier: &StrongClassifier,
    partition: &Partition,
) -> Result<ThresholdVector> {
    partition.validate(classifier.len())?;
    let weights: Vec<f64> = classifier.weights().collect();
    let tail = tail_weights(&weights);
    let t = classifier.global_threshold();
    ThresholdVector::new(partition.points().iter().map(|&r| t - tail[r]).collect(), t)
}

/// Largest thresholds (up to [`DETECTION_MARGIN`]) passing every positive,
/// stage by stage. The final threshold is lowered below the weakest
/// positive's full score when the strong classifier itself misses it, so the
/// cascade detects every profile positive.
pub fn exact_detection_thresholds(
    profile: &ScoreProfile,
    partition: &Partition,
) -> Result<ThresholdVector> {
    partition.validate(profile.len_weak())?;
    if profile.n_positives() == 0 {
        return Err(Error::NoPositives);
    }
    let positives = profile.positives();
    let mut alive: Vec<usize> = (0..positives.rows()).collect();
    let mut values = Vec::with_capacity(partition.len());
    for &r in partition.points() {
        let weakest = alive
            .iter()
            .map(|&i| positives.row(i)[r])
            .fold(f64::INFINITY, f64::min);
        let t = weakest - DETECTION_MARGIN;
        alive.retain(|&i| positives.row(i)[r] > t);
        values.push(t);
    }
    let total = profile.len_weak();
    let weakest_full = alive
        .iter()
        .map(|&i| positives.row(i)[total])
        .fold(f64::INFINITY, f64::min);
    let final_threshold = profile
        .source_threshold()
        .min(weakest_full - DETECTION_MARGIN);
    ThresholdVector::new(values, final_threshold)
}

/// Which positives a stage detection rate is computed over.
#[derive(Debug, Clone, Copy)]
pub enum DetectionScope<'a> {
    All,
    /// Indices of positives that reached the stage.
    Survivors(&'a [usize]),
}

/// Fraction of the scoped positives with `P_{r}(x) > t`.
pub fn stage_detection_rate(
    profile: &ScoreProfile,
    r: usize,
    t: f64,
    scope: DetectionScope<'_>,
) -> Result<f64> {
    if profile.n_positives() == 0 {
        return Err(Error::NoPositives);
    }
    if r > profile.len_weak() {
        return Err(Error::RangeError(format!("index {r} exceeds T")));
    }
    let positives = profile.positives();
    let (pass, n) = match scope {
        DetectionScope::All => (
            positives.iter().filter(|row| row[r] > t).count(),
            positives.rows(),
        ),
        DetectionScope::Survivors(idx) => (
            idx.iter().filter(|&&i| positives.row(i)[r] > t).count(),
            idx.len(),
        ),
    };
    Ok(if n == 0 { 1.0 } else { pass as f64 / n as f64 })
}

/// Indices of positives passing the first `stages` stages.
pub fn surviving_positives(
    profile: &ScoreProfile,
    partition: &Partition,
    thresholds: &ThresholdVector,
    stages: usize,
) -> Vec<usize> {
    let positives = profile.positives();
    (0..positives.rows())
        .filter(|&i| {
            let row = positives.row(i);
            partition
                .points()
                .iter()
                .zip(&thresholds.values)
                .take(stages)
                .all(|(&r, &t)| row[r] > t)
        })
        .collect()
}

/// Detection rate of the whole cascade on the profile positives, by
/// simulation (all stages plus the final check).
pub fn cascade_detection_rate(
    profile: &ScoreProfile,
    partition: &Partition,
    thresholds: &ThresholdVector,
) -> Result<f64> {
    if profile.n_positives() == 0 {
        return Err(Error::NoPositives);
    }
    Ok(detected_positives(
        profile,
        partition.points(),
        &thresholds.values,
        thresholds.final_threshold,
    ) as f64
        / profile.n_positives() as f64)
}

fn detected_positives(
    profile: &ScoreProfile,
    points: &[usize],
    values: &[f64],
    final_t: f64,
) -> usize {
    let total = profile.len_weak();
    profile
        .positives()
        .iter()
        .filter(|row| points.iter().zip(values).all(|(&r, &t)| row[r] > t) && row[total] > final_t)
        .count()
}

/// One committed move of the threshold learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerStep {
    /// 0 for the initial state.
    pub iteration: usize,
    /// 1-based stage whose threshold was raised; `None` for the initial state.
    pub stage: Option<usize>,
    pub threshold: Option<f64>,
    pub cost: f64,
    pub detection: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnerTrace {
    pub steps: Vec<LearnerStep>,
}

impl LearnerTrace {
    pub fn initial(&self) -> &LearnerStep {
        &self.steps[0]
    }

    pub fn last(&self) -> &LearnerStep {
        self.steps.last().expect("trace has an initial state")
    }
}

struct Evaluator<'a> {
    profile: &'a ScoreProfile,
    points: &'a [usize],
    check_cost: f64,
    final_threshold: f64,
    n_pos: f64,
}

impl Evaluator<'_> {
    fn cost(&self, values: &[f64]) -> f64 {
        let tally = tally_negatives(self.profile, self.points, values);
        cost_from_tally(
            &tally,
            self.points,
            self.profile.len_weak(),
            self.check_cost,
        )
    }

    fn detection(&self, values: &[f64]) -> f64 {
        detected_positives(self.profile, self.points, values, self.final_threshold) as f64
            / self.n_pos
    }
}

/// Greedy threshold learning under a detection-rate floor.
///
/// Each iteration tentatively raises every `t_i` by `config.step`, measures
/// the cost drop `df` and detection drop `dD`, and commits the stage with the
/// largest `df / dD` (stages losing no detection first, then lowest index).
/// Learning stops before the detection rate would fall below the target.
pub fn learn_thresholds(
    profile: &ScoreProfile,
    partition: &Partition,
    check_cost: f64,
    config: &LearnerConfig,
) -> Result<(ThresholdVector, LearnerTrace)> {
    config.validate()?;
    if profile.n_negatives() == 0 {
        return Err(Error::NoNegatives);
    }
    let mut thresholds = exact_detection_thresholds(profile, partition)?;
    let eval = Evaluator {
        profile,
        points: partition.points(),
        check_cost,
        final_threshold: thresholds.final_threshold,
        n_pos: profile.n_positives() as f64,
    };
    let mut cost = eval.cost(&thresholds.values);
    let mut detection = eval.detection(&thresholds.values);
    let mut trace = LearnerTrace {
        steps: vec![LearnerStep {
            iteration: 0,
            stage: None,
            threshold: None,
            cost,
            detection,
        }],
    };

    for iteration in 1..=config.max_iterations {
        let mut best: Option<(usize, f64, f64, f64)> = None; // (stage, ratio, cost, detection)
        let mut trial = thresholds.values.clone();
        for i in 0..trial.len() {
            let original = trial[i];
            trial[i] = original + config.step;
            let new_cost = eval.cost(&trial);
            let new_detection = eval.detection(&trial);
            trial[i] = original;
            let d_cost = cost - new_cost;
            let d_detection = detection - new_detection;
            let ratio = if d_detection <= 0.0 {
                f64::INFINITY
            } else {
                d_cost / d_detection
            };
            if best.as_ref().is_none_or(|b| ratio > b.1) {
                best = Some((i, ratio, new_cost, new_detection));
            }
        }
        let Some((j, _, new_cost, new_detection)) = best else {
            break;
        };
        if new_detection < config.target_detection {
            break;
        }
        thresholds.values[j] += config.step;
        cost = new_cost;
        detection = new_detection;
        trace.steps.push(LearnerStep {
            iteration,
            stage: Some(j + 1),
            threshold: Some(thresholds.values[j]),
            cost,
            detection,
        });
    }
    Ok((thresholds, trace))
}
