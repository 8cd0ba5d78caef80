//! Cascade execution with exact cost accounting.

use serde::{Deserialize, Serialize};

use crate::boosting::StrongClassifier;
use crate::cost::{cost_from_tally, tally_negatives, Partition};
use crate::dataset::{Label, LabeledDataset};
use crate::error::{Error, Result};
use crate::profile::ScoreProfile;
use crate::threshold::ThresholdVector;

/// A strong classifier split into early-rejection stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeModel {
    pub classifier: StrongClassifier,
    pub partition: Partition,
    pub thresholds: ThresholdVector,
    pub cost_c: f64,
}

impl CascadeModel {
    pub fn new(
        classifier: StrongClassifier,
        partition: Partition,
        thresholds: ThresholdVector,
        cost_c: f64,
    ) -> Result<Self> {
        partition.validate(classifier.len())?;
        if thresholds.len() != partition.len() {
            return Err(Error::RangeError(format!(
                "{} thresholds for {} stages",
                thresholds.len(),
                partition.len()
            )));
        }
        if !(cost_c > 0.0 && cost_c < 1.0) {
            return Err(Error::RangeError(format!(
                "c = {cost_c} must lie in (0, 1)"
            )));
        }
        Ok(Self {
            classifier,
            partition,
            thresholds,
            cost_c,
        })
    }

    pub fn stages(&self) -> usize {
        self.partition.len()
    }

    /// Runs `x` through the stages, reusing the running prefix score.
    pub fn classify(&self, x: &[f64]) -> Result<ClassificationResult> {
        if x.len() != self.classifier.dimensionality() {
            return Err(Error::DimensionMismatch {
                expected: self.classifier.dimensionality(),
                actual: x.len(),
            });
        }
        let members = self.classifier.members();
        let mut score = 0.0;
        let mut evaluated = 0usize;
        for (stage, (&r, &t)) in self
            .partition
            .points()
            .iter()
            .zip(&self.thresholds.values)
            .enumerate()
        {
            for m in &members[evaluated..r] {
                score += m.weight * f64::from(m.hypothesis.vote(x));
            }
            evaluated = r;
            if score <= t {
                return Ok(self.result(Label::Negative, stage + 1, r, stage + 1, score));
            }
        }
        for m in &members[evaluated..] {
            score += m.weight * f64::from(m.hypothesis.vote(x));
        }
        let label = if score > self.thresholds.final_threshold {
            Label::Positive
        } else {
            Label::Negative
        };
        let s = self.stages();
        Ok(self.result(label, s + 1, members.len(), s + 1, score))
    }

    fn result(
        &self,
        label: Label,
        exit_stage: usize,
        weak_evals: usize,
        checks: usize,
        score: f64,
    ) -> ClassificationResult {
        ClassificationResult {
            label,
            exit_stage,
            weak_evals,
            checks,
            cost: weak_evals as f64 + checks as f64 * self.cost_c,
            score,
        }
    }

    /// Classifies every sample and aggregates cost and accuracy.
    ///
    /// `avg_cost` and `avg_weak_evals` are taken over the negatives, the
    /// population the analytic cost describes; the `_all` variants include
    /// positives. Without negatives the averages fall back to all samples and
    /// a warning is recorded.
    pub fn batch_evaluate(&self, data: &LabeledDataset) -> Result<EvaluationReport> {
        if data.is_empty() {
            return Err(Error::BadParams("evaluation requires samples".into()));
        }
        if data.dim() != self.classifier.dimensionality() {
            return Err(Error::DimensionMismatch {
                expected: self.classifier.dimensionality(),
                actual: data.dim(),
            });
        }
        let results = data
            .samples()
            .iter()
            .map(|s| self.classify(&s.features))
            .collect::<Result<Vec<_>>>()?;

        let s = self.stages();
        let mut per_stage_rejections = vec![0usize; s];
        let mut survivors = 0usize;
        let (mut tp, mut fp) = (0usize, 0usize);
        let mut neg = Accumulator::default();
        let mut all = Accumulator::default();
        for (sample, res) in data.samples().iter().zip(&results) {
            if res.exit_stage <= s {
                per_stage_rejections[res.exit_stage - 1] += 1;
            } else {
                survivors += 1;
            }
            all.add(res);
            match sample.label {
                Label::Negative => {
                    neg.add(res);
                    if res.label == Label::Positive {
                        fp += 1;
                    }
                }
                Label::Positive => {
                    if res.label == Label::Positive {
                        tp += 1;
                    }
                }
            }
        }

        let n_pos = data.count(Label::Positive);
        let n_neg = data.count(Label::Negative);
        let mut warnings = Vec::new();
        let detection_rate = if n_pos == 0 {
            warnings.push("no positive samples; detection rate reported as 0".to_string());
            0.0
        } else {
            tp as f64 / n_pos as f64
        };
        let (false_positive_rate, analytic_cost, population) = if n_neg == 0 {
            warnings.push(
                "no negative samples; false-positive rate reported as 0 and costs averaged over all samples"
                    .to_string(),
            );
            (0.0, None, &all)
        } else {
            (
                fp as f64 / n_neg as f64,
                Some(self.analytic_cost(data)?),
                &neg,
            )
        };
        Ok(EvaluationReport {
            samples: data.len(),
            negatives: n_neg,
            positives: n_pos,
            avg_cost: population.mean_cost(),
            avg_weak_evals: population.mean_weak(),
            avg_cost_all: all.mean_cost(),
            avg_weak_evals_all: all.mean_weak(),
            detection_rate,
            false_positive_rate,
            per_stage_rejections,
            survivors,
            analytic_cost,
            warnings,
        })
    }

    /// Product-form cost over the negatives of `data` with this
    /// model's thresholds.
    pub fn analytic_cost(&self, data: &LabeledDataset) -> Result<f64> {
        let negatives = data.filter_label(Label::Negative);
        if negatives.is_empty() {
            return Err(Error::NoNegatives);
        }
        let profile = ScoreProfile::build(&self.classifier, &negatives)?;
        let tally = tally_negatives(&profile, self.partition.points(), &self.thresholds.values);
        Ok(cost_from_tally(
            &tally,
            self.partition.points(),
            self.classifier.len(),
            self.cost_c,
        ))
    }

    /// ROC points from sweeping the final threshold over the fall-through
    /// scores, stage thresholds fixed. Points run from the loosest final
    /// threshold (highest rates) to the strictest, where nothing is accepted.
    pub fn roc_sweep(&self, data: &LabeledDataset, n_points: usize) -> Result<Vec<RocPoint>> {
        if n_points < 2 {
            return Err(Error::BadParams("ROC sweep needs at least 2 points".into()));
        }
        let mut pos_scores = Vec::new();
        let mut neg_scores = Vec::new();
        for s in data.samples() {
            let res = self.classify(&s.features)?;
            if res.exit_stage > self.stages() {
                match s.label {
                    Label::Positive => pos_scores.push(res.score),
                    Label::Negative => neg_scores.push(res.score),
                }
            }
        }
        let n_pos = data.count(Label::Positive).max(1) as f64;
        let n_neg = data.count(Label::Negative).max(1) as f64;
        let mut levels: Vec<f64> = pos_scores.iter().chain(&neg_scores).copied().collect();
        levels.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
        levels.dedup();

        let mut thresholds = Vec::with_capacity(n_points);
        if levels.is_empty() {
            thresholds.push(f64::NEG_INFINITY);
            thresholds.push(f64::INFINITY);
        } else {
            // Below every score, then evenly spaced score levels, ending at the max.
            thresholds.push(levels[0] - 1.0);
            let inner = n_points - 1;
            for k in 0..inner {
                let idx = if inner == 1 {
                    levels.len() - 1
                } else {
                    k * (levels.len() - 1) / (inner - 1)
                };
                thresholds.push(levels[idx]);
            }
            thresholds.dedup();
        }
        Ok(thresholds
            .into_iter()
            .map(|tau| RocPoint {
                final_threshold: tau,
                false_positive_rate: neg_scores.iter().filter(|&&s| s > tau).count() as f64 / n_neg,
                detection_rate: pos_scores.iter().filter(|&&s| s > tau).count() as f64 / n_pos,
            })
            .collect())
    }
}

#[derive(Default)]
struct Accumulator {
    n: usize,
    cost: f64,
    weak: usize,
}

impl Accumulator {
    fn add(&mut self, r: &ClassificationResult) {
        self.n += 1;
        self.cost += r.cost;
        self.weak += r.weak_evals;
    }

    fn mean_cost(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.cost / self.n as f64
        }
    }

    fn mean_weak(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.weak as f64 / self.n as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub label: Label,
    /// 1-based; `S + 1` for a window that reached the final check.
    pub exit_stage: usize,
    pub weak_evals: usize,
    pub checks: usize,
    pub cost: f64,
    /// Prefix score at exit.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub samples: usize,
    pub negatives: usize,
    pub positives: usize,
    pub avg_cost: f64,
    pub avg_weak_evals: f64,
    pub avg_cost_all: f64,
    pub avg_weak_evals_all: f64,
    pub detection_rate: f64,
    pub false_positive_rate: f64,
    pub per_stage_rejections: Vec<usize>,
    pub survivors: usize,
    pub analytic_cost: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub final_threshold: f64,
    pub false_positive_rate: f64,
    pub detection_rate: f64,
}
