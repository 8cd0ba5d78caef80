//! Discrete AdaBoost over axis-aligned decision stumps.
//!
//! The trainer returns classifiers in canonical form: members ordered by
//! non-increasing weight and weights summing to one. Everything downstream
//! (tail maxima, partition search, stage thresholds) assumes that form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Label, LabeledDataset};
use crate::error::{Error, Result};

/// Tolerance on the weight sum of a canonical classifier.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Floor applied to AdaBoost sample weights after each renormalization.
const SAMPLE_WEIGHT_FLOOR: f64 = 1e-12;

/// Orientation of a stump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "+1")]
    Positive,
    #[serde(rename = "-1")]
    Negative,
}

impl Polarity {
    pub fn value(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }
}

/// Single-feature threshold rule voting +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakHypothesis {
    pub feature_index: usize,
    pub split_value: f64,
    pub polarity: Polarity,
}

impl WeakHypothesis {
    pub fn new(feature_index: usize, split_value: f64, polarity: Polarity) -> Self {
        Self {
            feature_index,
            split_value,
            polarity,
        }
    }

    /// Votes +1 iff `polarity * x[feature] >= polarity * split`.
    #[inline]
    pub fn vote(&self, x: &[f64]) -> i8 {
        let p = self.polarity.value();
        if p * x[self.feature_index] >= p * self.split_value {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub weight: f64,
    pub hypothesis: WeakHypothesis,
}

/// Weighted vote `H(x) = sum_i weight_i * h_i(x)`, positive iff `H(x) > threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongClassifier {
    members: Vec<Member>,
    global_threshold: f64,
    dimensionality: usize,
}

impl StrongClassifier {
    pub fn new(members: Vec<Member>, global_threshold: f64, dimensionality: usize) -> Result<Self> {
        if dimensionality == 0 {
            return Err(Error::BadParams("dimensionality must be positive".into()));
        }
        if !global_threshold.is_finite() {
            return Err(Error::BadParams("global threshold must be finite".into()));
        }
        for m in &members {
            if m.hypothesis.feature_index >= dimensionality {
                return Err(Error::DimensionMismatch {
                    expected: dimensionality,
                    actual: m.hypothesis.feature_index + 1,
                });
            }
            if !m.hypothesis.split_value.is_finite() {
                return Err(Error::BadParams("split values must be finite".into()));
            }
        }
        Ok(Self {
            members,
            global_threshold,
            dimensionality,
        })
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.members.iter().map(|m| m.weight)
    }

    /// Number of weak hypotheses, `T`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn global_threshold(&self) -> f64 {
        self.global_threshold
    }

    pub fn dimensionality(&self) -> usize {
        self.dimensionality
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.global_threshold = threshold;
        self
    }

    /// True when weights are positive, non-increasing and sum to one.
    pub fn is_canonical(&self) -> bool {
        let sorted = self.members.windows(2).all(|w| w[0].weight >= w[1].weight);
        let positive = self.members.iter().all(|m| m.weight > 0.0);
        let sum: f64 = self.weights().sum();
        sorted && positive && (sum - 1.0).abs() <= WEIGHT_SUM_TOLERANCE
    }

    /// Stably sorts members by descending weight and rescales weights and
    /// threshold by the weight sum. Decisions are unchanged for every input.
    pub fn canonicalize(mut self) -> Result<Self> {
        for (index, m) in self.members.iter().enumerate() {
            if !(m.weight > 0.0) || !m.weight.is_finite() {
                return Err(Error::NonPositiveWeight {
                    index,
                    weight: m.weight,
                });
            }
        }
        if self.is_canonical() {
            return Ok(self);
        }
        self.members
            .sort_by(|a, b| b.weight.partial_cmp(&a.weight).expect("finite weights"));
        let sum: f64 = self.weights().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            for m in &mut self.members {
                m.weight /= sum;
            }
            self.global_threshold /= sum;
        }
        Ok(self)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimensionality {
            return Err(Error::DimensionMismatch {
                expected: self.dimensionality,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Votes of every member on `x`, in member order.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<i8>> {
        self.check_dim(x)?;
        Ok(self.members.iter().map(|m| m.hypothesis.vote(x)).collect())
    }

    /// `H(x)`, accumulated in member order.
    pub fn strong_score(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.members.iter().fold(0.0, |acc, m| {
            acc + m.weight * f64::from(m.hypothesis.vote(x))
        }))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let score = self.strong_score(x)?;
        Ok(if score > self.global_threshold {
            Label::Positive
        } else {
            Label::Negative
        })
    }

    /// Fraction of `data` misclassified at the classifier's own threshold.
    pub fn error_rate(&self, data: &LabeledDataset) -> Result<f64> {
        if data.is_empty() {
            return Ok(0.0);
        }
        let mut wrong = 0usize;
        for s in data.samples() {
            if self.predict(&s.features)? != s.label {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / data.len() as f64)
    }
}

/// Best stump for one feature: (error, split, polarity).
#[derive(Debug, Clone, Copy)]
struct Candidate {
    error: f64,
    feature: usize,
    split: f64,
    polarity: Polarity,
}

impl Candidate {
    /// Lowest error, then lowest feature, then lowest split, then +1 first.
    fn better_than(&self, other: &Candidate) -> bool {
        if self.error != other.error {
            return self.error < other.error;
        }
        if self.feature != other.feature {
            return self.feature < other.feature;
        }
        if self.split != other.split {
            return self.split < other.split;
        }
        self.polarity == Polarity::Positive && other.polarity == Polarity::Negative
    }
}

/// Per-feature sample orderings, computed once before boosting.
struct SortedColumns {
    order: Vec<Vec<usize>>,
}

impl SortedColumns {
    fn new(data: &LabeledDataset) -> Self {
        let order = (0..data.dim())
            .map(|f| {
                let mut idx: Vec<usize> = (0..data.len()).collect();
                idx.sort_by(|&a, &b| {
                    data.samples()[a].features[f]
                        .partial_cmp(&data.samples()[b].features[f])
                        .expect("finite features")
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        Self { order }
    }

    fn has_split(&self, data: &LabeledDataset) -> bool {
        self.order.iter().enumerate().any(|(f, idx)| {
            let first = data.samples()[idx[0]].features[f];
            let last = data.samples()[idx[idx.len() - 1]].features[f];
            first < last
        })
    }
}

fn best_stump_for_feature(
    data: &LabeledDataset,
    order: &[usize],
    feature: usize,
    weights: &[f64],
) -> Option<Candidate> {
    let samples = data.samples();
    let (mut pos_total, mut neg_total) = (0.0, 0.0);
    for (s, w) in samples.iter().zip(weights) {
        match s.label {
            Label::Positive => pos_total += w,
            Label::Negative => neg_total += w,
        }
    }
    let (mut pos_below, mut neg_below) = (0.0, 0.0);
    let mut best: Option<Candidate> = None;
    for k in 0..order.len() - 1 {
        let i = order[k];
        match samples[i].label {
            Label::Positive => pos_below += weights[i],
            Label::Negative => neg_below += weights[i],
        }
        let lo = samples[i].features[feature];
        let hi = samples[order[k + 1]].features[feature];
        if !(lo < hi) {
            continue;
        }
        let split = lo + (hi - lo) / 2.0;
        if !(lo < split && split < hi) {
            continue;
        }
        // Polarity +1 votes +1 above the split, -1 votes +1 below it.
        let err_pos = pos_below + (neg_total - neg_below);
        let err_neg = neg_below + (pos_total - pos_below);
        for (error, polarity) in [(err_pos, Polarity::Positive), (err_neg, Polarity::Negative)] {
            let cand = Candidate {
                error,
                feature,
                split,
                polarity,
            };
            if best.as_ref().is_none_or(|b| cand.better_than(b)) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Trains discrete AdaBoost for at most `rounds` rounds and returns the
/// canonicalized strong classifier with global threshold 0.
///
/// The stump search is exhaustive and deterministic, so the output depends
/// only on `data` and `rounds`; `seed` is accepted for provenance.
pub fn train_adaboost(data: &LabeledDataset, rounds: usize, seed: u64) -> Result<StrongClassifier> {
    let _ = seed;
    if rounds == 0 {
        return Err(Error::BadParams("rounds must be at least 1".into()));
    }
    for label in [Label::Positive, Label::Negative] {
        if data.count(label) == 0 {
            return Err(Error::EmptyClass {
                label: label.sign(),
            });
        }
    }
    let columns = SortedColumns::new(data);
    if !columns.has_split(data) {
        return Err(Error::DegenerateData(
            "every feature column is constant; no stump can split".into(),
        ));
    }

    let n = data.len();
    let mut weights = vec![1.0 / n as f64; n];
    let mut members = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let best = columns
            .order
            .par_iter()
            .enumerate()
            .filter_map(|(f, order)| best_stump_for_feature(data, order, f, &weights))
            .reduce_with(|a, b| if b.better_than(&a) { b } else { a })
            .expect("at least one splittable feature");
        let hyp = WeakHypothesis::new(best.feature, best.split, best.polarity);

        let votes: Vec<i8> = data
            .samples()
            .iter()
            .map(|s| hyp.vote(&s.features))
            .collect();
        let error: f64 = data
            .samples()
            .iter()
            .zip(&votes)
            .zip(&weights)
            .filter(|((s, &v), _)| v != s.label.sign())
            .map(|(_, w)| w)
            .sum();
        if error >= 0.5 - 1e-12 {
            break;
        }
        let perfect = error <= 0.0;
        let eps = error.max(1e-12);
        let alpha = 0.5 * ((1.0 - eps) / eps).ln();
        members.push(Member {
            weight: alpha,
            hypothesis: hyp,
        });
        if perfect {
            break;
        }

        for ((w, s), &v) in weights.iter_mut().zip(data.samples()).zip(&votes) {
            *w *= (-alpha * s.label.value() * f64::from(v)).exp();
        }
        normalize(&mut weights);
        for w in &mut weights {
            *w = w.max(SAMPLE_WEIGHT_FLOOR);
        }
        normalize(&mut weights);
    }

    if members.is_empty() {
        return Err(Error::DegenerateData(
            "no stump improves on chance under uniform weights".into(),
        ));
    }
    StrongClassifier::new(members, 0.0, data.dim())?.canonicalize()
}

fn normalize(weights: &mut [f64]) {
    let sum: f64 = weights.iter().sum();
    for w in weights {
        *w /= sum;
    }
}
