//! Cumulative prefix scores and empirical rejection rates.
//!
//! For a canonical classifier with weights `a_1 >= ... >= a_T` the profile
//! stores, per sample, the prefix scores `P_r(x) = sum_{i<=r} a_i h_i(x)` for
//! `r = 0..=T` and, once, the tail maxima `M_r = sum_{i>r} a_i`. A negative is
//! rejected at `r` under threshold `t` when its score can no longer exceed
//! `t` whatever the remaining members vote, i.e. `P_r(x) <= t - M_r`.

use rayon::prelude::*;

use crate::boosting::{StrongClassifier, WEIGHT_SUM_TOLERANCE};
use crate::dataset::{Label, LabeledDataset};
use crate::error::{Error, Result};

/// Dense `rows x (T + 1)` matrix of prefix scores.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixMatrix {
    width: usize,
    data: Vec<f64>,
}

impl PrefixMatrix {
    fn from_votes(weights: &[f64], votes: &[Vec<i8>]) -> Self {
        let width = weights.len() + 1;
        let rows: Vec<Vec<f64>> = votes
            .par_iter()
            .map(|v| prefix_row(weights, v.iter().copied()))
            .collect();
        Self {
            width,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.data.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.width)
    }
}

/// Prefix scores accumulated left to right, starting from `P_0 = 0`.
pub(crate) fn prefix_row(weights: &[f64], votes: impl Iterator<Item = i8>) -> Vec<f64> {
    let mut row = Vec::with_capacity(weights.len() + 1);
    let mut acc = 0.0;
    row.push(acc);
    for (w, v) in weights.iter().zip(votes) {
        acc += w * f64::from(v);
        row.push(acc);
    }
    row
}

/// Suffix sums `M_r = sum_{i>r} a_i`, `r = 0..=T`.
pub fn tail_weights(weights: &[f64]) -> Vec<f64> {
    let mut tail = vec![0.0; weights.len() + 1];
    for r in (0..weights.len()).rev() {
        tail[r] = tail[r + 1] + weights[r];
    }
    tail
}

/// Empirical substrate for every rejection-rate query.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreProfile {
    weights: Vec<f64>,
    tail: Vec<f64>,
    negatives: PrefixMatrix,
    positives: PrefixMatrix,
    source_threshold: f64,
}

impl ScoreProfile {
    /// Builds the profile of a canonical classifier over `data`.
    pub fn build(classifier: &StrongClassifier, data: &LabeledDataset) -> Result<Self> {
        if !classifier.is_canonical() {
            return Err(Error::BadParams(
                "profile requires a canonical classifier".into(),
            ));
        }
        if data.is_empty() {
            return Err(Error::BadParams(
                "profile requires a non-empty dataset".into(),
            ));
        }
        if data.dim() != classifier.dimensionality() {
            return Err(Error::DimensionMismatch {
                expected: classifier.dimensionality(),
                actual: data.dim(),
            });
        }
        let votes = |label| -> Result<Vec<Vec<i8>>> {
            data.with_label(label)
                .map(|s| classifier.votes(&s.features))
                .collect()
        };
        let weights: Vec<f64> = classifier.weights().collect();
        Self::from_parts(
            weights,
            &votes(Label::Negative)?,
            &votes(Label::Positive)?,
            classifier.global_threshold(),
        )
    }

    /// Builds a profile straight from per-sample vote vectors. Weights must be
    /// positive, non-increasing and sum to one.
    pub fn from_votes(
        weights: &[f64],
        negative_votes: &[Vec<i8>],
        positive_votes: &[Vec<i8>],
        threshold: f64,
    ) -> Result<Self> {
        Self::from_parts(weights.to_vec(), negative_votes, positive_votes, threshold)
    }

    fn from_parts(
        weights: Vec<f64>,
        negative_votes: &[Vec<i8>],
        positive_votes: &[Vec<i8>],
        threshold: f64,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::BadParams(
                "profile requires at least one member".into(),
            ));
        }
        if let Some((index, &weight)) = weights.iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
            return Err(Error::NonPositiveWeight { index, weight });
        }
        if weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::BadParams("weights must be non-increasing".into()));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::BadParams("weights must sum to one".into()));
        }
        for v in negative_votes.iter().chain(positive_votes) {
            if v.len() != weights.len() {
                return Err(Error::DimensionMismatch {
                    expected: weights.len(),
                    actual: v.len(),
                });
            }
            if v.iter().any(|&h| h != 1 && h != -1) {
                return Err(Error::BadParams("votes must be +1 or -1".into()));
            }
        }
        if negative_votes.is_empty() && positive_votes.is_empty() {
            return Err(Error::BadParams(
                "profile requires a non-empty dataset".into(),
            ));
        }
        Ok(Self {
            tail: tail_weights(&weights),
            negatives: PrefixMatrix::from_votes(&weights, negative_votes),
            positives: PrefixMatrix::from_votes(&weights, positive_votes),
            weights,
            source_threshold: threshold,
        })
    }

    /// Number of weak hypotheses, `T`.
    pub fn len_weak(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `M_r` for `r = 0..=T`.
    pub fn tail_weight(&self) -> &[f64] {
        &self.tail
    }

    pub fn source_threshold(&self) -> f64 {
        self.source_threshold
    }

    pub fn negatives(&self) -> &PrefixMatrix {
        &self.negatives
    }

    pub fn positives(&self) -> &PrefixMatrix {
        &self.positives
    }

    pub fn n_negatives(&self) -> usize {
        self.negatives.rows()
    }

    pub fn n_positives(&self) -> usize {
        self.positives.rows()
    }

    /// Bound threshold on the prefix score at `r`: `t - M_r`.
    #[inline]
    pub fn bound_threshold(&self, r: usize, t: f64) -> f64 {
        t - self.tail[r]
    }

    #[inline]
    fn bound_rejects(&self, row: &[f64], r: usize, t: f64) -> bool {
        row[r] <= self.bound_threshold(r, t)
    }

    fn check_index(&self, r: usize) -> Result<()> {
        if r > self.len_weak() {
            return Err(Error::RangeError(format!(
                "index {r} exceeds member count {}",
                self.len_weak()
            )));
        }
        Ok(())
    }

    fn require_negatives(&self) -> Result<()> {
        if self.n_negatives() == 0 {
            return Err(Error::NoNegatives);
        }
        Ok(())
    }

    /// Fraction of negatives rejected at `r`: `P_r(x) + M_r <= t`.
    pub fn rejection_rate(&self, r: usize, t: f64) -> Result<f64> {
        self.require_negatives()?;
        self.check_index(r)?;
        let hits = self
            .negatives
            .iter()
            .filter(|row| self.bound_rejects(row, r, t))
            .count();
        Ok(hits as f64 / self.n_negatives() as f64)
    }

    /// Among negatives surviving `r_prev`, the fraction rejected at `r`.
    /// Returns 1 when nothing survives `r_prev`.
    pub fn conditional_rejection_rate(&self, r: usize, r_prev: usize, t: f64) -> Result<f64> {
        if r_prev >= r {
            return Err(Error::BadRange { r_prev, r });
        }
        self.require_negatives()?;
        self.check_index(r)?;
        let (mut survivors, mut rejected) = (0usize, 0usize);
        for row in self.negatives.iter() {
            if !self.bound_rejects(row, r_prev, t) {
                survivors += 1;
                if self.bound_rejects(row, r, t) {
                    rejected += 1;
                }
            }
        }
        Ok(if survivors == 0 {
            1.0
        } else {
            rejected as f64 / survivors as f64
        })
    }

    /// Smallest `r` in `1..=T` with `1 - p(r) <= epsilon`.
    pub fn saturation_point(&self, t: f64, epsilon: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::RangeError(format!(
                "epsilon {epsilon} outside [0, 1]"
            )));
        }
        let curve = self.curve(t)?;
        (1..=self.len_weak())
            .find(|&r| 1.0 - curve.rate(r) <= epsilon)
            .ok_or(Error::NoSaturation { epsilon })
    }

    /// Precomputes survivor counts so rate queries cost O(1).
    pub fn curve(&self, t: f64) -> Result<RejectionCurve> {
        self.require_negatives()?;
        RejectionCurve::new(self, t)
    }
}

/// Survivor counts of the bound rejection test at a fixed threshold.
///
/// The bound `P_r + M_r` tightens monotonically in `r`, so a negative
/// rejected at `r` stays rejected for every larger index and survivors of any
/// index are nested. The curve records, for every `r`, how many negatives
/// are still alive.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionCurve {
    threshold: f64,
    total: usize,
    survivors: Vec<usize>,
}

impl RejectionCurve {
    fn new(profile: &ScoreProfile, t: f64) -> Result<Self> {
        let width = profile.len_weak() + 1;
        let mut exits = vec![0usize; width + 1];
        let mut nested = true;
        for row in profile.negatives.iter() {
            let first = (0..width).find(|&r| profile.bound_rejects(row, r, t));
            match first {
                Some(k) => {
                    if (k..width).any(|r| !profile.bound_rejects(row, r, t)) {
                        nested = false;
                    }
                    exits[k] += 1;
                }
                None => exits[width] += 1,
            }
        }
        if !nested {
            log::warn!(
                "bound rejection not nested within rounding at t = {t}; using first-exit counts"
            );
        }
        let total = profile.n_negatives();
        let mut survivors = Vec::with_capacity(width);
        let mut alive = total;
        for &e in exits.iter().take(width) {
            alive -= e;
            survivors.push(alive);
        }
        Ok(Self {
            threshold: t,
            total,
            survivors,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len_weak(&self) -> usize {
        self.survivors.len() - 1
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Negatives not rejected at `r`.
    pub fn survivors(&self, r: usize) -> usize {
        self.survivors[r]
    }

    /// `p(r)`.
    pub fn rate(&self, r: usize) -> f64 {
        (self.total - self.survivors[r]) as f64 / self.total as f64
    }

    /// `p(r | r_prev)`; 1 when nothing survives `r_prev`.
    pub fn conditional_rate(&self, r: usize, r_prev: usize) -> f64 {
        debug_assert!(r_prev < r);
        let alive = self.survivors[r_prev];
        if alive == 0 {
            1.0
        } else {
            (alive - self.survivors[r]) as f64 / alive as f64
        }
    }

    /// Pairs `(r~, r)` with `r~ < r` where the shift property
    /// `p(r + delta | r) <= p(r~ + delta | r~)` fails. Only pairs with
    /// survivors at both `r~` and `r` and `r + delta <= T` are checked.
    pub fn shift_violations(&self, delta: usize) -> Vec<ShiftViolation> {
        let total = self.len_weak();
        let mut out = Vec::new();
        if delta == 0 {
            return out;
        }
        for r in 1..=total.saturating_sub(delta) {
            if self.survivors[r] == 0 {
                break;
            }
            let here = self.conditional_rate(r + delta, r);
            for r_tilde in 0..r {
                let earlier = self.conditional_rate(r_tilde + delta, r_tilde);
                if here > earlier {
                    out.push(ShiftViolation {
                        delta,
                        r_tilde,
                        r,
                        excess: here - earlier,
                    });
                }
            }
        }
        if !out.is_empty() {
            log::warn!(
                "shift property fails for {} pairs at delta = {delta}",
                out.len()
            );
        }
        out
    }
}

/// One failure of the shift property.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftViolation {
    pub delta: usize,
    pub r_tilde: usize,
    pub r: usize,
    /// `p(r + delta | r) - p(r~ + delta | r~)`.
    pub excess: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn votes(rows: &[&[i8]]) -> Vec<Vec<i8>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    const W4: [f64; 4] = [0.4, 0.3, 0.2, 0.1];

    #[test]
    fn tail_weights_are_suffix_sums() {
        let tail = tail_weights(&W4);
        let expected = [1.0, 0.6, 0.3, 0.1, 0.0];
        for (a, b) in tail.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{tail:?}");
        }
    }

    #[test]
    fn prefix_matrix_matches_hand_computation() {
        let neg = votes(&[&[-1, -1, 1, 1], &[1, -1, -1, 1], &[-1, 1, 1, -1]]);
        let p = ScoreProfile::from_votes(&W4, &neg, &[], 0.0).unwrap();
        let expected = [
            [0.0, -0.4, -0.7, -0.5, -0.4],
            [0.0, 0.4, 0.1, -0.1, 0.0],
            [0.0, -0.4, -0.1, 0.1, 0.0],
        ];
        for (i, want) in expected.iter().enumerate() {
            for (got, w) in p.negatives().row(i).iter().zip(want) {
                assert!((got - w).abs() < 1e-12);
            }
        }
        // P_T + M_T is the strong score.
        assert_eq!(p.tail_weight()[4], 0.0);
    }

    #[test]
    fn rejection_rate_counts_bound_test() {
        // Bounds P_r + M_r at r = 2: 0.3-0.7+... computed by hand below.
        let neg = votes(&[
            &[-1, -1, 1, 1],
            &[1, -1, -1, 1],
            &[-1, 1, 1, -1],
            &[1, 1, 1, 1],
        ]);
        let p = ScoreProfile::from_votes(&W4, &neg, &[], 0.0).unwrap();
        // r = 2, M_2 = 0.3: bounds -0.4, 0.4, 0.2, 1.0 -> one rejected.
        assert_eq!(p.rejection_rate(2, 0.0).unwrap(), 0.25);
        // Below every bound.
        assert_eq!(p.rejection_rate(2, -1.0).unwrap(), 0.0);
        assert!(matches!(
            p.rejection_rate(5, 0.0),
            Err(Error::RangeError(_))
        ));
    }

    #[test]
    fn rejection_rate_needs_negatives() {
        let p = ScoreProfile::from_votes(&W4, &[], &votes(&[&[1, 1, 1, 1]]), 0.0).unwrap();
        assert_eq!(p.rejection_rate(1, 0.0).unwrap_err(), Error::NoNegatives);
        assert_eq!(p.curve(0.0).unwrap_err(), Error::NoNegatives);
    }

    #[test]
    fn conditional_rate_edge_cases() {
        let neg = votes(&[&[-1, -1, 1, 1], &[1, -1, -1, -1], &[-1, 1, -1, -1]]);
        let p = ScoreProfile::from_votes(&W4, &neg, &[], 0.0).unwrap();
        assert_eq!(
            p.conditional_rejection_rate(2, 2, 0.0).unwrap_err(),
            Error::BadRange { r_prev: 2, r: 2 }
        );
        // Nobody is rejected at r = 1 and everybody is by r = 4.
        assert_eq!(p.rejection_rate(1, 0.0).unwrap(), 0.0);
        assert_eq!(p.conditional_rejection_rate(4, 1, 0.0).unwrap(), 1.0);
        assert_eq!(p.conditional_rejection_rate(4, 3, 0.0).unwrap(), 1.0);
        // Nothing survives r = 4, so the rate is the inert value 1.
        let q = ScoreProfile::from_votes(&W4, &neg[..1], &[], 0.0).unwrap();
        assert_eq!(q.conditional_rejection_rate(3, 2, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn saturation_point_edges() {
        let neg = votes(&[&[-1, -1, 1, 1], &[1, -1, -1, -1], &[-1, 1, -1, -1]]);
        let p = ScoreProfile::from_votes(&W4, &neg, &[], 0.0).unwrap();
        assert_eq!(p.saturation_point(0.0, 1.0).unwrap(), 1);
        let r = p.saturation_point(0.0, 0.0).unwrap();
        assert!(r <= 4);
        let all_pos = votes(&[&[1, 1, 1, 1]]);
        let q = ScoreProfile::from_votes(&W4, &all_pos, &[], 0.0).unwrap();
        assert!(matches!(
            q.saturation_point(0.0, 0.5),
            Err(Error::NoSaturation { .. })
        ));
    }

    #[test]
    fn curve_agrees_with_direct_counts() {
        let neg = votes(&[
            &[-1, -1, 1, 1],
            &[1, -1, -1, 1],
            &[-1, 1, -1, -1],
            &[1, 1, -1, -1],
            &[1, -1, 1, -1],
        ]);
        let p = ScoreProfile::from_votes(&W4, &neg, &[], 0.05).unwrap();
        let curve = p.curve(0.05).unwrap();
        for r in 0..=4 {
            assert_eq!(curve.rate(r), p.rejection_rate(r, 0.05).unwrap());
            for r_prev in 0..r {
                assert_eq!(
                    curve.conditional_rate(r, r_prev),
                    p.conditional_rejection_rate(r, r_prev, 0.05).unwrap()
                );
            }
        }
    }

    #[test]
    fn from_votes_validates_inputs() {
        assert!(ScoreProfile::from_votes(&[0.5, 0.6], &votes(&[&[1, 1]]), &[], 0.0).is_err());
        assert!(ScoreProfile::from_votes(&[0.5, 0.4], &votes(&[&[1, 1]]), &[], 0.0).is_err());
        assert!(ScoreProfile::from_votes(&[0.5, 0.5], &votes(&[&[1]]), &[], 0.0).is_err());
        assert!(ScoreProfile::from_votes(&[0.5, 0.5], &votes(&[&[1, 0]]), &[], 0.0).is_err());
    }
}
