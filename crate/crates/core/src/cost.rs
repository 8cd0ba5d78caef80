//! Analytic computation cost of a cascade.
//!
//! Evaluating one weak hypothesis costs 1 and one inequality check costs
//! `c`. A window rejected at stage `i` has paid for `r_i` members (scores are
//! reused across stages) and `i` checks; a window surviving all `S` stages
//! pays `T + (S + 1) c`. Only negatives are costed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{RejectionCurve, ScoreProfile};

/// Default per-check cost.
pub const DEFAULT_CHECK_COST: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    total: usize,
    check_cost: f64,
    threshold: f64,
}

impl CostParams {
    /// `total` weak hypotheses (at least 2), check cost in `(0, 1)`, global
    /// threshold `threshold`.
    pub fn new(total: usize, check_cost: f64, threshold: f64) -> Result<Self> {
        if total < 2 {
            return Err(Error::RangeError(format!("T = {total} must be at least 2")));
        }
        if !(check_cost > 0.0 && check_cost < 1.0) {
            return Err(Error::RangeError(format!(
                "c = {check_cost} must lie in (0, 1)"
            )));
        }
        if !threshold.is_finite() {
            return Err(Error::RangeError("threshold must be finite".into()));
        }
        Ok(Self {
            total,
            check_cost,
            threshold,
        })
    }

    /// Skips the domain checks. Only meant for analysing limits such as
    /// `c = 0`; the optimizers assume validated parameters.
    #[doc(hidden)]
    pub fn new_unchecked(total: usize, check_cost: f64, threshold: f64) -> Self {
        Self {
            total,
            check_cost,
            threshold,
        }
    }

    /// Parameters matching `profile`: its member count and source threshold.
    pub fn for_profile(profile: &ScoreProfile, check_cost: f64) -> Result<Self> {
        Self::new(profile.len_weak(), check_cost, profile.source_threshold())
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn check_cost(&self) -> f64 {
        self.check_cost
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// Strictly increasing partition points `r_1 < ... < r_S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    points: Vec<usize>,
}

impl Partition {
    /// Validates points against a classifier of `total` members: each point
    /// in `1..total` and strictly increasing.
    pub fn new(points: Vec<usize>, total: usize) -> Result<Self> {
        let p = Self { points };
        p.validate(total)?;
        Ok(p)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn validate(&self, total: usize) -> Result<()> {
        if let Some(&first) = self.points.first() {
            if first < 1 {
                return Err(Error::RangeError("partition points start at 1".into()));
            }
        }
        if let Some(&last) = self.points.last() {
            if last >= total {
                return Err(Error::RangeError(format!(
                    "last partition point {last} must be below T = {total}"
                )));
            }
        }
        if self.points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::RangeError(format!(
                "partition {:?} is not strictly increasing",
                self.points
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Appends a point, which must exceed the current last one.
    pub fn push(&mut self, r: usize) {
        debug_assert!(self.points.last().is_none_or(|&l| l < r));
        self.points.push(r);
    }

    pub fn with_point(&self, r: usize) -> Self {
        let mut p = self.clone();
        p.push(r);
        p
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.points
    }
}

fn check_rate(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::RangeError(format!("rate {p} outside [0, 1]")));
    }
    Ok(())
}

fn check_point(r: usize, params: &CostParams) -> Result<()> {
    if r < 1 || r >= params.total {
        return Err(Error::RangeError(format!(
            "partition point {r} outside [1, {}]",
            params.total - 1
        )));
    }
    Ok(())
}

/// One-stage cost `p (r + c) + (1 - p)(T + 2c)`.
pub fn one_stage_cost(p: f64, r: usize, params: &CostParams) -> Result<f64> {
    let (left, right) = one_stage_cost_parts(p, r, params)?;
    Ok(left + right)
}

/// The rejected-window and surviving-window terms of the one-stage cost.
pub fn one_stage_cost_parts(p: f64, r: usize, params: &CostParams) -> Result<(f64, f64)> {
    check_rate(p)?;
    check_point(r, params)?;
    let c = params.check_cost;
    Ok((
        p * (r as f64 + c),
        (1.0 - p) * (params.total as f64 + 2.0 * c),
    ))
}

/// True iff appending a stage at `r_new` with conditional rejection rate
/// `p_new` strictly lowers the cascade cost: `p_new > c / (T + c - r_new)`.
pub fn stage_addition_gain(p_new: f64, r_new: usize, params: &CostParams) -> Result<bool> {
    check_rate(p_new)?;
    check_point(r_new, params)?;
    let c = params.check_cost;
    Ok(p_new > c / (params.total as f64 + c - r_new as f64))
}

/// Running state of the stage sum: accumulated rejected-window cost and the
/// surviving mass `prod_j (1 - p_j)` after the stages seen so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagePrefix {
    pub left_sum: f64,
    pub survival: f64,
    pub last_point: usize,
    pub stages: usize,
}

impl StagePrefix {
    pub const EMPTY: StagePrefix = StagePrefix {
        left_sum: 0.0,
        survival: 1.0,
        last_point: 0,
        stages: 0,
    };
}

/// Cost evaluator bound to one profile and one set of parameters.
#[derive(Debug, Clone)]
pub struct CostModel {
    curve: RejectionCurve,
    params: CostParams,
}

impl CostModel {
    pub fn new(profile: &ScoreProfile, params: CostParams) -> Result<Self> {
        if profile.len_weak() != params.total {
            return Err(Error::RangeError(format!(
                "profile has {} members, parameters say T = {}",
                profile.len_weak(),
                params.total
            )));
        }
        Ok(Self {
            curve: profile.curve(params.threshold)?,
            params,
        })
    }

    pub fn params(&self) -> &CostParams {
        &self.params
    }

    pub fn curve(&self) -> &RejectionCurve {
        &self.curve
    }

    pub fn total(&self) -> usize {
        self.params.total
    }

    /// `p(r)`.
    pub fn rate(&self, r: usize) -> f64 {
        self.curve.rate(r)
    }

    /// `p(r | r_prev)`.
    pub fn conditional_rate(&self, r: usize, r_prev: usize) -> f64 {
        self.curve.conditional_rate(r, r_prev)
    }

    /// Adds stage `prefix.stages + 1` at point `r` to the running sum.
    #[inline]
    pub fn extend(&self, prefix: StagePrefix, r: usize) -> StagePrefix {
        let i = prefix.stages + 1;
        let p = self.curve.conditional_rate(r, prefix.last_point);
        StagePrefix {
            left_sum: prefix.left_sum
                + prefix.survival * p * (r as f64 + i as f64 * self.params.check_cost),
            survival: prefix.survival * (1.0 - p),
            last_point: r,
            stages: i,
        }
    }

    /// Adds the fall-through term `survival * (T + (S + 1) c)`.
    #[inline]
    pub fn close(&self, prefix: StagePrefix) -> f64 {
        let fall_through =
            self.params.total as f64 + (prefix.stages + 1) as f64 * self.params.check_cost;
        prefix.left_sum + prefix.survival * fall_through
    }

    pub fn prefix_of(&self, points: &[usize]) -> StagePrefix {
        points
            .iter()
            .fold(StagePrefix::EMPTY, |acc, &r| self.extend(acc, r))
    }

    /// Cost of a point list without validation.
    #[inline]
    pub fn cost_of_points(&self, points: &[usize]) -> f64 {
        self.close(self.prefix_of(points))
    }

    /// `f_S(r_1, ..., r_S)`; the empty partition costs `T + c`.
    pub fn cascade_cost(&self, partition: &Partition) -> Result<f64> {
        partition.validate(self.params.total)?;
        Ok(self.cost_of_points(partition.points()))
    }

    /// `f_i(r | r_1, ..., r_{i-1})` with the first `i - 1` points fixed.
    pub fn conditional_stage_cost(&self, fixed: &Partition, r: usize) -> Result<f64> {
        fixed.validate(self.params.total)?;
        check_point(r, &self.params)?;
        let prefix = self.prefix_of(fixed.points());
        if r <= prefix.last_point {
            return Err(Error::RangeError(format!(
                "point {r} must exceed the fixed prefix end {}",
                prefix.last_point
            )));
        }
        Ok(self.close(self.extend(prefix, r)))
    }

    /// Per-stage conditional rejection rates `p_i(r_i | r_{i-1})`.
    pub fn stage_rates(&self, partition: &Partition) -> Vec<f64> {
        let mut prev = 0;
        partition
            .points()
            .iter()
            .map(|&r| {
                let p = self.curve.conditional_rate(r, prev);
                prev = r;
                p
            })
            .collect()
    }
}

/// `f_S` of `partition` on the negatives of `profile` with bound thresholds.
pub fn cascade_cost(
    profile: &ScoreProfile,
    partition: &Partition,
    params: &CostParams,
) -> Result<f64> {
    CostModel::new(profile, *params)?.cascade_cost(partition)
}

/// `f_i(r | fixed)`; see [`CostModel::conditional_stage_cost`].
pub fn conditional_stage_cost(
    profile: &ScoreProfile,
    fixed: &Partition,
    r: usize,
    params: &CostParams,
) -> Result<f64> {
    CostModel::new(profile, *params)?.conditional_stage_cost(fixed, r)
}

/// How the profile's negatives leave a cascade with explicit stage
/// thresholds: per-stage rejection counts plus the fall-through count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageTally {
    pub rejected: Vec<usize>,
    pub survivors: usize,
}

impl StageTally {
    pub fn total(&self) -> usize {
        self.rejected.iter().sum::<usize>() + self.survivors
    }

    /// Conditional rejection rate of every stage among the windows reaching it.
    pub fn rates(&self) -> Vec<f64> {
        let mut alive = self.total();
        self.rejected
            .iter()
            .map(|&k| {
                let p = if alive == 0 {
                    1.0
                } else {
                    k as f64 / alive as f64
                };
                alive -= k;
                p
            })
            .collect()
    }
}

/// Runs the profile's negatives through stages rejecting on
/// `P_{r_i}(x) <= t_i`.
pub fn tally_negatives(profile: &ScoreProfile, points: &[usize], thresholds: &[f64]) -> StageTally {
    debug_assert_eq!(points.len(), thresholds.len());
    let mut rejected = vec![0usize; points.len()];
    let mut survivors = 0;
    for row in profile.negatives().iter() {
        match points
            .iter()
            .zip(thresholds)
            .position(|(&r, &t)| row[r] <= t)
        {
            Some(i) => rejected[i] += 1,
            None => survivors += 1,
        }
    }
    StageTally {
        rejected,
        survivors,
    }
}

/// Product-form cost from a tally, with the same stage costs as
/// [`CostModel::cascade_cost`].
pub fn cost_from_tally(tally: &StageTally, points: &[usize], total: usize, check_cost: f64) -> f64 {
    let mut prefix = StagePrefix::EMPTY;
    for (&r, p) in points.iter().zip(tally.rates()) {
        let i = prefix.stages + 1;
        prefix = StagePrefix {
            left_sum: prefix.left_sum + prefix.survival * p * (r as f64 + i as f64 * check_cost),
            survival: prefix.survival * (1.0 - p),
            last_point: r,
            stages: i,
        };
    }
    prefix.left_sum + prefix.survival * (total as f64 + (prefix.stages + 1) as f64 * check_cost)
}

/// `f_S` with arbitrary per-stage thresholds. Conditional rates are taken
/// among the negatives surviving every earlier stage.
pub fn cascade_cost_with_thresholds(
    profile: &ScoreProfile,
    partition: &Partition,
    thresholds: &[f64],
    check_cost: f64,
) -> Result<f64> {
    partition.validate(profile.len_weak())?;
    if thresholds.len() != partition.len() {
        return Err(Error::RangeError(format!(
            "{} thresholds for {} stages",
            thresholds.len(),
            partition.len()
        )));
    }
    if profile.n_negatives() == 0 {
        return Err(Error::NoNegatives);
    }
    let tally = tally_negatives(profile, partition.points(), thresholds);
    Ok(cost_from_tally(
        &tally,
        partition.points(),
        profile.len_weak(),
        check_cost,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: usize, c: f64) -> CostParams {
        CostParams::new(t, c, 0.0).unwrap()
    }

    #[test]
    fn one_stage_cost_values() {
        assert_eq!(one_stage_cost(1.0, 48, &params(200, 0.5)).unwrap(), 48.5);
        assert_eq!(one_stage_cost(0.0, 17, &params(200, 0.5)).unwrap(), 201.0);
        assert_eq!(one_stage_cost(0.5, 10, &params(100, 0.5)).unwrap(), 55.75);
        assert!(one_stage_cost(0.5, 0, &params(100, 0.5)).is_err());
        assert!(one_stage_cost(0.5, 100, &params(100, 0.5)).is_err());
        assert!(one_stage_cost(1.5, 10, &params(100, 0.5)).is_err());
    }

    #[test]
    fn one_stage_parts_sum_to_total() {
        let prm = params(50, 0.3);
        for r in 1..50 {
            for k in 0..=10 {
                let p = k as f64 / 10.0;
                let (l, rr) = one_stage_cost_parts(p, r, &prm).unwrap();
                assert_eq!(l + rr, one_stage_cost(p, r, &prm).unwrap());
            }
        }
    }

    #[test]
    fn gain_test_is_strict() {
        let prm = params(100, 0.5);
        assert!(stage_addition_gain(0.1, 50, &prm).unwrap());
        assert!(!stage_addition_gain(0.0, 50, &prm).unwrap());
        let boundary = 0.5 / (100.0 + 0.5 - 50.0);
        assert!(!stage_addition_gain(boundary, 50, &prm).unwrap());
        assert!(stage_addition_gain(0.5, 100, &prm).is_err());
    }

    #[test]
    fn params_domain() {
        assert!(CostParams::new(1, 0.5, 0.0).is_err());
        assert!(CostParams::new(10, 0.0, 0.0).is_err());
        assert!(CostParams::new(10, 1.0, 0.0).is_err());
        assert!(CostParams::new(10, 0.99, 0.0).is_ok());
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![1, 3, 9], 10).is_ok());
        assert!(Partition::new(vec![0, 3], 10).is_err());
        assert!(Partition::new(vec![3, 3], 10).is_err());
        assert!(Partition::new(vec![3, 10], 10).is_err());
        assert!(Partition::new(vec![], 10).unwrap().is_empty());
    }

    #[test]
    fn tally_rates_stack() {
        let tally = StageTally {
            rejected: vec![5, 3, 0],
            survivors: 2,
        };
        assert_eq!(tally.total(), 10);
        assert_eq!(tally.rates(), vec![0.5, 0.6, 0.0]);
        let empty = StageTally {
            rejected: vec![4, 0],
            survivors: 0,
        };
        assert_eq!(empty.rates(), vec![1.0, 1.0]);
    }
}
