//! Partition-point search.
//!
//! Three strategies are provided:
//!
//! * one stage: `argmin_r f_1(r)`;
//! * local chain: stages are added greedily, each new point minimizing
//!   `f_i(r | r_1, ..., r_{i-1})` with earlier points frozen. The search for
//!   `r_{i+1}` starts at `2 r_i - r_{i-1}` (optimal stage widths grow);
//! * joint: alternating coordinate minimization over all points of an
//!   `i`-stage cascade, seeded from the `(i - 1)`-stage optimum. Each update
//!   of `r_j` searches only at or below its previous value, since optimal
//!   points shrink as stages are added and as the alternation proceeds.
//!
//! Every argmin breaks ties towards the smallest `r`.

use serde::{Deserialize, Serialize};

use crate::cost::{stage_addition_gain, CostModel, CostParams, Partition};
use crate::error::{Error, Result};
use crate::profile::ScoreProfile;

/// Guard on the number of candidates enumerated by [`brute_force_partitions`].
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerMode {
    #[value(name = "one")]
    OneStage,
    Local,
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub mode: OptimizerMode,
    pub max_stages: usize,
    /// Stop gap of the two-stage alternation.
    pub mu: f64,
    /// Stop gap of the multi-stage alternation.
    pub eps: f64,
    /// Scan full feasible ranges, ignoring the growth bound and the
    /// shrinking caps, with no early stopping.
    pub exhaustive: bool,
    /// Stop a scan after this many consecutive non-improving steps.
    /// `None` scans the whole admissible range.
    pub patience: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            mode: OptimizerMode::Joint,
            max_stages: 8,
            mu: 0.0,
            eps: 0.0,
            exhaustive: false,
            patience: None,
        }
    }
}

impl OptimizerConfig {
    pub fn new(mode: OptimizerMode, max_stages: usize) -> Self {
        Self {
            mode,
            max_stages,
            ..Self::default()
        }
    }

    pub fn exhaustive(mut self, exhaustive: bool) -> Self {
        self.exhaustive = exhaustive;
        self
    }

    pub fn patience(mut self, patience: Option<usize>) -> Self {
        self.patience = patience;
        self
    }

    fn validate(&self, total: usize) -> Result<()> {
        if self.max_stages == 0 {
            return Err(Error::BadParams("max_stages must be at least 1".into()));
        }
        if self.max_stages >= total {
            return Err(Error::BadParams(format!(
                "max_stages = {} must be below T = {total}",
                self.max_stages
            )));
        }
        if !(self.mu >= 0.0) || !(self.eps >= 0.0) {
            return Err(Error::BadParams("mu and eps must be non-negative".into()));
        }
        if self.patience == Some(0) {
            return Err(Error::BadParams("patience must be at least 1".into()));
        }
        Ok(())
    }

    /// Early-stop window actually used by scans.
    fn scan_patience(&self) -> Option<usize> {
        if self.exhaustive {
            None
        } else {
            self.patience
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateKind {
    /// A point placed for the first time.
    Init,
    /// A point moved by the alternating minimization.
    Update,
}

/// One optimizer step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Number of stages of the cascade being optimized.
    pub stage_count: usize,
    /// Alternation round within this stage count (0 for initialization).
    pub iteration: usize,
    /// 1-based index of the stage whose point changed.
    pub stage: usize,
    pub kind: UpdateKind,
    pub old_r: Option<usize>,
    pub new_r: usize,
    /// Objective after the step.
    pub objective: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub records: Vec<TraceRecord>,
}

impl OptimizerTrace {
    fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    /// Alternating updates that moved a point upwards. Empty when the
    /// decreasing phenomenon held throughout.
    pub fn increasing_updates(&self) -> Vec<&TraceRecord> {
        self.records
            .iter()
            .filter(|r| r.kind == UpdateKind::Update && r.old_r.is_some_and(|o| r.new_r > o))
            .collect()
    }
}

/// Best cascade found for one stage count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSolution {
    pub stages: usize,
    pub partition: Partition,
    pub cost: f64,
}

/// A local-chain stage whose unconstrained optimum fell below `2 r_i - r_{i-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthViolation {
    pub stage: usize,
    pub point: usize,
    pub lower_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalChainResult {
    pub partition: Partition,
    pub cost: f64,
    /// Cost after each accepted stage; `per_stage[i - 1]` has `i` stages.
    pub per_stage: Vec<StageSolution>,
    /// Stage additions checked against the growth bound.
    pub growth_checks: usize,
    pub growth_violations: Vec<GrowthViolation>,
    pub trace: OptimizerTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointResult {
    /// Cheapest cascade over all stage counts tried.
    pub best: StageSolution,
    /// Solution per stage count; `per_stage[i - 1]` has `i` stages.
    pub per_stage: Vec<StageSolution>,
    pub trace: OptimizerTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Up,
    Down,
}

/// Minimizes `f` over `lo..=hi`, ties to the smallest `r`. Scans upward from
/// `lo` or downward from `hi`; with `patience`, stops after that many
/// consecutive non-improving steps.
fn scan_argmin(
    lo: usize,
    hi: usize,
    direction: Direction,
    patience: Option<usize>,
    mut f: impl FnMut(usize) -> f64,
) -> (usize, f64) {
    debug_assert!(lo <= hi);
    let mut best = (usize::MAX, f64::INFINITY);
    let mut stale = 0usize;
    let mut visit = |r: usize| -> bool {
        let value = f(r);
        let improves = match direction {
            Direction::Up => value < best.1,
            // Walking down, an equal value at a smaller r wins the tie.
            Direction::Down => value <= best.1,
        };
        if improves {
            if value < best.1 {
                stale = 0;
            }
            best = (r, value);
        } else {
            stale += 1;
        }
        patience.is_some_and(|p| stale >= p)
    };
    match direction {
        Direction::Up => {
            for r in lo..=hi {
                if visit(r) {
                    break;
                }
            }
        }
        Direction::Down => {
            for r in (lo..=hi).rev() {
                if visit(r) {
                    break;
                }
            }
        }
    }
    best
}

/// Alternating update of one point: the incumbent `current` stays unless a
/// candidate is strictly cheaper.
fn update_point(
    current: usize,
    lo: usize,
    hi: usize,
    patience: Option<usize>,
    mut f: impl FnMut(usize) -> f64,
) -> (usize, f64) {
    let incumbent = f(current);
    let (r, value) = scan_argmin(lo, hi, Direction::Down, patience, &mut f);
    if value < incumbent {
        (r, value)
    } else {
        (current, incumbent)
    }
}

fn model_for(profile: &ScoreProfile, params: &CostParams) -> Result<CostModel> {
    if profile.n_negatives() == 0 {
        return Err(Error::NoNegatives);
    }
    CostModel::new(profile, *params)
}

fn one_stage_with(model: &CostModel, config: &OptimizerConfig, hi: usize) -> (usize, f64) {
    scan_argmin(1, hi, Direction::Up, config.scan_patience(), |r| {
        model.cost_of_points(&[r])
    })
}

/// `argmin_{1 <= r < T} f_1(r)`.
pub fn optimize_one_stage(
    profile: &ScoreProfile,
    params: &CostParams,
    config: &OptimizerConfig,
) -> Result<(usize, f64)> {
    let model = model_for(profile, params)?;
    Ok(one_stage_with(&model, config, params.total() - 1))
}

/// Lower end of the search for a new point after `points`: the growth bound
/// `2 r_i - r_{i-1}` when it lies below `T`, else just past the last point.
fn growth_lower_bound(points: &[usize]) -> usize {
    let last = points.last().copied().unwrap_or(0);
    let before = if points.len() >= 2 {
        points[points.len() - 2]
    } else {
        0
    };
    2 * last - before
}

fn next_stage_range(points: &[usize], total: usize, exhaustive: bool) -> Option<(usize, usize)> {
    let last = points.last().copied().unwrap_or(0);
    let hi = total - 1;
    let mut lo = last + 1;
    if !exhaustive && !points.is_empty() {
        let bound = growth_lower_bound(points);
        if bound < total {
            lo = lo.max(bound);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Greedy stage-by-stage chain.
pub fn optimize_local_chain(
    profile: &ScoreProfile,
    params: &CostParams,
    config: &OptimizerConfig,
) -> Result<LocalChainResult> {
    config.validate(params.total())?;
    let model = model_for(profile, params)?;
    let total = params.total();
    let mut partition = Partition::empty();
    let mut cost = model.cost_of_points(&[]);
    let mut per_stage = Vec::new();
    let mut trace = OptimizerTrace::default();
    let mut growth_checks = 0;
    let mut growth_violations = Vec::new();

    while partition.len() < config.max_stages {
        let Some((lo, hi)) = next_stage_range(partition.points(), total, config.exhaustive) else {
            break;
        };
        let prefix = model.prefix_of(partition.points());
        // With every negative already rejected a new stage only adds checks.
        if model.curve().survivors(prefix.last_point) == 0 {
            break;
        }
        let (r, f) = scan_argmin(lo, hi, Direction::Up, config.scan_patience(), |r| {
            model.close(model.extend(prefix, r))
        });
        let p_new = model.conditional_rate(r, prefix.last_point);
        if !stage_addition_gain(p_new, r, params)? || !(f < cost) {
            break;
        }
        if !partition.is_empty() {
            let bound = growth_lower_bound(partition.points());
            if bound < total {
                growth_checks += 1;
                if r < bound {
                    log::warn!(
                        "stage {} placed at {r}, below growth bound {bound}",
                        partition.len() + 1
                    );
                    growth_violations.push(GrowthViolation {
                        stage: partition.len() + 1,
                        point: r,
                        lower_bound: bound,
                    });
                }
            }
        }
        partition.push(r);
        cost = f;
        trace.push(TraceRecord {
            stage_count: partition.len(),
            iteration: 0,
            stage: partition.len(),
            kind: UpdateKind::Init,
            old_r: None,
            new_r: r,
            objective: f,
        });
        per_stage.push(StageSolution {
            stages: partition.len(),
            partition: partition.clone(),
            cost: f,
        });
    }
    Ok(LocalChainResult {
        partition,
        cost,
        per_stage,
        growth_checks,
        growth_violations,
        trace,
    })
}

/// Two-stage alternating minimization.
///
/// `r_1` starts at the one-stage optimum and `r_2` at the best point from
/// `2 r_1` on. Each round re-minimizes `r_1` over `[1, r_1]` with `r_2` fixed,
/// then `r_2` over `(r_1, r_2]`, until the second update gains at most `mu`.
pub fn optimize_joint_two_stage(
    profile: &ScoreProfile,
    params: &CostParams,
    config: &OptimizerConfig,
) -> Result<(Partition, f64, OptimizerTrace)> {
    let total = params.total();
    if total < 3 {
        return Err(Error::RangeError(format!(
            "two stages need T >= 3, got {total}"
        )));
    }
    if !(config.mu >= 0.0) {
        return Err(Error::BadParams("mu must be non-negative".into()));
    }
    let model = model_for(profile, params)?;
    let patience = config.scan_patience();
    let mut trace = OptimizerTrace::default();

    let (mut r1, f1) = one_stage_with(&model, config, total - 2);
    trace.push(TraceRecord {
        stage_count: 1,
        iteration: 0,
        stage: 1,
        kind: UpdateKind::Init,
        old_r: None,
        new_r: r1,
        objective: f1,
    });
    let (lo, hi) = next_stage_range(&[r1], total, config.exhaustive).expect("r1 <= T - 2");
    let (mut r2, mut f) = scan_argmin(lo, hi, Direction::Up, patience, |r| {
        model.cost_of_points(&[r1, r])
    });
    trace.push(TraceRecord {
        stage_count: 2,
        iteration: 0,
        stage: 2,
        kind: UpdateKind::Init,
        old_r: None,
        new_r: r2,
        objective: f,
    });

    for iteration in 1.. {
        let hi1 = if config.exhaustive { r2 - 1 } else { r1 };
        let (new_r1, f_after_first) =
            update_point(r1, 1, hi1, patience, |r| model.cost_of_points(&[r, r2]));
        trace.push(TraceRecord {
            stage_count: 2,
            iteration,
            stage: 1,
            kind: UpdateKind::Update,
            old_r: Some(r1),
            new_r: new_r1,
            objective: f_after_first,
        });
        let hi2 = if config.exhaustive { total - 1 } else { r2 };
        let (new_r2, f_after_second) = update_point(r2, new_r1 + 1, hi2, patience, |r| {
            model.cost_of_points(&[new_r1, r])
        });
        trace.push(TraceRecord {
            stage_count: 2,
            iteration,
            stage: 2,
            kind: UpdateKind::Update,
            old_r: Some(r2),
            new_r: new_r2,
            objective: f_after_second,
        });
        let unchanged = new_r1 == r1 && new_r2 == r2;
        r1 = new_r1;
        r2 = new_r2;
        f = f_after_second;
        if unchanged || f_after_first - f_after_second <= config.mu {
            break;
        }
    }
    Ok((Partition::new(vec![r1, r2], total)?, f, trace))
}

/// Multi-stage alternating minimization, one stage count at a time.
///
/// For `i` stages the first `i - 1` points start at the `(i - 1)`-stage
/// optimum and the new point at the best position from `2 r_{i-1} - r_{i-2}`
/// on. If that addition gains more than `eps`, sweeps update `r_1, ..., r_i`
/// in turn (each minimized at or below its current value with the others
/// fixed) until a sweep gains at most `eps`.
pub fn optimize_joint(
    profile: &ScoreProfile,
    params: &CostParams,
    config: &OptimizerConfig,
) -> Result<JointResult> {
    config.validate(params.total())?;
    let model = model_for(profile, params)?;
    let total = params.total();
    let patience = config.scan_patience();
    let mut trace = OptimizerTrace::default();

    let (r1, f1) = one_stage_with(&model, config, total - 1);
    trace.push(TraceRecord {
        stage_count: 1,
        iteration: 0,
        stage: 1,
        kind: UpdateKind::Init,
        old_r: None,
        new_r: r1,
        objective: f1,
    });
    let mut points = vec![r1];
    let mut f = f1;
    let mut per_stage = vec![StageSolution {
        stages: 1,
        partition: Partition::new(points.clone(), total)?,
        cost: f1,
    }];

    for i in 2..=config.max_stages {
        let Some((lo, hi)) = next_stage_range(&points, total, config.exhaustive) else {
            break;
        };
        let prefix = model.prefix_of(&points);
        let (r_new, f_init) = scan_argmin(lo, hi, Direction::Up, patience, |r| {
            model.close(model.extend(prefix, r))
        });
        points.push(r_new);
        trace.push(TraceRecord {
            stage_count: i,
            iteration: 0,
            stage: i,
            kind: UpdateKind::Init,
            old_r: None,
            new_r: r_new,
            objective: f_init,
        });

        let mut f_new = f_init;
        let mut iteration = 0;
        // Exhaustive runs sweep to a fixed point even when the appended
        // point alone gains nothing.
        while f - f_new > config.eps || (config.exhaustive && iteration == 0) {
            iteration += 1;
            f = f_new;
            let before = points.clone();
            for j in 0..i {
                let lo = if j == 0 { 1 } else { points[j - 1] + 1 };
                let hi = if config.exhaustive {
                    if j + 1 < i {
                        points[j + 1] - 1
                    } else {
                        total - 1
                    }
                } else {
                    points[j]
                };
                let old = points[j];
                let mut candidate = points.clone();
                let (r_best, f_best) = update_point(old, lo, hi, patience, |r| {
                    candidate[j] = r;
                    model.cost_of_points(&candidate)
                });
                points[j] = r_best;
                trace.push(TraceRecord {
                    stage_count: i,
                    iteration,
                    stage: j + 1,
                    kind: UpdateKind::Update,
                    old_r: Some(old),
                    new_r: r_best,
                    objective: f_best,
                });
            }
            f_new = model.cost_of_points(&points);
            if points == before {
                break;
            }
        }
        f = f_new;
        per_stage.push(StageSolution {
            stages: i,
            partition: Partition::new(points.clone(), total)?,
            cost: f,
        });
    }

    let best = per_stage
        .iter()
        .min_by(|a, b| a.cost.partial_cmp(&b.cost).expect("finite costs"))
        .cloned()
        .expect("at least one stage");
    Ok(JointResult {
        best,
        per_stage,
        trace,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Exhaustive minimum over all strictly increasing `stages`-tuples in
/// `[1, T - 1]`; ties go to the lexicographically smallest tuple.
pub fn brute_force_partitions(
    profile: &ScoreProfile,
    params: &CostParams,
    stages: usize,
) -> Result<(Partition, f64)> {
    let total = params.total();
    if stages == 0 || stages >= total {
        return Err(Error::RangeError(format!(
            "stage count {stages} outside [1, {}]",
            total - 1
        )));
    }
    let candidates = binomial(total - 1, stages);
    if candidates > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            candidates,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let model = model_for(profile, params)?;
    let mut combo: Vec<usize> = (1..=stages).collect();
    let mut best = (combo.clone(), model.cost_of_points(&combo));
    let n = total - 1;
    // Advance to the next combination in lexicographic order.
    while let Some(pos) = (0..stages).rev().find(|&k| combo[k] < n - (stages - 1 - k)) {
        combo[pos] += 1;
        for k in pos + 1..stages {
            combo[k] = combo[k - 1] + 1;
        }
        let f = model.cost_of_points(&combo);
        if f < best.1 {
            best = (combo.clone(), f);
        }
    }
    Ok((Partition::new(best.0, total)?, best.1))
}

/// Number of candidates [`brute_force_partitions`] would enumerate.
pub fn brute_force_candidates(total: usize, stages: usize) -> u128 {
    binomial(total.saturating_sub(1), stages)
}
