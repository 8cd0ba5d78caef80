//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{gaussian_fixture, random_profile};
use icascade::{
    bound_thresholds, brute_force_partitions, cascade_cost, cascade_cost_with_thresholds,
    exact_detection_thresholds, generate_dataset, learn_thresholds, optimize_joint,
    optimize_local_chain, stage_addition_gain, train_adaboost, CascadeModel, CostModel, CostParams,
    DatasetKind, Label, LearnerConfig, OptimizerConfig, OptimizerMode, Partition, ScoreProfile,
    ThresholdVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn joint_config(stages: usize) -> OptimizerConfig {
    OptimizerConfig::new(OptimizerMode::Joint, stages)
}

fn local_config(stages: usize) -> OptimizerConfig {
    OptimizerConfig::new(OptimizerMode::Local, stages)
}

/// Cost per stage count `1..=n`; an optimizer that stopped adding stages
/// keeps its last cost.
fn costs_up_to(costs: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| costs[i.min(costs.len() - 1)]).collect()
}

fn relative_error(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn decision_equivalence() -> Outcome {
    let fx = gaussian_fixture();
    let test = generate_dataset(DatasetKind::Gaussians, 5000, 5000, 5, 1007).unwrap();
    let joint = optimize_joint(&fx.profile, &fx.params, &joint_config(8)).unwrap();
    let mut partitions: Vec<Partition> = joint
        .per_stage
        .iter()
        .map(|s| s.partition.clone())
        .collect();
    partitions.push(Partition::new(vec![10, 50, 100, 150, 199], 200).unwrap());

    let mut disagreements = 0usize;
    let mut slowest = Duration::ZERO;
    for partition in &partitions {
        let thresholds = bound_thresholds(&fx.profile, partition).unwrap();
        let model =
            CascadeModel::new(fx.classifier.clone(), partition.clone(), thresholds, 0.5).unwrap();
        let start = Instant::now();
        for s in test.samples() {
            let label = model.classify(&s.features).unwrap().label;
            if label != fx.classifier.predict(&s.features).unwrap() {
                disagreements += 1;
            }
        }
        slowest = slowest.max(start.elapsed());
    }
    Outcome::new(
        disagreements == 0 && slowest < Duration::from_secs(5),
        format!(
            "{disagreements} disagreements over {} samples x {} partitions; slowest pass {:.3}s",
            test.len(),
            partitions.len(),
            slowest.as_secs_f64()
        ),
    )
}

fn cost_accounting() -> Outcome {
    let fx = gaussian_fixture();
    let negatives = fx.data.filter_label(Label::Negative);
    let joint = optimize_joint(&fx.profile, &fx.params, &joint_config(8)).unwrap();
    let mut worst: f64 = 0.0;
    for sol in &joint.per_stage {
        let thresholds = bound_thresholds(&fx.profile, &sol.partition).unwrap();
        let model = CascadeModel::new(
            fx.classifier.clone(),
            sol.partition.clone(),
            thresholds,
            0.5,
        )
        .unwrap();
        let measured = model.batch_evaluate(&negatives).unwrap().avg_cost;
        let analytic = cascade_cost(&fx.profile, &sol.partition, &fx.params).unwrap();
        worst = worst.max(relative_error(measured, analytic));

        let (learned, _) =
            learn_thresholds(&fx.profile, &sol.partition, 0.5, &LearnerConfig::default()).unwrap();
        let model =
            CascadeModel::new(fx.classifier.clone(), sol.partition.clone(), learned, 0.5).unwrap();
        let report = model.batch_evaluate(&negatives).unwrap();
        worst = worst.max(relative_error(
            report.avg_cost,
            report.analytic_cost.unwrap(),
        ));
    }
    Outcome::new(
        worst <= 1e-9,
        format!(
            "S = 1..{}: worst relative error {worst:.3e} (bound and learned thresholds)",
            joint.per_stage.len()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut mismatches = Vec::new();
    let mut exact_s = 0;
    for k in 0..20u64 {
        let stages = 1 + (k % 3) as usize;
        let profile = random_profile(1000 + k, stages + 2);
        let params = CostParams::for_profile(&profile, 0.5).unwrap();
        let config = joint_config(stages).exhaustive(true);
        let joint = optimize_joint(&profile, &params, &config).unwrap();
        let oracle = (1..=stages)
            .map(|s| brute_force_partitions(&profile, &params, s).unwrap().1)
            .fold(f64::INFINITY, f64::min);
        if joint.best.cost != oracle {
            mismatches.push(format!(
                "T={} S={stages}: joint {} vs oracle {oracle}",
                profile.len_weak(),
                joint.best.cost
            ));
        }
        if let Some(sol) = joint.per_stage.get(stages - 1) {
            let (_, f) = brute_force_partitions(&profile, &params, stages).unwrap();
            if sol.cost == f {
                exact_s += 1;
            }
        }
    }
    let detail = if mismatches.is_empty() {
        format!("20/20 profiles match the exhaustive minimum; {exact_s} hit the S-stage optimum exactly")
    } else {
        mismatches.join("; ")
    };
    Outcome::new(mismatches.is_empty(), detail)
}

fn joint_not_worse_than_local() -> Outcome {
    let fx = gaussian_fixture();
    let start = Instant::now();
    let joint = optimize_joint(&fx.profile, &fx.params, &joint_config(8)).unwrap();
    let local = optimize_local_chain(&fx.profile, &fx.params, &local_config(8)).unwrap();
    let elapsed = start.elapsed();
    let fj = costs_up_to(
        &joint.per_stage.iter().map(|s| s.cost).collect::<Vec<_>>(),
        8,
    );
    let fl = costs_up_to(
        &local.per_stage.iter().map(|s| s.cost).collect::<Vec<_>>(),
        8,
    );
    let dominated = fj.iter().zip(&fl).all(|(j, l)| j <= l);
    let first_equal = fj[0] == fl[0];
    Outcome::new(
        dominated && first_equal && elapsed < Duration::from_secs(60),
        format!(
            "f_joint {:?} f_local {:?} (stages produced: joint {}, local {}); {:.2}s",
            rounded(&fj),
            rounded(&fl),
            joint.per_stage.len(),
            local.per_stage.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 100.0).round() / 100.0).collect()
}

fn local_cost_shape() -> Outcome {
    let fx = gaussian_fixture();
    let local = optimize_local_chain(&fx.profile, &fx.params, &local_config(8)).unwrap();
    let costs = costs_up_to(
        &local.per_stage.iter().map(|s| s.cost).collect::<Vec<_>>(),
        8,
    );
    let non_increasing = costs.windows(2).all(|w| w[1] <= w[0]);
    let decrease = 1.0 - costs[7] / costs[0];
    Outcome::new(
        non_increasing && decrease > 0.10,
        format!(
            "costs {:?} ({} stages accepted); decrease S=1 to S=8 {:.1}% (needs > 10%)",
            rounded(&costs),
            local.per_stage.len(),
            100.0 * decrease
        ),
    )
}

fn decreasing_phenomenon() -> Outcome {
    let mut updates = 0;
    let mut violations = 0;
    for seed in 0..20u64 {
        let data = generate_dataset(DatasetKind::Gaussians, 300, 300, 5, seed).unwrap();
        let classifier = train_adaboost(&data, 60, seed).unwrap();
        let profile = ScoreProfile::build(&classifier, &data).unwrap();
        let params = CostParams::for_profile(&profile, 0.5).unwrap();
        let joint = optimize_joint(&profile, &params, &joint_config(6)).unwrap();
        updates += joint
            .trace
            .records
            .iter()
            .filter(|r| r.old_r.is_some())
            .count();
        violations += joint.trace.increasing_updates().len();
    }
    Outcome::new(
        violations == 0,
        format!("{violations} increasing updates among {updates} alternating updates over 20 runs"),
    )
}

fn increasing_step() -> Outcome {
    let fx = gaussian_fixture();
    let local =
        optimize_local_chain(&fx.profile, &fx.params, &local_config(8).exhaustive(true)).unwrap();
    let checks = local.growth_checks;
    let violations = local.growth_violations.len();
    let satisfied = if checks == 0 {
        1.0
    } else {
        (checks - violations) as f64 / checks as f64
    };
    let listed: Vec<String> = local
        .growth_violations
        .iter()
        .map(|v| format!("stage {} at {} < {}", v.stage, v.point, v.lower_bound))
        .collect();
    Outcome::new(
        satisfied >= 0.95,
        format!(
            "partition {:?}: {}/{checks} additions satisfy the bound ({:.0}%, needs >= 95%); violations: {}",
            local.partition.points(),
            checks - violations,
            100.0 * satisfied,
            if listed.is_empty() { "none".to_string() } else { listed.join(", ") }
        ),
    )
}

fn rate_monotonicity_and_stacking() -> Outcome {
    let fx = gaussian_fixture();
    let mut profiles: Vec<(ScoreProfile, f64)> =
        vec![(fx.profile.clone(), fx.classifier.global_threshold())];
    for k in 0..20 {
        profiles.push((random_profile(2000 + k, 4), 0.0));
    }
    let mut monotone_failures = 0;
    for (profile, t) in &profiles {
        let rates: Vec<f64> = (1..=profile.len_weak())
            .map(|r| profile.rejection_rate(r, *t).unwrap())
            .collect();
        if rates.windows(2).any(|w| w[1] < w[0]) {
            monotone_failures += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (profile, t) = &profiles[i % profiles.len()];
        let total = profile.len_weak();
        let r_prev = rng.random_range(1..total);
        let r = rng.random_range(r_prev + 1..=total);
        let lhs = 1.0 - profile.rejection_rate(r, *t).unwrap();
        let rhs = (1.0 - profile.rejection_rate(r_prev, *t).unwrap())
            * (1.0 - profile.conditional_rejection_rate(r, r_prev, *t).unwrap());
        worst = worst.max(relative_error(rhs, lhs));
    }
    Outcome::new(
        monotone_failures == 0 && worst <= 1e-12,
        format!(
            "{} profiles, {monotone_failures} non-monotone; 100 stacking pairs, worst relative error {worst:.2e}",
            profiles.len()
        ),
    )
}

fn threshold_direction() -> Outcome {
    let fx = gaussian_fixture();
    let joint = optimize_joint(&fx.profile, &fx.params, &joint_config(8)).unwrap();
    let partition = &joint.best.partition;
    let bound = bound_thresholds(&fx.profile, partition).unwrap();
    let exact = exact_detection_thresholds(&fx.profile, partition).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0;
    for _ in 0..100 {
        let base: Vec<f64> = bound
            .values
            .iter()
            .zip(&exact.values)
            .map(|(lo, hi)| lo + rng.random_range(0.0..1.0) * (hi - lo + 0.1))
            .collect();
        let mut raised = base.clone();
        let j = rng.random_range(0..raised.len());
        raised[j] += rng.random_range(0.001..0.05);
        let before = cascade_cost_with_thresholds(&fx.profile, partition, &base, 0.5).unwrap();
        let after = cascade_cost_with_thresholds(&fx.profile, partition, &raised, 0.5).unwrap();
        if after > before {
            violations += 1;
        }
    }
    Outcome::new(
        violations == 0,
        format!("{violations} cost increases over 100 single-threshold raises"),
    )
}

fn threshold_learning_contract() -> Outcome {
    let fx = gaussian_fixture();
    let joint = optimize_joint(&fx.profile, &fx.params, &joint_config(8)).unwrap();
    let partition = &joint.best.partition;
    let (learned, trace) =
        learn_thresholds(&fx.profile, partition, 0.5, &LearnerConfig::default()).unwrap();
    let cost_monotone = trace.steps.windows(2).all(|w| w[1].cost <= w[0].cost);
    let detection_monotone = trace
        .steps
        .windows(2)
        .all(|w| w[1].detection <= w[0].detection);

    let initial = exact_detection_thresholds(&fx.profile, partition).unwrap();
    let evaluate = |tv: ThresholdVector| {
        CascadeModel::new(fx.classifier.clone(), partition.clone(), tv, 0.5)
            .unwrap()
            .batch_evaluate(&fx.data)
            .unwrap()
    };
    let before = evaluate(initial);
    let after = evaluate(learned);
    let reduction = 1.0 - after.avg_weak_evals / before.avg_weak_evals;
    let pass = cost_monotone
        && detection_monotone
        && after.detection_rate >= 0.98
        && after.avg_weak_evals < before.avg_weak_evals
        && reduction >= 0.20;
    Outcome::new(
        pass,
        format!(
            "{} moves; monotone f {cost_monotone}, D {detection_monotone}; exit D {:.4}; features/window {:.2} -> {:.2} ({:.1}% reduction, needs >= 20%)",
            trace.steps.len() - 1,
            after.detection_rate,
            before.avg_weak_evals,
            after.avg_weak_evals,
            100.0 * reduction
        ),
    )
}

/// Uniform weights over `T = 10`; 90 negatives vote -1 throughout, 10 vote
/// +1 for five members and -1 after, so nothing after the first stage can be
/// rejected before the end.
fn stalled_profile() -> ScoreProfile {
    let weights = vec![0.1; 10];
    let mut negatives = vec![vec![-1i8; 10]; 90];
    for _ in 0..10 {
        negatives.push([1, 1, 1, 1, 1, -1, -1, -1, -1, -1].to_vec());
    }
    ScoreProfile::from_votes(&weights, &negatives, &[vec![1; 10]], 0.0).unwrap()
}

fn gain_test() -> Outcome {
    let fx = gaussian_fixture();
    let local = optimize_local_chain(&fx.profile, &fx.params, &local_config(8)).unwrap();
    let t = fx.classifier.global_threshold();
    let model = CostModel::new(&fx.profile, fx.params).unwrap();
    let mut previous_cost = model.cost_of_points(&[]);
    let mut bad = 0;
    let mut r_prev = 0;
    for sol in &local.per_stage {
        let r = *sol.partition.points().last().unwrap();
        let p_new = fx.profile.conditional_rejection_rate(r, r_prev, t).unwrap();
        if !stage_addition_gain(p_new, r, &fx.params).unwrap()
            || sol.cost.partial_cmp(&previous_cost) != Some(std::cmp::Ordering::Less)
        {
            bad += 1;
        }
        previous_cost = sol.cost;
        r_prev = r;
    }

    let stalled = stalled_profile();
    let params = CostParams::for_profile(&stalled, 0.5).unwrap();
    let chain = optimize_local_chain(&stalled, &params, &local_config(8).exhaustive(true)).unwrap();
    let r1 = chain.partition.points()[0];
    let no_gain = (r1 + 1..10).all(|r| {
        let p = stalled.conditional_rejection_rate(r, r1, 0.0).unwrap();
        p <= 0.5 / (10.0 + 0.5 - r as f64) && !stage_addition_gain(p, r, &params).unwrap()
    });
    let stopped = chain.partition.len() == 1 && no_gain;
    Outcome::new(
        bad == 0 && stopped,
        format!(
            "{bad} of {} accepted stages fail gain or strict decrease; constructed profile stops at {:?} (no_gain {no_gain})",
            local.per_stage.len(),
            chain.partition.points()
        ),
    )
}

fn run_pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let bin = env!("CARGO_BIN_EXE_icascade");
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec![
            "gen",
            "--kind",
            "gaussians",
            "--n-pos",
            "2000",
            "--n-neg",
            "2000",
            "--dim",
            "5",
            "--seed",
            "7",
            "--out",
            &p("d.csv"),
        ],
        vec![
            "train",
            "--data",
            &p("d.csv"),
            "--rounds",
            "200",
            "--seed",
            "7",
            "--out",
            &p("m.json"),
        ],
        vec![
            "partition",
            "--model",
            &p("m.json"),
            "--data",
            &p("d.csv"),
            "--mode",
            "joint",
            "--stages",
            "8",
            "--cost-c",
            "0.5",
            "--out",
            &p("casc.json"),
            "--table",
            &p("table.csv"),
        ],
        vec![
            "thresholds",
            "--cascade",
            &p("casc.json"),
            "--data",
            &p("d.csv"),
            "--out",
            &p("thr.json"),
            "--trace",
            &p("trace.csv"),
        ],
        vec![
            "eval",
            "--cascade",
            &p("thr.json"),
            "--data",
            &p("d.csv"),
            "--model",
            &p("m.json"),
            "--report",
            &p("r.json"),
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in &steps {
        let status = Command::new(bin).args(args).output().unwrap();
        assert!(
            status.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&status.stderr)
        );
    }
    [
        "d.csv",
        "m.json",
        "casc.json",
        "table.csv",
        "thr.json",
        "trace.csv",
    ]
    .iter()
    .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap()))
    .collect()
}

fn pipeline_determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_pipeline(a.path());
    let second = run_pipeline(b.path());
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x.1 != y.1)
        .map(|(x, _)| x.0.as_str())
        .collect();
    Outcome::new(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} artifacts byte-identical across two runs", first.len())
        } else {
            format!("differing artifacts: {}", differing.join(", "))
        },
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        (
            "decision equivalence with bound thresholds",
            decision_equivalence,
        ),
        ("measured cost equals analytic cost", cost_accounting),
        ("joint search matches brute force", oracle_equivalence),
        (
            "joint cost never above local cost",
            joint_not_worse_than_local,
        ),
        ("local-chain cost shape", local_cost_shape),
        (
            "alternating updates never move a point up",
            decreasing_phenomenon,
        ),
        ("local stages respect the growth bound", increasing_step),
        (
            "rejection-rate monotonicity and stacking",
            rate_monotonicity_and_stacking,
        ),
        ("raising a threshold never raises cost", threshold_direction),
        ("threshold learner contract", threshold_learning_contract),
        ("stage-addition gain test", gain_test),
        ("pipeline determinism", pipeline_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} - {} [{:.2}s]",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            name,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
