// Run a cascade on held-out windows and compare measured with predicted cost.
//
// cargo run --release --example evaluate_cascade

use icascade::{
    generate_dataset, learn_thresholds, train_adaboost, CascadeModel, DatasetKind, LearnerConfig,
    Partition, ScoreProfile,
};

fn main() -> icascade::Result<()> {
    let train = generate_dataset(DatasetKind::Gaussians, 1000, 1000, 5, 7)?;
    let test = generate_dataset(DatasetKind::Gaussians, 1000, 1000, 5, 8)?;
    let h = train_adaboost(&train, 100, 7)?;
    let profile = ScoreProfile::build(&h, &train)?;
    let partition = Partition::new(vec![8, 25, 55], 100)?;
    let (tv, _) = learn_thresholds(&profile, &partition, 0.5, &LearnerConfig::default())?;
    let model = CascadeModel::new(h, partition, tv, 0.5)?;

    let report = model.batch_evaluate(&test)?;
    println!(
        "avg cost {:.3} per negative (analytic {:.3}), {:.1} weak evaluations",
        report.avg_cost,
        report.analytic_cost.unwrap_or(f64::NAN),
        report.avg_weak_evals
    );
    println!(
        "detection {:.4}, false positives {:.4}, rejections per stage {:?}",
        report.detection_rate, report.false_positive_rate, report.per_stage_rejections
    );
    let x = &test.samples()[0];
    let res = model.classify(&x.features)?;
    println!(
        "first window: {:?} at stage {} after {} weak evaluations",
        res.label, res.exit_stage, res.weak_evals
    );
    for p in model.roc_sweep(&test, 5)? {
        println!(
            "tau {:+.3}: fp {:.4}, detection {:.4}",
            p.final_threshold, p.false_positive_rate, p.detection_rate
        );
    }
    Ok(())
}
