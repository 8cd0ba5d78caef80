// Joint partition search versus the greedy chain on a Gaussian fixture.
//
// Run with `cargo run --release --example joint_partition`.

use icascade::{
    generate_dataset, optimize_joint, optimize_local_chain, train_adaboost, CostParams,
    DatasetKind, OptimizerConfig, OptimizerMode, ScoreProfile,
};

fn main() -> icascade::Result<()> {
    let data = generate_dataset(DatasetKind::Gaussians, 2000, 2000, 5, 7)?;
    let classifier = train_adaboost(&data, 200, 7)?;
    println!(
        "{} members, training error {:.4}",
        classifier.len(),
        classifier.error_rate(&data)?
    );
    let profile = ScoreProfile::build(&classifier, &data)?;
    let params = CostParams::for_profile(&profile, 0.5)?;

    let joint = optimize_joint(
        &profile,
        &params,
        &OptimizerConfig::new(OptimizerMode::Joint, 8),
    )?;
    let local = optimize_local_chain(
        &profile,
        &params,
        &OptimizerConfig::new(OptimizerMode::Local, 8),
    )?;

    println!(
        "{:>6} {:>10} {:>10}  joint partition",
        "stages", "f_joint", "f_local"
    );
    for s in &joint.per_stage {
        let f_local = local
            .per_stage
            .get(s.stages - 1)
            .map_or("-".to_string(), |l| format!("{:.4}", l.cost));
        println!(
            "{:>6} {:>10.4} {:>10}  {:?}",
            s.stages,
            s.cost,
            f_local,
            s.partition.points()
        );
    }
    println!(
        "best: {} stages, cost {:.4}; {} alternating updates, {} moved a point up",
        joint.best.stages,
        joint.best.cost,
        joint.trace.records.len(),
        joint.trace.increasing_updates().len()
    );
    Ok(())
}
