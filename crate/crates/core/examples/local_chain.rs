// Greedy stage-by-stage partition and the growth bound it relies on.
//
// cargo run --release --example local_chain

use icascade::{
    generate_dataset, optimize_local_chain, train_adaboost, CostParams, DatasetKind,
    OptimizerConfig, OptimizerMode, ScoreProfile,
};

fn main() -> icascade::Result<()> {
    let data = generate_dataset(DatasetKind::Gaussians, 1000, 1000, 5, 7)?;
    let h = train_adaboost(&data, 100, 7)?;
    let profile = ScoreProfile::build(&h, &data)?;
    let params = CostParams::for_profile(&profile, 0.5)?;
    let result = optimize_local_chain(
        &profile,
        &params,
        &OptimizerConfig::new(OptimizerMode::Local, 6),
    )?;
    for s in &result.per_stage {
        println!(
            "{} stages: cost {:.3} at {:?}",
            s.stages,
            s.cost,
            s.partition.points()
        );
    }
    println!(
        "growth bound checked {} times, violated {} times",
        result.growth_checks,
        result.growth_violations.len()
    );
    Ok(())
}
