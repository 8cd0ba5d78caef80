// Exhaustive search over small stage counts as a reference for the
// alternating optimizer.
//
// cargo run --release --example brute_force_oracle

use icascade::partition::brute_force_candidates;
use icascade::{
    brute_force_partitions, generate_dataset, optimize_joint, train_adaboost, CostParams,
    DatasetKind, OptimizerConfig, OptimizerMode, ScoreProfile,
};

fn main() -> icascade::Result<()> {
    let data = generate_dataset(DatasetKind::Gaussians, 600, 600, 4, 5)?;
    let h = train_adaboost(&data, 60, 5)?;
    let profile = ScoreProfile::build(&h, &data)?;
    let params = CostParams::for_profile(&profile, 0.5)?;
    let joint = optimize_joint(
        &profile,
        &params,
        &OptimizerConfig::new(OptimizerMode::Joint, 3).exhaustive(true),
    )?;
    for s in 1..=3 {
        let (best, f) = brute_force_partitions(&profile, &params, s)?;
        let alt = &joint.per_stage[(s - 1).min(joint.per_stage.len() - 1)];
        println!(
            "S = {s}: brute force {f:.4} at {:?} over {} tuples; joint {:.4} at {:?}",
            best.points(),
            brute_force_candidates(params.total(), s),
            alt.cost,
            alt.partition.points()
        );
    }
    Ok(())
}
