// The best single rejection point and the cost curve around it.
//
// cargo run --release --example one_stage

use icascade::{
    generate_dataset, one_stage_cost, optimize_one_stage, train_adaboost, CostParams, DatasetKind,
    OptimizerConfig, OptimizerMode, ScoreProfile,
};

fn main() -> icascade::Result<()> {
    let data = generate_dataset(DatasetKind::Gaussians, 1000, 1000, 5, 7)?;
    let h = train_adaboost(&data, 100, 7)?;
    let profile = ScoreProfile::build(&h, &data)?;
    let params = CostParams::for_profile(&profile, 0.5)?;
    let curve = profile.curve(params.threshold())?;
    for r in [1, 5, 10, 20, 40, 80] {
        let f = one_stage_cost(curve.rate(r), r, &params)?;
        println!("f_1({r:>2}) = {f:.3}");
    }
    let config = OptimizerConfig::new(OptimizerMode::OneStage, 1);
    let (r, f) = optimize_one_stage(&profile, &params, &config)?;
    println!(
        "optimum r = {r}, f = {f:.3} (no cascade: {})",
        params.total()
    );
    let (r_fast, _) = optimize_one_stage(&profile, &params, &config.patience(Some(5)))?;
    println!("with patience 5 the scan stops at r = {r_fast}");
    Ok(())
}
