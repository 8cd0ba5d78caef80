// Negative rejection rates of the bound test along the prefix length.
//
// cargo run --release --example rejection_profile

use icascade::{generate_dataset, train_adaboost, DatasetKind, ScoreProfile};

fn main() -> icascade::Result<()> {
    let data = generate_dataset(DatasetKind::Gaussians, 1000, 1000, 5, 7)?;
    let h = train_adaboost(&data, 100, 7)?;
    let profile = ScoreProfile::build(&h, &data)?;
    let t = profile.source_threshold();
    let curve = profile.curve(t)?;
    println!("{:>4} {:>8} {:>10}", "r", "p(r)", "survivors");
    for r in (10..=100).step_by(10) {
        println!("{r:>4} {:>8.4} {:>10}", curve.rate(r), curve.survivors(r));
    }
    let sat = profile.saturation_point(t, 0.05)?;
    println!("95% of negatives are rejected by r = {sat}");
    println!(
        "p(60 | 20) = {:.4}",
        profile.conditional_rejection_rate(60, 20, t)?
    );
    let broken = curve.shift_violations(10);
    println!(
        "shift property fails for {} pairs at delta 10",
        broken.len()
    );
    Ok(())
}
