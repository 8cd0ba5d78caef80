// Bound, exact-detection and learned thresholds on one partition.
//
// cargo run --release --example threshold_learning

use icascade::threshold::cascade_detection_rate;
use icascade::{
    bound_thresholds, cascade_cost_with_thresholds, exact_detection_thresholds, generate_dataset,
    learn_thresholds, train_adaboost, DatasetKind, LearnerConfig, Partition, ScoreProfile,
};

fn main() -> icascade::Result<()> {
    let data = generate_dataset(DatasetKind::Gaussians, 1000, 1000, 5, 7)?;
    let h = train_adaboost(&data, 100, 7)?;
    let profile = ScoreProfile::build(&h, &data)?;
    let partition = Partition::new(vec![10, 30, 60], 100)?;
    let config = LearnerConfig {
        target_detection: 0.97,
        ..LearnerConfig::default()
    };
    let (learned, trace) = learn_thresholds(&profile, &partition, 0.5, &config)?;
    let sets = [
        ("bound", bound_thresholds(&profile, &partition)?),
        ("exact", exact_detection_thresholds(&profile, &partition)?),
        ("learned", learned),
    ];
    for (name, tv) in &sets {
        let f = cascade_cost_with_thresholds(&profile, &partition, &tv.values, 0.5)?;
        let d = cascade_detection_rate(&profile, &partition, tv)?;
        let values: Vec<String> = tv.values.iter().map(|v| format!("{v:+.3}")).collect();
        println!(
            "{name:>8}: cost {f:>7.3}, detection {d:.4}, thresholds {}",
            values.join(" ")
        );
    }
    println!("learner took {} steps", trace.steps.len() - 1);
    Ok(())
}
