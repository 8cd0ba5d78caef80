// Save a cascade as a versioned JSON envelope and load it back.
//
// cargo run --release --example model_envelope

use icascade::envelope::sha256_hex;
use icascade::{
    bound_thresholds, generate_dataset, train_adaboost, DatasetKind, ModelEnvelope, Partition,
    Provenance, ScoreProfile,
};

fn main() -> icascade::Result<()> {
    let data = generate_dataset(DatasetKind::XorSoft, 300, 300, 3, 1)?;
    let h = train_adaboost(&data, 30, 1)?;
    let profile = ScoreProfile::build(&h, &data)?;
    let partition = Partition::new(vec![5, 15], 30)?;
    let thresholds = bound_thresholds(&profile, &partition)?;

    let provenance = Provenance::new(1, sha256_hex(&data.to_csv_bytes()));
    let mut env = ModelEnvelope::new(h, 0.5, provenance);
    env.partition = Some(partition);
    env.thresholds = Some(thresholds);

    let path = std::env::temp_dir().join(format!("icascade-envelope-{}.json", std::process::id()));
    env.write(&path)?;
    let back = ModelEnvelope::read(&path)?;
    std::fs::remove_file(&path)?;
    println!(
        "format {}, {} members, digest {}",
        back.format_version,
        back.classifier.len(),
        &back.classifier_digest()[..16]
    );
    println!("identical after reload: {}", back == env);
    let model = back.cascade()?;
    println!("{} stages, c = {}", model.stages(), model.cost_c);
    Ok(())
}
