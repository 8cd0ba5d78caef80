// Train an AdaBoost strong classifier and watch training error fall.
//
// cargo run --release --example train_classifier

use icascade::{generate_dataset, train_adaboost, DatasetKind};

fn main() -> icascade::Result<()> {
    let data = generate_dataset(DatasetKind::Rings, 500, 500, 2, 3)?;
    for rounds in [1, 5, 20, 80] {
        let h = train_adaboost(&data, rounds, 3)?;
        println!(
            "{rounds:>3} rounds: {:>3} members, error {:.4}",
            h.len(),
            h.error_rate(&data)?
        );
    }
    let h = train_adaboost(&data, 80, 3)?;
    let top: Vec<String> = h.weights().take(5).map(|w| format!("{w:.4}")).collect();
    println!("largest weights: {}", top.join(" "));
    let x = &data.samples()[0];
    println!(
        "first sample: label {:?}, H(x) = {:.4}",
        x.label,
        h.strong_score(&x.features)?
    );
    Ok(())
}
