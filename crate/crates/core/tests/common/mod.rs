#![allow(dead_code)]

use std::sync::OnceLock;

use icascade::{
    generate_dataset, train_adaboost, CostParams, DatasetKind, LabeledDataset, ScoreProfile,
    StrongClassifier,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 2000 positives and 2000 negatives in 5-D, seed 7, boosted for 200 rounds.
pub struct GaussianFixture {
    pub data: LabeledDataset,
    pub classifier: StrongClassifier,
    pub profile: ScoreProfile,
    pub params: CostParams,
}

pub fn gaussian_fixture() -> &'static GaussianFixture {
    static FIXTURE: OnceLock<GaussianFixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let data = generate_dataset(DatasetKind::Gaussians, 2000, 2000, 5, 7).unwrap();
        let classifier = train_adaboost(&data, 200, 7).unwrap();
        let profile = ScoreProfile::build(&classifier, &data).unwrap();
        let params = CostParams::for_profile(&profile, 0.5).unwrap();
        GaussianFixture {
            data,
            classifier,
            profile,
            params,
        }
    })
}

/// Descending weights summing to one.
pub fn random_weights(rng: &mut ChaCha8Rng, total: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..total).map(|_| rng.random_range(0.05..1.0)).collect();
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let sum: f64 = w.iter().sum();
    w.iter().map(|v| v / sum).collect()
}

/// Vote rows where each row leans towards `lean` with its own strength.
pub fn random_votes(rng: &mut ChaCha8Rng, rows: usize, total: usize, lean: i8) -> Vec<Vec<i8>> {
    (0..rows)
        .map(|_| {
            let strength: f64 = rng.random_range(0.5..0.95);
            (0..total)
                .map(|_| {
                    if rng.random_bool(strength) {
                        lean
                    } else {
                        -lean
                    }
                })
                .collect()
        })
        .collect()
}

/// Small synthetic profile with `T` in `min_total..=20`.
pub fn random_profile(seed: u64, min_total: usize) -> ScoreProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = rng.random_range(min_total..=20);
    let weights = random_weights(&mut rng, total);
    let n_neg = rng.random_range(20..=80);
    let negatives = random_votes(&mut rng, n_neg, total, -1);
    let positives = random_votes(&mut rng, 10, total, 1);
    ScoreProfile::from_votes(&weights, &negatives, &positives, 0.0).unwrap()
}

/// Negative vote row first rejected at `exit` in a [`linear_rate_profile`].
fn exits_at(exit: usize, total: usize) -> Vec<i8> {
    (0..total)
        .map(|i| if i + 1 < exit { 1 } else { -1 })
        .collect()
}

/// Uniform members over `T = total` and negatives whose first rejection
/// index is dictated by `(exit, count)` pairs, under the threshold returned
/// alongside. An exit of `total + 1` never rejects.
///
/// With uniform weights and `t = 1 - 1/T`, a negative voting `+1` for its
/// first `k` members and `-1` afterwards is first rejected at `r = k + 1`.
pub fn exit_profile(exits: &[(usize, usize)], total: usize) -> (ScoreProfile, f64) {
    let weights = vec![1.0 / total as f64; total];
    let mut negatives = Vec::new();
    for &(exit, count) in exits {
        negatives.extend((0..count).map(|_| exits_at(exit, total)));
    }
    let positives = vec![vec![1i8; total]];
    let t = 1.0 - 1.0 / total as f64;
    let profile = ScoreProfile::from_votes(&weights, &negatives, &positives, t).unwrap();
    (profile, t)
}

/// `T = 200` uniform members and 1000 negatives with `p(r) = min(0.012 r, 1)`.
pub fn linear_rate_profile() -> (ScoreProfile, f64) {
    let mut exits: Vec<(usize, usize)> = (1..=83).map(|r| (r, 12)).collect();
    exits.push((84, 1000 - 12 * 83));
    exit_profile(&exits, 200)
}

/// Dyadic weights over `T = 8` members and six negative vote rows.
pub fn hand_t8() -> (Vec<f64>, Vec<Vec<i8>>) {
    let w = vec![
        0.25, 0.1875, 0.1875, 0.125, 0.09375, 0.0625, 0.0625, 0.03125,
    ];
    let negatives = [
        [-1, -1, -1, -1, -1, -1, -1, -1],
        [-1, -1, 1, -1, -1, 1, -1, -1],
        [1, -1, -1, -1, -1, -1, 1, -1],
        [-1, 1, -1, -1, 1, -1, -1, -1],
        [1, 1, -1, -1, -1, -1, -1, 1],
        [1, 1, 1, -1, 1, -1, 1, -1],
    ];
    (w, negatives.iter().map(|r| r.to_vec()).collect())
}
