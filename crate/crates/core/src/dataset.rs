//! Labelled samples, synthetic fixture generators and the CSV exchange format.
//!
//! The CSV format is headerless: the first column is the label (`1` or `-1`,
//! `+1` is accepted on input) and the remaining columns are the features.

use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn from_sign(sign: i8) -> Option<Self> {
        match sign {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn value(self) -> f64 {
        f64::from(self.sign())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Label,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: Label) -> Self {
        Self { features, label }
    }
}

/// A set of labelled feature vectors sharing one dimensionality.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    samples: Vec<Sample>,
    dim: usize,
}

impl LabeledDataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        let dim = samples.first().map_or(0, |s| s.features.len());
        for s in &samples {
            if s.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: s.features.len(),
                });
            }
        }
        Ok(Self { samples, dim })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.samples.iter().filter(|s| s.label == label).count()
    }

    pub fn with_label(&self, label: Label) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.label == label)
    }

    /// Keeps only the samples carrying `label`.
    pub fn filter_label(&self, label: Label) -> LabeledDataset {
        LabeledDataset {
            samples: self.with_label(label).cloned().collect(),
            dim: self.dim,
        }
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut samples = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
            let mut fields = record.iter();
            let label_text = fields
                .next()
                .ok_or_else(|| Error::Parse(format!("row {}: empty record", line + 1)))?;
            let label = parse_label(label_text).ok_or_else(|| {
                Error::Parse(format!("row {}: bad label {label_text:?}", line + 1))
            })?;
            let features = fields
                .map(|f| {
                    f64::from_str(f)
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::Parse(format!("row {}: bad feature {f:?}", line + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            samples.push(Sample::new(features, label));
        }
        Self::new(samples)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for s in &self.samples {
            let mut row = Vec::with_capacity(s.features.len() + 1);
            row.push(s.label.sign().to_string());
            row.extend(s.features.iter().map(|v| v.to_string()));
            wtr.write_record(&row)
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        buf
    }
}

fn parse_label(text: &str) -> Option<Label> {
    let v = f64::from_str(text).ok()?;
    if v == 1.0 {
        Some(Label::Positive)
    } else if v == -1.0 {
        Some(Label::Negative)
    } else {
        None
    }
}

/// Synthetic dataset families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    /// Two unit-variance Gaussian clusters offset along the main diagonal.
    Gaussians,
    /// A compact inner ball (positives) inside a shell (negatives).
    Rings,
    /// Soft XOR on the first two coordinates; no single stump separates it.
    XorSoft,
}

/// Parameters of a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub kind: DatasetKind,
    pub n_pos: usize,
    pub n_neg: usize,
    pub dim: usize,
    pub seed: u64,
    /// Distance between the class centres in units of the noise scale.
    /// Larger means less overlap.
    pub separation: f64,
}

impl GeneratorConfig {
    pub fn new(kind: DatasetKind, n_pos: usize, n_neg: usize, dim: usize, seed: u64) -> Self {
        let separation = match kind {
            DatasetKind::Gaussians => 4.0,
            DatasetKind::Rings => 1.5,
            DatasetKind::XorSoft => 4.0,
        };
        Self {
            kind,
            n_pos,
            n_neg,
            dim,
            seed,
            separation,
        }
    }

    pub fn separation(mut self, separation: f64) -> Self {
        self.separation = separation;
        self
    }
}

/// Generates a deterministic synthetic dataset with the default separation
/// of its kind.
pub fn generate_dataset(
    kind: DatasetKind,
    n_pos: usize,
    n_neg: usize,
    dim: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    generate(&GeneratorConfig::new(kind, n_pos, n_neg, dim, seed))
}

pub fn generate(config: &GeneratorConfig) -> Result<LabeledDataset> {
    if config.n_pos == 0 || config.n_neg == 0 {
        return Err(Error::BadParams(
            "n_pos and n_neg must be at least 1".into(),
        ));
    }
    if config.dim < 2 {
        return Err(Error::BadParams("dim must be at least 2".into()));
    }
    if !(config.separation.is_finite() && config.separation > 0.0) {
        return Err(Error::BadParams("separation must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut samples = Vec::with_capacity(config.n_pos + config.n_neg);
    for (label, n) in [
        (Label::Positive, config.n_pos),
        (Label::Negative, config.n_neg),
    ] {
        for _ in 0..n {
            let features = match config.kind {
                DatasetKind::Gaussians => gaussian_point(&mut rng, label, config),
                DatasetKind::Rings => ring_point(&mut rng, label, config),
                DatasetKind::XorSoft => xor_point(&mut rng, label, config),
            };
            samples.push(Sample::new(features, label));
        }
    }
    LabeledDataset::new(samples)
}

fn gaussian_point(rng: &mut ChaCha8Rng, label: Label, config: &GeneratorConfig) -> Vec<f64> {
    let offset = label.value() * config.separation / 2.0 / (config.dim as f64).sqrt();
    (0..config.dim)
        .map(|_| offset + rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn ring_point(rng: &mut ChaCha8Rng, label: Label, config: &GeneratorConfig) -> Vec<f64> {
    let (mean, spread) = match label {
        Label::Positive => (1.0, 0.25),
        Label::Negative => (1.0 + config.separation, 0.4),
    };
    let radius = Normal::new(mean, spread)
        .expect("valid normal")
        .sample(rng)
        .abs();
    let dir: Vec<f64> = (0..config.dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    dir.into_iter().map(|v| v / norm * radius).collect()
}

fn xor_point(rng: &mut ChaCha8Rng, label: Label, config: &GeneratorConfig) -> Vec<f64> {
    let noise = 1.0 / config.separation;
    let s0: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let s1 = match label {
        Label::Positive => s0,
        Label::Negative => -s0,
    };
    let mut features = Vec::with_capacity(config.dim);
    features.push(s0 * rng.random_range(0.2..1.0) + noise * rng.sample::<f64, _>(StandardNormal));
    features.push(s1 * rng.random_range(0.2..1.0) + noise * rng.sample::<f64, _>(StandardNormal));
    for _ in 2..config.dim {
        features.push(rng.sample::<f64, _>(StandardNormal));
    }
    features
}
