//! Cost-minimal early-rejection cascades built from AdaBoost strong
//! classifiers.
//!
//! A trained strong classifier `H(x) = sum_i a_i h_i(x)` is split at
//! partition points `r_1 < ... < r_S` into stages. A window is rejected at
//! stage `i` when its prefix score falls to the stage threshold, so most
//! negatives are discarded after evaluating only a few weak hypotheses. The
//! crate learns the classifier ([`boosting`]), measures rejection rates
//! ([`profile`]), prices cascades ([`cost`]), chooses partition points
//! ([`partition`]), sets thresholds ([`threshold`]) and runs the result
//! ([`runtime`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boosting;
pub mod cli;
pub mod cost;
pub mod dataset;
pub mod envelope;
pub mod error;
pub mod partition;
pub mod pipeline;
pub mod profile;
pub mod runtime;
pub mod threshold;

pub use boosting::{train_adaboost, Member, Polarity, StrongClassifier, WeakHypothesis};
pub use cost::{
    cascade_cost, cascade_cost_with_thresholds, conditional_stage_cost, one_stage_cost,
    stage_addition_gain, CostModel, CostParams, Partition, DEFAULT_CHECK_COST,
};
pub use dataset::{
    generate, generate_dataset, DatasetKind, GeneratorConfig, Label, LabeledDataset, Sample,
};
pub use envelope::{ModelEnvelope, Provenance, RunReport};
pub use error::{Error, Result};
pub use partition::{
    brute_force_partitions, optimize_joint, optimize_joint_two_stage, optimize_local_chain,
    optimize_one_stage, OptimizerConfig, OptimizerMode, OptimizerTrace,
};
pub use profile::{RejectionCurve, ScoreProfile};
pub use runtime::{CascadeModel, ClassificationResult, EvaluationReport, RocPoint};
pub use threshold::{
    bound_thresholds, exact_detection_thresholds, learn_thresholds, LearnerConfig, ThresholdVector,
};
