//! Toolkit for adversarial robustness work on SQuAD-style extractive QA.
//!
//! Modules, bottom-up:
//! - [`corpus`]: SQuAD v1.1 and predictions parsing, augmented JSONL round trip.
//! - [`metrics`]: EM/F1 scoring and adversarial-gap arithmetic.
//! - [`entity`]: rule-based entity extraction, offset mapping, hard-negative mining.
//! - [`taxonomy`]: five error-analysis classification schemes.
//! - [`attacks`]: distractor attacks, negation pairs, entity substitution.
//! - [`mixer`]: seeded clean/adversarial mixing.
//! - [`losskit`]: span losses with analytic gradients and finite-difference checks.
//! - [`report`]: table emission for analysis results.
//! - [`synthetic`] and [`toy`]: template corpora and a linear span scorer for desk-scale runs.

pub mod attacks;
pub mod corpus;
pub mod entity;
pub mod error;
pub mod gazetteer;
pub mod losskit;
pub mod metrics;
pub mod mixer;
pub mod report;
pub mod synthetic;
pub mod taxonomy;
pub mod text;
pub mod toy;

pub use corpus::{AttackType, Dataset, Origin, PredictionSet, QAExample};
pub use error::{Error, Result};
