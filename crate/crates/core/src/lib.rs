//! Agnostic boosting with labeled and unlabeled data.
//!
//! The potential `phi(z, y) = psi(z) - y z` splits into a label-free part and
//! a linear part, so the boosting distribution can be built from labeled
//! examples plus pseudo-labeled unlabeled points. See the README for the
//! command-line harness.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod booster;
pub mod data;
pub mod error;
pub mod experiment;
pub mod hypothesis;
pub mod potential;
pub mod relabel;
pub mod rng;
pub mod sample;
pub mod sign;
pub mod weak_learners;

pub use booster::{boost, post_select, theory_params, BoostConfig, ReusePreset, RunReport, TheoryInputs, Variant};
pub use error::{Error, ErrorClass, Result};
pub use hypothesis::{BaseHypothesis, Ensemble, Term};
pub use potential::{Margin, PotentialFamily, PotentialKind};
pub use relabel::{CovariateMixture, RelabelMode, ReuseState};
pub use sample::{WeightedExample, WeightedLabeledSet};
pub use sign::Sign;
pub use weak_learners::{WeakLearnerKind, WeakLearnerSpec};
