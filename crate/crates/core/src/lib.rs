//! Self-estimation of the path-loss exponent (PLE) from locally ranked
//! received signal strengths.
//!
//! A node that only sees the RSS values of its neighbours ranks them, turns
//! every rank pair into a power difference and a rank-based log-distance
//! ratio, and fits the slope with total least squares. The crate contains:
//!
//! * [`geometry`]: uniform node deployment in d-balls, order-statistic distances
//! * [`channel`]: log-distance path loss with lognormal shadowing and Nakagami-m fading
//! * [`regress`]: ranking and the pairwise regression samples
//! * [`estimators`]: SVD TLS, closed-form TLS, weighted TLS and the cardinality baseline
//! * [`detect`]: Neyman-Pearson range test for cheating reference nodes
//! * [`routing`]: kth-nearest-neighbour routing energy analysis
//! * [`harness`]: Monte Carlo experiments and CSV output used by the `ple-sim` CLI

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod detect;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod regress;
pub mod rng;
pub mod routing;
pub mod special;

pub use error::{Error, Result};
