//! Fuzzy C-Means clustering with a family of seeding methods, fuzzy validity
//! indices, synthetic data generators and a comparison harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod data;
pub mod engine;
pub mod error;
pub mod seeding;
pub mod synth;
pub mod validity;

pub use data::{Dataset, Standardize};
pub use engine::{run_fcm, Centroids, FcmConfig, FcmResult, MembershipMatrix};
pub use error::{Error, Result};
pub use seeding::{fit, seed, Method, SeedSet};
pub use validity::{Score, ValidityScores};
