//! Similarity-based property prediction over multiple molecular fingerprints.
//!
//! A target molecule is compared with every labeled reference molecule under
//! several fingerprint schemes. References are ranked by relaxed Pareto
//! dominance of their Tanimoto distances, the ranking becomes a fitness
//! weight per reference, and fitness-weighted label votes give class
//! probabilities (or a weighted mean for continuous labels). There are no
//! trained parameters: the labeled library is the model.
//!
//! Modules, bottom up:
//! - [`chem`]: SMILES parsing into molecular graphs and graph identity keys
//! - [`fingerprint`]: folded binary fingerprints, external loader, Tanimoto distance
//! - [`model`]: reference library, dominance, fitness, prediction, file format
//! - [`dataset`]: CSV ingestion, cleaning and library building
//! - [`eval`]: cross-validation harnesses, ROC AUC and RMSE
//! - [`synthetic`]: seeded synthetic libraries for tests and benchmarks

pub mod chem;
pub mod dataset;
mod error;
pub mod eval;
pub mod fingerprint;
pub mod hash;
pub mod model;
pub mod synthetic;

pub use chem::{graph_invariant_key, parse_smiles, MolGraph};
pub use error::{Error, Result};
pub use fingerprint::{tanimoto_distance, Fingerprint, FingerprintScheme, SchemeKind, SchemeSet};
pub use model::{
    dominance, embed, fitness, predict, DistanceProfile, DominanceResult, FitnessVector, Label,
    PoemConfig, Prediction, ReferenceLibrary, Target, TaskKind,
};
