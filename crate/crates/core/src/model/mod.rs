//! The reference library and the prediction pipeline built on it.

mod dominance;
mod embed;
mod fitness;
pub mod format;
mod library;
mod predict;

pub use dominance::{
    dominance, dominance_summary, dominance_with, DominanceConfig, DominanceResult,
    DominanceSummary, DEFAULT_RELAX,
};
pub use embed::{embed, DistanceProfile};
pub use fitness::{fitness, fitness_from_summary, fitness_value, FitnessVector, FITNESS_OFFSET};
pub use format::{load_library, read_info, save_library, LibraryInfo};
pub use library::{
    extend_library, FingerprintColumn, Label, LabeledMolecule, LibraryMeta, LibraryRow,
    MoleculeRecord, ReferenceLibrary, Targets, TaskKind,
};
pub use predict::{
    predict, predict_class, predict_fingerprints, predict_from_profile, predict_masked,
    predict_row_against, predict_value, target_fingerprints, Contribution, Estimate, PoemConfig,
    Prediction, Target, DEFAULT_TOP_K,
};
