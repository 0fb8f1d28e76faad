//! Molecular graphs parsed from SMILES, plus a graph-level identity key.

mod element;
mod graph;
mod invariant;
mod smiles;

pub use element::Element;
pub use graph::{Atom, Bond, BondDirection, BondOrder, Chirality, MolGraph};
pub use invariant::graph_invariant_key;
pub use smiles::parse_smiles;
