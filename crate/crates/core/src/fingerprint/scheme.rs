use std::collections::HashSet;
use std::fmt;

use super::{
    atom_pair_fingerprint, feature_morgan_fingerprint, morgan_fingerprint, path_fingerprint,
    Fingerprint,
};
use crate::chem::MolGraph;
use crate::error::{Error, Result};

/// Folded length used by every native scheme.
pub const DEFAULT_LENGTH: usize = 2048;
pub const DEFAULT_MAX_PATH_LEN: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Circular fingerprint. `use_features` swaps the atom invariants for
    /// coarse pharmacophore classes.
    Morgan {
        radius: u32,
        use_chirality: bool,
        use_features: bool,
    },
    AtomPair,
    Path {
        max_path_len: u32,
    },
    /// Supplied from a file; cannot be computed from a graph.
    External,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Morgan { .. } => "morgan",
            SchemeKind::AtomPair => "atom_pair",
            SchemeKind::Path { .. } => "path",
            SchemeKind::External => "external",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FingerprintScheme {
    pub id: String,
    pub kind: SchemeKind,
    pub length: usize,
}

impl FingerprintScheme {
    pub fn morgan(
        id: &str,
        radius: u32,
        use_chirality: bool,
        use_features: bool,
        length: usize,
    ) -> Self {
        FingerprintScheme {
            id: id.to_string(),
            kind: SchemeKind::Morgan {
                radius,
                use_chirality,
                use_features,
            },
            length,
        }
    }

    pub fn atom_pair(id: &str, length: usize) -> Self {
        FingerprintScheme {
            id: id.to_string(),
            kind: SchemeKind::AtomPair,
            length,
        }
    }

    pub fn path(id: &str, max_path_len: u32, length: usize) -> Self {
        FingerprintScheme {
            id: id.to_string(),
            kind: SchemeKind::Path { max_path_len },
            length,
        }
    }

    pub fn external(id: &str, length: usize) -> Self {
        FingerprintScheme {
            id: id.to_string(),
            kind: SchemeKind::External,
            length,
        }
    }

    pub fn is_native(&self) -> bool {
        self.kind != SchemeKind::External
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains([',', '\n', '\r']) {
            return Err(Error::InvalidParameter(format!(
                "invalid scheme id {:?}",
                self.id
            )));
        }
        if self.length == 0 {
            return Err(Error::InvalidParameter(format!(
                "scheme {} has zero length",
                self.id
            )));
        }
        if self.is_native() && !self.length.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "native scheme {} length {} is not a power of two",
                self.id, self.length
            )));
        }
        if let SchemeKind::Path { max_path_len: 0 } = self.kind {
            return Err(Error::InvalidParameter(format!(
                "scheme {} needs max_path_len >= 1",
                self.id
            )));
        }
        Ok(())
    }

    /// Compute this scheme's fingerprint for a parsed molecule.
    pub fn compute(&self, mol: &MolGraph) -> Result<Fingerprint> {
        let mut fp = match self.kind {
            SchemeKind::Morgan {
                radius,
                use_chirality,
                use_features: false,
            } => morgan_fingerprint(mol, radius, use_chirality, self.length),
            SchemeKind::Morgan {
                radius,
                use_chirality,
                use_features: true,
            } => feature_morgan_fingerprint(mol, radius, use_chirality, self.length),
            SchemeKind::AtomPair => atom_pair_fingerprint(mol, self.length),
            SchemeKind::Path { max_path_len } => path_fingerprint(mol, max_path_len, self.length),
            SchemeKind::External => {
                return Err(Error::MissingExternalFingerprint(format!(
                    "{} (scheme {} is external)",
                    mol.source(),
                    self.id
                )))
            }
        };
        fp.scheme_id = self.id.as_str().into();
        Ok(fp)
    }
}

impl fmt::Display for FingerprintScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SchemeKind::Morgan {
                radius,
                use_chirality,
                use_features,
            } => write!(
                f,
                "{} (morgan radius={radius} chirality={use_chirality} features={use_features}, {} bits)",
                self.id, self.length
            ),
            SchemeKind::AtomPair => write!(f, "{} (atom_pair, {} bits)", self.id, self.length),
            SchemeKind::Path { max_path_len } => {
                write!(f, "{} (path max_len={max_path_len}, {} bits)", self.id, self.length)
            }
            SchemeKind::External => write!(f, "{} (external, {} bits)", self.id, self.length),
        }
    }
}

/// Ordered, non-empty list of schemes with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SchemeSet {
    schemes: Vec<FingerprintScheme>,
}

impl SchemeSet {
    pub fn new(schemes: Vec<FingerprintScheme>) -> Result<SchemeSet> {
        if schemes.is_empty() {
            return Err(Error::InvalidParameter("scheme set is empty".into()));
        }
        let mut seen = HashSet::new();
        for s in &schemes {
            s.validate()?;
            if !seen.insert(s.id.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate scheme id {}",
                    s.id
                )));
            }
        }
        Ok(SchemeSet { schemes })
    }

    /// The six native schemes: Morgan r2/r4, feature-Morgan r2/r4, atom pairs
    /// and paths, all chirality-aware where applicable and 2048 bits long.
    pub fn native_default() -> SchemeSet {
        Self::native_with_length(DEFAULT_LENGTH)
    }

    pub fn native_with_length(length: usize) -> SchemeSet {
        SchemeSet::new(vec![
            FingerprintScheme::morgan("morgan2", 2, true, false, length),
            FingerprintScheme::morgan("morgan4", 4, true, false, length),
            FingerprintScheme::morgan("morgan2_feat", 2, true, true, length),
            FingerprintScheme::morgan("morgan4_feat", 4, true, true, length),
            FingerprintScheme::atom_pair("atom_pair", length),
            FingerprintScheme::path("path7", DEFAULT_MAX_PATH_LEN, length),
        ])
        .expect("native roster is valid")
    }

    /// Subset of the native roster by id, in the order given.
    pub fn native_subset(ids: &[&str]) -> Result<SchemeSet> {
        let all = Self::native_default();
        let picked = ids
            .iter()
            .map(|id| {
                all.get(id)
                    .cloned()
                    .ok_or_else(|| Error::UnknownScheme(id.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        SchemeSet::new(picked)
    }

    pub fn len(&self) -> usize {
        self.schemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FingerprintScheme> {
        self.schemes.iter()
    }

    pub fn schemes(&self) -> &[FingerprintScheme] {
        &self.schemes
    }

    pub fn get(&self, id: &str) -> Option<&FingerprintScheme> {
        self.schemes.iter().find(|s| s.id == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.schemes.iter().position(|s| s.id == id)
    }

    pub fn has_external(&self) -> bool {
        self.schemes.iter().any(|s| !s.is_native())
    }

    pub fn has_native(&self) -> bool {
        self.schemes.iter().any(FingerprintScheme::is_native)
    }

    /// Compute every native scheme; external positions are left as `None`.
    pub fn compute_native(&self, mol: &MolGraph) -> Vec<Option<Fingerprint>> {
        self.schemes
            .iter()
            .map(|s| {
                if s.is_native() {
                    s.compute(mol).ok()
                } else {
                    None
                }
            })
            .collect()
    }
}

impl<'a> IntoIterator for &'a SchemeSet {
    type Item = &'a FingerprintScheme;
    type IntoIter = std::slice::Iter<'a, FingerprintScheme>;

    fn into_iter(self) -> Self::IntoIter {
        self.schemes.iter()
    }
}
