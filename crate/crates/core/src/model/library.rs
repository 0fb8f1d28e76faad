use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::chem::{graph_invariant_key, parse_smiles};
use crate::error::{Error, Result};
use crate::fingerprint::{words_for, Fingerprint, SchemeSet};

/// A reference label: a class name or a continuous value.
#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    Class(String),
    Value(f64),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Class(c) => f.write_str(c),
            Label::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    Classification,
    Regression,
}

/// Per-molecule targets, stored compactly.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// `space` is sorted; `index[i]` points into it.
    Classes {
        space: Vec<String>,
        index: Vec<u32>,
    },
    Values(Vec<f64>),
}

impl Targets {
    pub fn kind(&self) -> TaskKind {
        match self {
            Targets::Classes { .. } => TaskKind::Classification,
            Targets::Values(_) => TaskKind::Regression,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Targets::Classes { index, .. } => index.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, row: usize) -> Label {
        match self {
            Targets::Classes { space, index } => Label::Class(space[index[row] as usize].clone()),
            Targets::Values(v) => Label::Value(v[row]),
        }
    }

    fn select(&self, rows: &[usize]) -> Targets {
        match self {
            Targets::Classes { space, index } => Targets::Classes {
                space: space.clone(),
                index: rows.iter().map(|&r| index[r]).collect(),
            },
            Targets::Values(v) => Targets::Values(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LibraryMeta {
    pub name: String,
    pub version: u32,
    pub notes: String,
}

impl Default for LibraryMeta {
    fn default() -> Self {
        LibraryMeta {
            name: "library".into(),
            version: 1,
            notes: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoleculeRecord {
    pub key: String,
    /// Graph identity key; `None` for molecules known only by external fingerprints.
    pub graph_key: Option<u64>,
}

/// One scheme's fingerprints for all M molecules, packed row after row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerprintColumn {
    len: usize,
    stride: usize,
    words: Vec<u64>,
}

impl FingerprintColumn {
    fn with_capacity(len: usize, rows: usize) -> Self {
        let stride = words_for(len);
        FingerprintColumn {
            len,
            stride,
            words: Vec::with_capacity(stride * rows),
        }
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        FingerprintColumn {
            len,
            stride: words_for(len),
            words,
        }
    }

    pub fn bit_len(&self) -> usize {
        self.len
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Number of molecules stored.
    pub fn rows(&self) -> usize {
        self.words.len() / self.stride.max(1)
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.words[i * self.stride..(i + 1) * self.stride]
    }

    fn push(&mut self, fp: &Fingerprint) {
        self.words.extend_from_slice(fp.words());
    }
}

/// A labeled molecule ready to enter a library.
#[derive(Debug, Clone)]
pub struct LibraryRow {
    pub key: String,
    pub graph_key: Option<u64>,
    pub label: Label,
    /// One fingerprint per scheme, in scheme-set order.
    pub fingerprints: Vec<Fingerprint>,
}

/// The model: M labeled molecules fingerprinted under N schemes.
///
/// Immutable once built; [`ReferenceLibrary::extend`] returns a new version.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceLibrary {
    meta: LibraryMeta,
    schemes: SchemeSet,
    records: Vec<MoleculeRecord>,
    targets: Targets,
    columns: Vec<FingerprintColumn>,
}

impl ReferenceLibrary {
    /// Assemble a library from fully fingerprinted rows.
    ///
    /// Classification label spaces are the sorted distinct class names.
    pub fn from_rows(
        meta: LibraryMeta,
        schemes: SchemeSet,
        kind: TaskKind,
        rows: Vec<LibraryRow>,
    ) -> Result<Self> {
        let targets = match kind {
            TaskKind::Classification => {
                let mut space = BTreeSet::new();
                for row in &rows {
                    match &row.label {
                        Label::Class(c) => {
                            space.insert(c.clone());
                        }
                        Label::Value(_) => {
                            return Err(Error::InvalidLibrary(format!(
                                "row {} has a continuous label in a classification library",
                                row.key
                            )))
                        }
                    }
                }
                let space: Vec<String> = space.into_iter().collect();
                let lookup: HashMap<&str, u32> = space
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.as_str(), i as u32))
                    .collect();
                let index = rows
                    .iter()
                    .map(|r| match &r.label {
                        Label::Class(c) => lookup[c.as_str()],
                        Label::Value(_) => unreachable!(),
                    })
                    .collect();
                Targets::Classes { space, index }
            }
            TaskKind::Regression => Targets::Values(
                rows.iter()
                    .map(|r| match r.label {
                        Label::Value(v) if v.is_finite() => Ok(v),
                        _ => Err(Error::InvalidLibrary(format!(
                            "row {} needs a finite continuous label",
                            r.key
                        ))),
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        Self::from_targets(meta, schemes, rows, targets)
    }

    /// Like [`from_rows`](Self::from_rows) for classification, but with an
    /// explicit label space (which fixes the class order).
    pub fn from_rows_with_space(
        meta: LibraryMeta,
        schemes: SchemeSet,
        space: Vec<String>,
        rows: Vec<LibraryRow>,
    ) -> Result<Self> {
        let lookup: HashMap<&str, u32> = space
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect();
        if lookup.len() != space.len() {
            return Err(Error::InvalidLibrary(
                "duplicate labels in label space".into(),
            ));
        }
        let index = rows
            .iter()
            .map(|r| match &r.label {
                Label::Class(c) => lookup
                    .get(c.as_str())
                    .copied()
                    .ok_or_else(|| Error::UnknownLabel(c.clone())),
                Label::Value(_) => Err(Error::InvalidLibrary(format!(
                    "row {} has a continuous label",
                    r.key
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let targets = Targets::Classes { space, index };
        Self::from_targets(meta, schemes, rows, targets)
    }

    fn from_targets(
        meta: LibraryMeta,
        schemes: SchemeSet,
        rows: Vec<LibraryRow>,
        targets: Targets,
    ) -> Result<Self> {
        let mut columns: Vec<FingerprintColumn> = schemes
            .iter()
            .map(|s| FingerprintColumn::with_capacity(s.length, rows.len()))
            .collect();
        let mut records = Vec::with_capacity(rows.len());
        for row in rows {
            if row.fingerprints.len() != schemes.len() {
                return Err(Error::InvalidLibrary(format!(
                    "row {} has {} fingerprints for {} schemes",
                    row.key,
                    row.fingerprints.len(),
                    schemes.len()
                )));
            }
            for ((fp, scheme), column) in row
                .fingerprints
                .iter()
                .zip(schemes.iter())
                .zip(&mut columns)
            {
                if fp.scheme_id() != scheme.id || fp.len() != scheme.length {
                    return Err(Error::SchemeMismatch(format!(
                        "row {}: fingerprint {} ({} bits) in slot of scheme {} ({} bits)",
                        row.key,
                        fp.scheme_id(),
                        fp.len(),
                        scheme.id,
                        scheme.length
                    )));
                }
                column.push(fp);
            }
            records.push(MoleculeRecord {
                key: row.key,
                graph_key: row.graph_key,
            });
        }
        let lib = ReferenceLibrary {
            meta,
            schemes,
            records,
            targets,
            columns,
        };
        lib.validate()?;
        Ok(lib)
    }

    pub(crate) fn from_raw_parts(
        meta: LibraryMeta,
        schemes: SchemeSet,
        records: Vec<MoleculeRecord>,
        targets: Targets,
        columns: Vec<FingerprintColumn>,
    ) -> Result<Self> {
        let lib = ReferenceLibrary {
            meta,
            schemes,
            records,
            targets,
            columns,
        };
        lib.validate()?;
        Ok(lib)
    }

    fn validate(&self) -> Result<()> {
        let m = self.records.len();
        if m < 2 {
            return Err(Error::InvalidLibrary(format!(
                "library needs at least 2 molecules, got {m}"
            )));
        }
        if self.targets.len() != m {
            return Err(Error::InvalidLibrary(
                "label count differs from molecule count".into(),
            ));
        }
        if let Targets::Classes { space, index } = &self.targets {
            if space.len() < 2 {
                return Err(Error::InvalidLibrary(format!(
                    "classification needs at least 2 classes, found {}",
                    space.len()
                )));
            }
            let mut present = vec![false; space.len()];
            for &i in index {
                match present.get_mut(i as usize) {
                    Some(p) => *p = true,
                    None => {
                        return Err(Error::InvalidLibrary(format!(
                            "label index {i} out of range"
                        )))
                    }
                }
            }
            if let Some(missing) = present.iter().position(|&p| !p) {
                return Err(Error::InvalidLibrary(format!(
                    "class {} has no molecules",
                    space[missing]
                )));
            }
        }
        if self.columns.len() != self.schemes.len() {
            return Err(Error::InvalidLibrary(
                "column count differs from scheme count".into(),
            ));
        }
        for (col, scheme) in self.columns.iter().zip(self.schemes.iter()) {
            if col.len != scheme.length || col.words.len() != col.stride * m {
                return Err(Error::InvalidLibrary(format!(
                    "fingerprint column {} is incomplete",
                    scheme.id
                )));
            }
        }
        let mut keys = std::collections::HashSet::with_capacity(m);
        for r in &self.records {
            if !keys.insert(r.key.as_str()) {
                return Err(Error::InvalidLibrary(format!(
                    "duplicate molecule key {}",
                    r.key
                )));
            }
        }
        Ok(())
    }

    pub fn meta(&self) -> &LibraryMeta {
        &self.meta
    }

    pub fn with_meta(mut self, meta: LibraryMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn schemes(&self) -> &SchemeSet {
        &self.schemes
    }

    pub fn records(&self) -> &[MoleculeRecord] {
        &self.records
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn task(&self) -> TaskKind {
        self.targets.kind()
    }

    /// Sorted class labels; empty for regression libraries.
    pub fn label_space(&self) -> &[String] {
        match &self.targets {
            Targets::Classes { space, .. } => space,
            Targets::Values(_) => &[],
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn columns(&self) -> &[FingerprintColumn] {
        &self.columns
    }

    pub fn key(&self, row: usize) -> &str {
        &self.records[row].key
    }

    pub fn label(&self, row: usize) -> Label {
        self.targets.label(row)
    }

    pub fn position(&self, key: &str) -> Option<usize> {
        self.records.iter().position(|r| r.key == key)
    }

    /// The N fingerprints of one library molecule.
    pub fn row_fingerprints(&self, row: usize) -> Vec<Fingerprint> {
        self.schemes
            .iter()
            .zip(&self.columns)
            .map(|(s, col)| {
                Fingerprint::from_words(s.id.as_str(), s.length, col.row(row).to_vec())
                    .expect("library columns hold well-formed fingerprints")
            })
            .collect()
    }

    pub(crate) fn row_words(&self, row: usize) -> Vec<&[u64]> {
        self.columns.iter().map(|c| c.row(row)).collect()
    }

    /// New library holding `rows` (in the given order). The class label space is kept.
    pub fn subset(&self, rows: &[usize]) -> Result<ReferenceLibrary> {
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let mut words = Vec::with_capacity(c.stride * rows.len());
                for &r in rows {
                    words.extend_from_slice(c.row(r));
                }
                FingerprintColumn::from_words(c.len, words)
            })
            .collect();
        let records = rows.iter().map(|&r| self.records[r].clone()).collect();
        let lib = ReferenceLibrary {
            meta: self.meta.clone(),
            schemes: self.schemes.clone(),
            records,
            targets: self.targets.select(rows),
            columns,
        };
        lib.validate()?;
        Ok(lib)
    }

    /// New library using only the named schemes, in the given order.
    pub fn restrict_schemes(&self, ids: &[&str]) -> Result<ReferenceLibrary> {
        let positions = ids
            .iter()
            .map(|id| {
                self.schemes
                    .position(id)
                    .ok_or_else(|| Error::UnknownScheme(id.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let schemes = SchemeSet::new(
            positions
                .iter()
                .map(|&p| self.schemes.schemes()[p].clone())
                .collect(),
        )?;
        let columns = positions.iter().map(|&p| self.columns[p].clone()).collect();
        let lib = ReferenceLibrary {
            meta: self.meta.clone(),
            schemes,
            records: self.records.clone(),
            targets: self.targets.clone(),
            columns,
        };
        lib.validate()?;
        Ok(lib)
    }

    /// Append new labeled molecules, producing the next library version.
    ///
    /// Existing rows are copied untouched; only the new rows are
    /// fingerprinted. A new molecule whose graph key (or, without a graph,
    /// whose molecule key) matches an existing row is dropped when the labels
    /// agree and rejected with [`Error::ConflictingLabel`] otherwise.
    pub fn extend(&self, new_rows: &[LabeledMolecule]) -> Result<ReferenceLibrary> {
        let mut by_graph: HashMap<u64, usize> = HashMap::new();
        let mut by_key: HashMap<String, usize> = HashMap::new();
        let mut labels: Vec<Label> = (0..self.len()).map(|i| self.label(i)).collect();
        for (i, r) in self.records.iter().enumerate() {
            if let Some(g) = r.graph_key {
                by_graph.entry(g).or_insert(i);
            }
            by_key.insert(r.key.clone(), i);
        }

        let mut next = self.clone();
        for input in new_rows {
            let (graph_key, fingerprints) = self.fingerprint_new(input)?;
            let label = match (&input.label, &self.targets) {
                (Label::Class(c), Targets::Classes { space, .. }) => {
                    if !space.contains(c) {
                        return Err(Error::UnknownLabel(c.clone()));
                    }
                    input.label.clone()
                }
                (Label::Value(v), Targets::Values(_)) if v.is_finite() => input.label.clone(),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "label {} does not match the library task",
                        input.label
                    )))
                }
            };
            let existing = match graph_key {
                Some(g) => by_graph.get(&g).copied(),
                None => by_key.get(&input.key).copied(),
            };
            if let Some(row) = existing {
                if labels[row] == label {
                    continue;
                }
                return Err(Error::ConflictingLabel {
                    key: input.key.clone(),
                    existing: next.records[row].key.clone(),
                });
            }
            if by_key.contains_key(&input.key) {
                return Err(Error::InvalidLibrary(format!(
                    "molecule key {} already in use",
                    input.key
                )));
            }

            let row = next.records.len();
            for (col, fp) in next.columns.iter_mut().zip(&fingerprints) {
                col.push(fp);
            }
            next.records.push(MoleculeRecord {
                key: input.key.clone(),
                graph_key,
            });
            match (&mut next.targets, &label) {
                (Targets::Classes { space, index }, Label::Class(c)) => {
                    index.push(space.iter().position(|s| s == c).unwrap() as u32);
                }
                (Targets::Values(values), Label::Value(v)) => values.push(*v),
                _ => unreachable!(),
            }
            if let Some(g) = graph_key {
                by_graph.insert(g, row);
            }
            by_key.insert(input.key.clone(), row);
            labels.push(label);
        }
        next.meta.version = self.meta.version + 1;
        next.validate()?;
        Ok(next)
    }

    fn fingerprint_new(&self, input: &LabeledMolecule) -> Result<(Option<u64>, Vec<Fingerprint>)> {
        let graph = match &input.smiles {
            Some(s) => Some(parse_smiles(s)?),
            None => None,
        };
        let fps = self
            .schemes
            .iter()
            .map(|scheme| {
                if scheme.is_native() {
                    match &graph {
                        Some(g) => scheme.compute(g),
                        None => Err(Error::InvalidParameter(format!(
                            "molecule {} needs SMILES for native scheme {}",
                            input.key, scheme.id
                        ))),
                    }
                } else {
                    input
                        .external
                        .iter()
                        .find(|fp| fp.scheme_id() == scheme.id)
                        .cloned()
                        .ok_or_else(|| Error::MissingExternalFingerprint(input.key.clone()))
                        .and_then(|fp| {
                            if fp.len() == scheme.length {
                                Ok(fp)
                            } else {
                                Err(Error::SchemeMismatch(format!(
                                    "{}: {} bits for scheme {} of {} bits",
                                    input.key,
                                    fp.len(),
                                    scheme.id,
                                    scheme.length
                                )))
                            }
                        })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((graph.as_ref().map(graph_invariant_key), fps))
    }
}

/// A molecule to add to an existing library.
#[derive(Debug, Clone)]
pub struct LabeledMolecule {
    pub key: String,
    pub smiles: Option<String>,
    /// Fingerprints for the library's external schemes, matched by scheme id.
    pub external: Vec<Fingerprint>,
    pub label: Label,
}

impl LabeledMolecule {
    pub fn from_smiles(key: &str, smiles: &str, label: Label) -> Self {
        LabeledMolecule {
            key: key.to_string(),
            smiles: Some(smiles.to_string()),
            external: Vec::new(),
            label,
        }
    }
}

/// Free-function form of [`ReferenceLibrary::extend`].
pub fn extend_library(
    library: &ReferenceLibrary,
    new_rows: &[LabeledMolecule],
) -> Result<ReferenceLibrary> {
    library.extend(new_rows)
}
