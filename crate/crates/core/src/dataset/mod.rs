//! Labeled CSV ingestion, cleaning and library construction.
//!
//! Cleaning follows three rules: rows whose SMILES cannot be parsed are
//! dropped; rows describing the same molecular graph with disagreeing class
//! labels are all dropped; remaining replicates collapse to one row
//! (continuous labels are averaged).

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::chem::{graph_invariant_key, parse_smiles, MolGraph};
use crate::error::{Error, Result};
use crate::fingerprint::{ExternalFingerprints, Fingerprint, SchemeSet};
use crate::model::{Label, LibraryMeta, LibraryRow, ReferenceLibrary, TaskKind};

/// Canonical class names used for binary labels.
pub const POSITIVE_CLASS: &str = "1";
pub const NEGATIVE_CLASS: &str = "0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelKind {
    BinaryClass,
    MultiClass,
    Continuous,
}

impl LabelKind {
    pub fn task(self) -> TaskKind {
        match self {
            LabelKind::BinaryClass | LabelKind::MultiClass => TaskKind::Classification,
            LabelKind::Continuous => TaskKind::Regression,
        }
    }
}

impl std::str::FromStr for LabelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" | "binary_class" => Ok(LabelKind::BinaryClass),
            "multi" | "multiclass" | "multi_class" => Ok(LabelKind::MultiClass),
            "continuous" | "regression" => Ok(LabelKind::Continuous),
            _ => Err(Error::InvalidParameter(format!("unknown label kind {s:?}"))),
        }
    }
}

/// Which CSV columns hold what, and how labels are read.
#[derive(Debug, Clone)]
pub struct SchemaConfig {
    /// `None` when every scheme is external and no structures are supplied.
    pub smiles_col: Option<String>,
    pub label_col: String,
    /// `None` uses the 0-based data row index as the key.
    pub key_col: Option<String>,
    /// `None` detects: binary tokens first, then numbers, else multi-class.
    pub label_kind: Option<LabelKind>,
    pub positive_tokens: Vec<String>,
    pub negative_tokens: Vec<String>,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig {
            smiles_col: Some("smiles".into()),
            label_col: "label".into(),
            key_col: None,
            label_kind: None,
            positive_tokens: vec!["1".into(), "pos".into()],
            negative_tokens: vec!["0".into(), "neg".into()],
        }
    }
}

impl SchemaConfig {
    fn binary_class(&self, text: &str) -> Option<&'static str> {
        if self
            .positive_tokens
            .iter()
            .any(|t| t.eq_ignore_ascii_case(text))
        {
            Some(POSITIVE_CLASS)
        } else if self
            .negative_tokens
            .iter()
            .any(|t| t.eq_ignore_ascii_case(text))
        {
            Some(NEGATIVE_CLASS)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub key: String,
    pub smiles: Option<String>,
    pub label_text: String,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub rows: Vec<RawRow>,
    pub label_kind: LabelKind,
    pub source_path: PathBuf,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &SchemaConfig) -> Result<RawDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema, path).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_csv(
    reader: impl Read,
    schema: &SchemaConfig,
    source: impl Into<PathBuf>,
) -> Result<RawDataset> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
        .clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Format(format!(
                "missing column {name:?} (have {:?})",
                headers.iter().collect::<Vec<_>>()
            ))
        })
    };
    let smiles_idx = schema.smiles_col.as_deref().map(column).transpose()?;
    let label_idx = column(&schema.label_col)?;
    let key_idx = schema.key_col.as_deref().map(column).transpose()?;

    let mut texts = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record.map_err(|e| Error::Format(format!("row {}: {e}", i + 1)))?;
        let key = match key_idx {
            Some(k) => record[k].to_string(),
            None => i.to_string(),
        };
        let smiles = smiles_idx.map(|s| record[s].to_string());
        let label_text = record[label_idx].to_string();
        if label_text.is_empty() {
            return Err(Error::Format(format!("row {} ({key}): empty label", i + 1)));
        }
        if key.is_empty() {
            return Err(Error::Format(format!("row {}: empty key", i + 1)));
        }
        texts.push((key, smiles, label_text));
    }

    let label_kind = schema
        .label_kind
        .unwrap_or_else(|| detect_kind(schema, &texts));
    let mut seen = HashMap::with_capacity(texts.len());
    let mut rows = Vec::with_capacity(texts.len());
    for (i, (key, smiles, label_text)) in texts.into_iter().enumerate() {
        if seen.insert(key.clone(), i).is_some() {
            return Err(Error::Format(format!("duplicate key {key:?}")));
        }
        let label = parse_label(schema, label_kind, &label_text).ok_or_else(|| {
            Error::Format(format!(
                "row {} ({key}): label {label_text:?} is not {label_kind:?}",
                i + 1
            ))
        })?;
        rows.push(RawRow {
            key,
            smiles,
            label_text,
            label,
        });
    }
    Ok(RawDataset {
        rows,
        label_kind,
        source_path: source.into(),
    })
}

fn detect_kind(schema: &SchemaConfig, texts: &[(String, Option<String>, String)]) -> LabelKind {
    if texts
        .iter()
        .all(|(_, _, l)| schema.binary_class(l).is_some())
    {
        LabelKind::BinaryClass
    } else if texts
        .iter()
        .all(|(_, _, l)| l.parse::<f64>().is_ok_and(f64::is_finite))
    {
        LabelKind::Continuous
    } else {
        LabelKind::MultiClass
    }
}

fn parse_label(schema: &SchemaConfig, kind: LabelKind, text: &str) -> Option<Label> {
    match kind {
        LabelKind::BinaryClass => schema
            .binary_class(text)
            .map(|c| Label::Class(c.to_string())),
        LabelKind::MultiClass => Some(Label::Class(text.to_string())),
        LabelKind::Continuous => text
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Label::Value),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExclusionReason {
    Unparsable(String),
    ConflictingLabel,
    Replicate { kept: String },
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExclusionReason::Unparsable(why) => write!(f, "unparsable: {why}"),
            ExclusionReason::ConflictingLabel => f.write_str("conflicting labels"),
            ExclusionReason::Replicate { kept } => write!(f, "replicate of {kept}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CleaningReport {
    pub n_input: usize,
    pub n_unparsable: usize,
    pub n_conflicting: usize,
    pub n_replicates_removed: usize,
    pub n_final: usize,
    pub excluded: Vec<(String, ExclusionReason)>,
}

impl CleaningReport {
    /// Counts must reconcile: input = final + unparsable + conflicting + replicates.
    pub fn check(&self) -> Result<()> {
        let sum = self.n_final + self.n_unparsable + self.n_conflicting + self.n_replicates_removed;
        if sum != self.n_input || self.excluded.len() != self.n_input - self.n_final {
            return Err(Error::Invariant(format!(
                "cleaning counts do not reconcile: {} input vs {sum} accounted",
                self.n_input
            )));
        }
        Ok(())
    }

    /// Machine-readable `key=value` lines, then one `excluded=` line per dropped row.
    pub fn to_key_values(&self) -> String {
        let mut out = format!(
            "n_input={}\nn_unparsable={}\nn_conflicting={}\nn_replicates_removed={}\nn_final={}\n",
            self.n_input,
            self.n_unparsable,
            self.n_conflicting,
            self.n_replicates_removed,
            self.n_final
        );
        for (key, reason) in &self.excluded {
            let reason = reason.to_string().replace(['\n', '\r'], " ");
            out.push_str(&format!("excluded={key}\t{reason}\n"));
        }
        out
    }
}

impl fmt::Display for CleaningReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "cleaning: {} rows in, {} kept",
            self.n_input, self.n_final
        )?;
        writeln!(f, "  unparsable:         {}", self.n_unparsable)?;
        writeln!(f, "  conflicting labels: {}", self.n_conflicting)?;
        write!(f, "  replicates removed: {}", self.n_replicates_removed)
    }
}

#[derive(Debug, Clone)]
pub struct CleanRow {
    pub key: String,
    pub smiles: Option<String>,
    pub graph: Option<MolGraph>,
    pub graph_key: Option<u64>,
    pub label: Label,
}

#[derive(Debug, Clone)]
pub struct CleanedDataset {
    pub rows: Vec<CleanRow>,
    pub label_kind: LabelKind,
}

impl CleanedDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Back to raw form (labels re-rendered as text), e.g. to clean again.
    pub fn to_raw(&self) -> RawDataset {
        RawDataset {
            rows: self
                .rows
                .iter()
                .map(|r| RawRow {
                    key: r.key.clone(),
                    smiles: r.smiles.clone(),
                    label_text: r.label.to_string(),
                    label: r.label.clone(),
                })
                .collect(),
            label_kind: self.label_kind,
            source_path: PathBuf::new(),
        }
    }
}

/// Apply the cleaning rules. `schemes` decides whether structures are required.
pub fn clean(raw: &RawDataset, schemes: &SchemeSet) -> Result<(CleanedDataset, CleaningReport)> {
    let mut report = CleaningReport {
        n_input: raw.rows.len(),
        ..Default::default()
    };

    // Group rows by graph identity (or by key when no structure is given).
    #[derive(Hash, PartialEq, Eq)]
    enum Identity<'a> {
        Graph(u64),
        Key(&'a str),
    }
    let mut order: Vec<Identity> = Vec::new();
    let mut groups: HashMap<Identity, Vec<(usize, Option<MolGraph>)>> = HashMap::new();
    for (i, row) in raw.rows.iter().enumerate() {
        let parsed = match row.smiles.as_deref() {
            Some(s) => match parse_smiles(s) {
                Ok(g) => Some(g),
                Err(e) => {
                    report.n_unparsable += 1;
                    let why = match e {
                        Error::UnparsableMolecule { reason, .. } => reason,
                        other => other.to_string(),
                    };
                    report
                        .excluded
                        .push((row.key.clone(), ExclusionReason::Unparsable(why)));
                    continue;
                }
            },
            None if schemes.has_native() => {
                report.n_unparsable += 1;
                report.excluded.push((
                    row.key.clone(),
                    ExclusionReason::Unparsable("no SMILES for native fingerprint schemes".into()),
                ));
                continue;
            }
            None => None,
        };
        let id = match &parsed {
            Some(g) => Identity::Graph(graph_invariant_key(g)),
            None => Identity::Key(&row.key),
        };
        let group = groups.entry(id).or_default();
        if group.is_empty() {
            order.push(match &parsed {
                Some(g) => Identity::Graph(graph_invariant_key(g)),
                None => Identity::Key(&row.key),
            });
        }
        group.push((i, parsed));
    }

    let mut rows = Vec::new();
    for id in &order {
        let mut members = groups.remove(id).expect("group recorded in order");
        let first = &raw.rows[members[0].0];
        let label = match raw.label_kind {
            LabelKind::Continuous => {
                let values: Vec<f64> = members
                    .iter()
                    .map(|(i, _)| match raw.rows[*i].label {
                        Label::Value(v) => v,
                        Label::Class(_) => f64::NAN,
                    })
                    .collect();
                Some(Label::Value(
                    values.iter().sum::<f64>() / values.len() as f64,
                ))
            }
            _ => {
                let all_same = members
                    .iter()
                    .all(|(i, _)| raw.rows[*i].label == first.label);
                all_same.then(|| first.label.clone())
            }
        };
        match label {
            Some(label) => {
                for (i, _) in &members[1..] {
                    report.n_replicates_removed += 1;
                    report.excluded.push((
                        raw.rows[*i].key.clone(),
                        ExclusionReason::Replicate {
                            kept: first.key.clone(),
                        },
                    ));
                }
                let (_, graph) = members.swap_remove(0);
                let graph_key = match id {
                    Identity::Graph(k) => Some(*k),
                    Identity::Key(_) => None,
                };
                rows.push(CleanRow {
                    key: first.key.clone(),
                    smiles: first.smiles.clone(),
                    graph,
                    graph_key,
                    label,
                });
            }
            None => {
                for (i, _) in &members {
                    report.n_conflicting += 1;
                    report
                        .excluded
                        .push((raw.rows[*i].key.clone(), ExclusionReason::ConflictingLabel));
                }
            }
        }
    }
    report.n_final = rows.len();
    report.check()?;
    if rows.len() < 2 {
        return Err(Error::EmptyDataset(rows.len()));
    }
    Ok((
        CleanedDataset {
            rows,
            label_kind: raw.label_kind,
        },
        report,
    ))
}

/// Append external scheme definitions to a native scheme set.
pub fn with_external_schemes(
    native: &SchemeSet,
    externals: &[ExternalFingerprints],
) -> Result<SchemeSet> {
    let mut schemes = native.schemes().to_vec();
    schemes.extend(externals.iter().map(|e| e.scheme.clone()));
    SchemeSet::new(schemes)
}

/// Fingerprint every cleaned row and assemble the library.
///
/// Native schemes are computed in parallel over rows; external schemes are
/// joined by molecule key from `externals`.
pub fn build_library(
    cleaned: &CleanedDataset,
    schemes: &SchemeSet,
    externals: &[ExternalFingerprints],
    meta: LibraryMeta,
) -> Result<ReferenceLibrary> {
    if cleaned.rows.len() < 2 {
        return Err(Error::EmptyDataset(cleaned.rows.len()));
    }
    let sources: Vec<Option<&ExternalFingerprints>> = schemes
        .iter()
        .map(|s| {
            if s.is_native() {
                Ok(None)
            } else {
                externals
                    .iter()
                    .find(|e| e.scheme.id == s.id)
                    .map(Some)
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "no fingerprint file supplied for external scheme {}",
                            s.id
                        ))
                    })
            }
        })
        .collect::<Result<_>>()?;
    for (s, src) in schemes.iter().zip(&sources) {
        if let Some(src) = src {
            if src.scheme.length != s.length {
                return Err(Error::SchemeMismatch(format!(
                    "external file for {} has {} bits, scheme declares {}",
                    s.id, src.scheme.length, s.length
                )));
            }
        }
    }

    let rows: Vec<LibraryRow> = cleaned
        .rows
        .par_iter()
        .map(|row| {
            let fingerprints = schemes
                .iter()
                .zip(&sources)
                .map(|(scheme, src)| -> Result<Fingerprint> {
                    match src {
                        Some(ext) => ext
                            .get(&row.key)
                            .cloned()
                            .ok_or_else(|| Error::MissingExternalFingerprint(row.key.clone())),
                        None => match &row.graph {
                            Some(g) => scheme.compute(g),
                            None => Err(Error::InvalidParameter(format!(
                                "row {} has no structure for native scheme {}",
                                row.key, scheme.id
                            ))),
                        },
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LibraryRow {
                key: row.key.clone(),
                graph_key: row.graph_key,
                label: row.label.clone(),
                fingerprints,
            })
        })
        .collect::<Result<_>>()?;

    match cleaned.label_kind {
        LabelKind::BinaryClass => {
            let space = vec![NEGATIVE_CLASS.to_string(), POSITIVE_CLASS.to_string()];
            ReferenceLibrary::from_rows_with_space(meta, schemes.clone(), space, rows)
        }
        LabelKind::MultiClass => {
            ReferenceLibrary::from_rows(meta, schemes.clone(), TaskKind::Classification, rows)
        }
        LabelKind::Continuous => {
            ReferenceLibrary::from_rows(meta, schemes.clone(), TaskKind::Regression, rows)
        }
    }
}

/// One molecule to predict: a key plus an optional structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRow {
    pub key: String,
    pub smiles: Option<String>,
}

pub fn load_queries(
    path: impl AsRef<Path>,
    smiles_col: Option<&str>,
    key_col: Option<&str>,
) -> Result<Vec<QueryRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_queries(file, smiles_col, key_col).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Read a query CSV. An entirely empty input yields no rows; a missing
/// key column falls back to the 0-based row index.
pub fn read_queries(
    reader: impl Read,
    smiles_col: Option<&str>,
    key_col: Option<&str>,
) -> Result<Vec<QueryRow>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
        .clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column {name:?}")))
    };
    let smiles_idx = smiles_col.map(column).transpose()?;
    let key_idx = key_col.map(column).transpose()?;
    csv.records()
        .enumerate()
        .map(|(i, record)| {
            let record = record.map_err(|e| Error::Format(format!("row {}: {e}", i + 1)))?;
            Ok(QueryRow {
                key: key_idx.map_or_else(|| i.to_string(), |k| record[k].to_string()),
                smiles: smiles_idx.map(|s| record[s].to_string()),
            })
        })
        .collect()
}

/// Fingerprints for one query in `schemes` order: native schemes from the
/// SMILES, external schemes looked up by key.
pub fn query_fingerprints(
    query: &QueryRow,
    schemes: &SchemeSet,
    externals: &[ExternalFingerprints],
) -> Result<Vec<Fingerprint>> {
    let graph = match (&query.smiles, schemes.has_native()) {
        (Some(s), true) => Some(parse_smiles(s)?),
        (None, true) => {
            return Err(Error::InvalidParameter(format!(
                "query {} has no SMILES but the library uses native schemes",
                query.key
            )))
        }
        _ => None,
    };
    schemes
        .iter()
        .map(|scheme| match &graph {
            Some(g) if scheme.is_native() => scheme.compute(g),
            _ => externals
                .iter()
                .find(|e| e.scheme.id == scheme.id)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "no fingerprint file supplied for external scheme {}",
                        scheme.id
                    ))
                })?
                .get(&query.key)
                .cloned()
                .ok_or_else(|| Error::MissingExternalFingerprint(query.key.clone())),
        })
        .collect()
}
