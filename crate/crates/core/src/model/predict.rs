use super::dominance::{dominance_summary, DominanceConfig};
use super::embed::{check_target, embed_rows, DistanceProfile};
use super::fitness::{fitness_from_summary, FitnessVector};
use super::library::{Label, ReferenceLibrary, Targets};
use crate::chem::parse_smiles;
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;

pub const DEFAULT_TOP_K: usize = 10;

/// Prediction settings. The defaults are the parameter-free method.
#[derive(Debug, Clone, PartialEq)]
pub struct PoemConfig {
    pub dominance: DominanceConfig,
    /// Number of explanation entries to keep (0 disables explanations).
    pub top_k: usize,
}

impl Default for PoemConfig {
    fn default() -> Self {
        PoemConfig {
            dominance: DominanceConfig::default(),
            top_k: DEFAULT_TOP_K,
        }
    }
}

impl PoemConfig {
    pub fn with_relax(relax: f64) -> Self {
        PoemConfig {
            dominance: DominanceConfig::with_relax(relax),
            ..Self::default()
        }
    }

    pub fn top_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self
    }
}

/// What to predict: a SMILES string or a ready fingerprint row.
#[derive(Debug, Clone)]
pub enum Target {
    Smiles(String),
    Fingerprints(Vec<Fingerprint>),
}

/// Class probabilities or a continuous estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimate {
    Classes {
        labels: Vec<String>,
        probs: Vec<f64>,
        predicted: usize,
    },
    Value(f64),
}

/// One reference molecule's contribution to a prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Contribution {
    pub key: String,
    /// Row in the library.
    pub row: usize,
    pub fitness: f64,
    pub fitness_share: f64,
    pub label: Label,
    /// Per-scheme Tanimoto distances to the target, in scheme order.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub target_key: String,
    pub estimate: Estimate,
    /// Top-K references by descending fitness.
    pub explanation: Vec<Contribution>,
    pub total_fitness: f64,
    /// Set when total fitness was zero and a uniform fallback was used.
    pub degenerate: bool,
}

impl Prediction {
    pub fn probabilities(&self) -> Option<&[f64]> {
        match &self.estimate {
            Estimate::Classes { probs, .. } => Some(probs),
            Estimate::Value(_) => None,
        }
    }

    pub fn probability_of(&self, label: &str) -> Option<f64> {
        match &self.estimate {
            Estimate::Classes { labels, probs, .. } => {
                labels.iter().position(|l| l == label).map(|i| probs[i])
            }
            Estimate::Value(_) => None,
        }
    }

    pub fn predicted_label(&self) -> Option<&str> {
        match &self.estimate {
            Estimate::Classes {
                labels, predicted, ..
            } => Some(&labels[*predicted]),
            Estimate::Value(_) => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self.estimate {
            Estimate::Value(v) => Some(v),
            Estimate::Classes { .. } => None,
        }
    }

    /// Sum of fitness shares over the listed explanation entries.
    pub fn coverage(&self) -> f64 {
        self.explanation.iter().map(|c| c.fitness_share).sum()
    }
}

/// Normalised per-class fitness over the listed library rows.
///
/// `fitness[j]` belongs to library row `rows[j]`.
pub fn predict_class(
    fitness: &FitnessVector,
    library: &ReferenceLibrary,
    rows: &[usize],
) -> Result<Prediction> {
    let Targets::Classes { space, index } = library.targets() else {
        return Err(Error::InvalidParameter(
            "predict_class needs a classification library".into(),
        ));
    };
    check_rows(fitness, rows)?;
    let mut hit = vec![0.0; space.len()];
    for (&f, &r) in fitness.values().iter().zip(rows) {
        hit[index[r] as usize] += f;
    }
    let total: f64 = hit.iter().sum();
    let degenerate = !(total > 0.0 && total.is_finite());
    let probs: Vec<f64> = if degenerate {
        vec![1.0 / space.len() as f64; space.len()]
    } else {
        hit.iter().map(|h| h / total).collect()
    };
    let mut predicted = 0;
    for (c, &p) in probs.iter().enumerate() {
        if p > probs[predicted] {
            predicted = c;
        }
    }
    Ok(Prediction {
        target_key: String::new(),
        estimate: Estimate::Classes {
            labels: space.clone(),
            probs,
            predicted,
        },
        explanation: Vec::new(),
        total_fitness: fitness.total(),
        degenerate,
    })
}

/// Fitness-weighted mean of continuous labels over the listed library rows.
pub fn predict_value(
    fitness: &FitnessVector,
    library: &ReferenceLibrary,
    rows: &[usize],
) -> Result<Prediction> {
    let Targets::Values(values) = library.targets() else {
        return Err(Error::InvalidParameter(
            "predict_value needs a regression library".into(),
        ));
    };
    check_rows(fitness, rows)?;
    let total = fitness.total();
    let degenerate = !(total > 0.0 && total.is_finite());
    let value = if degenerate {
        rows.iter().map(|&r| values[r]).sum::<f64>() / rows.len() as f64
    } else {
        let weighted: f64 = fitness
            .values()
            .iter()
            .zip(rows)
            .map(|(&f, &r)| f * values[r])
            .sum();
        weighted / total
    };
    Ok(Prediction {
        target_key: String::new(),
        estimate: Estimate::Value(value),
        explanation: Vec::new(),
        total_fitness: total,
        degenerate,
    })
}

fn check_rows(fitness: &FitnessVector, rows: &[usize]) -> Result<()> {
    if fitness.len() != rows.len() || rows.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} fitness values for {} rows",
            fitness.len(),
            rows.len()
        )));
    }
    Ok(())
}

/// Fingerprint a target for the library's schemes.
pub fn target_fingerprints(
    target: &Target,
    library: &ReferenceLibrary,
) -> Result<Vec<Fingerprint>> {
    match target {
        Target::Fingerprints(fps) => Ok(fps.clone()),
        Target::Smiles(s) => {
            let graph = parse_smiles(s)?;
            library
                .schemes()
                .iter()
                .map(|scheme| scheme.compute(&graph))
                .collect()
        }
    }
}

/// Full pipeline against the whole library: embed, dominance, fitness, estimate.
pub fn predict(
    target: &Target,
    library: &ReferenceLibrary,
    config: &PoemConfig,
) -> Result<Prediction> {
    let fps = target_fingerprints(target, library)?;
    predict_fingerprints(&fps, library, config)
}

pub fn predict_fingerprints(
    target: &[Fingerprint],
    library: &ReferenceLibrary,
    config: &PoemConfig,
) -> Result<Prediction> {
    let words = check_target(target, library)?;
    let rows: Vec<usize> = (0..library.len()).collect();
    predict_words(&words, library, &rows, config)
}

/// Predict library row `row` against every other row (leave-one-out masking).
pub fn predict_masked(
    library: &ReferenceLibrary,
    row: usize,
    config: &PoemConfig,
) -> Result<Prediction> {
    let rows: Vec<usize> = (0..library.len()).filter(|&r| r != row).collect();
    let mut p = predict_words(&library.row_words(row), library, &rows, config)?;
    p.target_key = library.key(row).to_string();
    Ok(p)
}

/// Predict library row `row` against the listed training rows.
pub fn predict_row_against(
    library: &ReferenceLibrary,
    row: usize,
    training: &[usize],
    config: &PoemConfig,
) -> Result<Prediction> {
    let mut p = predict_words(&library.row_words(row), library, training, config)?;
    p.target_key = library.key(row).to_string();
    Ok(p)
}

pub(crate) fn predict_words(
    target: &[&[u64]],
    library: &ReferenceLibrary,
    rows: &[usize],
    config: &PoemConfig,
) -> Result<Prediction> {
    if rows.is_empty() {
        return Err(Error::InvalidLibrary(
            "no reference rows to predict against".into(),
        ));
    }
    let profile = embed_rows(target, library, rows);
    predict_from_profile(&profile, library, rows, config)
}

/// Steps after embedding, for a profile whose molecule `j` is library row `rows[j]`.
pub fn predict_from_profile(
    profile: &DistanceProfile,
    library: &ReferenceLibrary,
    rows: &[usize],
    config: &PoemConfig,
) -> Result<Prediction> {
    if profile.molecules() != rows.len() || profile.schemes() != library.schemes().len() {
        return Err(Error::InvalidParameter(
            "distance profile does not match the rows".into(),
        ));
    }
    let summary = dominance_summary(profile, &config.dominance)?;
    let fitness = fitness_from_summary(&summary);
    let mut prediction = match library.targets() {
        Targets::Classes { .. } => predict_class(&fitness, library, rows)?,
        Targets::Values(_) => predict_value(&fitness, library, rows)?,
    };
    prediction.explanation = explain(&fitness, profile, library, rows, config.top_k);
    Ok(prediction)
}

fn explain(
    fitness: &FitnessVector,
    profile: &DistanceProfile,
    library: &ReferenceLibrary,
    rows: &[usize],
    top_k: usize,
) -> Vec<Contribution> {
    if top_k == 0 {
        return Vec::new();
    }
    let total = fitness.total();
    fitness
        .ranking()
        .into_iter()
        .take(top_k)
        .map(|j| {
            let row = rows[j];
            let f = fitness.values()[j];
            Contribution {
                key: library.key(row).to_string(),
                row,
                fitness: f,
                fitness_share: if total > 0.0 { f / total } else { 0.0 },
                label: library.label(row),
                distances: profile.molecule_distances(j),
            }
        })
        .collect()
}
