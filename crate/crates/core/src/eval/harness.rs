use std::io::{self, Write};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::metrics::{rmse, roc_auc, BoxStats};
use super::plan::{assign_folds, Fold, PlanKind, SplitPlan};
use crate::error::{Error, Result};
use crate::model::{
    predict_masked, predict_row_against, Estimate, Label, PoemConfig, ReferenceLibrary, TaskKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    RocAuc,
    Rmse,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::RocAuc => "roc_auc",
            Metric::Rmse => "rmse",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculePrediction {
    pub repeat: usize,
    pub fold: usize,
    pub row: usize,
    pub key: String,
    pub truth: Label,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub repeat: usize,
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// `None` when the metric is undefined on this fold (e.g. one class only).
    pub score: Option<f64>,
    pub min_cross_distance: Option<f64>,
    /// Wall-clock time; excluded from written reports.
    pub runtime: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub dataset: String,
    pub plan: SplitPlan,
    pub schemes: Vec<String>,
    pub metric: Metric,
    pub label_space: Vec<String>,
    pub folds: Vec<FoldResult>,
    /// Ordered by repeat, then row.
    pub predictions: Vec<MoleculePrediction>,
    /// Metric over all predictions of each repeat.
    pub pooled: Vec<Option<f64>>,
}

impl EvalResult {
    /// Headline score: pooled for leave-one-out, the fold mean otherwise
    /// (falling back to pooled when no fold score is defined).
    pub fn score(&self) -> Option<f64> {
        let fold_scores: Vec<f64> = self.folds.iter().filter_map(|f| f.score).collect();
        if self.plan.kind == PlanKind::Loo || fold_scores.is_empty() {
            let pooled: Vec<f64> = self.pooled.iter().flatten().copied().collect();
            BoxStats::from_values(&pooled).map(|s| s.mean)
        } else {
            BoxStats::from_values(&fold_scores).map(|s| s.mean)
        }
    }

    pub fn fold_stats(&self) -> Option<BoxStats> {
        let scores: Vec<f64> = self.folds.iter().filter_map(|f| f.score).collect();
        BoxStats::from_values(&scores)
    }

    pub fn runtime(&self) -> Duration {
        self.folds.iter().map(|f| f.runtime).sum()
    }

    /// Label whose probability the report lists: the positive (last) class
    /// for binary tasks, the predicted class otherwise.
    fn probability_column(&self) -> String {
        match (self.metric, self.label_space.len()) {
            (Metric::Rmse, _) => "none".into(),
            (_, 2) => format!("P({})", self.label_space[1]),
            _ => "P(predicted)".into(),
        }
    }

    /// Write the CSV-compatible report. Runtimes are left out so repeated
    /// runs produce identical bytes.
    pub fn write_report<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        writeln!(out, "# poem evaluation report")?;
        writeln!(out, "# dataset={}", self.dataset)?;
        writeln!(out, "# plan={}", self.plan.kind)?;
        writeln!(out, "# seed={}", self.plan.seed)?;
        writeln!(out, "# params={}", self.plan.params_string())?;
        writeln!(out, "# schemes={}", self.schemes.join(";"))?;
        writeln!(out, "# metric={}", self.metric.name())?;
        writeln!(out, "# probability={}", self.probability_column())?;
        writeln!(out, "# score={}", fmt_opt(self.score()))?;
        if let Some(s) = self.fold_stats() {
            writeln!(
                out,
                "# fold_stats=n:{};mean:{:.6};min:{:.6};q1:{:.6};median:{:.6};q3:{:.6};max:{:.6}",
                s.n, s.mean, s.min, s.q1, s.median, s.q3, s.max
            )?;
        }
        for (r, p) in self.pooled.iter().enumerate() {
            writeln!(out, "# pooled_repeat_{r}={}", fmt_opt(*p))?;
        }
        if let Some(d) = self
            .folds
            .iter()
            .filter_map(|f| f.min_cross_distance)
            .reduce(f64::min)
        {
            writeln!(out, "# min_cross_distance={d:.6}")?;
        }

        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record([
            "repeat",
            "fold",
            "n_train",
            "n_test",
            "test_train_ratio",
            "score",
            "min_cross_distance",
        ])?;
        for f in &self.folds {
            w.write_record([
                f.repeat.to_string(),
                f.fold.to_string(),
                f.n_train.to_string(),
                f.n_test.to_string(),
                format!("{:.6}", f.n_test as f64 / f.n_train as f64),
                fmt_opt(f.score),
                fmt_opt(f.min_cross_distance),
            ])?;
        }
        w.flush()?;
        drop(w);
        writeln!(out)?;

        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(["key", "true", "predicted", "probability"])?;
        for p in &self.predictions {
            let (predicted, probability) = match &p.estimate {
                Estimate::Classes {
                    labels,
                    probs,
                    predicted,
                } => {
                    let shown = if labels.len() == 2 {
                        probs[1]
                    } else {
                        probs[*predicted]
                    };
                    (labels[*predicted].clone(), format!("{shown:.6}"))
                }
                Estimate::Value(v) => (format!("{v:.6}"), String::new()),
            };
            w.write_record([p.key.clone(), p.truth.to_string(), predicted, probability])?;
        }
        w.flush()
    }

    pub fn report_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_report(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("report is UTF-8")
    }
}

/// Metric over a set of predictions. Binary tasks score the positive (last)
/// class; multi-class tasks average one-vs-rest AUC over classes that have
/// both positives and negatives in the set.
pub fn score_predictions(
    library: &ReferenceLibrary,
    predictions: &[MoleculePrediction],
) -> Result<Option<f64>> {
    match library.task() {
        TaskKind::Regression => {
            let (pred, truth): (Vec<f64>, Vec<f64>) = predictions
                .iter()
                .map(|p| match (&p.estimate, &p.truth) {
                    (Estimate::Value(v), Label::Value(t)) => Ok((*v, *t)),
                    _ => Err(Error::Invariant(
                        "classification output on a regression task".into(),
                    )),
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            if pred.is_empty() {
                return Ok(None);
            }
            rmse(&pred, &truth).map(Some)
        }
        TaskKind::Classification => {
            let space = library.label_space();
            let probs = |p: &MoleculePrediction, c: usize| match &p.estimate {
                Estimate::Classes { probs, .. } => probs[c],
                Estimate::Value(_) => f64::NAN,
            };
            let is_class = |p: &MoleculePrediction, c: usize| matches!(&p.truth, Label::Class(l) if *l == space[c]);
            let one_vs_rest = |c: usize| {
                let scores: Vec<f64> = predictions.iter().map(|p| probs(p, c)).collect();
                let labels: Vec<bool> = predictions.iter().map(|p| is_class(p, c)).collect();
                match roc_auc(&scores, &labels) {
                    Ok(a) => Ok(Some(a)),
                    Err(Error::SingleClass) => Ok(None),
                    Err(e) => Err(e),
                }
            };
            if space.len() == 2 {
                return one_vs_rest(1);
            }
            let aucs: Vec<f64> = (0..space.len())
                .map(one_vs_rest)
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            Ok(BoxStats::from_values(&aucs).map(|s| s.mean))
        }
    }
}

fn eval_config(config: &PoemConfig) -> PoemConfig {
    PoemConfig {
        top_k: 0,
        ..config.clone()
    }
}

fn record(
    library: &ReferenceLibrary,
    repeat: usize,
    fold: usize,
    row: usize,
    estimate: Estimate,
) -> MoleculePrediction {
    MoleculePrediction {
        repeat,
        fold,
        row,
        key: library.key(row).to_string(),
        truth: library.label(row),
        estimate,
    }
}

fn base_result(library: &ReferenceLibrary, plan: SplitPlan) -> EvalResult {
    EvalResult {
        dataset: library.meta().name.clone(),
        plan,
        schemes: library.schemes().iter().map(|s| s.id.clone()).collect(),
        metric: match library.task() {
            TaskKind::Classification => Metric::RocAuc,
            TaskKind::Regression => Metric::Rmse,
        },
        label_space: library.label_space().to_vec(),
        folds: Vec::new(),
        predictions: Vec::new(),
        pooled: Vec::new(),
    }
}

/// Leave-one-out: each row predicted against all others by masking.
pub fn loo_eval(library: &ReferenceLibrary, config: &PoemConfig) -> Result<EvalResult> {
    let m = library.len();
    if m < 3 {
        return Err(Error::InvalidLibrary(format!(
            "leave-one-out needs at least 3 molecules, have {m}"
        )));
    }
    let cfg = eval_config(config);
    let start = Instant::now();
    let predictions = (0..m)
        .into_par_iter()
        .map(|i| predict_masked(library, i, &cfg).map(|p| record(library, 0, 0, i, p.estimate)))
        .collect::<Result<Vec<_>>>()?;
    let runtime = start.elapsed();
    let score = score_predictions(library, &predictions)?;
    let mut result = base_result(library, SplitPlan::loo());
    result.folds.push(FoldResult {
        repeat: 0,
        fold: 0,
        n_train: m - 1,
        n_test: m,
        score,
        min_cross_distance: None,
        runtime,
    });
    result.predictions = predictions;
    result.pooled.push(score);
    Ok(result)
}

/// Run every fold of `plan`: test rows predicted against the complement.
fn run_folds(
    library: &ReferenceLibrary,
    plan: &SplitPlan,
    config: &PoemConfig,
) -> Result<EvalResult> {
    let folds = assign_folds(library, plan)?;
    let cfg = eval_config(config);
    let m = library.len();
    let evaluated = folds
        .par_iter()
        .map(|fold: &Fold| {
            let start = Instant::now();
            let train = fold.train(m);
            let preds = fold
                .test
                .par_iter()
                .map(|&row| {
                    predict_row_against(library, row, &train, &cfg)
                        .map(|p| record(library, fold.repeat, fold.index, row, p.estimate))
                })
                .collect::<Result<Vec<_>>>()?;
            let score = score_predictions(library, &preds)?;
            Ok((
                FoldResult {
                    repeat: fold.repeat,
                    fold: fold.index,
                    n_train: train.len(),
                    n_test: fold.test.len(),
                    score,
                    min_cross_distance: fold.min_cross_distance,
                    runtime: start.elapsed(),
                },
                preds,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut result = base_result(library, plan.clone());
    let mut by_repeat: Vec<Vec<MoleculePrediction>> = vec![Vec::new(); plan.repeats];
    for (fold, preds) in evaluated {
        result.folds.push(fold);
        by_repeat[preds.first().map_or(0, |p| p.repeat)].extend(preds);
    }
    for mut preds in by_repeat {
        preds.sort_by_key(|p| p.row);
        result.pooled.push(score_predictions(library, &preds)?);
        result.predictions.extend(preds);
    }
    Ok(result)
}

/// Stratified random train/test splits, `plan.repeats` times.
pub fn split_eval(
    library: &ReferenceLibrary,
    plan: &SplitPlan,
    config: &PoemConfig,
) -> Result<EvalResult> {
    expect_kind(plan, PlanKind::RandomSplit)?;
    run_folds(library, plan, config)
}

/// Stratified k-fold cross-validation.
pub fn kfold_eval(
    library: &ReferenceLibrary,
    plan: &SplitPlan,
    config: &PoemConfig,
) -> Result<EvalResult> {
    expect_kind(plan, PlanKind::KFold)?;
    run_folds(library, plan, config)
}

/// Cluster-separated validation: whole single-linkage clusters go to the
/// test side, so every test molecule is at least the threshold away from
/// every training molecule on the cluster scheme.
pub fn cluster_eval(
    library: &ReferenceLibrary,
    plan: &SplitPlan,
    config: &PoemConfig,
) -> Result<EvalResult> {
    expect_kind(plan, PlanKind::Cluster)?;
    run_folds(library, plan, config)
}

/// Leave-one-out using a single fingerprint scheme.
pub fn single_scheme_eval(
    library: &ReferenceLibrary,
    scheme_id: &str,
    config: &PoemConfig,
) -> Result<EvalResult> {
    let restricted = library.restrict_schemes(&[scheme_id])?;
    let dominance = match &config.dominance.weights {
        Some(w) => {
            let k = library
                .schemes()
                .position(scheme_id)
                .expect("scheme checked above");
            crate::model::DominanceConfig {
                weights: Some(vec![w[k]]),
                ..config.dominance.clone()
            }
        }
        None => config.dominance.clone(),
    };
    loo_eval(
        &restricted,
        &PoemConfig {
            dominance,
            ..config.clone()
        },
    )
}

/// Dispatch on `plan.kind`.
pub fn evaluate(
    library: &ReferenceLibrary,
    plan: &SplitPlan,
    config: &PoemConfig,
) -> Result<EvalResult> {
    plan.validate()?;
    match plan.kind {
        PlanKind::Loo => loo_eval(library, config),
        _ => run_folds(library, plan, config),
    }
}

fn expect_kind(plan: &SplitPlan, kind: PlanKind) -> Result<()> {
    if plan.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "expected a {kind} plan, got {}",
            plan.kind
        )));
    }
    Ok(())
}
