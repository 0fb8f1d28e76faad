use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use poem_core::dataset::{
    build_library, clean, load_csv, load_queries, query_fingerprints, LabelKind, QueryRow,
    SchemaConfig,
};
use poem_core::eval::{evaluate, PlanKind, SplitPlan};
use poem_core::fingerprint::{
    load_external_fingerprints, write_external_fingerprints, ExternalFingerprints,
};
use poem_core::model::{
    load_library, predict_fingerprints, read_info, save_library, Estimate, LibraryMeta,
};
use poem_core::{
    parse_smiles, Error, Fingerprint, FingerprintScheme, PoemConfig, Prediction, ReferenceLibrary,
    SchemeSet, TaskKind,
};
use rayon::prelude::*;

use crate::{
    BuildArgs, Command, EvaluateArgs, ExplainArgs, FingerprintArgs, InfoArgs, PredictArgs,
};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(PathBuf, io::Error),
    /// Some rows failed; details were already printed.
    RowFailures(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Invariant(_)) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::RowFailures(n) => write!(f, "{n} row(s) failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Build(a) => build(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Explain(a) => explain(a),
        Command::Fingerprint(a) => fingerprint(a),
        Command::Info(a) => info(a),
    }
}

/// Buffered output to a file, or to stdout when no path is given.
struct Output {
    path: PathBuf,
    inner: Box<dyn Write>,
}

impl Output {
    fn open(path: Option<&Path>) -> Result<Output> {
        match path {
            Some(p) => {
                let f = File::create(p).map_err(|e| CliError::Io(p.to_path_buf(), e))?;
                Ok(Output {
                    path: p.to_path_buf(),
                    inner: Box::new(BufWriter::new(f)),
                })
            }
            None => Ok(Output {
                path: PathBuf::from("<stdout>"),
                inner: Box::new(BufWriter::new(io::stdout().lock())),
            }),
        }
    }

    fn err(&self) -> impl Fn(io::Error) -> CliError + '_ {
        move |e| CliError::Io(self.path.clone(), e)
    }

    fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.inner, "{text}").map_err(|e| CliError::Io(self.path.clone(), e))
    }

    fn finish(mut self) -> Result<()> {
        self.inner
            .flush()
            .map_err(|e| CliError::Io(self.path.clone(), e))
    }
}

fn poem_config(relax: f64, top_k: usize) -> Result<PoemConfig> {
    if !(relax > 0.5 && relax <= 1.0) {
        return Err(CliError::Usage(format!(
            "--relax {relax} is outside (0.5, 1]"
        )));
    }
    Ok(PoemConfig::with_relax(relax).top_k(top_k))
}

fn load_externals(paths: &[PathBuf]) -> Result<Vec<ExternalFingerprints>> {
    Ok(paths
        .iter()
        .map(load_external_fingerprints)
        .collect::<poem_core::Result<_>>()?)
}

fn native_schemes(ids: &[String], length: usize) -> Result<Vec<FingerprintScheme>> {
    let all = SchemeSet::native_with_length(length);
    Ok(match ids {
        [one] if one == "native" => all.schemes().to_vec(),
        [one] if one == "none" => Vec::new(),
        _ => ids
            .iter()
            .map(|id| {
                all.get(id)
                    .cloned()
                    .ok_or_else(|| Error::UnknownScheme(id.clone()))
            })
            .collect::<poem_core::Result<_>>()?,
    })
}

fn build(a: BuildArgs) -> Result<()> {
    let label_kind = match a.label_kind.as_str() {
        "auto" => None,
        other => Some(other.parse::<LabelKind>()?),
    };
    let externals = load_externals(&a.external)?;
    let mut schemes = native_schemes(&a.schemes, a.fp_length)?;
    schemes.extend(externals.iter().map(|e| e.scheme.clone()));
    if schemes.is_empty() {
        return Err(CliError::Usage("no fingerprint schemes selected".into()));
    }
    let schemes = SchemeSet::new(schemes)?;
    let schema = SchemaConfig {
        smiles_col: schemes.has_native().then(|| a.smiles_col.clone()),
        label_col: a.label_col.clone(),
        key_col: a.key_col.clone(),
        label_kind,
        positive_tokens: a.pos_tokens.clone(),
        negative_tokens: a.neg_tokens.clone(),
    };
    let raw = load_csv(&a.data, &schema)?;
    let (cleaned, report) = clean(&raw, &schemes)?;
    let name = a.name.clone().unwrap_or_else(|| {
        a.data
            .file_stem()
            .map_or_else(|| "library".into(), |s| s.to_string_lossy().into_owned())
    });
    let meta = LibraryMeta {
        name,
        notes: a.notes.clone(),
        ..LibraryMeta::default()
    };
    let library = build_library(&cleaned, &schemes, &externals, meta)?;
    save_library(&library, &a.out)?;

    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".cleaning.txt");
        PathBuf::from(p)
    });
    let mut rep = Output::open(Some(&report_path))?;
    let text = report.to_key_values();
    rep.inner.write_all(text.as_bytes()).map_err(rep.err())?;
    rep.finish()?;

    eprintln!("{report}");
    let mut out = Output::open(None)?;
    out.line(&format!("library={}", a.out.display()))?;
    out.line(&format!("molecules={}", library.len()))?;
    out.line(&format!("classes={}", library.label_space().len()))?;
    out.line(&format!("task={}", task_name(library.task())))?;
    for s in library.schemes() {
        out.line(&format!("scheme={s}"))?;
    }
    out.line(&format!("cleaning_report={}", report_path.display()))?;
    out.finish()
}

fn task_name(t: TaskKind) -> &'static str {
    match t {
        TaskKind::Classification => "classification",
        TaskKind::Regression => "regression",
    }
}

fn prediction_header(library: &ReferenceLibrary) -> Vec<String> {
    let mut h = vec!["key".to_string()];
    h.extend(library.label_space().iter().map(|l| format!("prob_{l}")));
    h.push("predicted".into());
    h
}

fn prediction_record(p: &Prediction) -> Vec<String> {
    let mut r = vec![p.target_key.clone()];
    match &p.estimate {
        Estimate::Classes {
            labels,
            probs,
            predicted,
        } => {
            r.extend(probs.iter().map(|x| format!("{x:.6}")));
            r.push(labels[*predicted].clone());
        }
        Estimate::Value(v) => r.push(format!("{v:.6}")),
    }
    r
}

fn predict_query(
    q: &QueryRow,
    library: &ReferenceLibrary,
    externals: &[ExternalFingerprints],
    cfg: &PoemConfig,
) -> poem_core::Result<Prediction> {
    let fps: Vec<Fingerprint> = query_fingerprints(q, library.schemes(), externals)?;
    let mut p = predict_fingerprints(&fps, library, cfg)?;
    p.target_key = q.key.clone();
    Ok(p)
}

fn predict(a: PredictArgs) -> Result<()> {
    let cfg = poem_config(a.relax, 0)?;
    let library = load_library(&a.library)?;
    let externals = load_externals(&a.external)?;
    let smiles_col = library
        .schemes()
        .has_native()
        .then_some(a.smiles_col.as_str());
    let queries = load_queries(&a.query, smiles_col, a.key_col.as_deref())?;
    let start = Instant::now();
    let results: Vec<poem_core::Result<Prediction>> = queries
        .par_iter()
        .map(|q| predict_query(q, &library, &externals, &cfg))
        .collect();

    let mut out = Output::open(a.out.as_deref())?;
    let mut failures = 0;
    if !queries.is_empty() {
        let mut w = csv::Writer::from_writer(&mut out.inner);
        w.write_record(prediction_header(&library))
            .map_err(csv_err)?;
        for (q, r) in queries.iter().zip(&results) {
            match r {
                Ok(p) => w.write_record(prediction_record(p)).map_err(csv_err)?,
                Err(e) => {
                    failures += 1;
                    eprintln!("query {}: {e}", q.key);
                }
            }
        }
        w.flush()
            .map_err(|e| CliError::Io(PathBuf::from("<output>"), e))?;
    }
    out.finish()?;
    eprintln!(
        "predicted {} of {} queries in {:.3}s",
        queries.len() - failures,
        queries.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        return Err(CliError::RowFailures(failures));
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Core(Error::Csv(e))
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let cfg = poem_config(a.relax, 0)?;
    let mut library = load_library(&a.library)?;
    if !a.schemes.is_empty() {
        let ids: Vec<&str> = a.schemes.iter().map(String::as_str).collect();
        library = library.restrict_schemes(&ids)?;
    }
    let plan = SplitPlan {
        kind: a.plan.parse::<PlanKind>()?,
        seed: a.seed,
        test_fraction: a.test_fraction,
        k: a.k,
        tanimoto_threshold: a.threshold,
        cluster_scheme: a.cluster_scheme.clone(),
        repeats: a.repeats,
    };
    let result = evaluate(&library, &plan, &cfg)?;

    let mut out = Output::open(a.out.as_deref())?;
    result.write_report(&mut out.inner).map_err(out.err())?;
    out.finish()?;

    let score = result
        .score()
        .map_or_else(|| "undefined".into(), |s| format!("{s:.6}"));
    let mut summary = vec![
        format!("plan={}", plan.kind),
        format!("metric={}", result.metric.name()),
        format!("score={score}"),
        format!("folds={}", result.folds.len()),
    ];
    if let Some(s) = result.fold_stats().filter(|s| s.n > 1) {
        summary.push(format!(
            "fold_scores=min:{:.6};q1:{:.6};median:{:.6};q3:{:.6};max:{:.6}",
            s.min, s.q1, s.median, s.q3, s.max
        ));
    }
    if let Some(d) = result
        .folds
        .iter()
        .filter_map(|f| f.min_cross_distance)
        .reduce(f64::min)
    {
        summary.push(format!("min_cross_distance={d:.6}"));
    }
    // The report owns stdout when no output file is given.
    if a.out.is_some() {
        let mut o = Output::open(None)?;
        for l in &summary {
            o.line(l)?;
        }
        o.finish()?;
    } else {
        for l in &summary {
            eprintln!("{l}");
        }
    }
    eprintln!("runtime={:.3}s", result.runtime().as_secs_f64());
    Ok(())
}

fn explain(a: ExplainArgs) -> Result<()> {
    if a.top_k == 0 {
        return Err(CliError::Usage("--top-k must be at least 1".into()));
    }
    let cfg = poem_config(a.relax, a.top_k)?;
    let library = load_library(&a.library)?;
    let externals = load_externals(&a.external)?;
    let query = QueryRow {
        key: a.key.clone(),
        smiles: a.smiles.clone(),
    };
    let p = predict_query(&query, &library, &externals, &cfg)?;

    let mut out = Output::open(a.out.as_deref())?;
    out.line(&format!("# target={}", p.target_key))?;
    if let Some(s) = &a.smiles {
        out.line(&format!("# smiles={s}"))?;
    }
    match &p.estimate {
        Estimate::Classes {
            labels,
            probs,
            predicted,
        } => {
            let probs: Vec<String> = labels
                .iter()
                .zip(probs)
                .map(|(l, x)| format!("{l}:{x:.6}"))
                .collect();
            out.line(&format!("# predicted={}", labels[*predicted]))?;
            out.line(&format!("# probabilities={}", probs.join(";")))?;
        }
        Estimate::Value(v) => out.line(&format!("# predicted={v:.6}"))?,
    }
    out.line(&format!("# total_fitness={:.6e}", p.total_fitness))?;
    out.line(&format!(
        "# listed={} of {}",
        p.explanation.len(),
        library.len()
    ))?;
    out.line(&format!("# coverage={:.6}", p.coverage()))?;
    {
        let mut w = csv::Writer::from_writer(&mut out.inner);
        let mut header: Vec<String> = ["rank", "key", "label", "fitness", "fitness_share"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend(library.schemes().iter().map(|s| format!("d_{}", s.id)));
        w.write_record(&header).map_err(csv_err)?;
        for (rank, c) in p.explanation.iter().enumerate() {
            let mut rec = vec![
                (rank + 1).to_string(),
                c.key.clone(),
                c.label.to_string(),
                format!("{:.6e}", c.fitness),
                format!("{:.6}", c.fitness_share),
            ];
            rec.extend(c.distances.iter().map(|d| format!("{d:.6}")));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()
            .map_err(|e| CliError::Io(PathBuf::from("<output>"), e))?;
    }
    out.finish()
}

fn fingerprint(a: FingerprintArgs) -> Result<()> {
    let scheme = native_schemes(std::slice::from_ref(&a.scheme), a.fp_length)?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Usage(format!("{} is not a native scheme", a.scheme)))?;
    let queries = load_queries(&a.data, Some(&a.smiles_col), a.key_col.as_deref())?;
    let results: Vec<poem_core::Result<Fingerprint>> = queries
        .par_iter()
        .map(|q| {
            let smiles = q.smiles.as_deref().unwrap_or_default();
            scheme.compute(&parse_smiles(smiles)?)
        })
        .collect();
    let mut ok = Vec::with_capacity(queries.len());
    let mut failures = 0;
    for (q, r) in queries.iter().zip(&results) {
        match r {
            Ok(fp) => ok.push((q.key.as_str(), fp)),
            Err(e) => {
                failures += 1;
                eprintln!("row {}: {e}", q.key);
            }
        }
    }
    let id = a.id.clone().unwrap_or_else(|| scheme.id.clone());
    let external = FingerprintScheme::external(&id, scheme.length);
    let mut out = Output::open(a.out.as_deref())?;
    write_external_fingerprints(&mut out.inner, &external, ok)?;
    out.finish()?;
    if failures > 0 {
        return Err(CliError::RowFailures(failures));
    }
    Ok(())
}

fn info(a: InfoArgs) -> Result<()> {
    let info = read_info(&a.library)?;
    let mut out = Output::open(None)?;
    out.line(&format!("format={}", info.format))?;
    out.line(&format!("name={}", info.meta.name))?;
    out.line(&format!("version={}", info.meta.version))?;
    if !info.meta.notes.is_empty() {
        out.line(&format!("notes={}", info.meta.notes))?;
    }
    out.line(&format!("task={}", task_name(info.task)))?;
    out.line(&format!("M={}", info.molecules))?;
    out.line(&format!("N={}", info.schemes.len()))?;
    out.line(&format!("Np={}", info.label_space.len()))?;
    if !info.label_space.is_empty() {
        out.line(&format!("labels={}", info.label_space.join(",")))?;
    }
    for s in &info.schemes {
        out.line(&format!("scheme={s}"))?;
    }
    out.finish()
}
