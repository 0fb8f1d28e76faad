use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fingerprint::tanimoto_words;
use crate::model::{FingerprintColumn, ReferenceLibrary, Targets};

pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
pub const DEFAULT_K: usize = 5;
pub const DEFAULT_CLUSTER_SCHEME: &str = "morgan4";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanKind {
    Loo,
    RandomSplit,
    KFold,
    Cluster,
}

impl PlanKind {
    pub fn name(self) -> &'static str {
        match self {
            PlanKind::Loo => "loo",
            PlanKind::RandomSplit => "random_split",
            PlanKind::KFold => "kfold",
            PlanKind::Cluster => "cluster",
        }
    }
}

impl fmt::Display for PlanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PlanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loo" => Ok(PlanKind::Loo),
            "split" | "random_split" => Ok(PlanKind::RandomSplit),
            "kfold" => Ok(PlanKind::KFold),
            "cluster" => Ok(PlanKind::Cluster),
            _ => Err(Error::InvalidParameter(format!("unknown plan {s:?}"))),
        }
    }
}

/// How molecules are assigned to test folds. Seeds are always explicit.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub kind: PlanKind,
    pub seed: u64,
    /// Random split and cluster plans.
    pub test_fraction: f64,
    /// K-fold plan.
    pub k: usize,
    /// Cluster plan: minimum test-to-train distance.
    pub tanimoto_threshold: f64,
    /// Scheme whose distances drive clustering.
    pub cluster_scheme: String,
    pub repeats: usize,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            kind: PlanKind::Loo,
            seed: 0,
            test_fraction: DEFAULT_TEST_FRACTION,
            k: DEFAULT_K,
            tanimoto_threshold: 0.4,
            cluster_scheme: DEFAULT_CLUSTER_SCHEME.into(),
            repeats: 1,
        }
    }
}

impl SplitPlan {
    pub fn loo() -> Self {
        SplitPlan::default()
    }

    pub fn random_split(test_fraction: f64, seed: u64) -> Self {
        SplitPlan {
            kind: PlanKind::RandomSplit,
            seed,
            test_fraction,
            ..Self::default()
        }
    }

    pub fn kfold(k: usize, seed: u64) -> Self {
        SplitPlan {
            kind: PlanKind::KFold,
            seed,
            k,
            ..Self::default()
        }
    }

    pub fn cluster(tanimoto_threshold: f64, test_fraction: f64, seed: u64) -> Self {
        SplitPlan {
            kind: PlanKind::Cluster,
            seed,
            test_fraction,
            tanimoto_threshold,
            ..Self::default()
        }
    }

    pub fn repeats(mut self, repeats: usize) -> Self {
        self.repeats = repeats;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("repeats must be at least 1".into()));
        }
        match self.kind {
            PlanKind::Loo => {}
            PlanKind::RandomSplit | PlanKind::Cluster
                if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) =>
            {
                return Err(Error::InvalidParameter(format!(
                    "test fraction {} is outside (0, 1)",
                    self.test_fraction
                )));
            }
            PlanKind::KFold if self.k < 2 => {
                return Err(Error::InvalidParameter(format!(
                    "k = {} is below 2",
                    self.k
                )));
            }
            _ => {}
        }
        if self.kind == PlanKind::Cluster && !(0.0..1.0).contains(&self.tanimoto_threshold) {
            return Err(Error::InvalidParameter(format!(
                "tanimoto threshold {} is outside [0, 1)",
                self.tanimoto_threshold
            )));
        }
        Ok(())
    }

    /// Short `key=value;...` rendering of the parameters relevant to `kind`.
    pub fn params_string(&self) -> String {
        let mut parts = Vec::new();
        match self.kind {
            PlanKind::Loo => {}
            PlanKind::RandomSplit => parts.push(format!("test_fraction={}", self.test_fraction)),
            PlanKind::KFold => parts.push(format!("k={}", self.k)),
            PlanKind::Cluster => {
                parts.push(format!("test_fraction={}", self.test_fraction));
                parts.push(format!("tanimoto_threshold={}", self.tanimoto_threshold));
                parts.push(format!("cluster_scheme={}", self.cluster_scheme));
            }
        }
        parts.push(format!("repeats={}", self.repeats));
        parts.join(";")
    }
}

/// One test fold; the training side is every other row.
#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub repeat: usize,
    pub index: usize,
    /// Sorted row indices.
    pub test: Vec<usize>,
    /// Cluster plans only: smallest test-to-train distance on the cluster scheme.
    pub min_cross_distance: Option<f64>,
}

impl Fold {
    pub fn train(&self, m: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(m - self.test.len());
        let mut t = self.test.iter().peekable();
        for r in 0..m {
            if t.peek() == Some(&&r) {
                t.next();
            } else {
                out.push(r);
            }
        }
        out
    }
}

fn rng_for(seed: u64, repeat: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repeat as u64);
    rng
}

/// Row groups used for stratification: one per class, or a single group.
fn strata(library: &ReferenceLibrary) -> Vec<Vec<usize>> {
    match library.targets() {
        Targets::Classes { space, index } => {
            let mut groups = vec![Vec::new(); space.len()];
            for (row, &c) in index.iter().enumerate() {
                groups[c as usize].push(row);
            }
            groups.retain(|g| !g.is_empty());
            groups
        }
        Targets::Values(v) => vec![(0..v.len()).collect()],
    }
}

fn is_classification(library: &ReferenceLibrary) -> bool {
    matches!(library.targets(), Targets::Classes { .. })
}

/// Assign test folds for every repeat; leave-one-out gives one fold per row.
pub fn assign_folds(library: &ReferenceLibrary, plan: &SplitPlan) -> Result<Vec<Fold>> {
    plan.validate()?;
    let m = library.len();
    if m < 2 {
        return Err(Error::EmptyDataset(m));
    }
    match plan.kind {
        PlanKind::Loo => Ok((0..m)
            .map(|i| Fold {
                repeat: 0,
                index: i,
                test: vec![i],
                min_cross_distance: None,
            })
            .collect()),
        PlanKind::RandomSplit => (0..plan.repeats)
            .map(|r| random_split_fold(library, plan, r))
            .collect(),
        PlanKind::KFold => {
            let mut out = Vec::new();
            for r in 0..plan.repeats {
                out.extend(kfold_folds(library, plan, r)?);
            }
            Ok(out)
        }
        PlanKind::Cluster => {
            let column = cluster_column(library, &plan.cluster_scheme)?;
            let clusters = single_linkage(column, plan.tanimoto_threshold);
            (0..plan.repeats)
                .map(|r| cluster_fold(library, plan, column, &clusters, r))
                .collect()
        }
    }
}

/// Split `total` across groups by largest remainder, proportional to size.
fn apportion(sizes: &[usize], total: usize) -> Vec<usize> {
    let m: usize = sizes.iter().sum();
    let mut quota: Vec<usize> = sizes.iter().map(|&n| n * total / m).collect();
    let mut rest: Vec<(usize, usize)> = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| (n * total % m, i))
        .collect();
    rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = total - quota.iter().sum::<usize>();
    for &(_, i) in rest.iter().take(missing) {
        quota[i] += 1;
    }
    quota
}

fn random_split_fold(library: &ReferenceLibrary, plan: &SplitPlan, repeat: usize) -> Result<Fold> {
    let m = library.len();
    let groups = strata(library);
    let classification = is_classification(library);
    let target = ((m as f64 * plan.test_fraction).round() as usize).clamp(1, m - 1);
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let mut quota = apportion(&sizes, target);
    if classification {
        for (q, (&n, g)) in quota.iter_mut().zip(sizes.iter().zip(&groups)) {
            if n < 2 {
                return Err(Error::StratificationImpossible(format!(
                    "class of row {} has {n} member(s); both sides need one",
                    library.key(g[0])
                )));
            }
            *q = (*q).clamp(1, n - 1);
        }
    }
    let mut rng = rng_for(plan.seed, repeat);
    let mut test = Vec::with_capacity(target);
    for (mut g, q) in groups.into_iter().zip(quota) {
        g.shuffle(&mut rng);
        test.extend_from_slice(&g[..q]);
    }
    test.sort_unstable();
    Ok(Fold {
        repeat,
        index: 0,
        test,
        min_cross_distance: None,
    })
}

fn kfold_folds(library: &ReferenceLibrary, plan: &SplitPlan, repeat: usize) -> Result<Vec<Fold>> {
    let m = library.len();
    let k = plan.k;
    if k > m {
        return Err(Error::StratificationImpossible(format!(
            "k = {k} exceeds {m} molecules"
        )));
    }
    let groups = strata(library);
    if is_classification(library) {
        if let Some(g) = groups.iter().find(|g| g.len() < 2) {
            return Err(Error::StratificationImpossible(format!(
                "class of row {} has a single member",
                library.key(g[0])
            )));
        }
    }
    let mut rng = rng_for(plan.seed, repeat);
    let mut folds = vec![Vec::new(); k];
    let mut position = 0;
    for mut g in groups {
        g.shuffle(&mut rng);
        for row in g {
            folds[position % k].push(row);
            position += 1;
        }
    }
    Ok(folds
        .into_iter()
        .enumerate()
        .map(|(index, mut test)| {
            test.sort_unstable();
            Fold {
                repeat,
                index,
                test,
                min_cross_distance: None,
            }
        })
        .collect())
}

fn cluster_column<'a>(
    library: &'a ReferenceLibrary,
    scheme: &str,
) -> Result<&'a FingerprintColumn> {
    library
        .schemes()
        .position(scheme)
        .map(|p| &library.columns()[p])
        .ok_or_else(|| Error::UnknownScheme(scheme.to_string()))
}

/// Connected components of the graph joining rows closer than `threshold`.
/// Clusters are ordered by their smallest row; members are sorted.
pub fn single_linkage(column: &FingerprintColumn, threshold: f64) -> Vec<Vec<usize>> {
    let m = column.rows();
    let edges: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let a = column.row(i);
            ((i + 1)..m)
                .filter(|&j| tanimoto_words(a, column.row(j)) < threshold)
                .collect()
        })
        .collect();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, js) in edges.iter().enumerate() {
        for &j in js {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut slot = vec![usize::MAX; m];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for r in 0..m {
        let root = find(&mut parent, r);
        if slot[root] == usize::MAX {
            slot[root] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[slot[root]].push(r);
    }
    clusters
}

/// Smallest distance between any test row and any training row.
pub fn min_cross_distance(column: &FingerprintColumn, test: &[usize], train: &[usize]) -> f64 {
    test.par_iter()
        .map(|&t| {
            let a = column.row(t);
            train
                .iter()
                .map(|&r| tanimoto_words(a, column.row(r)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

fn cluster_fold(
    library: &ReferenceLibrary,
    plan: &SplitPlan,
    column: &FingerprintColumn,
    clusters: &[Vec<usize>],
    repeat: usize,
) -> Result<Fold> {
    let m = library.len();
    let target = ((m as f64 * plan.test_fraction).round() as usize).clamp(1, m - 1);

    // Largest clusters first; equal sizes in seeded random order.
    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.shuffle(&mut rng_for(plan.seed, repeat));
    order.sort_by(|&a, &b| clusters[b].len().cmp(&clusters[a].len()));

    let mut in_test = vec![false; clusters.len()];
    let mut n_test = 0;
    for &c in &order {
        if n_test >= target {
            break;
        }
        if n_test + clusters[c].len() < m {
            in_test[c] = true;
            n_test += clusters[c].len();
        }
    }
    if n_test == 0 {
        return Err(Error::ClassCoverageImpossible(format!(
            "only {} cluster(s) at threshold {}; no split leaves both sides non-empty",
            clusters.len(),
            plan.tanimoto_threshold
        )));
    }
    if let Targets::Classes { space, index } = library.targets() {
        repair_coverage(clusters, &order, &mut in_test, index, space.len())?;
    }

    let mut test: Vec<usize> = clusters
        .iter()
        .zip(&in_test)
        .filter(|(_, &t)| t)
        .flat_map(|(c, _)| c.iter().copied())
        .collect();
    test.sort_unstable();
    let fold = Fold {
        repeat,
        index: 0,
        min_cross_distance: None,
        test,
    };
    let d = min_cross_distance(column, &fold.test, &fold.train(m));
    if d < plan.tanimoto_threshold {
        return Err(Error::Invariant(format!(
            "cluster split has cross distance {d} below threshold {}",
            plan.tanimoto_threshold
        )));
    }
    Ok(Fold {
        min_cross_distance: Some(d),
        ..fold
    })
}

/// Move whole clusters until each side holds every class.
fn repair_coverage(
    clusters: &[Vec<usize>],
    order: &[usize],
    in_test: &mut [bool],
    class_of: &[u32],
    n_classes: usize,
) -> Result<()> {
    let counts = |side: bool, in_test: &[bool]| {
        let mut c = vec![0usize; n_classes];
        for (cl, &t) in clusters.iter().zip(in_test.iter()) {
            if t == side {
                for &r in cl {
                    c[class_of[r] as usize] += 1;
                }
            }
        }
        c
    };
    let present: Vec<bool> = counts(true, in_test)
        .iter()
        .zip(counts(false, in_test))
        .map(|(a, b)| a + b > 0)
        .collect();
    for _ in 0..=2 * clusters.len() {
        let test_counts = counts(true, in_test);
        let train_counts = counts(false, in_test);
        let missing_test = (0..n_classes).find(|&c| present[c] && test_counts[c] == 0);
        let missing_train = (0..n_classes).find(|&c| present[c] && train_counts[c] == 0);
        let (class, from_side) = match (missing_test, missing_train) {
            (None, None) => return Ok(()),
            (Some(c), _) => (c, false),
            (None, Some(c)) => (c, true),
        };
        // Smallest movable cluster holding `class` on the donor side that
        // does not strip the donor side of any class.
        let donor_counts = if from_side {
            &test_counts
        } else {
            &train_counts
        };
        let donor_total: usize = donor_counts.iter().sum();
        let candidate = order
            .iter()
            .rev()
            .copied()
            .filter(|&c| in_test[c] == from_side)
            .filter(|&c| clusters[c].iter().any(|&r| class_of[r] as usize == class))
            .filter(|&c| {
                let mut left = donor_counts.clone();
                for &r in &clusters[c] {
                    left[class_of[r] as usize] -= 1;
                }
                clusters[c].len() < donor_total
                    && (0..n_classes).all(|k| donor_counts[k] == 0 || left[k] > 0)
            })
            .min_by_key(|&c| clusters[c].len());
        match candidate {
            Some(c) => in_test[c] = !from_side,
            None => {
                return Err(Error::ClassCoverageImpossible(format!(
                    "class {class} cannot be placed on both sides without splitting a cluster"
                )))
            }
        }
    }
    Err(Error::ClassCoverageImpossible(
        "class coverage repair did not converge".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apportion_sums() {
        assert_eq!(apportion(&[50, 50], 20), vec![10, 10]);
        assert_eq!(apportion(&[3, 3, 4], 5).iter().sum::<usize>(), 5);
        assert_eq!(apportion(&[1, 99], 20).iter().sum::<usize>(), 20);
    }

    #[test]
    fn fold_train_is_complement() {
        let f = Fold {
            repeat: 0,
            index: 0,
            test: vec![1, 3],
            min_cross_distance: None,
        };
        assert_eq!(f.train(5), vec![0, 2, 4]);
    }

    #[test]
    fn plan_validation() {
        assert!(SplitPlan::random_split(0.0, 1).validate().is_err());
        assert!(SplitPlan::random_split(1.0, 1).validate().is_err());
        assert!(SplitPlan::kfold(1, 1).validate().is_err());
        assert!(SplitPlan::cluster(1.0, 0.2, 1).validate().is_err());
        assert!(SplitPlan::cluster(0.0, 0.2, 1).validate().is_ok());
        assert!(SplitPlan::loo().repeats(0).validate().is_err());
    }
}
