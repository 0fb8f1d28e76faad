use poem_core::eval::{
    assign_folds, cluster_eval, evaluate, kfold_eval, loo_eval, roc_auc, single_scheme_eval,
    split_eval, PlanKind, SplitPlan,
};
use poem_core::fingerprint::tanimoto_words;
use poem_core::model::{predict_fingerprints, predict_masked, Estimate};
use poem_core::synthetic::{
    bit_block_library, random_library, random_regression_library, scheme_id, two_family_library,
};
use poem_core::{Error, PoemConfig, ReferenceLibrary};
use proptest::prelude::*;

/// O(P x N) pairwise count with half credit for ties.
fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

fn arb_scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..60, any::<bool>()).prop_flat_map(|(n, coarse)| {
        let score = if coarse {
            (0u32..4).prop_map(|v| f64::from(v) / 3.0).boxed()
        } else {
            (0.0f64..1.0).boxed()
        };
        (
            proptest::collection::vec(score, n),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_filter("both classes", |(_, l)| {
                l.iter().any(|&x| x) && l.iter().any(|&x| !x)
            })
    })
}

proptest! {
    #[test]
    fn auc_matches_pairwise_oracle((scores, labels) in arb_scored()) {
        let fast = roc_auc(&scores, &labels).unwrap();
        prop_assert!((fast - brute_auc(&scores, &labels)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&fast));
    }

    #[test]
    fn auc_is_rank_based((scores, labels) in arb_scored()) {
        let moved: Vec<f64> = scores.iter().map(|s| (5.0 * s).exp() - 3.0).collect();
        prop_assert_eq!(roc_auc(&scores, &labels).unwrap(), roc_auc(&moved, &labels).unwrap());
    }

    #[test]
    fn auc_complement_symmetry((scores, labels) in arb_scored()) {
        let auc = roc_auc(&scores, &labels).unwrap();
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let inverted: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();
        prop_assert!((roc_auc(&inverted, &flipped).unwrap() - auc).abs() <= 1e-12);
        prop_assert!((roc_auc(&scores, &flipped).unwrap() - (1.0 - auc)).abs() <= 1e-12);
    }

    #[test]
    fn masked_loo_equals_rebuild(seed in any::<u64>(), m in 3usize..25, n in 1usize..6) {
        let lib = random_library(m, n, 64, 0.3, seed);
        let cfg = PoemConfig::default();
        for i in 0..m {
            let rest: Vec<usize> = (0..m).filter(|&r| r != i).collect();
            let Ok(rebuilt) = lib.subset(&rest) else { continue };
            let fresh = predict_fingerprints(&lib.row_fingerprints(i), &rebuilt, &cfg).unwrap();
            let masked = predict_masked(&lib, i, &cfg).unwrap();
            prop_assert_eq!(&fresh.estimate, &masked.estimate);
            prop_assert_eq!(fresh.total_fitness.to_bits(), masked.total_fitness.to_bits());
        }
    }

    #[test]
    fn folds_partition_and_repeat(seed in any::<u64>(), k in 2usize..7, repeats in 1usize..3) {
        let lib = random_library(40, 2, 64, 0.3, seed);
        let plan = SplitPlan::kfold(k, seed).repeats(repeats);
        let folds = assign_folds(&lib, &plan).unwrap();
        prop_assert_eq!(&folds, &assign_folds(&lib, &plan).unwrap());
        for r in 0..repeats {
            let mut seen: Vec<usize> = folds.iter().filter(|f| f.repeat == r).flat_map(|f| f.test.clone()).collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..40).collect::<Vec<_>>());
        }
    }

    #[test]
    fn cluster_splits_respect_threshold(seed in any::<u64>(), threshold in 0.0f64..0.95) {
        let lib = random_library(30, 2, 64, 0.3, seed);
        let plan = SplitPlan { cluster_scheme: scheme_id(0), ..SplitPlan::cluster(threshold, 0.3, seed) };
        match assign_folds(&lib, &plan) {
            Ok(folds) => {
                let col = &lib.columns()[0];
                for f in folds {
                    let train = f.train(lib.len());
                    for &t in &f.test {
                        for &r in &train {
                            prop_assert!(tanimoto_words(col.row(t), col.row(r)) >= threshold);
                        }
                    }
                }
            }
            Err(Error::ClassCoverageImpossible(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

fn class_probs(e: &Estimate) -> &[f64] {
    match e {
        Estimate::Classes { probs, .. } => probs,
        Estimate::Value(_) => panic!("classification expected"),
    }
}

#[test]
fn separable_library_scores_perfectly() {
    let lib = bit_block_library(5, 6, 256, 0.1, 3);
    let r = loo_eval(&lib, &PoemConfig::default()).unwrap();
    assert_eq!(r.score(), Some(1.0));
    assert_eq!(r.predictions.len(), 10);
}

#[test]
fn three_molecule_loo_runs() {
    let lib = random_library(3, 2, 64, 0.3, 9);
    assert_eq!(
        loo_eval(&lib, &PoemConfig::default())
            .unwrap()
            .predictions
            .len(),
        3
    );
    assert!(loo_eval(&random_library(2, 2, 64, 0.3, 9), &PoemConfig::default()).is_err());
}

#[test]
fn kfold_with_k_equal_m_is_loo() {
    let lib = random_library(12, 3, 64, 0.3, 5);
    let cfg = PoemConfig::default();
    let loo = loo_eval(&lib, &cfg).unwrap();
    let kf = kfold_eval(&lib, &SplitPlan::kfold(12, 1), &cfg).unwrap();
    assert_eq!(loo.predictions.len(), kf.predictions.len());
    for (a, b) in loo.predictions.iter().zip(&kf.predictions) {
        assert_eq!((a.row, &a.estimate), (b.row, &b.estimate));
    }
    assert_eq!(loo.pooled, kf.pooled);
}

#[test]
fn split_sizes_and_determinism() {
    let lib = random_library(100, 2, 64, 0.3, 2);
    let plan = SplitPlan::random_split(0.2, 7);
    let folds = assign_folds(&lib, &plan).unwrap();
    assert!((19..=21).contains(&folds[0].test.len()));
    let cfg = PoemConfig::default();
    let a = split_eval(&lib, &plan, &cfg).unwrap();
    let b = split_eval(&lib, &plan, &cfg).unwrap();
    assert_eq!(a.report_string(), b.report_string());
    let other = assign_folds(&lib, &SplitPlan::random_split(0.2, 8)).unwrap();
    assert_ne!(folds[0].test, other[0].test);
}

#[test]
fn repeated_splits_give_box_stats() {
    let lib = bit_block_library(20, 3, 256, 0.1, 1);
    let r = split_eval(
        &lib,
        &SplitPlan::random_split(0.2, 11).repeats(100),
        &PoemConfig::default(),
    )
    .unwrap();
    let s = r.fold_stats().unwrap();
    assert_eq!(s.n, 100);
    assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
    assert_eq!(r.predictions.len(), 100 * 8);
}

#[test]
fn stratification_needs_two_per_class() {
    let lib = random_library(10, 2, 64, 0.3, 1);
    // Keep one row of class "1" and every row of class "0".
    let ones: Vec<usize> = (0..10)
        .filter(|&i| lib.label(i).to_string() == "1")
        .collect();
    let rows: Vec<usize> = (0..10)
        .filter(|&i| lib.label(i).to_string() == "0" || i == ones[0])
        .collect();
    let lib = lib.subset(&rows).unwrap();
    let cfg = PoemConfig::default();
    assert!(matches!(
        split_eval(&lib, &SplitPlan::random_split(0.3, 1), &cfg),
        Err(Error::StratificationImpossible(_))
    ));
    assert!(matches!(
        kfold_eval(&lib, &SplitPlan::kfold(3, 1), &cfg),
        Err(Error::StratificationImpossible(_))
    ));
}

#[test]
fn two_families_split_on_the_family_boundary() {
    let lib = two_family_library(20, 2, 1024, 3);
    let plan = SplitPlan {
        cluster_scheme: scheme_id(0),
        ..SplitPlan::cluster(0.5, 0.2, 4)
    };
    let r = cluster_eval(&lib, &plan, &PoemConfig::default()).unwrap();
    let fold = &r.folds[0];
    assert_eq!(fold.n_test, 20);
    assert!(fold.min_cross_distance.unwrap() >= 0.5);
    let prefixes: std::collections::BTreeSet<&str> =
        r.predictions.iter().map(|p| &p.key[..2]).collect();
    assert_eq!(prefixes.len(), 1);
    assert!(r.report_string().contains("# min_cross_distance=1.000000"));
}

#[test]
fn zero_threshold_is_a_plain_split() {
    let lib = random_library(30, 2, 64, 0.3, 6);
    let plan = SplitPlan {
        cluster_scheme: scheme_id(0),
        ..SplitPlan::cluster(0.0, 0.2, 4)
    };
    let folds = assign_folds(&lib, &plan).unwrap();
    assert_eq!(folds[0].test.len(), 6);
}

#[test]
fn cluster_needs_its_scheme() {
    let lib = random_library(10, 2, 64, 0.3, 6);
    let r = cluster_eval(
        &lib,
        &SplitPlan::cluster(0.3, 0.2, 1),
        &PoemConfig::default(),
    );
    assert!(matches!(r, Err(Error::UnknownScheme(s)) if s == "morgan4"));
}

#[test]
fn single_scheme_matches_rank_oracle() {
    let lib = random_library(14, 3, 64, 0.3, 21);
    let r = single_scheme_eval(&lib, "fp1", &PoemConfig::default()).unwrap();
    let col = &lib.columns()[1];
    let m = lib.len();
    for p in &r.predictions {
        let i = p.row;
        let rows: Vec<usize> = (0..m).filter(|&j| j != i).collect();
        let d: Vec<f64> = rows
            .iter()
            .map(|&j| tanimoto_words(col.row(i), col.row(j)))
            .collect();
        // With one scheme: dominate every strictly farther row, submit to every strictly closer one.
        let mut hit = [0.0f64; 2];
        for (a, &j) in rows.iter().enumerate() {
            let farther = d.iter().filter(|&&x| x > d[a]).count() as f64;
            let closer = d.iter().filter(|&&x| x < d[a]).count() as f64;
            let ties = d.len() as f64 - farther - closer;
            let row_sum = farther + 0.5 * ties;
            let f = row_sum * (farther + 0.05) / (closer + 0.05);
            hit[usize::from(lib.label(j).to_string() == "1")] += f;
        }
        let total = hit[0] + hit[1];
        let probs = class_probs(&p.estimate);
        assert!((probs[1] - hit[1] / total).abs() < 1e-12);
    }
    assert!(matches!(
        single_scheme_eval(&lib, "nope", &PoemConfig::default()),
        Err(Error::UnknownScheme(_))
    ));
}

#[test]
fn consensus_is_not_worse_than_every_single_scheme() {
    let lib: ReferenceLibrary =
        poem_core::synthetic::separable_plus_noise_library(25, 4, 512, 0.05, 2);
    let cfg = PoemConfig::default();
    let consensus = loo_eval(&lib, &cfg).unwrap().score().unwrap();
    let singles: Vec<f64> = (0..4)
        .map(|k| {
            single_scheme_eval(&lib, &scheme_id(k), &cfg)
                .unwrap()
                .score()
                .unwrap()
        })
        .collect();
    assert!(consensus >= singles.iter().copied().fold(f64::INFINITY, f64::min));
}

#[test]
fn regression_reports_rmse() {
    let lib = random_regression_library(20, 3, 64, 0.3, 8);
    let cfg = PoemConfig::default();
    let r = evaluate(&lib, &SplitPlan::kfold(4, 2), &cfg).unwrap();
    assert_eq!(r.metric.name(), "rmse");
    assert!(r.folds.iter().all(|f| f.score.unwrap() >= 0.0));
    assert_eq!(r.plan.kind, PlanKind::KFold);
    let text = r.report_string();
    assert!(text.contains("# metric=rmse"));
    assert!(text.lines().any(|l| l == "key,true,predicted,probability"));
}
