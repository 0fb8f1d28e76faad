#![allow(clippy::needless_range_loop)]

use poem_core::model::{
    dominance, dominance_summary, fitness, fitness_from_summary, predict_class,
    predict_from_profile, DominanceConfig, Estimate,
};
use poem_core::synthetic::random_library;
use poem_core::{embed, DistanceProfile, FitnessVector, PoemConfig};
use proptest::prelude::*;

/// Triple-loop reference: comparison scores, then relaxed dominance counts.
fn naive(rows: &[Vec<f64>], relax: f64) -> (Vec<Vec<f64>>, Vec<u32>, Vec<u32>) {
    let m = rows.len();
    let n = rows[0].len();
    let mut mat = vec![vec![0.0; m]; m];
    let mut dom = vec![0u32; m];
    let mut sub = vec![0u32; m];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                mat[i][j] = 0.5;
                continue;
            }
            let (mut better, mut tied, mut worse) = (0usize, 0usize, 0usize);
            let mut total = 0.0;
            for k in 0..n {
                if rows[i][k] < rows[j][k] {
                    better += 1;
                    total += 1.0;
                } else if rows[i][k] == rows[j][k] {
                    tied += 1;
                    total += 0.5;
                } else {
                    worse += 1;
                }
            }
            mat[i][j] = total / n as f64;
            let dom_check = (better + tied) as f64 / n as f64 >= relax;
            let sub_check = (worse + tied) as f64 / n as f64 >= relax;
            if dom_check && !sub_check {
                dom[i] += 1;
            }
            if sub_check && !dom_check {
                sub[i] += 1;
            }
        }
    }
    (mat, dom, sub)
}

/// Distances in [0,1]: either continuous or from a coarse grid (many ties).
fn arb_profile(max_m: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_m, 1..=max_n, any::<bool>()).prop_flat_map(|(m, n, coarse)| {
        let cell = if coarse {
            (0u32..=4).prop_map(|v| f64::from(v) / 4.0).boxed()
        } else {
            (0.0f64..=1.0).boxed()
        };
        proptest::collection::vec(proptest::collection::vec(cell, n), m)
    })
}

fn arb_relax() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.9), Just(1.0), Just(0.75), 0.51f64..=1.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernel_matches_naive_oracle(rows in arb_profile(12, 6), relax in arb_relax()) {
        let profile = DistanceProfile::from_rows(&rows).unwrap();
        let got = dominance(&profile, relax).unwrap();
        let (mat, dom, sub) = naive(&rows, relax);
        for (i, row) in mat.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                prop_assert!((got.get(i, j) - v).abs() <= 1e-15);
            }
        }
        prop_assert_eq!(&got.dom, &dom);
        prop_assert_eq!(&got.sub, &sub);
    }

    #[test]
    fn matrix_is_antisymmetric(rows in arb_profile(12, 6)) {
        let d = dominance(&DistanceProfile::from_rows(&rows).unwrap(), 0.9).unwrap();
        for i in 0..rows.len() {
            prop_assert_eq!(d.get(i, i), 0.5);
            for j in 0..rows.len() {
                if i != j {
                    prop_assert!((d.get(i, j) + d.get(j, i) - 1.0).abs() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn summary_equals_full_result(rows in arb_profile(12, 6), relax in arb_relax()) {
        let profile = DistanceProfile::from_rows(&rows).unwrap();
        let full = dominance(&profile, relax).unwrap();
        let summary = dominance_summary(&profile, &DominanceConfig::with_relax(relax)).unwrap();
        prop_assert_eq!(full.summary(), summary);
    }

    #[test]
    fn monotone_transforms_leave_everything_identical(
        rows in arb_profile(12, 5),
        shapes in proptest::collection::vec(0usize..4, 5),
        relax in arb_relax(),
    ) {
        let profile = DistanceProfile::from_rows(&rows).unwrap();
        let mut moved = profile.clone();
        for k in 0..profile.schemes() {
            match shapes[k] {
                0 => moved.map_scheme(k, |d| d * d * d + 0.25),
                1 => moved.map_scheme(k, |d| (3.0 * d).exp()),
                2 => moved.map_scheme(k, |d| d.sqrt() - 7.0),
                _ => moved.map_scheme(k, |d| 1e6 * d),
            }
        }
        let a = dominance(&profile, relax).unwrap();
        let b = dominance(&moved, relax).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(fitness(&a), fitness(&b));
    }

    #[test]
    fn relax_monotonicity_without_ties(rows in arb_profile(12, 6).prop_filter("tie-free", |rows| {
        let n = rows[0].len();
        (0..n).all(|k| {
            let mut col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            col.sort_by(f64::total_cmp);
            col.windows(2).all(|w| w[0] != w[1])
        })
    })) {
        let profile = DistanceProfile::from_rows(&rows).unwrap();
        let total = |relax: f64| {
            let d = dominance(&profile, relax).unwrap();
            d.dom.iter().chain(&d.sub).map(|&c| u64::from(c)).sum::<u64>()
        };
        let mut prev = total(1.0);
        for relax in [0.95, 0.9, 0.8, 0.7, 0.6] {
            let now = total(relax);
            prop_assert!(now >= prev);
            prev = now;
        }
    }

    #[test]
    fn fitness_scale_invariance(seed in any::<u64>(), scale in 1e-6f64..1e6) {
        let lib = random_library(15, 4, 64, 0.3, seed);
        let rows: Vec<usize> = (1..15).collect();
        let target = lib.row_fingerprints(0);
        let profile = embed(&target, &lib).unwrap().select(&rows);
        let summary = dominance_summary(&profile, &DominanceConfig::default()).unwrap();
        let f = fitness_from_summary(&summary);
        let scaled = FitnessVector(f.values().iter().map(|v| v * scale).collect());
        let a = predict_class(&f, &lib, &rows).unwrap();
        let b = predict_class(&scaled, &lib, &rows).unwrap();
        let (pa, pb) = (a.probabilities().unwrap(), b.probabilities().unwrap());
        for (x, y) in pa.iter().zip(pb) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert_eq!(a.predicted_label(), b.predicted_label());
    }

    #[test]
    fn probabilities_are_normalised(seed in any::<u64>(), m in 2usize..30, n in 1usize..6) {
        let lib = random_library(m, n, 64, 0.25, seed);
        let rows: Vec<usize> = (0..m).collect();
        let target = random_library(2, n, 64, 0.25, seed ^ 1).row_fingerprints(0);
        let profile = embed(&target, &lib).unwrap();
        let p = predict_from_profile(&profile, &lib, &rows, &PoemConfig::default()).unwrap();
        let sum: f64 = p.probabilities().unwrap().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn scheme_permutation_invariance(seed in any::<u64>(), m in 2usize..25, n in 2usize..6, rot in 1usize..5) {
        let lib = random_library(m, n, 64, 0.3, seed);
        let ids: Vec<String> = lib.schemes().iter().map(|s| s.id.clone()).collect();
        let mut order: Vec<&str> = ids.iter().map(String::as_str).collect();
        order.rotate_left(rot % n);
        let permuted = lib.restrict_schemes(&order).unwrap();
        let probe = random_library(2, n, 64, 0.3, !seed);
        let target = probe.row_fingerprints(0);
        let target_perm = probe.restrict_schemes(&order).unwrap().row_fingerprints(0);
        let cfg = PoemConfig::default();
        let a = poem_core::model::predict_fingerprints(&target, &lib, &cfg).unwrap();
        let b = poem_core::model::predict_fingerprints(&target_perm, &permuted, &cfg).unwrap();
        prop_assert_eq!(a.estimate, b.estimate);
        prop_assert_eq!(a.total_fitness, b.total_fitness);
    }

    #[test]
    fn reference_permutation_equivariance(seed in any::<u64>(), m in 2usize..25, shift in 1usize..24) {
        let lib = random_library(m, 4, 64, 0.3, seed);
        let perm: Vec<usize> = (0..m).map(|i| (i + shift) % m).collect();
        let shuffled = lib.subset(&perm).unwrap();
        let target = random_library(2, 4, 64, 0.3, seed.wrapping_add(7)).row_fingerprints(0);
        let fa = fitness(&dominance(&embed(&target, &lib).unwrap(), 0.9).unwrap());
        let fb = fitness(&dominance(&embed(&target, &shuffled).unwrap(), 0.9).unwrap());
        for (pos, &orig) in perm.iter().enumerate() {
            prop_assert_eq!(fb.values()[pos], fa.values()[orig]);
        }
        let cfg = PoemConfig::default();
        let pa = poem_core::model::predict_fingerprints(&target, &lib, &cfg).unwrap();
        let pb = poem_core::model::predict_fingerprints(&target, &shuffled, &cfg).unwrap();
        match (&pa.estimate, &pb.estimate) {
            (Estimate::Classes { probs: a, .. }, Estimate::Classes { probs: b, .. }) => {
                for (x, y) in a.iter().zip(b) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }
            _ => prop_assert!(false, "classification expected"),
        }
    }

    #[test]
    fn strict_dominance_is_never_inverted(rows in arb_profile(10, 5), pick in any::<(usize, usize)>()) {
        let m = rows.len();
        let (i, j) = (pick.0 % m, pick.1 % m);
        prop_assume!(i != j);
        let mut rows = rows;
        // Make i strictly closer than j in every scheme.
        for k in 0..rows[0].len() {
            let (lo, hi) = (rows[i][k].min(rows[j][k]), rows[i][k].max(rows[j][k]));
            rows[i][k] = lo * 0.5;
            rows[j][k] = if hi > lo * 0.5 { hi } else { lo * 0.5 + 0.1 };
        }
        let f = fitness(&dominance(&DistanceProfile::from_rows(&rows).unwrap(), 1.0).unwrap());
        prop_assert!(f.values()[i] >= f.values()[j]);
    }
}

#[test]
fn relax_monotonicity_can_fail_with_ties() {
    // Row 0 is better on one scheme and tied on nine. At relax 1.0 it
    // dominates row 1; at 0.9 both checks pass and the pair counts for neither.
    let mut a = vec![0.5; 10];
    a[0] = 0.1;
    let b = vec![0.5; 10];
    let p = DistanceProfile::from_rows(&[a, b]).unwrap();
    let strict = dominance(&p, 1.0).unwrap();
    let relaxed = dominance(&p, 0.9).unwrap();
    assert_eq!((strict.dom[0], strict.sub[1]), (1, 1));
    assert_eq!((relaxed.dom[0], relaxed.sub[1]), (0, 0));
}

#[test]
fn step3_comparison_vector() {
    // A vs B over ten schemes: better where c = 1, tied where 0.5, worse where 0.
    let c = [1.0, 0.0, 1.0, 0.5, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0];
    let a: Vec<f64> = c
        .iter()
        .map(|&v| {
            if v == 1.0 {
                0.2
            } else if v == 0.5 {
                0.5
            } else {
                0.8
            }
        })
        .collect();
    let b = vec![0.5; 10];
    let d = dominance(&DistanceProfile::from_rows(&[a, b]).unwrap(), 0.9).unwrap();
    assert_eq!(d.get(0, 1), 0.65);
    assert!((d.get(1, 0) - 0.35).abs() < 1e-15);
    assert_eq!((d.dom[0], d.sub[0], d.dom[1], d.sub[1]), (0, 0, 0, 0));
}
