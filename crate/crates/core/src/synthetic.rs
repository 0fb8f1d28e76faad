//! Seeded synthetic libraries for tests, benchmarks and demonstrations.
//!
//! Every generator uses external schemes named `fp0`, `fp1`, ... so no
//! chemistry is involved; fingerprints are drawn directly as bit patterns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fingerprint::{Fingerprint, FingerprintScheme, SchemeSet};
use crate::model::{Label, LibraryMeta, LibraryRow, ReferenceLibrary, TaskKind};

pub fn scheme_id(k: usize) -> String {
    format!("fp{k}")
}

pub fn external_schemes(n: usize, bits: usize) -> SchemeSet {
    SchemeSet::new(
        (0..n)
            .map(|k| FingerprintScheme::external(&scheme_id(k), bits))
            .collect(),
    )
    .expect("synthetic scheme ids are unique")
}

/// Each bit in `range` set independently with probability `density`.
pub fn random_bits(
    rng: &mut impl Rng,
    fp: &mut Fingerprint,
    range: std::ops::Range<usize>,
    density: f64,
) {
    for bit in range {
        if rng.random_bool(density) {
            fp.set(bit);
        }
    }
}

fn class_label(c: usize) -> Label {
    Label::Class(c.to_string())
}

fn build(
    name: &str,
    schemes: SchemeSet,
    kind: TaskKind,
    rows: Vec<LibraryRow>,
) -> ReferenceLibrary {
    let meta = LibraryMeta {
        name: name.to_string(),
        ..LibraryMeta::default()
    };
    ReferenceLibrary::from_rows(meta, schemes, kind, rows).expect("synthetic library is valid")
}

/// Two classes, `n_per_class` each. In every scheme class `c` only sets
/// bits inside its own half of the vector, so classes never share a bit.
pub fn bit_block_library(
    n_per_class: usize,
    n_schemes: usize,
    bits: usize,
    density: f64,
    seed: u64,
) -> ReferenceLibrary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schemes = external_schemes(n_schemes, bits);
    let half = bits / 2;
    let mut rows = Vec::with_capacity(2 * n_per_class);
    for i in 0..2 * n_per_class {
        let c = i % 2;
        let fingerprints = (0..n_schemes)
            .map(|k| {
                let mut fp = Fingerprint::zeros(scheme_id(k), bits);
                // Guarantee a non-empty vector so within-class distances stay below 1.
                fp.set(c * half);
                random_bits(&mut rng, &mut fp, c * half..(c + 1) * half, density);
                fp
            })
            .collect();
        rows.push(LibraryRow {
            key: format!("m{i:04}"),
            graph_key: None,
            label: class_label(c),
            fingerprints,
        });
    }
    build("bit_block", schemes, TaskKind::Classification, rows)
}

/// Two far-apart families, each holding both classes. Members of a family
/// share a fixed core of `core_bits` bits inside the family's half of the
/// vector, plus a few private bits, so intra-family distances are small and
/// inter-family distances are exactly 1.
pub fn two_family_library(
    n_per_family: usize,
    n_schemes: usize,
    bits: usize,
    seed: u64,
) -> ReferenceLibrary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schemes = external_schemes(n_schemes, bits);
    let half = bits / 2;
    let core_bits = half / 16;
    let private_density = 8.0 / half as f64;
    let mut rows = Vec::with_capacity(2 * n_per_family);
    for f in 0..2 {
        for i in 0..n_per_family {
            let c = i % 2;
            let fingerprints = (0..n_schemes)
                .map(|k| {
                    let mut fp = Fingerprint::zeros(scheme_id(k), bits);
                    for b in 0..core_bits {
                        fp.set(f * half + b);
                    }
                    let quarter = half / 2;
                    let start = f * half + c * quarter;
                    random_bits(
                        &mut rng,
                        &mut fp,
                        start..start + quarter,
                        private_density * 2.0,
                    );
                    fp
                })
                .collect();
            rows.push(LibraryRow {
                key: format!("f{f}_m{i:04}"),
                graph_key: None,
                label: class_label(c),
                fingerprints,
            });
        }
    }
    build("two_family", schemes, TaskKind::Classification, rows)
}

/// Scheme `fp0` is a separable bit-block scheme; every other scheme is
/// random noise with the same density, independent of the class.
pub fn separable_plus_noise_library(
    n_per_class: usize,
    n_schemes: usize,
    bits: usize,
    density: f64,
    seed: u64,
) -> ReferenceLibrary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schemes = external_schemes(n_schemes, bits);
    let half = bits / 2;
    let mut rows = Vec::with_capacity(2 * n_per_class);
    for i in 0..2 * n_per_class {
        let c = i % 2;
        let fingerprints = (0..n_schemes)
            .map(|k| {
                let mut fp = Fingerprint::zeros(scheme_id(k), bits);
                if k == 0 {
                    fp.set(c * half);
                    random_bits(&mut rng, &mut fp, c * half..(c + 1) * half, 2.0 * density);
                } else {
                    random_bits(&mut rng, &mut fp, 0..bits, density);
                }
                fp
            })
            .collect();
        rows.push(LibraryRow {
            key: format!("m{i:04}"),
            graph_key: None,
            label: class_label(c),
            fingerprints,
        });
    }
    build(
        "separable_plus_noise",
        schemes,
        TaskKind::Classification,
        rows,
    )
}

/// Unstructured two-class library; rows 0 and 1 are of different classes.
pub fn random_library(
    m: usize,
    n_schemes: usize,
    bits: usize,
    density: f64,
    seed: u64,
) -> ReferenceLibrary {
    assert!(m >= 2, "need at least two molecules");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schemes = external_schemes(n_schemes, bits);
    let rows = (0..m)
        .map(|i| {
            let c = if i < 2 { i } else { rng.random_range(0..2) };
            let fingerprints = (0..n_schemes)
                .map(|k| {
                    let mut fp = Fingerprint::zeros(scheme_id(k), bits);
                    random_bits(&mut rng, &mut fp, 0..bits, density);
                    fp
                })
                .collect();
            LibraryRow {
                key: format!("m{i:05}"),
                graph_key: None,
                label: class_label(c),
                fingerprints,
            }
        })
        .collect();
    build("random", schemes, TaskKind::Classification, rows)
}

/// Unstructured library with continuous labels in [0, 10).
pub fn random_regression_library(
    m: usize,
    n_schemes: usize,
    bits: usize,
    density: f64,
    seed: u64,
) -> ReferenceLibrary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schemes = external_schemes(n_schemes, bits);
    let rows = (0..m)
        .map(|i| {
            let fingerprints = (0..n_schemes)
                .map(|k| {
                    let mut fp = Fingerprint::zeros(scheme_id(k), bits);
                    random_bits(&mut rng, &mut fp, 0..bits, density);
                    fp
                })
                .collect();
            LibraryRow {
                key: format!("m{i:05}"),
                graph_key: None,
                label: Label::Value(rng.random_range(0.0..10.0)),
                fingerprints,
            }
        })
        .collect();
    build("random_regression", schemes, TaskKind::Regression, rows)
}

/// Copy of `library` with class labels shuffled among rows.
pub fn permute_labels(library: &ReferenceLibrary, seed: u64) -> ReferenceLibrary {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Label> = (0..library.len()).map(|i| library.label(i)).collect();
    labels.shuffle(&mut rng);
    let rows = labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| LibraryRow {
            key: library.key(i).to_string(),
            graph_key: library.records()[i].graph_key,
            label,
            fingerprints: library.row_fingerprints(i),
        })
        .collect();
    ReferenceLibrary::from_rows_with_space(
        library.meta().clone(),
        library.schemes().clone(),
        library.label_space().to_vec(),
        rows,
    )
    .expect("permuting labels keeps the library valid")
}
