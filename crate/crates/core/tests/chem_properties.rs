use poem_core::fingerprint::{morgan_fingerprint, FingerprintScheme, SchemeSet};
use poem_core::{graph_invariant_key, parse_smiles, tanimoto_distance};
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random connected single-bonded graph: a tree plus a few extra edges.
#[derive(Debug, Clone)]
struct RandomMol {
    elements: Vec<&'static str>,
    edges: Vec<(usize, usize)>,
}

fn random_mol(seed: u64, n: usize, extra: usize) -> RandomMol {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut edges = Vec::new();
    for v in 1..n {
        // Attach to an earlier atom with spare valence (carbon allows four).
        let candidates: Vec<usize> = (0..v).filter(|&u| degree[u] < 4).collect();
        let u = *candidates
            .choose(&mut rng)
            .expect("a tree always has a leaf");
        edges.push((u, v));
        degree[u] += 1;
        degree[v] += 1;
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b
            && degree[a] < 4
            && degree[b] < 4
            && !edges
                .iter()
                .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
        {
            edges.push((a, b));
            degree[a] += 1;
            degree[b] += 1;
        }
    }
    let elements = degree
        .iter()
        .map(|&d| {
            let pool: &[&str] = match d {
                0..=1 => &["C", "N", "O", "S", "Cl"],
                2 => &["C", "N", "O", "S"],
                3 => &["C", "N"],
                _ => &["C"],
            };
            *pool.choose(&mut rng).unwrap()
        })
        .map(|e| if e == "Cl" && n == 1 { "C" } else { e })
        .collect();
    RandomMol { elements, edges }
}

/// Write `mol` as SMILES, starting the walk at `root` and visiting
/// neighbours in an order drawn from `seed`. Returns the string and the
/// number of ring-closure bonds it contains.
fn write_smiles(mol: &RandomMol, root: usize, seed: u64) -> (String, usize) {
    let n = mol.elements.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &mol.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.shuffle(&mut rng);
    }
    // First pass: DFS tree and back edges.
    let mut seen = vec![false; n];
    let mut children = vec![Vec::new(); n];
    let mut ring_at = vec![Vec::new(); n];
    let mut used = std::collections::HashSet::new();
    let mut next_ring = 1;
    fn dfs(
        v: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        children: &mut [Vec<usize>],
        ring_at: &mut [Vec<usize>],
        used: &mut std::collections::HashSet<(usize, usize)>,
        next_ring: &mut usize,
    ) {
        seen[v] = true;
        for &w in &adj[v] {
            let key = (v.min(w), v.max(w));
            if used.contains(&key) {
                continue;
            }
            used.insert(key);
            if seen[w] {
                ring_at[w].push(*next_ring);
                ring_at[v].push(*next_ring);
                *next_ring += 1;
            } else {
                children[v].push(w);
                dfs(w, adj, seen, children, ring_at, used, next_ring);
            }
        }
    }
    dfs(
        root,
        &adj,
        &mut seen,
        &mut children,
        &mut ring_at,
        &mut used,
        &mut next_ring,
    );

    fn ring_token(r: usize) -> String {
        if r < 10 {
            r.to_string()
        } else {
            format!("%{r:02}")
        }
    }
    fn emit(
        v: usize,
        mol: &RandomMol,
        children: &[Vec<usize>],
        ring_at: &[Vec<usize>],
        out: &mut String,
    ) {
        out.push_str(mol.elements[v]);
        for &r in &ring_at[v] {
            out.push_str(&ring_token(r));
        }
        let kids = &children[v];
        for (i, &c) in kids.iter().enumerate() {
            if i + 1 < kids.len() {
                out.push('(');
                emit(c, mol, children, ring_at, out);
                out.push(')');
            } else {
                emit(c, mol, children, ring_at, out);
            }
        }
    }
    let mut out = String::new();
    emit(root, mol, &children, &ring_at, &mut out);
    (out, next_ring - 1)
}

fn arb_mol() -> impl Strategy<Value = RandomMol> {
    (any::<u64>(), 1usize..25, 0usize..4).prop_map(|(seed, n, extra)| random_mol(seed, n, extra))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn round_trip_counting(mol in arb_mol(), seed in any::<u64>()) {
        let (smiles, closures) = write_smiles(&mol, 0, seed);
        let g = parse_smiles(&smiles).unwrap();
        prop_assert_eq!(g.atom_count(), mol.elements.len());
        prop_assert_eq!(g.bond_count(), mol.elements.len() - 1 + closures);
        prop_assert_eq!(g.bond_count(), mol.edges.len());
    }

    #[test]
    fn key_is_independent_of_atom_order(mol in arb_mol(), s1 in any::<u64>(), s2 in any::<u64>(), root in any::<usize>()) {
        let n = mol.elements.len();
        let (a, _) = write_smiles(&mol, 0, s1);
        let (b, _) = write_smiles(&mol, root % n, s2);
        let ga = parse_smiles(&a).unwrap();
        let gb = parse_smiles(&b).unwrap();
        prop_assert_eq!(graph_invariant_key(&ga), graph_invariant_key(&gb), "{} vs {}", a, b);
        // Native fingerprints depend only on the graph as well.
        for scheme in SchemeSet::native_default().iter() {
            prop_assert_eq!(scheme.compute(&ga).unwrap(), scheme.compute(&gb).unwrap());
        }
    }

    #[test]
    fn parsing_is_deterministic(mol in arb_mol()) {
        let (s, _) = write_smiles(&mol, 0, 1);
        let a = parse_smiles(&s).unwrap();
        let b = parse_smiles(&s).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        prop_assert_eq!(graph_invariant_key(&a), graph_invariant_key(&b));
    }

    #[test]
    fn accepted_inputs_fingerprint_cleanly(s in "[CNOScno()=#1-3\\[\\]H+@.%0-9lBr]{1,24}") {
        if let Ok(g) = parse_smiles(&s) {
            for scheme in SchemeSet::native_default().iter() {
                let fp = scheme.compute(&g).unwrap();
                prop_assert_eq!(tanimoto_distance(&fp, &fp).unwrap(), 0.0);
            }
        }
    }
}

#[test]
fn chirality_sensitivity() {
    let r = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
    let s = parse_smiles("N[C@H](C)C(=O)O").unwrap();
    assert_ne!(
        morgan_fingerprint(&r, 2, true, 2048),
        morgan_fingerprint(&s, 2, true, 2048)
    );
    assert_eq!(
        morgan_fingerprint(&r, 2, false, 2048),
        morgan_fingerprint(&s, 2, false, 2048)
    );
    let scheme = FingerprintScheme::morgan("m", 2, true, false, 2048);
    assert!(
        tanimoto_distance(&scheme.compute(&r).unwrap(), &scheme.compute(&s).unwrap()).unwrap()
            > 0.0
    );
}

#[test]
fn single_atom_is_at_distance_zero_from_itself() {
    let g = parse_smiles("[Na+]").unwrap();
    for scheme in SchemeSet::native_default().iter() {
        let fp = scheme.compute(&g).unwrap();
        assert_eq!(tanimoto_distance(&fp, &fp).unwrap(), 0.0);
    }
}
