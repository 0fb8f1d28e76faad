use super::graph::MolGraph;
use crate::hash::StableHasher;

/// Graph-level identity key used to detect replicate molecules.
///
/// Atom labels start from (element, charge, aromaticity, isotope, hydrogen
/// count) and are refined with the sorted multiset of (bond order, neighbour
/// label) until the number of distinct labels stops growing. The key hashes
/// the sorted final labels together with the sorted labelled bond list, so
/// any atom ordering of the same graph produces the same key. Chirality tags
/// and bond direction markers are ignored.
pub fn graph_invariant_key(mol: &MolGraph) -> u64 {
    let n = mol.atom_count();
    let mut labels: Vec<u64> = mol
        .atoms()
        .iter()
        .enumerate()
        .map(|(idx, atom)| {
            let mut h = StableHasher::new();
            h.write_u64(u64::from(atom.element.atomic_number()))
                .write_i64(i64::from(atom.formal_charge))
                .write_u64(u64::from(atom.aromatic))
                .write_u64(u64::from(atom.isotope.unwrap_or(0)))
                .write_u64(mol.total_hydrogens(idx) as u64);
            h.finish()
        })
        .collect();

    let mut classes = distinct(&labels);
    // Partition refinement stabilises after at most n rounds.
    for _ in 0..n {
        let next: Vec<u64> = (0..n)
            .map(|a| {
                let mut env: Vec<(u64, u64)> = mol
                    .neighbors(a)
                    .iter()
                    .map(|&(b, bond)| (mol.bonds()[bond].order.code(), labels[b]))
                    .collect();
                env.sort_unstable();
                let mut h = StableHasher::new();
                h.write_u64(labels[a]);
                for (order, label) in env {
                    h.write_u64(order).write_u64(label);
                }
                h.finish()
            })
            .collect();
        let next_classes = distinct(&next);
        labels = next;
        if next_classes <= classes {
            break;
        }
        classes = next_classes;
    }

    let mut atom_labels = labels.clone();
    atom_labels.sort_unstable();
    let mut bond_labels: Vec<(u64, u64, u64)> = mol
        .bonds()
        .iter()
        .map(|b| {
            let (x, y) = (labels[b.endpoints.0], labels[b.endpoints.1]);
            (x.min(y), x.max(y), b.order.code())
        })
        .collect();
    bond_labels.sort_unstable();

    let mut h = StableHasher::new();
    h.write_u64(n as u64).write_u64(mol.bond_count() as u64);
    for l in atom_labels {
        h.write_u64(l);
    }
    for (x, y, o) in bond_labels {
        h.write_u64(x).write_u64(y).write_u64(o);
    }
    h.finish()
}

fn distinct(labels: &[u64]) -> usize {
    let mut sorted = labels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn key(s: &str) -> u64 {
        graph_invariant_key(&parse_smiles(s).unwrap())
    }

    #[test]
    fn reversed_smiles_match() {
        assert_eq!(key("CCO"), key("OCC"));
        assert_eq!(key("CC(=O)O"), key("OC(C)=O"));
        assert_eq!(key("c1ccccc1O"), key("Oc1ccccc1"));
    }

    #[test]
    fn different_molecules_differ() {
        assert_ne!(key("CCO"), key("CCN"));
        assert_ne!(key("CCO"), key("COC"));
        assert_ne!(key("C=CC"), key("CCC"));
        assert_ne!(key("c1ccccc1"), key("C1CCCCC1"));
        assert_ne!(key("[NH4+]"), key("N"));
        // same atom multiset, different topology
        assert_ne!(key("CC(C)CC"), key("CCCCC"));
    }

    #[test]
    fn stable_across_parses() {
        assert_eq!(key("c1ccccc1"), key("c1ccccc1"));
    }

    #[test]
    fn chirality_ignored() {
        assert_eq!(key("N[C@@H](C)C(=O)O"), key("N[C@H](C)C(=O)O"));
        assert_eq!(key("N[C@@H](C)C(=O)O"), key("NC(C)C(=O)O"));
    }
}
