use super::Fingerprint;
use crate::chem::MolGraph;
use crate::hash::StableHasher;

/// Atom-pair fingerprint: every unordered pair of connected atoms hashed as
/// (type of lower atom, type of higher atom, topological distance).
///
/// Atom type is (atomic number, heavy degree capped at 7, pi-electron count
/// capped at 3). Pairs in different fragments are skipped.
pub fn atom_pair_fingerprint(mol: &MolGraph, length: usize) -> Fingerprint {
    let mut fp = Fingerprint::zeros("atom_pair", length);
    let types: Vec<u64> = (0..mol.atom_count()).map(|a| atom_type(mol, a)).collect();
    for a in 0..mol.atom_count() {
        let dist = mol.distances_from(a);
        for b in a + 1..mol.atom_count() {
            let Some(d) = dist[b] else { continue };
            let (lo, hi) = (types[a].min(types[b]), types[a].max(types[b]));
            let mut h = StableHasher::new();
            h.write_u64(lo).write_u64(hi).write_u64(u64::from(d));
            fp.set_hashed(h.finish());
        }
    }
    fp
}

fn atom_type(mol: &MolGraph, a: usize) -> u64 {
    let atom = &mol.atoms()[a];
    let pi: u64 = mol
        .neighbors(a)
        .iter()
        .map(|&(_, bond)| u64::from(mol.bonds()[bond].order.valence()) - 1)
        .sum::<u64>()
        + u64::from(atom.aromatic);
    let degree = mol.heavy_degree(a).min(7) as u64;
    (u64::from(atom.element.atomic_number()) << 8) | (degree << 4) | pi.min(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn ap(s: &str) -> Fingerprint {
        atom_pair_fingerprint(&parse_smiles(s).unwrap(), 2048)
    }

    #[test]
    fn pair_counts() {
        assert_eq!(ap("C").count_ones(), 0);
        assert_eq!(ap("[Na+]").count_ones(), 0);
        assert_eq!(ap("CC").count_ones(), 1);
        let n = ap("CCO").count_ones();
        assert!((1..=3).contains(&n));
        // disconnected fragments contribute no cross pairs
        assert_eq!(ap("C.C").count_ones(), 0);
    }

    #[test]
    fn order_independent() {
        assert_eq!(ap("CCO"), ap("OCC"));
        assert_eq!(ap("c1ccccc1Cl"), ap("Clc1ccccc1"));
    }
}
