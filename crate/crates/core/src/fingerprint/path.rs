use super::Fingerprint;
use crate::chem::MolGraph;
use crate::hash::StableHasher;

/// Linear-path fingerprint: every simple bond path of 1..=`max_path_len`
/// bonds is encoded as its atom/bond token sequence, normalised to the
/// smaller of the two reading directions, hashed and folded.
pub fn path_fingerprint(mol: &MolGraph, max_path_len: u32, length: usize) -> Fingerprint {
    let mut fp = Fingerprint::zeros(format!("path{max_path_len}"), length);
    if max_path_len == 0 {
        return fp;
    }
    let atom_tokens: Vec<u64> = mol
        .atoms()
        .iter()
        .map(|a| (u64::from(a.element.atomic_number()) << 1) | u64::from(a.aromatic))
        .collect();
    let mut visited = vec![false; mol.atom_count()];
    let mut tokens = Vec::new();
    for start in 0..mol.atom_count() {
        tokens.clear();
        tokens.push(atom_tokens[start]);
        visited[start] = true;
        extend(
            mol,
            start,
            max_path_len as usize,
            &atom_tokens,
            &mut visited,
            &mut tokens,
            &mut fp,
        );
        visited[start] = false;
    }
    fp
}

fn extend(
    mol: &MolGraph,
    at: usize,
    remaining: usize,
    atom_tokens: &[u64],
    visited: &mut [bool],
    tokens: &mut Vec<u64>,
    fp: &mut Fingerprint,
) {
    if remaining == 0 {
        return;
    }
    for &(next, bond) in mol.neighbors(at) {
        if visited[next] {
            continue;
        }
        tokens.push(mol.bonds()[bond].order.code() | 0x100);
        tokens.push(atom_tokens[next]);
        fp.set_hashed(path_hash(tokens));
        visited[next] = true;
        extend(mol, next, remaining - 1, atom_tokens, visited, tokens, fp);
        visited[next] = false;
        tokens.truncate(tokens.len() - 2);
    }
}

fn path_hash(tokens: &[u64]) -> u64 {
    let forward_smaller = tokens.iter().le(tokens.iter().rev());
    let mut h = StableHasher::new();
    if forward_smaller {
        for &t in tokens {
            h.write_u64(t);
        }
    } else {
        for &t in tokens.iter().rev() {
            h.write_u64(t);
        }
    }
    h.finish()
}
