use super::Fingerprint;
use crate::chem::{Chirality, Element, MolGraph};
use crate::hash::StableHasher;

/// Circular (ECFP-style) fingerprint.
///
/// Layer 0 identifiers hash the atom invariants; each further layer hashes
/// the previous identifier with the sorted (bond order, neighbour identifier)
/// list. Every identifier from layers `0..=radius` is folded into the vector,
/// so a larger radius only ever adds bits.
pub fn morgan_fingerprint(
    mol: &MolGraph,
    radius: u32,
    use_chirality: bool,
    length: usize,
) -> Fingerprint {
    let ring = mol.ring_atoms();
    let initial = (0..mol.atom_count())
        .map(|a| {
            let atom = &mol.atoms()[a];
            let mut h = StableHasher::new();
            h.write_u64(u64::from(atom.element.atomic_number()))
                .write_u64(mol.heavy_degree(a) as u64)
                .write_u64(mol.total_hydrogens(a) as u64)
                .write_i64(i64::from(atom.formal_charge))
                .write_u64(u64::from(atom.isotope.unwrap_or(0)))
                .write_u64(u64::from(ring[a]))
                .write_u64(u64::from(atom.aromatic));
            if use_chirality {
                h.write_u64(chirality_code(atom.chirality));
            }
            h.finish()
        })
        .collect();
    circular(mol, initial, radius, format!("morgan{radius}"), length)
}

/// Circular fingerprint over generalized atom classes (donor, acceptor,
/// aromatic, halogen, basic, acidic) instead of exact atom identity.
pub fn feature_morgan_fingerprint(
    mol: &MolGraph,
    radius: u32,
    use_chirality: bool,
    length: usize,
) -> Fingerprint {
    let initial = (0..mol.atom_count())
        .map(|a| {
            let mut h = StableHasher::new();
            h.write_u64(u64::from(feature_bits(mol, a)));
            if use_chirality {
                h.write_u64(chirality_code(mol.atoms()[a].chirality));
            }
            h.finish()
        })
        .collect();
    circular(mol, initial, radius, format!("morgan{radius}_feat"), length)
}

fn chirality_code(c: Chirality) -> u64 {
    match c {
        Chirality::None => 0,
        Chirality::Clockwise => 1,
        Chirality::CounterClockwise => 2,
    }
}

fn circular(
    mol: &MolGraph,
    mut ids: Vec<u64>,
    radius: u32,
    scheme: String,
    length: usize,
) -> Fingerprint {
    let mut fp = Fingerprint::zeros(scheme, length);
    for &id in &ids {
        fp.set_hashed(id);
    }
    for layer in 1..=radius {
        let next: Vec<u64> = (0..mol.atom_count())
            .map(|a| {
                let mut env: Vec<(u64, u64)> = mol
                    .neighbors(a)
                    .iter()
                    .map(|&(b, bond)| (mol.bonds()[bond].order.code(), ids[b]))
                    .collect();
                env.sort_unstable();
                let mut h = StableHasher::new();
                h.write_u64(u64::from(layer)).write_u64(ids[a]);
                for (order, id) in env {
                    h.write_u64(order).write_u64(id);
                }
                h.finish()
            })
            .collect();
        for &id in &next {
            fp.set_hashed(id);
        }
        ids = next;
    }
    fp
}

const DONOR: u8 = 1;
const ACCEPTOR: u8 = 1 << 1;
const AROMATIC: u8 = 1 << 2;
const HALOGEN: u8 = 1 << 3;
const BASIC: u8 = 1 << 4;
const ACIDIC: u8 = 1 << 5;

/// Coarse pharmacophore class bits for one atom.
pub(crate) fn feature_bits(mol: &MolGraph, a: usize) -> u8 {
    let atom = &mol.atoms()[a];
    let el = atom.element;
    let h = mol.total_hydrogens(a);
    let mut bits = 0;

    if (el == Element::NITROGEN || el == Element::OXYGEN) && h > 0 {
        bits |= DONOR;
    }
    let acceptor = match el {
        e if e == Element::OXYGEN => atom.formal_charge <= 0,
        e if e == Element::NITROGEN => {
            atom.formal_charge == 0 && h == 0 && mol.degree(a) < 3 && !atom.aromatic
                || atom.aromatic && h == 0 && atom.formal_charge == 0 && mol.degree(a) == 2
        }
        _ => false,
    };
    if acceptor {
        bits |= ACCEPTOR;
    }
    if atom.aromatic {
        bits |= AROMATIC;
    }
    if el.is_halogen() {
        bits |= HALOGEN;
    }
    if atom.formal_charge > 0 || is_amine(mol, a) {
        bits |= BASIC;
    }
    if atom.formal_charge < 0 || is_acid_oxygen(mol, a) {
        bits |= ACIDIC;
    }
    bits
}

/// Aliphatic nitrogen with only single bonds and no carbonyl/aromatic neighbour.
fn is_amine(mol: &MolGraph, a: usize) -> bool {
    let atom = &mol.atoms()[a];
    if atom.element != Element::NITROGEN || atom.aromatic || atom.formal_charge != 0 {
        return false;
    }
    mol.neighbors(a).iter().all(|&(b, bond)| {
        let single = mol.bonds()[bond].order == crate::chem::BondOrder::Single;
        single && !mol.atoms()[b].aromatic && !has_double_bond_to_heteroatom(mol, b)
    })
}

/// Hydroxyl oxygen on a C/S/P carrying a double-bonded oxygen (acid OH).
fn is_acid_oxygen(mol: &MolGraph, a: usize) -> bool {
    let atom = &mol.atoms()[a];
    if atom.element != Element::OXYGEN || mol.total_hydrogens(a) == 0 || mol.degree(a) != 1 {
        return false;
    }
    let (center, _) = mol.neighbors(a)[0];
    let el = mol.atoms()[center].element;
    (el == Element::CARBON || el == Element::SULFUR || el == Element::PHOSPHORUS)
        && has_double_bond_to_heteroatom(mol, center)
}

fn has_double_bond_to_heteroatom(mol: &MolGraph, a: usize) -> bool {
    mol.neighbors(a).iter().any(|&(b, bond)| {
        let el = mol.atoms()[b].element;
        mol.bonds()[bond].order == crate::chem::BondOrder::Double
            && (el == Element::OXYGEN || el == Element::SULFUR)
    })
}
