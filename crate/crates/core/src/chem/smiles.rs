//! SMILES reader for the subset used by drug-like datasets.
//!
//! Supported: organic-subset atoms (`B C N O P S F Cl Br I` and aromatic
//! `b c n o p s`), bracket atoms with isotope, chirality (`@`, `@@`), hydrogen
//! count, charge and atom class, branches, ring closures `0`-`9` and `%nn`,
//! bond symbols `- = # : / \` and `.` disconnections. Aromaticity is taken
//! from the notation as written; no perception or kekulization is done.

use super::element::Element;
use super::graph::{Atom, Bond, BondDirection, BondOrder, Chirality, MolGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
struct BondSpec {
    order: BondOrder,
    direction: BondDirection,
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    /// Whether each atom came from the organic subset (implicit H applies).
    organic: Vec<bool>,
    bonds: Vec<Bond>,
    prev: Option<usize>,
    pending: Option<BondSpec>,
    branches: Vec<usize>,
    rings: Vec<Option<(usize, Option<BondSpec>)>>,
    multi_fragment: bool,
}

/// Parse a SMILES string into a [`MolGraph`].
pub fn parse_smiles(input: &str) -> Result<MolGraph> {
    let trimmed = input.trim();
    if trimmed.is_empty() {
        return Err(Error::unparsable(input, "empty input"));
    }
    let mut parser = Parser {
        src: trimmed,
        bytes: trimmed.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        organic: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        pending: None,
        branches: Vec::new(),
        rings: vec![None; 100],
        multi_fragment: false,
    };
    parser.run()?;
    parser.finish()
}

impl<'a> Parser<'a> {
    fn fail<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(Error::unparsable(
            self.src,
            format!("{} (at offset {})", reason.into(), self.pos),
        ))
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<()> {
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    let Some(prev) = self.prev else {
                        return self.fail("branch opened before any atom");
                    };
                    if self.pending.is_some() {
                        return self.fail("bond symbol before branch");
                    }
                    if self.bytes.get(self.pos + 1) == Some(&b')') {
                        return self.fail("empty branch");
                    }
                    self.branches.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    let Some(atom) = self.branches.pop() else {
                        return self.fail("unmatched ')'");
                    };
                    if self.pending.is_some() {
                        return self.fail("dangling bond at end of branch");
                    }
                    self.prev = Some(atom);
                    self.pos += 1;
                }
                b'.' => {
                    if self.pending.is_some() {
                        return self.fail("bond symbol before '.'");
                    }
                    if self.prev.is_none() {
                        return self.fail("'.' before any atom");
                    }
                    if !self.branches.is_empty() {
                        return self.fail("'.' inside a branch");
                    }
                    self.multi_fragment = true;
                    self.prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending.is_some() {
                        return self.fail("two consecutive bond symbols");
                    }
                    if self.prev.is_none() {
                        return self.fail("bond symbol before any atom");
                    }
                    let (order, direction) = match c {
                        b'-' => (BondOrder::Single, BondDirection::None),
                        b'=' => (BondOrder::Double, BondDirection::None),
                        b'#' => (BondOrder::Triple, BondDirection::None),
                        b':' => (BondOrder::Aromatic, BondDirection::None),
                        b'/' => (BondOrder::Single, BondDirection::Up),
                        _ => (BondOrder::Single, BondDirection::Down),
                    };
                    self.pending = Some(BondSpec { order, direction });
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => self.ring_closure()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom, false)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom, true)?;
                }
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<MolGraph> {
        if self.pending.is_some() {
            return self.fail("dangling bond at end of input");
        }
        if !self.branches.is_empty() {
            return self.fail("unclosed '('");
        }
        if let Some(digit) = self.rings.iter().position(Option::is_some) {
            return self.fail(format!("ring closure {digit} never closed"));
        }
        if self.atoms.is_empty() {
            return self.fail("no atoms");
        }
        if self.prev.is_none() {
            return self.fail("trailing '.'");
        }
        self.assign_hydrogens()?;
        Ok(MolGraph::from_parts(
            self.atoms,
            self.bonds,
            self.src.to_string(),
            self.multi_fragment,
        ))
    }

    fn add_atom(&mut self, atom: Atom, organic: bool) -> Result<()> {
        let idx = self.atoms.len();
        let aromatic = atom.aromatic;
        self.atoms.push(atom);
        self.organic.push(organic);
        if let Some(prev) = self.prev {
            let spec = self.pending.take();
            let order = match spec {
                Some(s) => s.order,
                None => implicit_order(self.atoms[prev].aromatic, aromatic),
            };
            self.bonds.push(Bond {
                endpoints: (prev, idx),
                order,
                direction: spec.map(|s| s.direction).unwrap_or_default(),
            });
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom> {
        let rest = &self.bytes[self.pos..];
        let (element, aromatic, len) = match rest {
            [b'C', b'l', ..] => (Element::CHLORINE, false, 2),
            [b'B', b'r', ..] => (Element::BROMINE, false, 2),
            [b'B', ..] => (Element::BORON, false, 1),
            [b'C', ..] => (Element::CARBON, false, 1),
            [b'N', ..] => (Element::NITROGEN, false, 1),
            [b'O', ..] => (Element::OXYGEN, false, 1),
            [b'P', ..] => (Element::PHOSPHORUS, false, 1),
            [b'S', ..] => (Element::SULFUR, false, 1),
            [b'F', ..] => (Element::FLUORINE, false, 1),
            [b'I', ..] => (Element::IODINE, false, 1),
            [b'b', ..] => (Element::BORON, true, 1),
            [b'c', ..] => (Element::CARBON, true, 1),
            [b'n', ..] => (Element::NITROGEN, true, 1),
            [b'o', ..] => (Element::OXYGEN, true, 1),
            [b'p', ..] => (Element::PHOSPHORUS, true, 1),
            [b's', ..] => (Element::SULFUR, true, 1),
            _ => {
                let ch = self.src[self.pos..].chars().next().unwrap_or('?');
                return self.fail(format!("unknown symbol '{ch}'"));
            }
        };
        self.pos += len;
        Ok(Atom {
            element,
            aromatic,
            formal_charge: 0,
            explicit_h_count: None,
            isotope: None,
            chirality: Chirality::None,
            hydrogens: 0,
        })
    }

    fn read_number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        self.src[start..self.pos].parse().ok()
    }

    fn bracket_atom(&mut self) -> Result<Atom> {
        let open = self.pos;
        self.pos += 1;
        let Some(close_rel) = self.src[self.pos..].find(']') else {
            return self.fail("unmatched '['");
        };
        let close = self.pos + close_rel;
        if self.src[open + 1..close].contains('[') {
            return self.fail("nested '['");
        }

        let isotope = match self.read_number() {
            Some(n) if n <= u16::MAX as u32 => Some(n as u16),
            Some(_) => return self.fail("isotope out of range"),
            None => None,
        };

        // Element symbol: aromatic two-letter forms first, then by capitalization.
        let rest = &self.src[self.pos..close];
        let (element, aromatic, len) = if rest.starts_with("se") {
            (Element::from_symbol("Se"), true, 2)
        } else if rest.starts_with("as") {
            (Element::from_symbol("As"), true, 2)
        } else if rest.starts_with("te") {
            (Element::from_symbol("Te"), true, 2)
        } else {
            let mut chars = rest.chars();
            match chars.next() {
                Some(first) if first.is_ascii_lowercase() => {
                    let upper = first.to_ascii_uppercase().to_string();
                    (Element::from_symbol(&upper), true, 1)
                }
                Some(first) if first.is_ascii_uppercase() => {
                    let two: String = rest.chars().take(2).collect();
                    let second_lower = chars.next().is_some_and(|c| c.is_ascii_lowercase());
                    if second_lower && Element::from_symbol(&two).is_some() {
                        (Element::from_symbol(&two), false, 2)
                    } else {
                        (Element::from_symbol(&first.to_string()), false, 1)
                    }
                }
                _ => (None, false, 0),
            }
        };
        let Some(element) = element else {
            return self.fail(format!(
                "unknown bracket atom '[{}]'",
                &self.src[open + 1..close]
            ));
        };
        if aromatic && !element.can_be_aromatic() {
            return self.fail(format!("element {element} cannot be aromatic"));
        }
        self.pos += len;

        let chirality = if self.src[self.pos..close].starts_with("@@") {
            self.pos += 2;
            Chirality::Clockwise
        } else if self.peek() == Some(b'@') {
            self.pos += 1;
            Chirality::CounterClockwise
        } else {
            Chirality::None
        };
        if self.peek() == Some(b'@')
            || self
                .peek()
                .is_some_and(|c| c.is_ascii_uppercase() && c != b'H')
        {
            return self.fail("unsupported chirality class");
        }

        let mut explicit_h = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            explicit_h = match self.read_number() {
                Some(n) if n <= 9 => n as u8,
                Some(_) => return self.fail("hydrogen count out of range"),
                None => 1,
            };
        }

        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.read_number() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
            if charge.abs() > 15 {
                return self.fail("charge out of range");
            }
        }

        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.read_number().is_none() {
                return self.fail("atom class without a number");
            }
        }

        if self.pos != close {
            return self.fail(format!(
                "unexpected text in bracket atom '[{}]'",
                &self.src[open + 1..close]
            ));
        }
        self.pos = close + 1;

        Ok(Atom {
            element,
            aromatic,
            formal_charge: charge as i8,
            explicit_h_count: Some(explicit_h),
            isotope,
            chirality,
            hydrogens: explicit_h,
        })
    }

    fn ring_closure(&mut self) -> Result<()> {
        let Some(atom) = self.prev else {
            return self.fail("ring closure before any atom");
        };
        let digit = if self.peek() == Some(b'%') {
            let d = self.bytes.get(self.pos + 1..self.pos + 3);
            match d {
                Some([a @ b'0'..=b'9', b @ b'0'..=b'9']) => {
                    self.pos += 3;
                    ((a - b'0') * 10 + (b - b'0')) as usize
                }
                _ => return self.fail("'%' must be followed by two digits"),
            }
        } else {
            let d = (self.bytes[self.pos] - b'0') as usize;
            self.pos += 1;
            d
        };
        let spec = self.pending.take();
        match self.rings[digit].take() {
            None => self.rings[digit] = Some((atom, spec)),
            Some((other, open_spec)) => {
                if other == atom {
                    return self.fail(format!("ring closure {digit} bonds an atom to itself"));
                }
                if self.atoms_bonded(other, atom) {
                    return self.fail(format!("ring closure {digit} duplicates an existing bond"));
                }
                let spec = match (open_spec, spec) {
                    (Some(a), Some(b)) if a.order != b.order => {
                        return self
                            .fail(format!("ring closure {digit} has conflicting bond orders"));
                    }
                    (Some(a), _) => Some(a),
                    (None, b) => b,
                };
                let order = match spec {
                    Some(s) => s.order,
                    None => implicit_order(self.atoms[other].aromatic, self.atoms[atom].aromatic),
                };
                self.bonds.push(Bond {
                    endpoints: (other, atom),
                    order,
                    direction: spec.map(|s| s.direction).unwrap_or_default(),
                });
            }
        }
        Ok(())
    }

    fn atoms_bonded(&self, a: usize, b: usize) -> bool {
        self.bonds
            .iter()
            .any(|bond| bond.endpoints == (a, b) || bond.endpoints == (b, a))
    }

    /// Implicit hydrogens for organic-subset atoms from the default valence table.
    fn assign_hydrogens(&mut self) -> Result<()> {
        let mut bond_sum = vec![0u32; self.atoms.len()];
        for bond in &self.bonds {
            let v = u32::from(bond.order.valence());
            bond_sum[bond.endpoints.0] += v;
            bond_sum[bond.endpoints.1] += v;
        }
        for (idx, atom) in self.atoms.iter_mut().enumerate() {
            if !self.organic[idx] {
                continue;
            }
            let valences = atom.element.default_valences();
            let max = u32::from(*valences.last().unwrap_or(&0));
            let raw = bond_sum[idx];
            if raw > max {
                return Err(Error::unparsable(
                    self.src,
                    format!(
                        "atom {idx} ({}) exceeds its maximum valence {max}",
                        atom.element
                    ),
                ));
            }
            // Aromatic atoms donate one electron to the ring system.
            let used = if atom.aromatic { raw + 1 } else { raw };
            atom.hydrogens = valences
                .iter()
                .map(|&v| u32::from(v))
                .find(|&v| v >= used)
                .map(|v| (v - used) as u8)
                .unwrap_or(0);
        }
        Ok(())
    }
}

fn implicit_order(a_aromatic: bool, b_aromatic: bool) -> BondOrder {
    if a_aromatic && b_aromatic {
        BondOrder::Aromatic
    } else {
        BondOrder::Single
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elements(g: &MolGraph) -> Vec<&'static str> {
        g.atoms().iter().map(|a| a.element.symbol()).collect()
    }

    #[test]
    fn ethanol() {
        let g = parse_smiles("CCO").unwrap();
        assert_eq!(elements(&g), ["C", "C", "O"]);
        assert_eq!(g.bond_count(), 2);
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Single));
        let h: Vec<u8> = g.atoms().iter().map(|a| a.hydrogens).collect();
        assert_eq!(h, [3, 2, 1]);
        assert_eq!(g.ring_count(), 0);
    }

    #[test]
    fn benzene() {
        let g = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(g.atom_count(), 6);
        assert!(g.atoms().iter().all(|a| a.aromatic && a.hydrogens == 1));
        assert_eq!(g.bond_count(), 6);
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        assert_eq!(g.ring_count(), 1);
        assert!(g.ring_atoms().iter().all(|&r| r));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "",
            "   ",
            "C1CC",
            "C(C",
            "CC)",
            "[CH4",
            "Xx",
            "C=",
            "(C)",
            "C()C",
            "C==C",
            "C1C1",
            "C12CC12",
            "C(C)(C)(C)(C)C",
            "C%1C",
            "[Zz]",
            "C.",
            ".C",
            "C=1CC#1",
        ] {
            assert!(
                matches!(parse_smiles(bad), Err(Error::UnparsableMolecule { .. })),
                "accepted {bad:?}"
            );
        }
    }

    #[test]
    fn bracket_atoms() {
        let g = parse_smiles("[13CH3][NH3+].[O-]C(=O)c1cc[nH]c1").unwrap();
        let a = &g.atoms()[0];
        assert_eq!(a.isotope, Some(13));
        assert_eq!(a.hydrogens, 3);
        assert_eq!(g.atoms()[1].formal_charge, 1);
        assert_eq!(g.atoms()[2].formal_charge, -1);
        assert!(g.is_multi_fragment());
        assert_eq!(g.component_count(), 2);
        let nh = g
            .atoms()
            .iter()
            .find(|a| a.aromatic && a.element == Element::NITROGEN)
            .unwrap();
        assert_eq!(nh.hydrogens, 1);
        let g = parse_smiles("[Fe+++]").unwrap();
        assert_eq!(g.atoms()[0].formal_charge, 3);
        let g = parse_smiles("[Cu-2]").unwrap();
        assert_eq!(g.atoms()[0].formal_charge, -2);
    }

    #[test]
    fn chirality_and_direction_are_stored() {
        let g = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        assert_eq!(g.atoms()[1].chirality, Chirality::Clockwise);
        let g = parse_smiles("N[C@H](C)C(=O)O").unwrap();
        assert_eq!(g.atoms()[1].chirality, Chirality::CounterClockwise);
        let g = parse_smiles("F/C=C\\F").unwrap();
        assert_eq!(g.bonds()[0].direction, BondDirection::Up);
        assert_eq!(g.bonds()[2].direction, BondDirection::Down);
        assert_eq!(g.bonds()[1].order, BondOrder::Double);
    }

    #[test]
    fn ring_closures() {
        let g = parse_smiles("C%12CCCC%12").unwrap();
        assert_eq!(g.ring_count(), 1);
        let g = parse_smiles("C1CC=1").unwrap();
        assert_eq!(g.bonds()[2].order, BondOrder::Double);
        // naphthalene: two rings, bridgehead carbons have no hydrogens
        let g = parse_smiles("c1ccc2ccccc2c1").unwrap();
        assert_eq!(g.ring_count(), 2);
        assert_eq!(g.atoms().iter().filter(|a| a.hydrogens == 0).count(), 2);
        // digit reuse after closing
        let g = parse_smiles("C1CC1C1CC1").unwrap();
        assert_eq!(g.ring_count(), 2);
    }

    #[test]
    fn valence_rules() {
        let hs = |s: &str| -> Vec<u8> {
            parse_smiles(s)
                .unwrap()
                .atoms()
                .iter()
                .map(|a| a.hydrogens)
                .collect()
        };
        assert_eq!(hs("C"), [4]);
        assert_eq!(hs("N"), [3]);
        assert_eq!(hs("O=S(=O)O"), [0, 1, 0, 1]);
        assert_eq!(hs("CS(=O)(=O)C"), [3, 0, 0, 0, 3]);
        assert_eq!(hs("CC#N"), [3, 0, 0]);
        assert_eq!(hs("ClCBr"), [0, 2, 0]);
        assert_eq!(hs("c1ccncc1"), [1, 1, 1, 0, 1, 1]);
        assert_eq!(hs("c1ccoc1"), [1, 1, 1, 0, 1]);
        assert_eq!(hs("[H][H]"), [0, 0]);
    }

    #[test]
    fn deterministic() {
        let a = parse_smiles("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        let b = parse_smiles("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        assert_eq!(a, b);
    }
}
