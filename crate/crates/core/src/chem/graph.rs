use std::collections::VecDeque;

use super::element::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Chirality {
    #[default]
    None,
    /// `@@`
    Clockwise,
    /// `@`
    CounterClockwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to an atom's valence; aromatic bonds count as one.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn code(self) -> u64 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

/// `/` and `\` markers, kept verbatim and not interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BondDirection {
    #[default]
    None,
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i8,
    /// Hydrogen count written inside brackets; `None` for organic-subset atoms.
    pub explicit_h_count: Option<u8>,
    pub isotope: Option<u16>,
    pub chirality: Chirality,
    /// Total attached hydrogens (explicit or derived from default valence).
    pub hydrogens: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub endpoints: (usize, usize),
    pub order: BondOrder,
    pub direction: BondDirection,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.endpoints.0 == atom {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

/// A parsed molecule: atoms, bonds and adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// `adjacency[a]` lists `(neighbor, bond index)` in input order.
    adjacency: Vec<Vec<(usize, usize)>>,
    source: String,
    multi_fragment: bool,
}

impl MolGraph {
    pub(crate) fn from_parts(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        source: String,
        multi_fragment: bool,
    ) -> MolGraph {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (idx, bond) in bonds.iter().enumerate() {
            let (a, b) = bond.endpoints;
            adjacency[a].push((b, idx));
            adjacency[b].push((a, idx));
        }
        MolGraph {
            atoms,
            bonds,
            adjacency,
            source,
            multi_fragment,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// True when the input contained a `.` disconnection.
    pub fn is_multi_fragment(&self) -> bool {
        self.multi_fragment
    }

    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, idx)| &self.bonds[idx])
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(a) = stack.pop() {
                for &(b, _) in &self.adjacency[a] {
                    if !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        count
    }

    /// Number of independent rings (cyclomatic number).
    pub fn ring_count(&self) -> usize {
        self.bonds.len() + self.component_count() - self.atoms.len()
    }

    /// Per-bond flag: true when the bond lies on a cycle (is not a bridge).
    pub fn ring_bonds(&self) -> Vec<bool> {
        let n = self.atoms.len();
        let mut in_ring = vec![true; self.bonds.len()];
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut timer = 0;
        // Iterative Tarjan bridge finding: (atom, parent bond, next neighbor slot).
        let mut stack: Vec<(usize, usize, usize)> = Vec::new();
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            stack.push((root, usize::MAX, 0));
            while let Some(frame) = stack.last_mut() {
                let (a, parent_bond, slot) = *frame;
                if slot < self.adjacency[a].len() {
                    frame.2 += 1;
                    let (b, bond) = self.adjacency[a][slot];
                    if bond == parent_bond {
                        continue;
                    }
                    if disc[b] == usize::MAX {
                        disc[b] = timer;
                        low[b] = timer;
                        timer += 1;
                        stack.push((b, bond, 0));
                    } else {
                        low[a] = low[a].min(disc[b]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[a]);
                        if low[a] > disc[p] {
                            in_ring[parent_bond] = false;
                        }
                    }
                }
            }
        }
        in_ring
    }

    /// Per-atom flag: true when the atom has at least one ring bond.
    pub fn ring_atoms(&self) -> Vec<bool> {
        let ring_bonds = self.ring_bonds();
        let mut flags = vec![false; self.atoms.len()];
        for (bond, &ring) in self.bonds.iter().zip(&ring_bonds) {
            if ring {
                flags[bond.endpoints.0] = true;
                flags[bond.endpoints.1] = true;
            }
        }
        flags
    }

    /// Topological distances from `start` (bond counts); `None` when unreachable.
    pub fn distances_from(&self, start: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.atoms.len()];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            let d = dist[a].unwrap_or(0);
            for &(b, _) in &self.adjacency[a] {
                if dist[b].is_none() {
                    dist[b] = Some(d + 1);
                    queue.push_back(b);
                }
            }
        }
        dist
    }

    /// Number of heavy (non-hydrogen) neighbours.
    pub fn heavy_degree(&self, atom: usize) -> usize {
        self.adjacency[atom]
            .iter()
            .filter(|&&(b, _)| self.atoms[b].element != Element::HYDROGEN)
            .count()
    }

    /// Hydrogens attached to `atom`, counting both implicit H and `[H]` neighbours.
    pub fn total_hydrogens(&self, atom: usize) -> usize {
        let explicit_neighbors = self.adjacency[atom]
            .iter()
            .filter(|&&(b, _)| self.atoms[b].element == Element::HYDROGEN)
            .count();
        self.atoms[atom].hydrogens as usize + explicit_neighbors
    }
}
