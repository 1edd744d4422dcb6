//! Molecular graph and the SMILES parser that builds it.

use std::collections::HashMap;

use super::aromatic;
use super::element::Element;
use super::rings;
use super::token::{Token, TokenKind};
use super::ChemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the valence sum; aromatic bonds count as one here and
    /// the delocalised extra electron is tracked on the atom.
    pub fn sigma_valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    pub aromatic: bool,
    /// Total attached hydrogens (explicit in brackets or implicit).
    pub hydrogens: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// A parsed molecule. Hydrogens are attached as counts, not as atoms.
#[derive(Debug, Clone)]
pub struct MolecularGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    /// Smallest set of smallest rings, each as an ordered atom cycle.
    pub rings: Vec<Vec<usize>>,
    /// Per ring, whether it was perceived aromatic.
    pub aromatic_rings: Vec<bool>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl MolecularGraph {
    pub(crate) fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> MolecularGraph {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, b) in bonds.iter().enumerate() {
            adjacency[b.a].push((b.b, i));
            adjacency[b.b].push((b.a, i));
        }
        MolecularGraph {
            atoms,
            bonds,
            rings: Vec::new(),
            aromatic_rings: Vec::new(),
            adjacency,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// (neighbor atom, bond index) pairs.
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
            .map(|&(_, bi)| &self.bonds[bi])
    }

    /// Bond orders plus hydrogens, aromatic bonds counted as one.
    pub fn sigma_valence(&self, atom: usize) -> u8 {
        self.adjacency[atom]
            .iter()
            .map(|&(_, bi)| self.bonds[bi].order.sigma_valence())
            .sum::<u8>()
    }

    pub fn ring_bond_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.bonds.len()];
        for ring in &self.rings {
            for k in 0..ring.len() {
                let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
                if let Some(&(_, bi)) = self.adjacency[a].iter().find(|&&(n, _)| n == b) {
                    flags[bi] = true;
                }
            }
        }
        flags
    }

    pub fn ring_atom_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.atoms.len()];
        for ring in &self.rings {
            for &a in ring {
                flags[a] = true;
            }
        }
        flags
    }

    /// Connected components as sorted atom index lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut k = 0;
            while k < comp.len() {
                let a = comp[k];
                for &(n, _) in &self.adjacency[a] {
                    if !seen[n] {
                        seen[n] = true;
                        comp.push(n);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Induced subgraph on the given atoms, with rings re-perceived.
    pub fn subgraph(&self, atoms: &[usize]) -> MolecularGraph {
        let map: HashMap<usize, usize> = atoms.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let new_atoms = atoms.iter().map(|&a| self.atoms[a].clone()).collect();
        let new_bonds = self
            .bonds
            .iter()
            .filter_map(|b| match (map.get(&b.a), map.get(&b.b)) {
                (Some(&a), Some(&bb)) => Some(Bond {
                    a,
                    b: bb,
                    order: b.order,
                }),
                _ => None,
            })
            .collect();
        let mut g = MolecularGraph::new(new_atoms, new_bonds);
        g.rings = rings::smallest_set_of_smallest_rings(&g);
        g.aromatic_rings = g
            .rings
            .iter()
            .map(|r| r.iter().all(|&a| g.atoms[a].aromatic) && ring_bonds_aromatic(&g, r))
            .collect();
        g
    }

    /// Return a copy with atoms renumbered so that old atom `i` becomes
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> MolecularGraph {
        let mut atoms = vec![self.atoms[0].clone(); self.atoms.len()];
        for (i, a) in self.atoms.iter().enumerate() {
            atoms[perm[i]] = a.clone();
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
            })
            .collect();
        let mut g = MolecularGraph::new(atoms, bonds);
        g.rings = rings::smallest_set_of_smallest_rings(&g);
        g.aromatic_rings = g
            .rings
            .iter()
            .map(|r| r.iter().all(|&a| g.atoms[a].aromatic) && ring_bonds_aromatic(&g, r))
            .collect();
        g
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }
}

fn ring_bonds_aromatic(g: &MolecularGraph, ring: &[usize]) -> bool {
    (0..ring.len()).all(|k| {
        g.bond_between(ring[k], ring[(k + 1) % ring.len()])
            .map(|b| b.order == BondOrder::Aromatic)
            .unwrap_or(false)
    })
}

struct BracketAtom {
    element: Element,
    aromatic: bool,
    hydrogens: u8,
    charge: i8,
}

fn parse_bracket(text: &str) -> Result<BracketAtom, ChemError> {
    let invalid = || ChemError::InvalidBracketAtom(text.to_string());
    let inner = &text[1..text.len() - 1];
    let chars: Vec<char> = inner.chars().collect();
    let mut i = 0;
    // isotope: accepted and ignored
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    if i >= chars.len() || !chars[i].is_ascii_alphabetic() {
        return Err(invalid());
    }
    let (element, aromatic) = if chars[i].is_ascii_lowercase() {
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        if two == "se" || two == "as" {
            i += 2;
            (Element::from_symbol(&capitalize(&two)).ok_or_else(invalid)?, true)
        } else {
            let one = chars[i].to_ascii_uppercase().to_string();
            i += 1;
            let e = Element::from_symbol(&one).ok_or_else(invalid)?;
            if !e.can_be_aromatic() {
                return Err(invalid());
            }
            (e, true)
        }
    } else {
        let two: Option<String> = chars
            .get(i + 1)
            .filter(|c| c.is_ascii_lowercase())
            .map(|c| format!("{}{}", chars[i], c));
        match two.as_deref().and_then(Element::from_symbol) {
            Some(e) => {
                i += 2;
                (e, false)
            }
            None => {
                let e = Element::from_symbol(&chars[i].to_string()).ok_or_else(invalid)?;
                i += 1;
                (e, false)
            }
        }
    };
    // chirality: accepted and discarded
    while i < chars.len() && chars[i] == '@' {
        i += 1;
    }
    let mut hydrogens = 0u8;
    if i < chars.len() && chars[i] == 'H' {
        i += 1;
        hydrogens = 1;
        if i < chars.len() && chars[i].is_ascii_digit() {
            hydrogens = chars[i] as u8 - b'0';
            i += 1;
        }
    }
    let mut charge = 0i8;
    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
        let sign = if chars[i] == '+' { 1 } else { -1 };
        i += 1;
        let mut magnitude = 1i8;
        if i < chars.len() && chars[i].is_ascii_digit() {
            magnitude = (chars[i] as u8 - b'0') as i8;
            i += 1;
        } else {
            while i < chars.len() && chars[i] == chars[i - 1] {
                magnitude += 1;
                i += 1;
            }
        }
        charge = sign * magnitude;
    }
    if i < chars.len() && chars[i] == ':' {
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i != chars.len() || !(-2..=2).contains(&charge) {
        return Err(invalid());
    }
    Ok(BracketAtom {
        element,
        aromatic,
        hydrogens,
        charge,
    })
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

fn organic_element(text: &str) -> (Element, bool) {
    let aromatic = text.chars().next().is_some_and(|c| c.is_ascii_lowercase());
    let symbol = if aromatic { capitalize(text) } else { text.to_string() };
    (
        Element::from_symbol(&symbol).expect("tokenizer only emits organic-subset atoms"),
        aromatic,
    )
}

/// Implicit hydrogen count for an organic-subset atom written without
/// brackets. Aromatic atoms reserve one valence for the ring pi bond unless
/// that would leave a negative count.
pub fn implicit_hydrogens(element: Element, aromatic: bool, sigma: u8) -> Option<u8> {
    let v = element.default_valence(0, sigma)?;
    if aromatic && v > sigma {
        return Some(v - sigma - 1);
    }
    Some(v - sigma)
}

/// Build a molecular graph from tokens: resolve branches and ring closures,
/// assign implicit hydrogens, perceive rings and aromaticity, and check
/// valences.
pub fn parse(tokens: &[Token]) -> Result<MolecularGraph, ChemError> {
    let mut atoms: Vec<Atom> = Vec::new();
    let mut bracketed: Vec<bool> = Vec::new();
    let mut bonds: Vec<Bond> = Vec::new();
    let mut explicit_bond: Vec<bool> = Vec::new();
    let mut branch_stack: Vec<Option<usize>> = Vec::new();
    let mut open_rings: HashMap<u8, (usize, Option<BondOrder>)> = HashMap::new();
    let mut prev: Option<usize> = None;
    let mut pending_bond: Option<BondOrder> = None;
    let mut pending_explicit = false;
    // a branch may only open or close right after an atom, ring bond or branch
    let mut after_atom = false;

    let add_bond = |bonds: &mut Vec<Bond>,
                        explicit_bond: &mut Vec<bool>,
                        atoms: &[Atom],
                        a: usize,
                        b: usize,
                        order: Option<BondOrder>|
     -> Result<(), ChemError> {
        if a == b || bonds.iter().any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a)) {
            return Err(ChemError::DuplicateBond(a, b));
        }
        let explicit = order.is_some();
        let order = order.unwrap_or(if atoms[a].aromatic && atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        });
        bonds.push(Bond { a, b, order });
        explicit_bond.push(explicit);
        Ok(())
    };

    for tok in tokens {
        let follows_atom = after_atom;
        after_atom = matches!(
            tok.kind,
            TokenKind::Atom | TokenKind::BracketAtom | TokenKind::RingClosure(_) | TokenKind::BranchClose
        );
        match tok.kind {
            TokenKind::ClassStart => {}
            TokenKind::Atom | TokenKind::BracketAtom => {
                let atom = if tok.kind == TokenKind::Atom {
                    let (element, aromatic) = organic_element(&tok.text);
                    bracketed.push(false);
                    Atom {
                        element,
                        charge: 0,
                        aromatic,
                        hydrogens: 0,
                    }
                } else {
                    let b = parse_bracket(&tok.text)?;
                    bracketed.push(true);
                    Atom {
                        element: b.element,
                        charge: b.charge,
                        aromatic: b.aromatic,
                        hydrogens: b.hydrogens,
                    }
                };
                atoms.push(atom);
                let idx = atoms.len() - 1;
                if let Some(p) = prev {
                    let order = if pending_explicit { pending_bond } else { None };
                    add_bond(&mut bonds, &mut explicit_bond, &atoms, p, idx, order)?;
                } else if pending_explicit {
                    return Err(ChemError::DanglingBond);
                }
                pending_bond = None;
                pending_explicit = false;
                prev = Some(idx);
            }
            TokenKind::Bond => {
                if prev.is_none() || pending_explicit {
                    return Err(ChemError::DanglingBond);
                }
                pending_bond = match tok.text.as_str() {
                    "=" => Some(BondOrder::Double),
                    "#" => Some(BondOrder::Triple),
                    ":" => Some(BondOrder::Aromatic),
                    // stereo bonds are plain single bonds here
                    _ => Some(BondOrder::Single),
                };
                pending_explicit = true;
            }
            TokenKind::BranchOpen => {
                if prev.is_none() || pending_explicit || !follows_atom {
                    return Err(ChemError::UnbalancedBranch);
                }
                branch_stack.push(prev);
            }
            TokenKind::BranchClose => {
                if pending_explicit {
                    return Err(ChemError::DanglingBond);
                }
                if !follows_atom {
                    return Err(ChemError::UnbalancedBranch);
                }
                prev = branch_stack.pop().ok_or(ChemError::UnbalancedBranch)?;
            }
            TokenKind::Dot => {
                if pending_explicit || prev.is_none() || !branch_stack.is_empty() {
                    return Err(ChemError::DanglingBond);
                }
                prev = None;
            }
            TokenKind::RingClosure(label) => {
                let current = prev.ok_or(ChemError::DanglingBond)?;
                let bond_here = if pending_explicit { pending_bond } else { None };
                pending_bond = None;
                pending_explicit = false;
                match open_rings.remove(&label) {
                    Some((opener, bond_open)) => {
                        let order = match (bond_open, bond_here) {
                            (Some(x), Some(y)) if x != y => {
                                return Err(ChemError::ConflictingRingBond(label))
                            }
                            (Some(x), _) | (None, Some(x)) => Some(x),
                            (None, None) => None,
                        };
                        add_bond(&mut bonds, &mut explicit_bond, &atoms, opener, current, order)?;
                    }
                    None => {
                        open_rings.insert(label, (current, bond_here));
                    }
                }
            }
        }
    }
    if pending_explicit || tokens.last().is_some_and(|t| t.kind == TokenKind::Dot) {
        return Err(ChemError::DanglingBond);
    }
    if !branch_stack.is_empty() {
        return Err(ChemError::UnbalancedBranch);
    }
    if let Some(&label) = open_rings.keys().min() {
        return Err(ChemError::UnclosedRing(label));
    }
    if atoms.is_empty() {
        return Err(ChemError::EmptyInput);
    }

    let mut graph = MolecularGraph::new(atoms, bonds);

    for i in 0..graph.atoms.len() {
        let sigma = graph.sigma_valence(i);
        let atom = &graph.atoms[i];
        if bracketed[i] {
            if let Some(valences) = atom.element.allowed_valences(atom.charge) {
                let used = sigma + atom.hydrogens;
                let max = valences.iter().copied().max();
                if max.is_none_or(|m| used > m) {
                    return Err(ChemError::ValenceViolation(i));
                }
            }
        } else {
            let h = implicit_hydrogens(atom.element, atom.aromatic, sigma)
                .ok_or(ChemError::ValenceViolation(i))?;
            graph.atoms[i].hydrogens = h;
        }
    }

    graph.rings = rings::smallest_set_of_smallest_rings(&graph);
    aromatic::perceive(&mut graph)?;
    Ok(graph)
}

/// Tokenize and parse in one step.
pub fn parse_smiles(smiles: &str) -> Result<MolecularGraph, ChemError> {
    parse(&super::tokenize(smiles)?)
}
