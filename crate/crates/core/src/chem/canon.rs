//! Canonical SMILES output.
//!
//! Atoms are ranked by an initial invariant (element, charge, degree,
//! hydrogen count, aromaticity) and refined Morgan-style by the sorted ranks
//! of their neighbours until the partition is stable. Remaining ties are
//! broken by individualising one tied atom and refining again; when ties are
//! not resolved by symmetry the candidates are explored (within a budget)
//! and the lexicographically smallest output wins.

use std::collections::BTreeSet;

use super::graph::{implicit_hydrogens, BondOrder, MolecularGraph};

const BRANCH_BUDGET: usize = 64;

fn initial_ranks(graph: &MolecularGraph) -> Vec<usize> {
    let keys: Vec<(u8, i8, usize, u8, bool)> = (0..graph.atom_count())
        .map(|i| {
            let a = &graph.atoms[i];
            (a.element.atomic_number(), a.charge, graph.degree(i), a.hydrogens, a.aromatic)
        })
        .collect();
    dense_ranks(&keys)
}

fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let sorted: Vec<K> = keys.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present"))
        .collect()
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().collect::<BTreeSet<_>>().len()
}

/// Iterate neighbour refinement until the number of classes is stable.
pub fn refine(graph: &MolecularGraph, mut ranks: Vec<usize>) -> Vec<usize> {
    let mut classes = class_count(&ranks);
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..graph.atom_count())
            .map(|i| {
                let mut nbs: Vec<(usize, u8)> = graph
                    .neighbors(i)
                    .iter()
                    .map(|&(n, bi)| (ranks[n], graph.bonds[bi].order.code()))
                    .collect();
                nbs.sort_unstable();
                (ranks[i], nbs)
            })
            .collect();
        let next = dense_ranks(&keys);
        let next_classes = class_count(&next);
        if next_classes == classes {
            return next;
        }
        ranks = next;
        classes = next_classes;
    }
}

/// Symmetry classes after refinement, without tie-breaking.
pub fn symmetry_classes(graph: &MolecularGraph) -> Vec<usize> {
    refine(graph, initial_ranks(graph))
}

fn individualize(ranks: &[usize], atom: usize) -> Vec<usize> {
    let keys: Vec<(usize, bool)> = ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, i != atom))
        .collect();
    dense_ranks(&keys)
}

fn search(graph: &MolecularGraph, ranks: Vec<usize>, leaves: &mut usize, best: &mut Option<String>) {
    let n = ranks.len();
    if class_count(&ranks) == n {
        *leaves += 1;
        let text = write_smiles(graph, &ranks);
        if best.as_ref().is_none_or(|b| text < *b) {
            *best = Some(text);
        }
        return;
    }
    // lowest rank value shared by more than one atom
    let mut counts = vec![0usize; n];
    for &r in &ranks {
        counts[r] += 1;
    }
    let tied_rank = (0..n).find(|&r| counts[r] > 1).expect("a tie exists");
    let tied: Vec<usize> = (0..n).filter(|&i| ranks[i] == tied_rank).collect();
    for (k, &atom) in tied.iter().enumerate() {
        if k > 0 && *leaves >= BRANCH_BUDGET {
            break;
        }
        let next = refine(graph, individualize(&ranks, atom));
        search(graph, next, leaves, best);
    }
}

/// Canonical SMILES text of a graph; invariant under atom renumbering.
pub fn canonicalize(graph: &MolecularGraph) -> String {
    if graph.atom_count() == 0 {
        return String::new();
    }
    let mut best = None;
    let mut leaves = 0;
    search(graph, symmetry_classes(graph), &mut leaves, &mut best);
    best.expect("search visits at least one leaf")
}

fn atom_text(graph: &MolecularGraph, i: usize) -> String {
    let a = &graph.atoms[i];
    let symbol = a.element.symbol();
    let written = if a.aromatic {
        symbol.to_ascii_lowercase()
    } else {
        symbol.to_string()
    };
    if a.element.is_organic_subset()
        && a.charge == 0
        && implicit_hydrogens(a.element, a.aromatic, graph.sigma_valence(i)) == Some(a.hydrogens)
    {
        return written;
    }
    let mut s = format!("[{written}");
    match a.hydrogens {
        0 => {}
        1 => s.push('H'),
        h => s.push_str(&format!("H{h}")),
    }
    match a.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        q if q > 0 => s.push_str(&format!("+{q}")),
        q => s.push_str(&format!("-{}", -q)),
    }
    s.push(']');
    s
}

fn bond_text(graph: &MolecularGraph, bond: usize) -> &'static str {
    let b = &graph.bonds[bond];
    match b.order {
        BondOrder::Single if graph.atoms[b.a].aromatic && graph.atoms[b.b].aromatic => "-",
        BondOrder::Single | BondOrder::Aromatic => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
    }
}

fn label_text(label: u8) -> String {
    if label < 10 {
        label.to_string()
    } else {
        format!("%{label}")
    }
}

struct Writer<'a> {
    graph: &'a MolecularGraph,
    ranks: &'a [usize],
    visited: Vec<bool>,
    tree_bond: Vec<bool>,
    closure_bond: Vec<bool>,
    /// ring closures opened at each atom: (bond, partner)
    openings: Vec<Vec<(usize, usize)>>,
    labels: Vec<Option<u8>>,
    in_use: BTreeSet<u8>,
}

impl Writer<'_> {
    fn sorted_neighbors(&self, atom: usize) -> Vec<(usize, usize)> {
        let mut nbs = self.graph.neighbors(atom).to_vec();
        nbs.sort_by_key(|&(n, _)| self.ranks[n]);
        nbs
    }

    fn discover(&mut self, atom: usize, parent_bond: Option<usize>) {
        self.visited[atom] = true;
        for (nb, bi) in self.sorted_neighbors(atom) {
            if Some(bi) == parent_bond || self.tree_bond[bi] || self.closure_bond[bi] {
                continue;
            }
            if self.visited[nb] {
                self.closure_bond[bi] = true;
                self.openings[nb].push((bi, atom));
            } else {
                self.tree_bond[bi] = true;
                self.discover(nb, Some(bi));
            }
        }
    }

    fn next_label(&mut self) -> u8 {
        let label = (1..=99u8)
            .chain(std::iter::once(0))
            .find(|l| !self.in_use.contains(l))
            .expect("fewer than 100 open rings");
        self.in_use.insert(label);
        label
    }

    fn emit(&mut self, atom: usize, parent_bond: Option<usize>, out: &mut String) {
        out.push_str(&atom_text(self.graph, atom));
        let mut closing: Vec<(u8, usize)> = self
            .graph
            .neighbors(atom)
            .iter()
            .filter_map(|&(_, bi)| self.labels[bi].map(|l| (l, bi)))
            .collect();
        closing.sort_unstable();
        let mut openings = std::mem::take(&mut self.openings[atom]);
        openings.sort_by_key(|&(_, partner)| self.ranks[partner]);
        for &(bi, _) in &openings {
            let label = self.next_label();
            self.labels[bi] = Some(label);
            out.push_str(bond_text(self.graph, bi));
            out.push_str(&label_text(label));
        }
        for (label, bi) in closing {
            out.push_str(&label_text(label));
            self.labels[bi] = None;
            self.in_use.remove(&label);
        }
        let children: Vec<(usize, usize)> = self
            .sorted_neighbors(atom)
            .into_iter()
            .filter(|&(_, bi)| self.tree_bond[bi] && Some(bi) != parent_bond)
            .collect();
        for (k, &(child, bi)) in children.iter().enumerate() {
            let last = k + 1 == children.len();
            if !last {
                out.push('(');
            }
            out.push_str(bond_text(self.graph, bi));
            self.emit(child, Some(bi), out);
            if !last {
                out.push(')');
            }
        }
    }
}

/// Depth-first SMILES writer for a total atom ranking.
pub fn write_smiles(graph: &MolecularGraph, ranks: &[usize]) -> String {
    let n = graph.atom_count();
    let m = graph.bonds.len();
    let mut w = Writer {
        graph,
        ranks,
        visited: vec![false; n],
        tree_bond: vec![false; m],
        closure_bond: vec![false; m],
        openings: vec![Vec::new(); n],
        labels: vec![None; m],
        in_use: BTreeSet::new(),
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| ranks[i]);
    let mut roots = Vec::new();
    for &start in &order {
        if !w.visited[start] {
            roots.push(start);
            w.discover(start, None);
        }
    }
    let mut out = String::new();
    for (k, &root) in roots.iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        w.emit(root, None, &mut out);
    }
    out
}
