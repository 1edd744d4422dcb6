//! Smallest set of smallest rings.
//!
//! Candidate cycles are generated Horton-style (for every root atom and every
//! bond, shortest path root→a + bond + b→root when both paths only meet at
//! the root), sorted by size, and accepted greedily when linearly independent
//! over GF(2) in bond space. The accepted set is a minimum cycle basis, so
//! the multiset of ring sizes does not depend on atom order.

use std::collections::{HashSet, VecDeque};

use super::graph::MolecularGraph;

type EdgeSet = Vec<u64>;

fn set_bit(set: &mut EdgeSet, i: usize) {
    set[i / 64] |= 1 << (i % 64);
}

fn xor_into(dst: &mut EdgeSet, src: &EdgeSet) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn lowest_bit(set: &EdgeSet) -> Option<usize> {
    set.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// Atoms that lie on at least one cycle: repeatedly strip degree ≤ 1 atoms.
fn ring_core(graph: &MolecularGraph) -> Vec<bool> {
    let n = graph.atom_count();
    let mut degree: Vec<usize> = (0..n).map(|a| graph.degree(a)).collect();
    let mut alive = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&a| degree[a] <= 1).collect();
    while let Some(a) = queue.pop_front() {
        if !alive[a] {
            continue;
        }
        alive[a] = false;
        for &(nb, _) in graph.neighbors(a) {
            if alive[nb] {
                degree[nb] -= 1;
                if degree[nb] == 1 {
                    queue.push_back(nb);
                }
            }
        }
    }
    alive
}

pub fn cyclomatic_number(graph: &MolecularGraph) -> usize {
    (graph.bonds.len() + graph.components().len()).saturating_sub(graph.atom_count())
}

pub fn smallest_set_of_smallest_rings(graph: &MolecularGraph) -> Vec<Vec<usize>> {
    let target = cyclomatic_number(graph);
    if target == 0 {
        return Vec::new();
    }
    let n = graph.atom_count();
    let m = graph.bonds.len();
    let words = m.div_ceil(64);
    let core = ring_core(graph);

    let mut candidates: Vec<(usize, EdgeSet, Vec<usize>)> = Vec::new();
    let mut seen: HashSet<EdgeSet> = HashSet::new();
    for root in (0..n).filter(|&a| core[a]) {
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![(usize::MAX, usize::MAX); n];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for &(nb, bi) in graph.neighbors(a) {
                if core[nb] && dist[nb] == usize::MAX {
                    dist[nb] = dist[a] + 1;
                    parent[nb] = (a, bi);
                    queue.push_back(nb);
                }
            }
        }
        let path = |mut v: usize| -> (Vec<usize>, Vec<usize>) {
            let mut atoms = vec![v];
            let mut bonds = Vec::new();
            while v != root {
                let (p, bi) = parent[v];
                bonds.push(bi);
                atoms.push(p);
                v = p;
            }
            (atoms, bonds)
        };
        for (bi, bond) in graph.bonds.iter().enumerate() {
            let (x, y) = (bond.a, bond.b);
            if !core[x] || !core[y] || dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            if parent[x].1 == bi || parent[y].1 == bi {
                continue;
            }
            let (px, bx) = path(x);
            let (py, by) = path(y);
            let on_x: HashSet<usize> = px[..px.len() - 1].iter().copied().collect();
            if py[..py.len() - 1].iter().any(|a| on_x.contains(a)) {
                continue;
            }
            let mut edges = vec![0u64; words];
            set_bit(&mut edges, bi);
            for &b in bx.iter().chain(&by) {
                set_bit(&mut edges, b);
            }
            if !seen.insert(edges.clone()) {
                continue;
            }
            // root ... x, y ... (back to root)
            let mut cycle: Vec<usize> = px.iter().rev().copied().collect();
            cycle.extend(py[..py.len() - 1].iter().copied());
            candidates.push((cycle.len(), edges, cycle));
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let mut basis: Vec<(usize, EdgeSet)> = Vec::new();
    let mut rings = Vec::new();
    for (_, edges, cycle) in candidates {
        let mut reduced = edges;
        loop {
            let Some(lead) = lowest_bit(&reduced) else { break };
            match basis.iter().find(|(p, _)| *p == lead) {
                Some((_, row)) => xor_into(&mut reduced, row),
                None => break,
            }
        }
        if let Some(lead) = lowest_bit(&reduced) {
            basis.push((lead, reduced));
            rings.push(cycle);
            if rings.len() == target {
                break;
            }
        }
    }
    rings
}
