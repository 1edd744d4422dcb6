//! Per-ring aromaticity perception with a Hückel 4n+2 electron count.

use super::element::Element;
use super::graph::{BondOrder, MolecularGraph};
use super::ChemError;

/// Pi electrons an atom donates to `ring`, or `None` when the atom cannot
/// take part in a conjugated planar ring (sp3 centre, triple bond, ...).
pub fn pi_contribution(graph: &MolecularGraph, atom: usize, ring: &[usize]) -> Option<u8> {
    let a = &graph.atoms[atom];
    let ring_atoms = graph.ring_atom_flags();
    let mut double_partner = None;
    for &(nb, bi) in graph.neighbors(atom) {
        match graph.bonds[bi].order {
            BondOrder::Triple => return None,
            BondOrder::Double => {
                if double_partner.is_some() {
                    return None;
                }
                double_partner = Some(nb);
            }
            _ => {}
        }
    }
    if let Some(p) = double_partner {
        if ring.contains(&p) {
            return Some(1);
        }
        let pe = graph.atoms[p].element;
        if ring_atoms[p] && (pe == Element::C || pe == Element::N) {
            return Some(1);
        }
        // exocyclic C=X leaves an empty p orbital in the ring
        return if a.element == Element::C { Some(0) } else { None };
    }

    let used = graph.sigma_valence(atom) + a.hydrogens;
    let valence = a.element.default_valence(a.charge, used)?;
    let leftover = valence - used;
    match leftover {
        1 => Some(1),
        0 => {
            let sym = a.element.symbol();
            match (sym, a.charge) {
                ("C", 0) => None,
                ("C", q) if q > 0 => Some(0),
                ("C", _) => Some(2),
                ("B", 0) => Some(0),
                ("N" | "P" | "As", q) if q > 0 => None,
                ("N" | "P" | "As" | "O" | "S" | "Se", _) => Some(2),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Total pi electrons of a ring, `None` if any member is not sp2-capable.
pub fn ring_pi_electrons(graph: &MolecularGraph, ring: &[usize]) -> Option<u32> {
    ring.iter()
        .map(|&a| pi_contribution(graph, a, ring).map(u32::from))
        .sum()
}

pub fn is_huckel_aromatic(electrons: u32) -> bool {
    electrons % 4 == 2
}

pub fn is_antiaromatic(electrons: u32) -> bool {
    electrons > 0 && electrons % 4 == 0
}

/// Mark aromatic rings, convert their bonds to aromatic order, demote
/// aromatic bonds outside aromatic rings to single, and reject lowercase
/// atoms that ended up outside every aromatic ring.
pub(crate) fn perceive(graph: &mut MolecularGraph) -> Result<(), ChemError> {
    let flags: Vec<bool> = graph
        .rings
        .iter()
        .map(|ring| ring_pi_electrons(graph, ring).is_some_and(is_huckel_aromatic))
        .collect();

    let mut in_aromatic_ring = vec![false; graph.atom_count()];
    let mut aromatic_bond = vec![false; graph.bonds.len()];
    for (ring, &aromatic) in graph.rings.iter().zip(&flags) {
        if !aromatic {
            continue;
        }
        for k in 0..ring.len() {
            let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
            in_aromatic_ring[a] = true;
            if let Some(&(_, bi)) = graph.neighbors(a).iter().find(|&&(n, _)| n == b) {
                aromatic_bond[bi] = true;
            }
        }
    }
    for (i, atom) in graph.atoms.iter().enumerate() {
        if atom.aromatic && !in_aromatic_ring[i] {
            return Err(ChemError::NonAromaticAtom(i));
        }
    }
    for (i, atom) in graph.atoms.iter_mut().enumerate() {
        atom.aromatic = in_aromatic_ring[i];
    }
    for (i, bond) in graph.bonds.iter_mut().enumerate() {
        if aromatic_bond[i] {
            bond.order = BondOrder::Aromatic;
        } else if bond.order == BondOrder::Aromatic {
            bond.order = BondOrder::Single;
        }
    }
    graph.aromatic_rings = flags;
    Ok(())
}
