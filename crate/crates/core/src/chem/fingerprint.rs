//! Morgan-style circular fingerprints folded into a fixed-width bit set.

use super::graph::MolecularGraph;
use super::ChemError;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(words: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for w in words {
        for byte in w.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    words: Vec<u64>,
    width: usize,
    pub radius: usize,
}

impl Fingerprint {
    pub fn empty(width: usize, radius: usize) -> Fingerprint {
        Fingerprint {
            words: vec![0; width.div_ceil(64)],
            width,
            radius,
        }
    }

    pub fn from_bits(width: usize, bits: &[usize]) -> Fingerprint {
        let mut fp = Fingerprint::empty(width, 0);
        for &b in bits {
            fp.set(b);
        }
        fp
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] & (1 << (bit % 64)) != 0
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&b| self.get(b))
    }
}

/// Circular fingerprint: each atom starts from a hash of its local
/// invariants, then for `radius` rounds absorbs the sorted (bond, neighbour
/// identifier) pairs. Every identifier from every round is folded into
/// `width` bits.
pub fn fingerprint(graph: &MolecularGraph, radius: usize, width: usize) -> Fingerprint {
    assert!(width.is_power_of_two(), "fingerprint width must be a power of two");
    let ring_atoms = graph.ring_atom_flags();
    let mut ids: Vec<u64> = (0..graph.atom_count())
        .map(|i| {
            let a = &graph.atoms[i];
            fnv1a(&[
                u64::from(a.element.atomic_number()),
                graph.degree(i) as u64,
                u64::from(a.hydrogens),
                a.charge as i64 as u64,
                u64::from(ring_atoms[i]),
                u64::from(a.aromatic),
            ])
        })
        .collect();
    let mut fp = Fingerprint::empty(width, radius);
    let mask = (width - 1) as u64;
    for &id in &ids {
        fp.set((id & mask) as usize);
    }
    for round in 1..=radius {
        let next: Vec<u64> = (0..graph.atom_count())
            .map(|i| {
                let mut env: Vec<(u64, u64)> = graph
                    .neighbors(i)
                    .iter()
                    .map(|&(n, bi)| (u64::from(graph.bonds[bi].order.code()), ids[n]))
                    .collect();
                env.sort_unstable();
                let mut words = vec![round as u64, ids[i]];
                for (b, id) in env {
                    words.push(b);
                    words.push(id);
                }
                fnv1a(&words)
            })
            .collect();
        for &id in &next {
            fp.set((id & mask) as usize);
        }
        ids = next;
    }
    fp
}

/// |a ∧ b| / |a ∨ b|, defined as 1.0 for two empty fingerprints.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, ChemError> {
    if a.width != b.width {
        return Err(ChemError::WidthMismatch(a.width, b.width));
    }
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(f64::from(inter) / f64::from(union))
}
