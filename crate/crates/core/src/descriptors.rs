//! Fixed 20-entry molecular descriptor vector computed from the parsed graph.
//!
//! | # | name | definition | unit |
//! |---|------|------------|------|
//! | 0 | `heavy_atoms` | non-hydrogen atoms | count |
//! | 1 | `mol_weight` | sum of standard atomic weights incl. attached H | g/mol |
//! | 2 | `n_nitrogen` | N atoms | count |
//! | 3 | `n_oxygen` | O atoms | count |
//! | 4 | `n_sulfur` | S atoms | count |
//! | 5 | `n_halogen` | F, Cl, Br, I atoms | count |
//! | 6 | `carbon_fraction` | C / heavy | ratio |
//! | 7 | `nos_ratio` | (N+O+S) / heavy | ratio |
//! | 8 | `halogen_ratio` | halogens / heavy | ratio |
//! | 9 | `ring_count` | rings in the smallest set of smallest rings | count |
//! | 10 | `aromatic_rings` | perceived aromatic rings | count |
//! | 11 | `aliphatic_rings` | rings that are not aromatic | count |
//! | 12 | `max_ring_size` | largest ring, 0 if acyclic | atoms |
//! | 13 | `fused_aromatic_pairs` | aromatic ring pairs sharing ≥ 2 atoms | count |
//! | 14 | `rotatable_bonds` | single non-ring bonds between non-terminal heavy atoms, amide C–N excluded | count |
//! | 15 | `hbond_donors` | N or O atoms carrying ≥ 1 H | count |
//! | 16 | `hbond_acceptors` | N and O atoms | count |
//! | 17 | `fraction_sp3_carbon` | non-aromatic C with only single bonds / C, 0 without carbon | ratio |
//! | 18 | `net_charge` | sum of formal charges | e |
//! | 19 | `canonical_token_length` | tokens in the canonical SMILES | count |

use serde::{Deserialize, Serialize};

use crate::chem::{canonicalize, tokenize, BondOrder, Element, MolecularGraph};

pub const SCHEMA_VERSION: &str = "desc-v1";
pub const DESCRIPTOR_COUNT: usize = 20;

pub const DESCRIPTOR_NAMES: [&str; DESCRIPTOR_COUNT] = [
    "heavy_atoms",
    "mol_weight",
    "n_nitrogen",
    "n_oxygen",
    "n_sulfur",
    "n_halogen",
    "carbon_fraction",
    "nos_ratio",
    "halogen_ratio",
    "ring_count",
    "aromatic_rings",
    "aliphatic_rings",
    "max_ring_size",
    "fused_aromatic_pairs",
    "rotatable_bonds",
    "hbond_donors",
    "hbond_acceptors",
    "fraction_sp3_carbon",
    "net_charge",
    "canonical_token_length",
];

/// Index of each descriptor in the vector.
pub mod idx {
    pub const HEAVY_ATOMS: usize = 0;
    pub const MOL_WEIGHT: usize = 1;
    pub const N_NITROGEN: usize = 2;
    pub const N_OXYGEN: usize = 3;
    pub const N_SULFUR: usize = 4;
    pub const N_HALOGEN: usize = 5;
    pub const CARBON_FRACTION: usize = 6;
    pub const NOS_RATIO: usize = 7;
    pub const HALOGEN_RATIO: usize = 8;
    pub const RING_COUNT: usize = 9;
    pub const AROMATIC_RINGS: usize = 10;
    pub const ALIPHATIC_RINGS: usize = 11;
    pub const MAX_RING_SIZE: usize = 12;
    pub const FUSED_AROMATIC_PAIRS: usize = 13;
    pub const ROTATABLE_BONDS: usize = 14;
    pub const HBOND_DONORS: usize = 15;
    pub const HBOND_ACCEPTORS: usize = 16;
    pub const FRACTION_SP3_CARBON: usize = 17;
    pub const NET_CHARGE: usize = 18;
    pub const CANONICAL_TOKEN_LENGTH: usize = 19;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub values: Vec<f64>,
}

impl DescriptorVector {
    pub fn names(&self) -> &'static [&'static str] {
        &DESCRIPTOR_NAMES
    }

    pub fn schema_version(&self) -> &'static str {
        SCHEMA_VERSION
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }
}

/// Pairs of aromatic rings (by index into `graph.rings`) sharing ≥ 2 atoms.
pub fn fused_aromatic_pairs(graph: &MolecularGraph) -> Vec<(usize, usize)> {
    let aromatic: Vec<usize> = (0..graph.rings.len())
        .filter(|&r| graph.aromatic_rings[r])
        .collect();
    let mut pairs = Vec::new();
    for (k, &r1) in aromatic.iter().enumerate() {
        for &r2 in &aromatic[k + 1..] {
            let shared = graph.rings[r1]
                .iter()
                .filter(|a| graph.rings[r2].contains(a))
                .count();
            if shared >= 2 {
                pairs.push((r1, r2));
            }
        }
    }
    pairs
}

fn is_amide_bond(graph: &MolecularGraph, a: usize, b: usize) -> bool {
    let carbonyl_carbon = |c: usize| {
        graph.atoms[c].element == Element::C
            && graph.neighbors(c).iter().any(|&(n, bi)| {
                graph.bonds[bi].order == BondOrder::Double && graph.atoms[n].element == Element::O
            })
    };
    let (ea, eb) = (graph.atoms[a].element, graph.atoms[b].element);
    (ea == Element::C && eb == Element::N && carbonyl_carbon(a))
        || (ea == Element::N && eb == Element::C && carbonyl_carbon(b))
}

pub fn rotatable_bonds(graph: &MolecularGraph) -> usize {
    let ring_bonds = graph.ring_bond_flags();
    let heavy_degree = |a: usize| {
        graph
            .neighbors(a)
            .iter()
            .filter(|&&(n, _)| graph.atoms[n].element != Element::H)
            .count()
    };
    graph
        .bonds
        .iter()
        .enumerate()
        .filter(|&(i, b)| {
            b.order == BondOrder::Single
                && !ring_bonds[i]
                && graph.atoms[b.a].element != Element::H
                && graph.atoms[b.b].element != Element::H
                && heavy_degree(b.a) >= 2
                && heavy_degree(b.b) >= 2
                && !is_amide_bond(graph, b.a, b.b)
        })
        .count()
}

pub fn compute_descriptors(graph: &MolecularGraph) -> DescriptorVector {
    let heavy = graph.heavy_atom_count();
    let count = |pred: &dyn Fn(Element) -> bool| graph.atoms.iter().filter(|a| pred(a.element)).count();
    let n_c = count(&|e| e == Element::C);
    let n_n = count(&|e| e == Element::N);
    let n_o = count(&|e| e == Element::O);
    let n_s = count(&|e| e == Element::S);
    let n_hal = count(&|e| e.is_halogen());
    let ratio = |x: usize| if heavy == 0 { 0.0 } else { x as f64 / heavy as f64 };

    let weight: f64 = graph
        .atoms
        .iter()
        .map(|a| a.element.mass() + f64::from(a.hydrogens) * Element::H.mass())
        .sum();
    let rings = graph.rings.len();
    let aromatic_rings = graph.aromatic_rings.iter().filter(|&&f| f).count();
    let max_ring = graph.rings.iter().map(Vec::len).max().unwrap_or(0);

    let donors = graph
        .atoms
        .iter()
        .filter(|a| (a.element == Element::N || a.element == Element::O) && a.hydrogens > 0)
        .count();
    let sp3_carbons = (0..graph.atom_count())
        .filter(|&i| {
            let a = &graph.atoms[i];
            a.element == Element::C
                && !a.aromatic
                && graph
                    .neighbors(i)
                    .iter()
                    .all(|&(_, bi)| graph.bonds[bi].order == BondOrder::Single)
        })
        .count();
    let net_charge: i32 = graph.atoms.iter().map(|a| i32::from(a.charge)).sum();
    let canonical = canonicalize(graph);
    let token_length = tokenize(&canonical).map(|t| t.len()).unwrap_or(0);

    let values = vec![
        heavy as f64,
        weight,
        n_n as f64,
        n_o as f64,
        n_s as f64,
        n_hal as f64,
        ratio(n_c),
        ratio(n_n + n_o + n_s),
        ratio(n_hal),
        rings as f64,
        aromatic_rings as f64,
        (rings - aromatic_rings) as f64,
        max_ring as f64,
        fused_aromatic_pairs(graph).len() as f64,
        rotatable_bonds(graph) as f64,
        donors as f64,
        (n_n + n_o) as f64,
        if n_c == 0 { 0.0 } else { sp3_carbons as f64 / n_c as f64 },
        f64::from(net_charge),
        token_length as f64,
    ];
    debug_assert_eq!(values.len(), DESCRIPTOR_COUNT);
    DescriptorVector { values }
}
