//! Rule-based structural plausibility multiplier.

use serde::{Deserialize, Serialize};

use crate::chem::aromatic::{is_antiaromatic, ring_pi_electrons};
use crate::chem::{Element, MolecularGraph};
use crate::descriptors::fused_aromatic_pairs;

/// Thresholds and multipliers for the structural score of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralRules {
    /// (N+O+S)/heavy above this is penalised.
    pub heteroatom_ratio_max: f64,
    pub heteroatom_penalty: f64,
    /// Rings larger than this count as macrocycles.
    pub macrocycle_size: usize,
    pub macrocycle_penalty: f64,
    pub antiaromatic_penalty: f64,
    pub halogen_ratio_max: f64,
    pub halogen_penalty: f64,
    pub carbon_fraction_max: f64,
    pub carbon_penalty: f64,
    /// Applied when a fused aromatic pair carries N, O or S.
    pub fused_heteroaromatic_bonus: f64,
}

impl Default for StructuralRules {
    fn default() -> Self {
        StructuralRules {
            heteroatom_ratio_max: 0.5,
            heteroatom_penalty: 0.5,
            macrocycle_size: 12,
            macrocycle_penalty: 0.5,
            antiaromatic_penalty: 0.5,
            halogen_ratio_max: 0.35,
            halogen_penalty: 0.2,
            carbon_fraction_max: 0.95,
            carbon_penalty: 0.5,
            fused_heteroaromatic_bonus: 1.2,
        }
    }
}

fn has_antiaromatic_ring(graph: &MolecularGraph) -> bool {
    graph
        .rings
        .iter()
        .any(|ring| ring_pi_electrons(graph, ring).is_some_and(is_antiaromatic))
}

fn has_fused_heteroaromatic_pair(graph: &MolecularGraph) -> bool {
    fused_aromatic_pairs(graph).into_iter().any(|(r1, r2)| {
        graph.rings[r1].iter().chain(&graph.rings[r2]).any(|&a| {
            matches!(graph.atoms[a].element, Element::N | Element::O | Element::S)
        })
    })
}

/// Multiplier in [0, 1]: starts at one, multiplies each triggered penalty,
/// applies the fused heteroaromatic bonus, and caps the result at one.
pub fn structural_score(graph: &MolecularGraph, rules: &StructuralRules) -> f64 {
    let heavy = graph.heavy_atom_count();
    if heavy == 0 {
        return 0.0;
    }
    let count = |pred: &dyn Fn(Element) -> bool| graph.atoms.iter().filter(|a| pred(a.element)).count() as f64;
    let heavy = heavy as f64;
    let nos = count(&|e| matches!(e, Element::N | Element::O | Element::S)) / heavy;
    let halogen = count(&|e| e.is_halogen()) / heavy;
    let carbon = count(&|e| e == Element::C) / heavy;

    let mut score = 1.0;
    if nos > rules.heteroatom_ratio_max {
        score *= rules.heteroatom_penalty;
    }
    if graph.rings.iter().any(|r| r.len() > rules.macrocycle_size) {
        score *= rules.macrocycle_penalty;
    }
    if has_antiaromatic_ring(graph) {
        score *= rules.antiaromatic_penalty;
    }
    if halogen > rules.halogen_ratio_max {
        score *= rules.halogen_penalty;
    }
    if carbon > rules.carbon_fraction_max {
        score *= rules.carbon_penalty;
    }
    if has_fused_heteroaromatic_pair(graph) {
        score *= rules.fused_heteroaromatic_bonus;
    }
    f64::min(score, 1.0)
}
