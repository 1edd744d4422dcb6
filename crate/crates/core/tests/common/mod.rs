#![allow(dead_code)]

pub mod criteria;

use std::collections::BTreeSet;

use auxgan_core::chem::{canonicalize, parse_smiles};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FRAGMENTS: [&str; 28] = [
    "C", "CC", "N", "O", "S", "C(=O)", "C(C)", "C(O)", "C(N)", "C(F)", "C(Cl)", "C=C", "C#C", "c1ccccc1", "c1ccncc1",
    "c1ccsc1", "c1ccoc1", "c1cc[nH]c1", "C1CCCCC1", "C1CCNC1", "C1CC1", "c1ccc2ccccc2c1", "C(=O)N", "S(=O)(=O)",
    "P(=O)(O)", "[NH3+]", "C(Br)", "OC",
];

fn random_chain(rng: &mut ChaCha8Rng, depth: usize) -> String {
    let n = rng.gen_range(1..=5);
    let mut s = String::new();
    for _ in 0..n {
        s.push_str(FRAGMENTS.choose(rng).unwrap());
        if depth < 2 && rng.gen_bool(0.25) {
            s.push_str("C(");
            s.push_str(&random_chain(rng, depth + 1));
            s.push(')');
        }
    }
    s
}

/// Random SMILES built from ring and chain fragments, optionally closed
/// into a macrocycle; only strings that parse are kept.
pub fn fuzz_corpus(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let mut s = random_chain(&mut rng, 0);
        if rng.gen_bool(0.15) {
            s = format!("C9{s}C9");
        }
        if let Ok(g) = parse_smiles(&s) {
            if seen.insert(canonicalize(&g)) {
                out.push(s);
            }
        }
    }
    out
}

/// Strings that must be rejected: valence violations, broken syntax and
/// impossible aromatic systems.
pub const INVALID: [&str; 41] = [
    "",
    "C(C)(C)(C)(C)C",
    "CC(C)(C)(C)C",
    "O(C)(C)C",
    "N(C)(C)(C)C",
    "FC(F)(F)(F)F",
    "C#C#C",
    "O=O=O",
    "F=C",
    "Cl(C)C",
    "Br=C",
    "I(C)C",
    "N#N#N",
    "O#C",
    "C=N#C",
    "S(=O)(=O)(=O)(=O)=O",
    "B(C)(C)(C)C",
    "C1=CC=CC=C1=C",
    "C1CC",
    "C1CCCCC1C1",
    "C(",
    "C)",
    "CC((C))",
    "C()C",
    "C(C",
    "C1CCCCC1)",
    "C==C",
    "CC(=)C",
    "C=",
    "=C",
    "C-",
    "[C",
    "C]",
    "[Xx]",
    "C%1",
    "c1cccc1",
    "c1ccccc",
    "c",
    "cc",
    "c1ccccc1=O",
    "C.",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
