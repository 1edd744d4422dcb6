//! Seeded two-class toy corpus: acyclic or single-ring chains whose unit
//! mix leans towards C/O for one class and N/S for the other. The mixes
//! overlap, so class membership is probabilistic rather than trivial.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{preprocess, LengthBounds};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// (class name, record count); the first class is C/O-rich, all
    /// others N/S-rich
    pub classes: Vec<(String, usize)>,
    pub min_units: usize,
    pub max_units: usize,
    pub bounds: LengthBounds,
}

impl SyntheticSpec {
    pub fn two_class(a: usize, b: usize) -> SyntheticSpec {
        SyntheticSpec {
            classes: vec![("A".into(), a), ("B".into(), b)],
            min_units: 7,
            max_units: 14,
            bounds: LengthBounds { min: 10, max: 40 },
        }
    }
}

const UNITS_CO: [(&str, f64); 8] = [
    ("C", 6.0),
    ("O", 3.0),
    ("C(=O)", 1.5),
    ("C(C)", 1.5),
    ("C(O)", 1.0),
    ("N", 0.5),
    ("S", 0.3),
    ("C(N)", 0.2),
];

const UNITS_NS: [(&str, f64); 8] = [
    ("C", 4.0),
    ("N", 4.0),
    ("S", 2.0),
    ("C(N)", 1.0),
    ("C(=S)", 0.5),
    ("O", 0.6),
    ("C(C)", 0.6),
    ("C(=O)", 0.3),
];

const RINGS_CO: [&str; 2] = ["C1CCOCC1", "C1CCCCC1"];
const RINGS_NS: [&str; 2] = ["C1CCNCC1", "C1CSCCN1"];

fn sample_smiles<R: Rng>(rng: &mut R, class: usize, spec: &SyntheticSpec) -> String {
    let (units, rings) = if class == 0 {
        (&UNITS_CO, &RINGS_CO)
    } else {
        (&UNITS_NS, &RINGS_NS)
    };
    let dist = WeightedIndex::new(units.iter().map(|u| u.1)).expect("positive weights");
    let n = rng.gen_range(spec.min_units..=spec.max_units);
    let mut s = String::new();
    if rng.gen_bool(0.3) {
        s.push_str(rings[rng.gen_range(0..rings.len())]);
    }
    for _ in 0..n {
        s.push_str(units[dist.sample(rng)].0);
    }
    s
}

/// Unique canonical (label, SMILES) rows, every one accepted by
/// `preprocess` under `spec.bounds`.
pub fn synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for (class, (name, count)) in spec.classes.iter().enumerate() {
        let mut made = 0;
        let mut attempts = 0;
        while made < *count && attempts < count * 200 {
            attempts += 1;
            let smiles = sample_smiles(&mut rng, class.min(1), spec);
            let Ok(rec) = preprocess(class, &smiles, spec.bounds) else {
                continue;
            };
            if seen.insert(rec.smiles.clone()) {
                rows.push((name.clone(), rec.smiles));
                made += 1;
            }
        }
    }
    // interleave classes so file order carries no label signal
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    order.into_iter().map(|i| rows[i].clone()).collect()
}

pub fn write_corpus(path: &Path, rows: &[(String, String)]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "label,smiles")?;
    for (label, smiles) in rows {
        writeln!(f, "{label},{smiles}")?;
    }
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_dataset;

    #[test]
    fn corpus_is_valid_and_seeded() {
        let spec = SyntheticSpec::two_class(40, 30);
        let rows = synthetic_corpus(&spec, 5);
        assert_eq!(rows.len(), 70);
        assert_eq!(rows, synthetic_corpus(&spec, 5));
        assert_ne!(rows, synthetic_corpus(&spec, 6));
        for (label, smiles) in &rows {
            let class = usize::from(label == "B");
            assert_eq!(&preprocess(class, smiles, spec.bounds).unwrap().smiles, smiles);
        }
    }

    #[test]
    fn round_trips_through_file() {
        let rows = synthetic_corpus(&SyntheticSpec::two_class(5, 5), 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_corpus(&path, &rows).unwrap();
        let d = parse_dataset(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(d.records.len(), 10);
        assert_eq!(d.class_names.len(), 2);
    }
}
