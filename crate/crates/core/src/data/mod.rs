//! Dataset ingestion, preprocessing, vocabulary and the oversampling
//! sampler.

pub mod synth;

pub use synth::{synthetic_corpus, write_corpus, SyntheticSpec};

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chem::{canonicalize, parse_smiles, tokenize, Element};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("dataset file not found: {0}")]
    FileNotFound(String),
    #[error("malformed row at line {0}")]
    MalformedRow(usize),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("oversampling factor must be at least 1")]
    InvalidFactor,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One input row: source line, dense label and raw SMILES.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub line: usize,
    pub label: usize,
    pub smiles: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDataset {
    pub records: Vec<RawRecord>,
    /// class names in order of first appearance
    pub class_names: Vec<String>,
}

fn is_header(fields: &[&str]) -> bool {
    fields.len() == 2 && fields[0].eq_ignore_ascii_case("label") && fields[1].eq_ignore_ascii_case("smiles")
}

/// Parse `label,smiles` text. A leading `label,smiles` header is skipped.
/// Class indices follow the sorted label names.
pub fn parse_dataset(text: &str) -> Result<RawDataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 1;
        let row = row.map_err(|e| {
            DataError::MalformedRow(e.position().map(|p| p.line() as usize).unwrap_or(line))
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(line);
        let fields: Vec<&str> = row.iter().collect();
        if records.is_empty() && class_names.is_empty() && is_header(&fields) {
            continue;
        }
        if fields.len() != 2 || fields[0].is_empty() || fields[1].is_empty() {
            return Err(DataError::MalformedRow(line));
        }
        let next = class_names.len();
        let label = *index.entry(fields[0].to_string()).or_insert_with(|| {
            class_names.push(fields[0].to_string());
            next
        });
        records.push(RawRecord {
            line,
            label,
            smiles: fields[1].to_string(),
        });
    }
    if records.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    // class indices follow sorted label order, not row order
    let mut sorted = class_names.clone();
    sorted.sort();
    let remap: Vec<usize> = class_names
        .iter()
        .map(|n| sorted.binary_search(n).expect("name present"))
        .collect();
    for r in &mut records {
        r.label = remap[r.label];
    }
    Ok(RawDataset {
        records,
        class_names: sorted,
    })
}

pub fn load_dataset(path: &Path) -> Result<RawDataset, DataError> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DataError::FileNotFound(path.display().to_string()),
        _ => DataError::Io(e),
    })?;
    parse_dataset(&text)
}

/// A preprocessed, canonical training record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub label: usize,
    pub smiles: String,
    pub tokens: Vec<String>,
}

impl DatasetRecord {
    pub fn token_length(&self) -> usize {
        self.tokens.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    ParseFailure(String),
    DisallowedElement(String),
    LengthOutOfRange(usize),
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::ParseFailure(e) => write!(f, "parse_failure\t{e}"),
            Rejection::DisallowedElement(s) => write!(f, "disallowed_element\t{s}"),
            Rejection::LengthOutOfRange(n) => write!(f, "length_out_of_range\t{n}"),
        }
    }
}

/// Inclusive token-length window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LengthBounds {
    pub min: usize,
    pub max: usize,
}

impl Default for LengthBounds {
    fn default() -> Self {
        LengthBounds { min: 10, max: 80 }
    }
}

pub const ALLOWED_ELEMENTS: [Element; 11] = [
    Element::C,
    Element::H,
    Element::N,
    Element::O,
    Element::F,
    Element::CL,
    Element::BR,
    Element::I,
    Element::B,
    Element::S,
    Element::P,
];

/// Parse, keep the largest fragment, check elements, canonicalize and
/// apply the length window.
pub fn preprocess(label: usize, smiles: &str, bounds: LengthBounds) -> Result<DatasetRecord, Rejection> {
    let graph = parse_smiles(smiles).map_err(|e| Rejection::ParseFailure(e.to_string()))?;
    let mut fragments: Vec<(usize, String, Vec<usize>)> = graph
        .components()
        .into_iter()
        .map(|atoms| {
            let sub = graph.subgraph(&atoms);
            (sub.heavy_atom_count(), canonicalize(&sub), atoms)
        })
        .collect();
    // most heavy atoms first, then canonical text order
    fragments.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let (_, canonical, atoms) = fragments.swap_remove(0);
    if let Some(a) = atoms
        .iter()
        .map(|&a| graph.atoms[a].element)
        .find(|e| !ALLOWED_ELEMENTS.contains(e))
    {
        return Err(Rejection::DisallowedElement(a.symbol().to_string()));
    }
    let tokens: Vec<String> = tokenize(&canonical)
        .map_err(|e| Rejection::ParseFailure(e.to_string()))?
        .into_iter()
        .map(|t| t.text)
        .collect();
    if tokens.len() < bounds.min || tokens.len() > bounds.max {
        return Err(Rejection::LengthOutOfRange(tokens.len()));
    }
    Ok(DatasetRecord {
        label,
        smiles: canonical,
        tokens,
    })
}

#[derive(Debug, Clone, Default)]
pub struct PreprocessOutcome {
    pub records: Vec<DatasetRecord>,
    /// (source line, reason)
    pub rejections: Vec<(usize, Rejection)>,
}

pub fn preprocess_all(raw: &RawDataset, bounds: LengthBounds) -> PreprocessOutcome {
    let mut out = PreprocessOutcome::default();
    for r in &raw.records {
        match preprocess(r.label, &r.smiles, bounds) {
            Ok(rec) => out.records.push(rec),
            Err(why) => out.rejections.push((r.line, why)),
        }
    }
    out
}

pub const PAD: &str = "<pad>";
pub const EOS: &str = "<eos>";

/// Token inventory: pad, end, one start token per class, then chemistry
/// tokens in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabularyFile", into = "VocabularyFile")]
pub struct Vocabulary {
    tokens: Vec<String>,
    n_classes: usize,
    index: HashMap<String, usize>,
}

#[derive(Clone, Serialize, Deserialize)]
struct VocabularyFile {
    tokens: Vec<String>,
    n_classes: usize,
}

impl From<VocabularyFile> for Vocabulary {
    fn from(f: VocabularyFile) -> Self {
        Vocabulary::from_tokens(f.tokens, f.n_classes)
    }
}

impl From<Vocabulary> for VocabularyFile {
    fn from(v: Vocabulary) -> Self {
        VocabularyFile {
            tokens: v.tokens,
            n_classes: v.n_classes,
        }
    }
}

impl Vocabulary {
    pub fn from_tokens(tokens: Vec<String>, n_classes: usize) -> Vocabulary {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            tokens,
            n_classes,
            index,
        }
    }

    pub fn build(records: &[DatasetRecord], n_classes: usize) -> Result<Vocabulary, DataError> {
        if records.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        let chem: BTreeSet<&str> = records.iter().flat_map(|r| r.tokens.iter().map(String::as_str)).collect();
        let mut tokens = vec![PAD.to_string(), EOS.to_string()];
        tokens.extend((0..n_classes).map(|c| format!("<start:{c}>")));
        tokens.extend(chem.into_iter().map(str::to_string));
        Ok(Vocabulary::from_tokens(tokens, n_classes))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn pad(&self) -> usize {
        0
    }

    pub fn eos(&self) -> usize {
        1
    }

    pub fn start(&self, class: usize) -> usize {
        2 + class
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Tokens the generator may emit: everything except pad and start
    /// tokens.
    pub fn emittable(&self) -> Vec<bool> {
        (0..self.len()).map(|i| i == 1 || i >= 2 + self.n_classes).collect()
    }

    /// Record tokens followed by the end token.
    pub fn encode(&self, record: &DatasetRecord) -> Option<Vec<usize>> {
        let mut out = record
            .tokens
            .iter()
            .map(|t| self.index_of(t))
            .collect::<Option<Vec<usize>>>()?;
        out.push(self.eos());
        Some(out)
    }

    /// Concatenate chemistry tokens, stopping at the end token and
    /// skipping reserved ones.
    pub fn decode(&self, seq: &[usize]) -> String {
        let mut s = String::new();
        for &t in seq {
            if t == self.eos() {
                break;
            }
            if t >= 2 + self.n_classes && t < self.len() {
                s.push_str(&self.tokens[t]);
            }
        }
        s
    }

    /// Number of emitted tokens before the end token.
    pub fn content_length(&self, seq: &[usize]) -> usize {
        seq.iter().take_while(|&&t| t != self.eos()).count()
    }
}

/// Uniform sampling with replacement from a pool in which every record of
/// the boosted class appears `factor` times.
#[derive(Debug, Clone)]
pub struct OversampledSampler {
    pool: Vec<usize>,
    rng: ChaCha8Rng,
}

impl OversampledSampler {
    pub fn new(
        labels: &[usize],
        n_classes: usize,
        boosted: Option<usize>,
        factor: usize,
        seed: u64,
    ) -> Result<OversampledSampler, DataError> {
        if factor == 0 {
            return Err(DataError::InvalidFactor);
        }
        if labels.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        if let Some(c) = boosted {
            if c >= n_classes {
                return Err(DataError::UnknownClass(c.to_string()));
            }
        }
        let mut pool = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            let copies = if Some(l) == boosted { factor } else { 1 };
            pool.extend(std::iter::repeat(i).take(copies));
        }
        Ok(OversampledSampler {
            pool,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn pool(&self) -> &[usize] {
        &self.pool
    }

    pub fn next_index(&mut self) -> usize {
        self.pool[self.rng.gen_range(0..self.pool.len())]
    }

    pub fn batch(&mut self, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.next_index()).collect()
    }
}

/// Per-class mean and standard deviation of token length.
pub fn length_statistics(records: &[DatasetRecord], n_classes: usize) -> Vec<(f64, f64)> {
    (0..n_classes)
        .map(|c| {
            let lens: Vec<f64> = records
                .iter()
                .filter(|r| r.label == c)
                .map(|r| r.token_length() as f64)
                .collect();
            if lens.is_empty() {
                return (0.0, 1.0);
            }
            let n = lens.len() as f64;
            let mean = lens.iter().sum::<f64>() / n;
            let var = lens.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt().max(1.0))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::canonical_smiles;

    #[test]
    fn two_rows() {
        let d = parse_dataset("NA,CCO\nPro,CCN\n").unwrap();
        assert_eq!(d.records.len(), 2);
        assert_eq!(d.records[0].label, 0);
        assert_eq!(d.records[1].label, 1);
        assert_eq!(d.class_names, vec!["NA", "Pro"]);
    }

    #[test]
    fn header_and_errors() {
        let d = parse_dataset("label,smiles\nA,CC\nB,CO\nA,CN\n").unwrap();
        assert_eq!(d.records.iter().map(|r| r.label).collect::<Vec<_>>(), vec![0, 1, 0]);
        assert_eq!(d.records[0].line, 2);
        assert!(matches!(parse_dataset(""), Err(DataError::EmptyDataset)));
        assert!(matches!(parse_dataset("label,smiles\n"), Err(DataError::EmptyDataset)));
        assert!(matches!(parse_dataset("A,CC\nB,CC,x\n"), Err(DataError::MalformedRow(2))));
        assert!(matches!(
            load_dataset(Path::new("/nonexistent/x.csv")),
            Err(DataError::FileNotFound(_))
        ));
    }

    #[test]
    fn salt_then_length() {
        assert_eq!(
            preprocess(0, "CCO.Cl", LengthBounds::default()),
            Err(Rejection::LengthOutOfRange(3))
        );
        let r = preprocess(0, "CCO.Cl", LengthBounds { min: 1, max: 80 }).unwrap();
        assert_eq!(r.smiles, "CCO");
    }

    #[test]
    fn disallowed_and_unparseable() {
        assert_eq!(
            preprocess(0, "CC[Si](C)(C)CCCCCCCC", LengthBounds::default()),
            Err(Rejection::DisallowedElement("Si".into()))
        );
        assert!(matches!(
            preprocess(0, "C1CC", LengthBounds::default()),
            Err(Rejection::ParseFailure(_))
        ));
        // sodium counter-ion is stripped before the element check
        assert!(preprocess(0, "[Na+].[O-]C(=O)CCCCCCCCCC", LengthBounds::default()).is_ok());
    }

    #[test]
    fn twelve_tokens_accepted_and_idempotent() {
        let r = preprocess(1, "OCCCCCCCCCCC", LengthBounds::default()).unwrap();
        assert_eq!(r.token_length(), 12);
        assert_eq!(r.smiles, canonical_smiles("OCCCCCCCCCCC").unwrap());
        assert_eq!(preprocess(1, &r.smiles, LengthBounds::default()).unwrap(), r);
    }

    fn rec(label: usize, tokens: &[&str]) -> DatasetRecord {
        DatasetRecord {
            label,
            smiles: tokens.concat(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn vocabulary_layout() {
        let records = vec![rec(0, &["O", "C", "C"]), rec(1, &["C", "O"])];
        let v = Vocabulary::build(&records, 2).unwrap();
        assert_eq!(v.tokens(), &["<pad>", "<eos>", "<start:0>", "<start:1>", "C", "O"]);
        assert_eq!(v, Vocabulary::build(&records, 2).unwrap());
        assert_eq!(v.encode(&records[0]).unwrap(), vec![5, 4, 4, 1]);
        assert_eq!(v.decode(&[5, 4, 4, 1, 4]), "OCC");
        assert_eq!(v.emittable(), vec![false, true, false, false, true, true]);
        assert!(matches!(Vocabulary::build(&[], 2), Err(DataError::EmptyDataset)));
        let json = serde_json::to_string(&v).unwrap();
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.index_of("O"), Some(5));
    }

    #[test]
    fn sampler_identity_and_errors() {
        let labels = [0, 1, 1, 0];
        let s = OversampledSampler::new(&labels, 2, Some(1), 1, 0).unwrap();
        assert_eq!(s.pool(), &[0, 1, 2, 3]);
        assert!(matches!(
            OversampledSampler::new(&labels, 2, Some(2), 3, 0),
            Err(DataError::UnknownClass(_))
        ));
        let mut a = OversampledSampler::new(&labels, 2, Some(1), 3, 7).unwrap();
        let mut b = OversampledSampler::new(&labels, 2, Some(1), 3, 7).unwrap();
        assert_eq!(a.batch(50), b.batch(50));
    }

    #[test]
    fn length_window_statistics() {
        let records = vec![rec(0, &["C"; 10]), rec(0, &["C"; 14]), rec(1, &["N"; 12])];
        let stats = length_statistics(&records, 2);
        assert_eq!(stats[0], (12.0, 2.0));
        assert_eq!(stats[1], (12.0, 1.0));
    }
}
