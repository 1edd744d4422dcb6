//! SMILES tokenization, parsing into molecular graphs, ring and
//! aromaticity perception, canonical output and circular fingerprints.

pub mod aromatic;
mod canon;
mod element;
mod fingerprint;
mod graph;
pub mod rings;
mod token;

pub use canon::{canonicalize, symmetry_classes, write_smiles};
pub use element::Element;
pub use fingerprint::{fingerprint, tanimoto, Fingerprint};
pub use graph::{implicit_hydrogens, parse, parse_smiles, Atom, Bond, BondOrder, MolecularGraph};
pub use token::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChemError {
    #[error("empty input")]
    EmptyInput,
    #[error("unknown character at position {0}")]
    UnknownCharacter(usize),
    #[error("unterminated bracket atom starting at position {0}")]
    UnterminatedBracket(usize),
    #[error("invalid bracket atom {0}")]
    InvalidBracketAtom(String),
    #[error("ring closure {0} never closed")]
    UnclosedRing(u8),
    #[error("ring closure {0} has conflicting bond symbols")]
    ConflictingRingBond(u8),
    #[error("unbalanced branch")]
    UnbalancedBranch,
    #[error("bond symbol without an atom on both sides")]
    DanglingBond,
    #[error("duplicate or self bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("valence violation at atom {0}")]
    ValenceViolation(usize),
    #[error("aromatic atom {0} is not in an aromatic ring")]
    NonAromaticAtom(usize),
    #[error("fingerprint widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
}

/// Parse and canonicalize a SMILES string.
pub fn canonical_smiles(smiles: &str) -> Result<String, ChemError> {
    Ok(canonicalize(&parse_smiles(smiles)?))
}
