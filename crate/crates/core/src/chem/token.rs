use std::fmt;

use super::ChemError;

/// Category of a SMILES token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    /// Organic-subset atom written without brackets (`C`, `Cl`, `c`, ...).
    Atom,
    /// Full bracket expression such as `[nH]` or `[O-]`.
    BracketAtom,
    /// One of `- = # : / \`.
    Bond,
    BranchOpen,
    BranchClose,
    /// Ring-closure digit or `%nn`, carrying its label.
    RingClosure(u8),
    /// Fragment separator `.`.
    Dot,
    /// A class start marker `<...>`; ignored by the parser.
    ClassStart,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
}

impl Token {
    fn new(kind: TokenKind, text: &str) -> Token {
        Token {
            kind,
            text: text.to_string(),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Split a SMILES string into tokens. Concatenating the token texts gives
/// back the input exactly.
pub fn tokenize(smiles: &str) -> Result<Vec<Token>, ChemError> {
    if smiles.is_empty() {
        return Err(ChemError::EmptyInput);
    }
    let bytes = smiles.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let (kind, len) = match c {
            b'C' if bytes.get(i + 1) == Some(&b'l') => (TokenKind::Atom, 2),
            b'B' if bytes.get(i + 1) == Some(&b'r') => (TokenKind::Atom, 2),
            b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I' => (TokenKind::Atom, 1),
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => (TokenKind::Atom, 1),
            b'[' => {
                let end = smiles[i..]
                    .find(']')
                    .ok_or(ChemError::UnterminatedBracket(i))?;
                if let Some(bad) = smiles[i + 1..i + end].find(|ch: char| !ch.is_ascii_alphanumeric() && !"@+-:".contains(ch)) {
                    return Err(ChemError::UnknownCharacter(i + 1 + bad));
                }
                (TokenKind::BracketAtom, end + 1)
            }
            b'<' => {
                let end = smiles[i..]
                    .find('>')
                    .ok_or(ChemError::UnknownCharacter(i))?;
                (TokenKind::ClassStart, end + 1)
            }
            b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => (TokenKind::Bond, 1),
            b'(' => (TokenKind::BranchOpen, 1),
            b')' => (TokenKind::BranchClose, 1),
            b'.' => (TokenKind::Dot, 1),
            b'0'..=b'9' => (TokenKind::RingClosure(c - b'0'), 1),
            b'%' => match (bytes.get(i + 1), bytes.get(i + 2)) {
                (Some(a), Some(b)) if a.is_ascii_digit() && b.is_ascii_digit() => {
                    (TokenKind::RingClosure((a - b'0') * 10 + (b - b'0')), 3)
                }
                _ => return Err(ChemError::UnknownCharacter(i)),
            },
            _ => return Err(ChemError::UnknownCharacter(i)),
        };
        tokens.push(Token::new(kind, &smiles[i..i + len]));
        i += len;
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(s: &str) -> Vec<String> {
        tokenize(s).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn simple_chain() {
        assert_eq!(texts("CCO"), ["C", "C", "O"]);
    }

    #[test]
    fn two_char_halogens() {
        assert_eq!(texts("ClC(Br)=O"), ["Cl", "C", "(", "Br", ")", "=", "O"]);
    }

    #[test]
    fn aromatic_ring() {
        let toks = tokenize("c1ccccc1").unwrap();
        assert_eq!(toks.len(), 8);
        assert_eq!(toks[1].kind, TokenKind::RingClosure(1));
        assert_eq!(toks[7].kind, TokenKind::RingClosure(1));
    }

    #[test]
    fn bracket_and_percent() {
        let toks = tokenize("C%12CC[nH+]C%12").unwrap();
        assert_eq!(toks[1].kind, TokenKind::RingClosure(12));
        assert_eq!(toks[4].kind, TokenKind::BracketAtom);
        assert_eq!(toks[4].text, "[nH+]");
    }

    #[test]
    fn class_start_marker() {
        let toks = tokenize("<1>CC").unwrap();
        assert_eq!(toks[0].kind, TokenKind::ClassStart);
        assert_eq!(toks.len(), 3);
    }

    #[test]
    fn errors() {
        assert_eq!(tokenize(""), Err(ChemError::EmptyInput));
        assert_eq!(tokenize("CC$C"), Err(ChemError::UnknownCharacter(2)));
        assert_eq!(tokenize("CX"), Err(ChemError::UnknownCharacter(1)));
        assert_eq!(tokenize("C[NH"), Err(ChemError::UnterminatedBracket(1)));
        assert_eq!(tokenize("C%1"), Err(ChemError::UnknownCharacter(1)));
    }

    #[test]
    fn concatenation_reproduces_input() {
        for s in ["CC(=O)Oc1ccccc1C(=O)O", "C[C@@H](N)C(=O)O", "F/C=C/F", "[Na+].[Cl-]"] {
            let joined: String = tokenize(s).unwrap().iter().map(|t| t.text.as_str()).collect();
            assert_eq!(joined, s);
        }
    }
}
