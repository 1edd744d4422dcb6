//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `AGCK` |
//! | 4 | format version (u32, currently 1) |
//! | 8 | header length `h` (u64) |
//! | h | UTF-8 JSON header ([`CheckpointHeader`]) |
//! | rest | f64 blocks in header order: generator, generator Adam m, generator Adam v, critic, critic Adam m, critic Adam v |

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adversarial::ModelState;
use crate::data::Vocabulary;
use crate::neural::{AdamState, CriticDims, CriticParams, GeneratorDims, GeneratorParams, TensorSpec};

pub const MAGIC: &[u8; 4] = b"AGCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub config_hash: String,
    /// "pretrain" or "adversarial"
    pub kind: String,
    pub epoch: usize,
    pub class_names: Vec<String>,
    pub vocabulary: Vocabulary,
    /// per-class (mean, std) token length of the training set
    pub length_stats: Vec<(f64, f64)>,
    pub generator_dims: GeneratorDims,
    pub critic_dims: CriticDims,
    pub generator_tensors: Vec<TensorSpec>,
    pub critic_tensors: Vec<TensorSpec>,
    pub generator_adam_step: u64,
    pub critic_adam_step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub state: ModelState,
}

impl Checkpoint {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        config_hash: &str,
        kind: &str,
        epoch: usize,
        class_names: &[String],
        vocabulary: &Vocabulary,
        length_stats: &[(f64, f64)],
        state: &ModelState,
    ) -> Checkpoint {
        Checkpoint {
            header: CheckpointHeader {
                config_hash: config_hash.to_string(),
                kind: kind.to_string(),
                epoch,
                class_names: class_names.to_vec(),
                vocabulary: vocabulary.clone(),
                length_stats: length_stats.to_vec(),
                generator_dims: state.generator.dims,
                critic_dims: state.critic.dims.clone(),
                generator_tensors: state.generator.dims.layout(),
                critic_tensors: state.critic.dims.layout(),
                generator_adam_step: state.generator_adam.step,
                critic_adam_step: state.critic_adam.step,
            },
            state: state.clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header).expect("header serializes");
        let s = &self.state;
        let blocks = [
            &s.generator.data,
            &s.generator_adam.m,
            &s.generator_adam.v,
            &s.critic.data,
            &s.critic_adam.m,
            &s.critic_adam.v,
        ];
        let floats: usize = blocks.iter().map(|b| b.len()).sum();
        let mut out = Vec::with_capacity(16 + header.len() + 8 * floats);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for block in blocks {
            for x in block.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
        let bad = |m: &str| CheckpointError::Format(m.to_string());
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(bad("missing magic"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(CheckpointError::Format(format!("unsupported version {version}")));
        }
        let h = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        let header_end = 16usize.checked_add(h).filter(|&e| e <= bytes.len()).ok_or_else(|| bad("truncated header"))?;
        let header: CheckpointHeader =
            serde_json::from_slice(&bytes[16..header_end]).map_err(|e| CheckpointError::Format(e.to_string()))?;
        let body = &bytes[header_end..];
        if body.len() % 8 != 0 {
            return Err(bad("body is not a whole number of f64 values"));
        }
        let values: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let g = header.generator_dims.parameter_count();
        let c = header.critic_dims.parameter_count();
        if values.len() != 3 * g + 3 * c {
            return Err(CheckpointError::Format(format!(
                "expected {} values, found {}",
                3 * g + 3 * c,
                values.len()
            )));
        }
        let mut rest = values.as_slice();
        let mut take = |n: usize| {
            let (a, b) = rest.split_at(n);
            rest = b;
            a.to_vec()
        };
        let generator = GeneratorParams::from_data(header.generator_dims, take(g)).map_err(|e| bad(&e.to_string()))?;
        let generator_adam = AdamState {
            m: take(g),
            v: take(g),
            step: header.generator_adam_step,
        };
        let critic = CriticParams::from_data(header.critic_dims.clone(), take(c)).map_err(|e| bad(&e.to_string()))?;
        let critic_adam = AdamState {
            m: take(c),
            v: take(c),
            step: header.critic_adam_step,
        };
        Ok(Checkpoint {
            header,
            state: ModelState {
                generator,
                generator_adam,
                critic,
                critic_adam,
            },
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CheckpointError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Checkpoint, CheckpointError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Checkpoint::from_bytes(&bytes)
    }
}

/// `epoch-007-1a2b3c4d.ckpt`: epoch and the first eight hash digits.
pub fn checkpoint_name(epoch: usize, config_hash: &str) -> String {
    format!("epoch-{epoch:03}-{}.ckpt", &config_hash[..config_hash.len().min(8)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let vocab = Vocabulary::from_tokens(
            ["<pad>", "<eos>", "<start:0>", "C", "O"].iter().map(|s| s.to_string()).collect(),
            1,
        );
        let g = GeneratorParams::init(GeneratorDims { vocab: 5, emb: 2, hid: 3 }, 1);
        let c = CriticParams::init(
            CriticDims {
                vocab: 5,
                emb: 2,
                windows: vec![1, 2],
                filters: 2,
                pad_to: 6,
                pad_token: 0,
            },
            0.01,
            2,
        );
        let mut state = ModelState::new(g, c);
        state.generator_adam.m[0] = 0.25;
        state.critic_adam.step = 4;
        Checkpoint::new("ab".repeat(32).as_str(), "pretrain", 0, &["A".into()], &vocab, &[(12.0, 2.0)], &state)
    }

    #[test]
    fn round_trip_is_exact() {
        let ck = sample();
        let bytes = ck.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let bytes = sample().to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        assert!(Checkpoint::from_bytes(b"NOPE0000000000000000").is_err());
        let mut v = bytes.clone();
        v[4] = 9;
        assert!(Checkpoint::from_bytes(&v).is_err());
    }

    #[test]
    fn names() {
        assert_eq!(checkpoint_name(7, "1a2b3c4d5e6f"), "epoch-007-1a2b3c4d.ckpt");
    }
}
