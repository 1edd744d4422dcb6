//! Class-conditional SMILES generation: an LSTM policy trained by policy
//! gradient against a Wasserstein critic and a frozen random-forest
//! auxiliary classifier.

pub mod adversarial;
pub mod auxdisc;
pub mod checkpoint;
pub mod chem;
pub mod config;
pub mod data;
pub mod descriptors;
pub mod metrics;
pub mod neural;
pub mod pipeline;
pub mod seeding;
