//! Genetic-algorithm variable selection over main effects and pairwise
//! interactions, with a standard bit-vector chromosome and an indexed
//! fixed-length chromosome, scored by cross-validated logistic regression.

pub mod chromosome;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod fitness;
pub mod ga;
pub mod ingest;
pub mod predictor_space;
pub mod report;

pub use chromosome::{
    Chromosome, Encoding, IndexedChromosome, InitParams, MutationLog, MutationRates, RepairLog,
    StandardChromosome,
};
pub use error::{Error, Result};
pub use ga::{run, GaConfig, RunReport};
pub use fitness::{Dataset, Metric};
pub use predictor_space::{term_count, PredictorSpace, TermDescriptor, TermId};
