//! The two chromosome encodings and their genetic operators.
//!
//! [`StandardChromosome`] is one bit per candidate term. [`IndexedChromosome`]
//! is a fixed number of slots, each holding a term id or a dummy. Every public
//! operator returns a chromosome that obeys strong hierarchy: an included
//! interaction always has both of its main effects included.

mod indexed;
mod standard;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor_space::{PredictorSpace, TermId};

pub use indexed::IndexedChromosome;
pub use standard::StandardChromosome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Standard,
    Indexed,
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Standard => "standard",
            Encoding::Indexed => "indexed",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationRates {
    /// Probability that a standard chromosome has one uniformly chosen bit flipped.
    pub p_mutate: f64,
    /// Probability of an addition mutation (indexed).
    pub p_add: f64,
    /// Probability of a deletion mutation (indexed).
    pub p_del: f64,
}

impl Default for MutationRates {
    fn default() -> Self {
        MutationRates {
            p_mutate: 1.0,
            p_add: 0.5,
            p_del: 0.5,
        }
    }
}

impl MutationRates {
    pub fn zero() -> Self {
        MutationRates {
            p_mutate: 0.0,
            p_add: 0.0,
            p_del: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_mutate", self.p_mutate),
            ("p_add", self.p_add),
            ("p_del", self.p_del),
        ] {
            check_probability(name, p)?;
        }
        Ok(())
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {p} is not a probability")))
    }
}

/// What hierarchy repair had to do.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairLog {
    pub inserted_parents: usize,
    /// Interactions dropped because no dummy slot was free for a missing parent.
    pub overflows: usize,
}

impl RepairLog {
    pub fn merge(&mut self, other: RepairLog) {
        self.inserted_parents += other.inserted_parents;
        self.overflows += other.overflows;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationLog {
    pub flips: usize,
    pub additions: usize,
    pub deletions: usize,
    /// Interactions removed because a parent main effect was deleted.
    pub cascade_removed: usize,
    /// Mutation events that fired but had no eligible slot or term.
    pub noops: usize,
    pub repair: RepairLog,
}

impl MutationLog {
    pub fn merge(&mut self, other: MutationLog) {
        self.flips += other.flips;
        self.additions += other.additions;
        self.deletions += other.deletions;
        self.cascade_removed += other.cascade_removed;
        self.noops += other.noops;
        self.repair.merge(other.repair);
    }
}

/// Parameters for building an initial population member.
#[derive(Clone, Debug, Default)]
pub struct InitParams {
    /// Per-bit inclusion probability (standard encoding).
    pub init_density: f64,
    /// Slot count `l` (indexed encoding).
    pub max_length: usize,
    /// Terms forced into (standard) or used instead of random draws for (indexed)
    /// the initial chromosome.
    pub seeds: Vec<TermId>,
}

/// Operations shared by both encodings.
pub trait Chromosome: Clone + Send + Sync + fmt::Display + fmt::Debug + Sized {
    const ENCODING: Encoding;

    fn random<R: Rng + ?Sized>(
        space: &PredictorSpace,
        params: &InitParams,
        rng: &mut R,
    ) -> Result<(Self, RepairLog)>;

    /// Sorted included terms.
    fn active_terms(&self) -> Vec<TermId>;

    fn model_size(&self) -> usize {
        self.active_terms().len()
    }

    fn repair<R: Rng + ?Sized>(&mut self, space: &PredictorSpace, rng: &mut R) -> RepairLog;

    fn crossover<R: Rng + ?Sized>(
        &self,
        other: &Self,
        space: &PredictorSpace,
        rng: &mut R,
    ) -> Result<(Self, Self, RepairLog)>;

    fn mutate<R: Rng + ?Sized>(
        &mut self,
        rates: &MutationRates,
        space: &PredictorSpace,
        rng: &mut R,
    ) -> MutationLog;

    /// Structural validity: length, id range, hierarchy and (indexed) uniqueness.
    fn check(&self, space: &PredictorSpace) -> Result<()>;

    fn parse(s: &str, space: &PredictorSpace) -> Result<Self>;
}

/// Indices of the active terms whose parents are missing, for diagnostics.
pub fn hierarchy_violations(terms: &[TermId], space: &PredictorSpace) -> Vec<TermId> {
    terms
        .iter()
        .copied()
        .filter(|&t| match space.parent_pair(t) {
            Ok(Some((a, b))) => terms.binary_search(&a).is_err() || terms.binary_search(&b).is_err(),
            Ok(None) => false,
            Err(_) => true,
        })
        .collect()
}
