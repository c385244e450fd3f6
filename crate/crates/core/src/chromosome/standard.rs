use std::fmt;

use rand::Rng;

use super::{
    check_probability, hierarchy_violations, Chromosome, Encoding, InitParams, MutationLog,
    MutationRates, RepairLog,
};
use crate::error::{Error, Result};
use crate::predictor_space::{PredictorSpace, TermId};

/// One inclusion bit per term of the predictor space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StandardChromosome {
    bits: Vec<bool>,
}

impl StandardChromosome {
    pub fn empty(space: &PredictorSpace) -> Self {
        StandardChromosome {
            bits: vec![false; space.total_terms() as usize],
        }
    }

    /// Raw bits, unrepaired. Length must equal the term count of the space it is used with.
    pub fn from_bits(bits: Vec<bool>) -> Self {
        StandardChromosome { bits }
    }

    pub fn from_terms(space: &PredictorSpace, terms: &[TermId]) -> Result<Self> {
        let mut c = Self::empty(space);
        for &t in terms {
            if !space.is_valid(t) {
                return Err(Error::invalid(format!("term {t} not in predictor space")));
            }
            c.bits[t.index()] = true;
        }
        Ok(c)
    }

    /// Each bit set independently with probability `density`, before any repair.
    pub fn random_unrepaired<R: Rng + ?Sized>(
        space: &PredictorSpace,
        density: f64,
        rng: &mut R,
    ) -> Result<Self> {
        check_probability("init_density", density)?;
        let bits = (0..space.total_terms())
            .map(|_| rng.random_bool(density))
            .collect();
        Ok(StandardChromosome { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, t: TermId) -> bool {
        self.bits.get(t.index()).copied().unwrap_or(false)
    }

    /// Clears every included interaction of main effect `main`.
    fn cascade_delete(&mut self, space: &PredictorSpace, main: TermId) -> usize {
        let mut removed = 0;
        if let Ok(children) = space.children_of(main) {
            for c in children {
                if std::mem::replace(&mut self.bits[c.index()], false) {
                    removed += 1;
                }
            }
        }
        removed
    }

    /// Flips one bit, cascading a main-effect removal to its interactions and
    /// repairing hierarchy afterwards.
    pub fn flip(&mut self, space: &PredictorSpace, id: TermId) -> MutationLog {
        let pos = id.index();
        let mut log = MutationLog::default();
        if pos >= self.bits.len() {
            return log;
        }
        self.bits[pos] = !self.bits[pos];
        log.flips = 1;
        if space.is_main(id) && !self.bits[pos] {
            log.cascade_removed = self.cascade_delete(space, id);
        }
        log.repair = self.repair_in_place(space);
        log
    }

    fn repair_in_place(&mut self, space: &PredictorSpace) -> RepairLog {
        let mut log = RepairLog::default();
        let first_interaction = space.n_main() as usize;
        for idx in first_interaction..self.bits.len() {
            if !self.bits[idx] {
                continue;
            }
            let Some(id) = TermId::new(idx as u32 + 1) else {
                continue;
            };
            if let Ok(Some((a, b))) = space.parent_pair(id) {
                for p in [a, b] {
                    if !std::mem::replace(&mut self.bits[p.index()], true) {
                        log.inserted_parents += 1;
                    }
                }
            }
        }
        log
    }
}

impl fmt::Display for StandardChromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Chromosome for StandardChromosome {
    const ENCODING: Encoding = Encoding::Standard;

    fn random<R: Rng + ?Sized>(
        space: &PredictorSpace,
        params: &InitParams,
        rng: &mut R,
    ) -> Result<(Self, RepairLog)> {
        let mut c = Self::random_unrepaired(space, params.init_density, rng)?;
        for &s in &params.seeds {
            if !space.is_valid(s) {
                return Err(Error::invalid(format!("seed term {s} not in predictor space")));
            }
            c.bits[s.index()] = true;
        }
        let log = c.repair_in_place(space);
        Ok((c, log))
    }

    fn active_terms(&self) -> Vec<TermId> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .filter_map(|(i, _)| TermId::new(i as u32 + 1))
            .collect()
    }

    fn model_size(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    fn repair<R: Rng + ?Sized>(&mut self, space: &PredictorSpace, _rng: &mut R) -> RepairLog {
        self.repair_in_place(space)
    }

    fn crossover<R: Rng + ?Sized>(
        &self,
        other: &Self,
        space: &PredictorSpace,
        _rng: &mut R,
    ) -> Result<(Self, Self, RepairLog)> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "crossover length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let mid = self.len() / 2;
        let splice = |head: &Self, tail: &Self| StandardChromosome {
            bits: head.bits[..mid]
                .iter()
                .chain(&tail.bits[mid..])
                .copied()
                .collect(),
        };
        let mut a = splice(self, other);
        let mut b = splice(other, self);
        let mut log = a.repair_in_place(space);
        log.merge(b.repair_in_place(space));
        Ok((a, b, log))
    }

    fn mutate<R: Rng + ?Sized>(
        &mut self,
        rates: &MutationRates,
        space: &PredictorSpace,
        rng: &mut R,
    ) -> MutationLog {
        let log = MutationLog::default();
        if self.bits.is_empty() || !rng.random_bool(rates.p_mutate) {
            return log;
        }
        let pos = rng.random_range(0..self.bits.len());
        let id = TermId::new(pos as u32 + 1).expect("position + 1 is nonzero");
        self.flip(space, id)
    }

    fn check(&self, space: &PredictorSpace) -> Result<()> {
        if self.len() != space.total_terms() as usize {
            return Err(Error::invalid(format!(
                "standard chromosome has {} bits, space has {} terms",
                self.len(),
                space.total_terms()
            )));
        }
        let bad = hierarchy_violations(&self.active_terms(), space);
        if !bad.is_empty() {
            return Err(Error::invalid(format!("hierarchy violated by terms {bad:?}")));
        }
        Ok(())
    }

    fn parse(s: &str, space: &PredictorSpace) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!("bad bit `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let c = StandardChromosome { bits };
        c.check(space)?;
        Ok(c)
    }
}
