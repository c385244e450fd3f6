use std::fmt;

use rand::seq::index::sample;
use rand::Rng;

use super::{
    hierarchy_violations, Chromosome, Encoding, InitParams, MutationLog, MutationRates, RepairLog,
};
use crate::error::{Error, Result};
use crate::predictor_space::{PredictorSpace, TermId};

/// Fixed-length slot vector; `None` marks a dummy slot.
///
/// The number of slots is the maximum model size and never changes. Non-dummy
/// slots hold distinct term ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexedChromosome {
    slots: Vec<Option<TermId>>,
}

impl IndexedChromosome {
    pub fn all_dummy(length: usize) -> Self {
        IndexedChromosome {
            slots: vec![None; length],
        }
    }

    /// Slot values as given, unrepaired and unchecked.
    pub fn from_slots(slots: Vec<Option<TermId>>) -> Self {
        IndexedChromosome { slots }
    }

    pub fn slots(&self) -> &[Option<TermId>] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn contains(&self, t: TermId) -> bool {
        self.slots.contains(&Some(t))
    }

    fn dummy_positions(&self) -> Vec<usize> {
        self.positions(|s| s.is_none())
    }

    fn filled_positions(&self) -> Vec<usize> {
        self.positions(|s| s.is_some())
    }

    fn positions(&self, pred: impl Fn(&Option<TermId>) -> bool) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| pred(s))
            .map(|(i, _)| i)
            .collect()
    }

    /// Random initial chromosome before hierarchy repair.
    ///
    /// The number of included terms is uniform on `1..=l` (capped by the term
    /// count), the terms are drawn without replacement, and so are their slot
    /// positions. When `seeds` is non-empty those terms are placed instead.
    pub fn random_unrepaired<R: Rng + ?Sized>(
        space: &PredictorSpace,
        length: usize,
        seeds: &[TermId],
        rng: &mut R,
    ) -> Result<Self> {
        if length == 0 {
            return Err(Error::invalid("indexed chromosome length must be at least 1"));
        }
        let terms: Vec<TermId> = if seeds.is_empty() {
            let total = space.total_terms() as usize;
            let k = rng.random_range(1..=length.min(total));
            sample(rng, total, k)
                .into_iter()
                .map(|i| TermId::new(i as u32 + 1).expect("nonzero"))
                .collect()
        } else {
            let mut s = seeds.to_vec();
            s.sort();
            s.dedup();
            if let Some(bad) = s.iter().find(|t| !space.is_valid(**t)) {
                return Err(Error::invalid(format!("seed term {bad} not in predictor space")));
            }
            if s.len() > length {
                return Err(Error::invalid(format!(
                    "{} seed terms do not fit in {length} slots",
                    s.len()
                )));
            }
            s
        };
        let mut c = Self::all_dummy(length);
        for (pos, term) in sample(rng, length, terms.len()).into_iter().zip(terms) {
            c.slots[pos] = Some(term);
        }
        Ok(c)
    }

    /// Removes interactions containing `main`. Returns how many were removed.
    fn cascade_delete(&mut self, space: &PredictorSpace, main: TermId) -> usize {
        let mut removed = 0;
        for slot in &mut self.slots {
            if let Some(t) = *slot {
                if let Ok(Some((a, b))) = space.parent_pair(t) {
                    if a == main || b == main {
                        *slot = None;
                        removed += 1;
                    }
                }
            }
        }
        removed
    }

    /// Clears every slot at or after `mid` whose value also appears before `mid`.
    fn drop_tail_duplicates(&mut self, mid: usize) {
        let (head, tail) = self.slots.split_at_mut(mid);
        for slot in tail.iter_mut() {
            if slot.is_some() && head.contains(slot) {
                *slot = None;
            }
        }
    }

    /// Deletion mutation on a specific slot, with cascade.
    pub fn delete_at(&mut self, space: &PredictorSpace, pos: usize) -> usize {
        match self.slots.get_mut(pos).and_then(Option::take) {
            Some(t) if space.is_main(t) => self.cascade_delete(space, t),
            _ => 0,
        }
    }

    fn draw_absent_term<R: Rng + ?Sized>(&self, space: &PredictorSpace, rng: &mut R) -> Option<TermId> {
        let total = space.total_terms();
        let present = self.slots.iter().flatten().count() as u32;
        if present >= total {
            return None;
        }
        if present * 2 <= total {
            loop {
                let t = TermId::new(rng.random_range(1..=total)).expect("nonzero");
                if !self.contains(t) {
                    return Some(t);
                }
            }
        }
        let absent: Vec<TermId> = space.terms().filter(|&t| !self.contains(t)).collect();
        Some(absent[rng.random_range(0..absent.len())])
    }
}

impl fmt::Display for IndexedChromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", s.map_or(0, TermId::get))?;
        }
        Ok(())
    }
}

impl Chromosome for IndexedChromosome {
    const ENCODING: Encoding = Encoding::Indexed;

    /// A chromosome that ends up with no terms because every drawn interaction
    /// overflowed (only possible for `l < 3`) is redrawn; seeded draws are not.
    fn random<R: Rng + ?Sized>(
        space: &PredictorSpace,
        params: &InitParams,
        rng: &mut R,
    ) -> Result<(Self, RepairLog)> {
        let mut total_log = RepairLog::default();
        loop {
            let mut c = Self::random_unrepaired(space, params.max_length, &params.seeds, rng)?;
            let log = c.repair(space, rng);
            total_log.merge(log);
            if !params.seeds.is_empty() || c.model_size() > 0 {
                return Ok((c, total_log));
            }
        }
    }

    fn active_terms(&self) -> Vec<TermId> {
        let mut v: Vec<TermId> = self.slots.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    fn model_size(&self) -> usize {
        self.slots.iter().flatten().count()
    }

    /// Interactions are visited in ascending id order. Missing parents go into
    /// uniformly chosen dummy slots; when there are not enough dummy slots for
    /// all missing parents the interaction itself is removed.
    fn repair<R: Rng + ?Sized>(&mut self, space: &PredictorSpace, rng: &mut R) -> RepairLog {
        let mut log = RepairLog::default();
        let mut interactions: Vec<(usize, TermId)> = self
            .slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.filter(|t| !space.is_main(*t)).map(|t| (i, t)))
            .collect();
        interactions.sort_by_key(|&(_, t)| t);

        for (pos, term) in interactions {
            let Ok(Some((a, b))) = space.parent_pair(term) else {
                continue;
            };
            let missing: Vec<TermId> = [a, b].into_iter().filter(|&p| !self.contains(p)).collect();
            if missing.is_empty() {
                continue;
            }
            let mut dummies = self.dummy_positions();
            if dummies.len() < missing.len() {
                self.slots[pos] = None;
                log.overflows += 1;
                continue;
            }
            for p in missing {
                let k = rng.random_range(0..dummies.len());
                self.slots[dummies.swap_remove(k)] = Some(p);
                log.inserted_parents += 1;
            }
        }
        log
    }

    fn crossover<R: Rng + ?Sized>(
        &self,
        other: &Self,
        space: &PredictorSpace,
        rng: &mut R,
    ) -> Result<(Self, Self, RepairLog)> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "crossover length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let mid = self.len() / 2;
        let splice = |head: &Self, tail: &Self| {
            let mut c = IndexedChromosome {
                slots: head.slots[..mid]
                    .iter()
                    .chain(&tail.slots[mid..])
                    .copied()
                    .collect(),
            };
            c.drop_tail_duplicates(mid);
            c
        };
        let mut a = splice(self, other);
        let mut b = splice(other, self);
        let mut log = a.repair(space, rng);
        log.merge(b.repair(space, rng));
        Ok((a, b, log))
    }

    /// Deletion is applied before addition; each fires independently.
    fn mutate<R: Rng + ?Sized>(
        &mut self,
        rates: &MutationRates,
        space: &PredictorSpace,
        rng: &mut R,
    ) -> MutationLog {
        let mut log = MutationLog::default();
        if rng.random_bool(rates.p_del) {
            let filled = self.filled_positions();
            if filled.is_empty() {
                log.noops += 1;
            } else {
                let pos = filled[rng.random_range(0..filled.len())];
                log.cascade_removed = self.delete_at(space, pos);
                log.deletions = 1;
            }
        }
        if rng.random_bool(rates.p_add) {
            let dummies = self.dummy_positions();
            match (dummies.is_empty(), self.draw_absent_term(space, rng)) {
                (false, Some(term)) => {
                    let pos = dummies[rng.random_range(0..dummies.len())];
                    self.slots[pos] = Some(term);
                    log.additions = 1;
                }
                _ => log.noops += 1,
            }
        }
        if log.additions + log.deletions > 0 {
            log.repair = self.repair(space, rng);
        }
        log
    }

    fn check(&self, space: &PredictorSpace) -> Result<()> {
        let terms = self.active_terms();
        if let Some(bad) = terms.iter().find(|t| !space.is_valid(**t)) {
            return Err(Error::invalid(format!("slot value {bad} not in predictor space")));
        }
        if terms.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate slot values in {self}")));
        }
        let bad = hierarchy_violations(&terms, space);
        if !bad.is_empty() {
            return Err(Error::invalid(format!("hierarchy violated by terms {bad:?}")));
        }
        Ok(())
    }

    fn parse(s: &str, space: &PredictorSpace) -> Result<Self> {
        let slots = s
            .trim()
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<u32>()
                    .map(TermId::new)
                    .map_err(|_| Error::invalid(format!("bad slot value `{v}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let c = IndexedChromosome { slots };
        c.check(space)?;
        Ok(c)
    }
}
