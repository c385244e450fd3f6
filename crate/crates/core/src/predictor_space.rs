//! Canonical indexing of the predictor space.
//!
//! Main effects occupy ids `1..=n_main`. Pairwise interactions follow in
//! lexicographic pair order `(1,2), (1,3), .., (1,n), (2,3), ..`. Id 0 is never
//! a term; chromosomes use it as the dummy marker.

use std::collections::BTreeSet;
use std::fmt;
use std::num::NonZeroU32;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a single term in a [`PredictorSpace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermId(NonZeroU32);

impl TermId {
    /// Returns `None` for 0, the dummy marker.
    pub fn new(id: u32) -> Option<Self> {
        NonZeroU32::new(id).map(TermId)
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }

    pub(crate) fn index(self) -> usize {
        self.0.get() as usize - 1
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Structural description of a term. Main-effect indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermDescriptor {
    MainEffect(u32),
    /// Unordered pair stored with `i < j`.
    Interaction(u32, u32),
}

impl TermDescriptor {
    /// Label using `x<i>` names, e.g. `x3` or `x1:x5`.
    pub fn label(&self) -> String {
        match *self {
            TermDescriptor::MainEffect(i) => format!("x{i}"),
            TermDescriptor::Interaction(i, j) => format!("x{i}:x{j}"),
        }
    }

    /// Label using the given column names (0-based lookup of the 1-based indices).
    pub fn label_with(&self, names: &[String]) -> String {
        let name = |i: u32| {
            names
                .get(i as usize - 1)
                .cloned()
                .unwrap_or_else(|| format!("x{i}"))
        };
        match *self {
            TermDescriptor::MainEffect(i) => name(i),
            TermDescriptor::Interaction(i, j) => format!("{}:{}", name(i), name(j)),
        }
    }

    /// Parses the `x3` / `x1:x5` form.
    pub fn parse_label(s: &str) -> Result<Self> {
        fn index(part: &str) -> Result<u32> {
            part.trim()
                .strip_prefix('x')
                .and_then(|d| d.parse::<u32>().ok())
                .filter(|&i| i >= 1)
                .ok_or_else(|| Error::invalid(format!("bad term label component `{part}`")))
        }
        match s.split_once(':') {
            None => Ok(TermDescriptor::MainEffect(index(s)?)),
            Some((a, b)) => {
                let (i, j) = (index(a)?, index(b)?);
                if i == j {
                    return Err(Error::invalid(format!("self-interaction `{s}`")));
                }
                Ok(TermDescriptor::Interaction(i.min(j), i.max(j)))
            }
        }
    }
}

/// Number of `order`-way interaction terms among `n` predictors, C(n, order).
pub fn interaction_count(n: u64, order: u64) -> u64 {
    if order > n {
        return 0;
    }
    let k = order.min(n - order);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Total number of candidate terms: main effects plus, optionally, all pairs.
pub fn term_count(n_main: u32, include_interactions: bool) -> Result<u32> {
    if n_main == 0 {
        return Err(Error::invalid("n_main must be at least 1"));
    }
    let n = u64::from(n_main);
    let total = if include_interactions {
        n + interaction_count(n, 2)
    } else {
        n
    };
    u32::try_from(total).map_err(|_| Error::invalid(format!("n_main = {n_main} is too large")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorSpace {
    n_main: u32,
    include_interactions: bool,
    total_terms: u32,
}

impl PredictorSpace {
    pub fn new(n_main: u32, include_interactions: bool) -> Result<Self> {
        let total_terms = term_count(n_main, include_interactions)?;
        Ok(PredictorSpace {
            n_main,
            include_interactions,
            total_terms,
        })
    }

    /// Only main effects (order 1) and pairwise interactions (order 2) are supported.
    pub fn with_order(n_main: u32, order: u32) -> Result<Self> {
        match order {
            1 => Self::new(n_main, false),
            2 => Self::new(n_main, true),
            _ => Err(Error::invalid(format!(
                "interaction order {order} is not supported (max 2)"
            ))),
        }
    }

    pub fn n_main(&self) -> u32 {
        self.n_main
    }

    pub fn include_interactions(&self) -> bool {
        self.include_interactions
    }

    pub fn total_terms(&self) -> u32 {
        self.total_terms
    }

    pub fn term(&self, id: u32) -> Result<TermId> {
        TermId::new(id)
            .filter(|_| id <= self.total_terms)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "term id {id} outside 1..={}",
                    self.total_terms
                ))
            })
    }

    pub fn terms(&self) -> impl Iterator<Item = TermId> + '_ {
        (1..=self.total_terms).filter_map(TermId::new)
    }

    pub fn is_valid(&self, id: TermId) -> bool {
        id.get() <= self.total_terms
    }

    pub fn is_main(&self, id: TermId) -> bool {
        id.get() <= self.n_main
    }

    /// Number of pairs that precede row `i` in lexicographic order.
    fn pairs_before(&self, i: u32) -> u32 {
        let (i, n) = (u64::from(i), u64::from(self.n_main));
        ((i - 1) * n - i * (i - 1) / 2) as u32
    }

    pub fn encode(&self, descriptor: TermDescriptor) -> Result<TermId> {
        let n = self.n_main;
        match descriptor {
            TermDescriptor::MainEffect(i) => {
                if i == 0 || i > n {
                    return Err(Error::invalid(format!("main effect {i} outside 1..={n}")));
                }
                self.term(i)
            }
            TermDescriptor::Interaction(i, j) => {
                if !self.include_interactions {
                    return Err(Error::invalid("predictor space has no interactions"));
                }
                if i == 0 || j > n || i >= j {
                    return Err(Error::invalid(format!(
                        "interaction ({i},{j}) requires 1 <= i < j <= {n}"
                    )));
                }
                self.term(n + self.pairs_before(i) + (j - i))
            }
        }
    }

    pub fn decode(&self, id: TermId) -> Result<TermDescriptor> {
        if !self.is_valid(id) {
            return Err(Error::invalid(format!(
                "term id {id} outside 1..={}",
                self.total_terms
            )));
        }
        let id = id.get();
        let n = self.n_main;
        if id <= n {
            return Ok(TermDescriptor::MainEffect(id));
        }
        let offset = id - n;
        // largest i in 1..n with pairs_before(i) < offset
        let (mut lo, mut hi) = (1, n - 1);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if self.pairs_before(mid) < offset {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let i = lo;
        let j = offset - self.pairs_before(i) + i;
        Ok(TermDescriptor::Interaction(i, j))
    }

    /// Parent main effects of an interaction; empty for main effects.
    pub fn parents_of(&self, id: TermId) -> Result<BTreeSet<TermId>> {
        Ok(self.parent_pair(id)?.into_iter().flat_map(|(a, b)| [a, b]).collect())
    }

    /// Parent pair of an interaction, `None` for a main effect.
    pub fn parent_pair(&self, id: TermId) -> Result<Option<(TermId, TermId)>> {
        match self.decode(id)? {
            TermDescriptor::MainEffect(_) => Ok(None),
            TermDescriptor::Interaction(i, j) => Ok(Some((self.term(i)?, self.term(j)?))),
        }
    }

    /// All interactions that contain the main effect `main_id`.
    pub fn children_of(&self, main_id: TermId) -> Result<BTreeSet<TermId>> {
        let m = match self.decode(main_id)? {
            TermDescriptor::MainEffect(m) => m,
            TermDescriptor::Interaction(i, j) => {
                return Err(Error::invalid(format!(
                    "term {main_id} is the interaction ({i},{j}), not a main effect"
                )))
            }
        };
        if !self.include_interactions {
            return Ok(BTreeSet::new());
        }
        let n = self.n_main;
        let mut out = BTreeSet::new();
        for i in 1..m {
            out.insert(self.encode(TermDescriptor::Interaction(i, m))?);
        }
        for j in (m + 1)..=n {
            out.insert(self.encode(TermDescriptor::Interaction(m, j))?);
        }
        Ok(out)
    }

    /// True when every interaction in `terms` has both parents in `terms`.
    pub fn is_hierarchical(&self, terms: &BTreeSet<TermId>) -> bool {
        terms.iter().all(|&t| match self.parent_pair(t) {
            Ok(Some((a, b))) => terms.contains(&a) && terms.contains(&b),
            Ok(None) => true,
            Err(_) => false,
        })
    }

    pub fn label(&self, id: TermId) -> String {
        self.decode(id)
            .map(|d| d.label())
            .unwrap_or_else(|_| format!("?{id}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: u32) -> PredictorSpace {
        PredictorSpace::new(n, true).unwrap()
    }

    fn t(id: u32) -> TermId {
        TermId::new(id).unwrap()
    }

    #[test]
    fn term_count_examples() {
        assert_eq!(term_count(100, true).unwrap(), 5050);
        assert_eq!(term_count(11, true).unwrap(), 66);
        assert_eq!(term_count(18, true).unwrap(), 171);
        assert_eq!(term_count(1, true).unwrap(), 1);
        assert_eq!(term_count(7, false).unwrap(), 7);
        assert!(term_count(0, true).is_err());
    }

    #[test]
    fn binomial_counts() {
        assert_eq!(interaction_count(100, 2), 4950);
        assert_eq!(interaction_count(10, 3), 120);
        assert_eq!(interaction_count(3, 5), 0);
        assert!(PredictorSpace::with_order(5, 3).is_err());
    }

    #[test]
    fn encode_decode_examples() {
        let s = sp(11);
        assert_eq!(s.encode(TermDescriptor::MainEffect(11)).unwrap(), t(11));
        assert_eq!(s.encode(TermDescriptor::Interaction(1, 2)).unwrap(), t(12));
        assert_eq!(s.encode(TermDescriptor::Interaction(10, 11)).unwrap(), t(66));
        assert_eq!(s.decode(t(12)).unwrap(), TermDescriptor::Interaction(1, 2));
        assert_eq!(s.decode(t(5)).unwrap(), TermDescriptor::MainEffect(5));
        assert_eq!(s.decode(t(66)).unwrap(), TermDescriptor::Interaction(10, 11));
    }

    #[test]
    fn encode_rejects_bad_descriptors() {
        let s = sp(11);
        assert!(s.encode(TermDescriptor::MainEffect(0)).is_err());
        assert!(s.encode(TermDescriptor::MainEffect(12)).is_err());
        assert!(s.encode(TermDescriptor::Interaction(2, 2)).is_err());
        assert!(s.encode(TermDescriptor::Interaction(3, 2)).is_err());
        assert!(s.encode(TermDescriptor::Interaction(1, 12)).is_err());
        assert!(s.decode(t(67)).is_err());
        assert!(s.term(0).is_err());
    }

    #[test]
    fn parents_and_children_examples() {
        let s = sp(11);
        assert_eq!(s.parents_of(t(12)).unwrap(), [t(1), t(2)].into());
        assert!(s.parents_of(t(3)).unwrap().is_empty());
        assert_eq!(s.parents_of(t(66)).unwrap(), [t(10), t(11)].into());

        let s3 = sp(3);
        assert_eq!(s3.children_of(t(1)).unwrap(), [t(4), t(5)].into());
        assert_eq!(s3.children_of(t(2)).unwrap(), [t(4), t(6)].into());
        assert!(s3.children_of(t(4)).is_err());
        assert!(sp(1).children_of(t(1)).unwrap().is_empty());
    }

    // Independent enumeration: walk pairs in nested-loop order and count.
    #[test]
    fn exhaustive_bijection_against_enumeration() {
        for n in 1..=200u32 {
            let s = sp(n);
            let mut next = n;
            for i in 1..=n {
                assert_eq!(s.encode(TermDescriptor::MainEffect(i)).unwrap().get(), i);
            }
            for i in 1..=n {
                for j in (i + 1)..=n {
                    next += 1;
                    let d = TermDescriptor::Interaction(i, j);
                    let id = s.encode(d).unwrap();
                    assert_eq!(id.get(), next);
                    assert_eq!(s.decode(id).unwrap(), d);
                }
            }
            assert_eq!(next, s.total_terms());
        }
    }

    #[test]
    fn children_parents_duality() {
        for n in 1..=25u32 {
            let s = sp(n);
            for m in 1..=n {
                let kids = s.children_of(t(m)).unwrap();
                assert_eq!(kids.len() as u32, n - 1);
                for c in s.terms() {
                    let is_parent = s.parents_of(c).unwrap().contains(&t(m));
                    assert_eq!(is_parent, kids.contains(&c));
                }
            }
        }
    }

    #[test]
    fn label_round_trip() {
        let s = sp(9);
        for id in s.terms() {
            let d = s.decode(id).unwrap();
            assert_eq!(TermDescriptor::parse_label(&d.label()).unwrap(), d);
        }
        assert!(TermDescriptor::parse_label("y3").is_err());
        assert!(TermDescriptor::parse_label("x2:x2").is_err());
    }
}
