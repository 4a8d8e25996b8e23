use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::instance::{AgentId, Instance, Pair};

/// A set of disjoint pairs, with a partner array kept in sync.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    pairs: BTreeSet<Pair>,
    partner: Vec<Option<AgentId>>,
}

impl Matching {
    pub fn empty(num_agents: usize) -> Self {
        Matching {
            pairs: BTreeSet::new(),
            partner: vec![None; num_agents],
        }
    }

    /// Fails if two pairs share an agent or an agent is out of range.
    pub fn from_pairs(num_agents: usize, pairs: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let mut m = Matching::empty(num_agents);
        for p in pairs {
            m.insert(p)?;
        }
        Ok(m)
    }

    /// Builds a matching and checks that every pair is mutually acceptable.
    pub fn on(instance: &Instance, pairs: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let m = Matching::from_pairs(instance.n(), pairs)?;
        m.check_acceptable(instance)?;
        Ok(m)
    }

    fn insert(&mut self, p: Pair) -> Result<()> {
        let n = self.partner.len();
        if p.hi().index() >= n {
            return Err(Error::InvalidMatching(format!(
                "agent {} out of range (n = {n})",
                p.hi()
            )));
        }
        if self.pairs.contains(&p) {
            return Ok(());
        }
        for a in [p.lo(), p.hi()] {
            if self.partner[a.index()].is_some() {
                return Err(Error::InvalidMatching(format!(
                    "agent {a} occurs in two pairs"
                )));
            }
        }
        self.partner[p.lo().index()] = Some(p.hi());
        self.partner[p.hi().index()] = Some(p.lo());
        self.pairs.insert(p);
        Ok(())
    }

    pub fn check_acceptable(&self, instance: &Instance) -> Result<()> {
        if self.partner.len() != instance.n() {
            return Err(Error::InvalidMatching(format!(
                "matching covers {} agents, instance has {}",
                self.partner.len(),
                instance.n()
            )));
        }
        for p in &self.pairs {
            if !instance.is_acceptable(p.lo(), p.hi()) || !instance.is_acceptable(p.hi(), p.lo()) {
                return Err(Error::InvalidMatching(format!(
                    "pair {} is not mutually acceptable",
                    instance.pair_name(*p)
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn partner(&self, a: AgentId) -> Option<AgentId> {
        self.partner[a.index()]
    }

    pub fn contains(&self, p: &Pair) -> bool {
        self.pairs.contains(p)
    }

    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.pairs.iter().copied()
    }

    pub fn pair_set(&self) -> &BTreeSet<Pair> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn num_agents(&self) -> usize {
        self.partner.len()
    }

    pub fn is_complete(&self) -> bool {
        self.partner.iter().all(Option::is_some)
    }

    pub fn matched_agents(&self) -> BTreeSet<AgentId> {
        self.pairs.iter().flat_map(|p| [p.lo(), p.hi()]).collect()
    }

    pub fn difference_size(&self, other: &Matching) -> usize {
        self.pairs.symmetric_difference(&other.pairs).count()
    }

    pub fn display(&self, instance: &Instance) -> String {
        let parts: Vec<String> = self.pairs.iter().map(|&p| instance.pair_name(p)).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Matchings compare by their sorted pair sequences.
impl Ord for Matching {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pairs.iter().cmp(other.pairs.iter())
    }
}

impl PartialOrd for Matching {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pairs belonging to exactly one of the two matchings, and their count.
pub fn symmetric_difference(m: &Matching, m2: &Matching) -> (BTreeSet<Pair>, usize) {
    let diff: BTreeSet<Pair> = m.pairs.symmetric_difference(&m2.pairs).copied().collect();
    let size = diff.len();
    (diff, size)
}
