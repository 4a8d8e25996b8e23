//! Exhaustive reference solvers.
//!
//! Everything here enumerates; nothing is clever. These functions are the
//! ground truth the rotation-based algorithms are checked against, and the
//! only solvers offered for the variants with ties.

use crate::error::{Error, Result};
use crate::instance::{AgentId, Instance};
use crate::matching::Matching;
use crate::query::AdaptQuery;
use crate::rotations::{RotationPoset, RotationSet};
use crate::stability::{check_notion, is_stable, pair_blocks, StabilityNotion};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_agents: usize,
    pub max_nonsingular: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_agents: 12,
            max_nonsingular: 24,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Open,
    Single,
    With(AgentId),
}

impl Slot {
    fn partner(self) -> Option<AgentId> {
        match self {
            Slot::With(b) => Some(b),
            _ => None,
        }
    }
}

struct Search<'a> {
    instance: &'a Instance,
    notion: StabilityNotion,
    slots: Vec<Slot>,
    found: Vec<Matching>,
}

impl Search<'_> {
    /// Whether some pair between `x` and an already decided agent blocks.
    fn certified_blocked(&self, x: AgentId) -> bool {
        let px = self.slots[x.index()].partner();
        self.instance.prefs(x).agents().any(|c| {
            let slot = self.slots[c.index()];
            slot != Slot::Open
                && px != Some(c)
                && pair_blocks(self.instance, px, slot.partner(), x, c, self.notion)
        })
    }

    fn run(&mut self, from: usize) {
        let n = self.slots.len();
        let Some(i) = (from..n).find(|&i| self.slots[i] == Slot::Open) else {
            let pairs = (0..n).filter_map(|a| match self.slots[a] {
                Slot::With(b) if a < b.index() => {
                    Some(crate::instance::Pair::new(AgentId::new(a), b))
                }
                _ => None,
            });
            let m = Matching::from_pairs(n, pairs).expect("search keeps pairs disjoint");
            debug_assert!(is_stable(self.instance, &m, self.notion));
            self.found.push(m);
            return;
        };
        let a = AgentId::new(i);

        self.slots[i] = Slot::Single;
        if !self.certified_blocked(a) {
            self.run(i + 1);
        }

        let candidates: Vec<AgentId> = self
            .instance
            .prefs(a)
            .agents()
            .filter(|&b| self.slots[b.index()] == Slot::Open)
            .collect();
        for b in candidates {
            self.slots[i] = Slot::With(b);
            self.slots[b.index()] = Slot::With(a);
            if !self.certified_blocked(a) && !self.certified_blocked(b) {
                self.run(i + 1);
            }
            self.slots[b.index()] = Slot::Open;
        }
        self.slots[i] = Slot::Open;
    }
}

/// All stable matchings under `notion`, sorted.
///
/// Backtracks over agents in id order; a partial matching is abandoned as
/// soon as a pair of two decided agents blocks it.
pub fn enumerate_stable_matchings(
    instance: &Instance,
    notion: StabilityNotion,
    limits: OracleLimits,
) -> Result<Vec<Matching>> {
    check_notion(instance, notion)?;
    if instance.n() > limits.max_agents {
        return Err(Error::InstanceTooLarge {
            what: "agents",
            size: instance.n(),
            cap: limits.max_agents,
        });
    }
    let mut search = Search {
        instance,
        notion,
        slots: vec![Slot::Open; instance.n()],
        found: Vec::new(),
    };
    search.run(0);
    let mut found = search.found;
    found.sort();
    Ok(found)
}

/// A stable matching satisfying the query with the smallest symmetric
/// difference to `m1` (ties broken by matching order), or `None` when none
/// exists within budget.
pub fn oracle_adapt(
    instance: &Instance,
    query: &AdaptQuery,
    notion: StabilityNotion,
    limits: OracleLimits,
) -> Result<Option<Matching>> {
    Ok(oracle_optimum(instance, query, notion, limits)?
        .filter(|(_, d)| *d <= query.k)
        .map(|(m, _)| m))
}

/// The unconstrained-by-budget optimum: best admissible matching and its
/// difference size.
pub fn oracle_optimum(
    instance: &Instance,
    query: &AdaptQuery,
    notion: StabilityNotion,
    limits: OracleLimits,
) -> Result<Option<(Matching, usize)>> {
    let all = enumerate_stable_matchings(instance, notion, limits)?;
    Ok(all
        .into_iter()
        .filter(|m| query.admits(m))
        .map(|m| {
            let d = m.difference_size(&query.m1);
            (m, d)
        })
        .min_by(|(ma, da), (mb, db)| da.cmp(db).then_with(|| ma.cmp(mb))))
}

/// Every closed complete rotation set, sorted.
pub fn enumerate_closed_complete_subsets(
    poset: &RotationPoset,
    limits: OracleLimits,
) -> Result<Vec<RotationSet>> {
    let pairs = poset.dual_pairs();
    let nonsingular = pairs.len() * 2;
    if nonsingular > limits.max_nonsingular {
        return Err(Error::InstanceTooLarge {
            what: "nonsingular rotations",
            size: nonsingular,
            cap: limits.max_nonsingular,
        });
    }
    let singular = poset.singular();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let mut z = singular.clone();
        for (bit, &(a, b)) in pairs.iter().enumerate() {
            z.insert(if mask >> bit & 1 == 0 { a } else { b });
        }
        if poset.is_closed(&z) {
            out.push(z);
        }
    }
    out.sort();
    Ok(out)
}
