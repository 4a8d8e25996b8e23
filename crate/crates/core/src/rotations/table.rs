//! Stable tables: reduced preference lists reachable from the phase-1 table
//! by eliminating exposed rotations.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::instance::{AgentId, Instance, Pair};
use crate::matching::Matching;
use crate::stability::{check_notion, StabilityNotion};

/// The cyclic pair sequence of a rotation, rotated so that the smallest
/// pair comes first. Shifted versions of one cycle have one representation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycle(Vec<(AgentId, AgentId)>);

impl Cycle {
    pub fn new(mut pairs: Vec<(AgentId, AgentId)>) -> Self {
        assert!(!pairs.is_empty(), "a rotation has at least one pair");
        let start = pairs
            .iter()
            .enumerate()
            .min_by_key(|(_, p)| **p)
            .map(|(i, _)| i)
            .unwrap_or(0);
        pairs.rotate_left(start);
        Cycle(pairs)
    }

    pub fn pairs(&self) -> &[(AgentId, AgentId)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The companion cycle `(y_s, x_{s-1})` for `s = 0..r`.
    pub fn dual(&self) -> Cycle {
        let r = self.0.len();
        let pairs = (0..r)
            .map(|s| (self.0[s].1, self.0[(s + r - 1) % r].0))
            .collect();
        Cycle::new(pairs)
    }

    pub fn display(&self, instance: &Instance) -> String {
        self.0
            .iter()
            .map(|&(x, y)| format!("({},{})", instance.name(x), instance.name(y)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, y)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({},{})", x.0, y.0)?;
        }
        Ok(())
    }
}

/// Reduced preference lists, best first.
///
/// Agents whose list is already empty in the phase-1 table are unmatched in
/// every stable matching; they stay empty and are ignored by the
/// feasibility checks. Any other list becoming empty marks the table
/// infeasible, which happens only when no stable matching exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableTable {
    lists: Vec<Vec<AgentId>>,
    active: Vec<bool>,
    provenance: Vec<Cycle>,
}

impl StableTable {
    pub fn list(&self, a: AgentId) -> &[AgentId] {
        &self.lists[a.index()]
    }

    pub fn num_agents(&self) -> usize {
        self.lists.len()
    }

    /// Rotations eliminated to reach this table from the phase-1 table, in order.
    pub fn provenance(&self) -> &[Cycle] {
        &self.provenance
    }

    pub fn is_active(&self, a: AgentId) -> bool {
        self.active[a.index()]
    }

    pub fn first(&self, a: AgentId) -> Option<AgentId> {
        self.lists[a.index()].first().copied()
    }

    pub fn second(&self, a: AgentId) -> Option<AgentId> {
        self.lists[a.index()].get(1).copied()
    }

    pub fn last(&self, a: AgentId) -> Option<AgentId> {
        self.lists[a.index()].last().copied()
    }

    pub fn contains(&self, a: AgentId, b: AgentId) -> bool {
        self.lists[a.index()].contains(&b)
    }

    pub fn is_infeasible(&self) -> bool {
        self.lists
            .iter()
            .zip(&self.active)
            .any(|(l, &act)| act && l.is_empty())
    }

    /// Every active list holds exactly one agent.
    pub fn is_terminal(&self) -> bool {
        self.lists
            .iter()
            .zip(&self.active)
            .all(|(l, &act)| !act || l.len() == 1)
    }

    /// The matching read off a terminal table.
    pub fn to_matching(&self) -> Option<Matching> {
        if !self.is_terminal() {
            return None;
        }
        let pairs: BTreeSet<Pair> = self
            .lists
            .iter()
            .enumerate()
            .filter_map(|(a, l)| l.first().map(|&b| Pair::new(AgentId::new(a), b)))
            .collect();
        Matching::from_pairs(self.lists.len(), pairs).ok()
    }

    /// Content key for memoisation; provenance is not part of it.
    pub(crate) fn content_key(&self) -> Vec<u32> {
        let mut key = Vec::with_capacity(self.lists.iter().map(|l| l.len() + 1).sum());
        for l in &self.lists {
            key.push(l.len() as u32);
            key.extend(l.iter().map(|a| a.0));
        }
        key
    }

    fn delete_pair(&mut self, a: AgentId, b: AgentId) {
        self.lists[a.index()].retain(|&x| x != b);
        self.lists[b.index()].retain(|&x| x != a);
    }
}

/// Phase 1 of Irving's algorithm: proposals and rejections with the
/// standard symmetric deletions.
///
/// Whenever `y` holds a proposal from `x`, every agent `y` ranks below `x` is
/// deleted from `y`'s list and `y` from theirs. An agent whose list runs
/// empty has no stable partner at all.
pub fn phase1(instance: &Instance) -> Result<StableTable> {
    check_notion(instance, StabilityNotion::Strict)?;
    let n = instance.n();
    let mut table = StableTable {
        lists: instance
            .agents()
            .map(|a| instance.prefs(a).agents().collect())
            .collect(),
        active: vec![true; n],
        provenance: Vec::new(),
    };
    // holder[y] = the agent whose proposal y currently holds
    let mut holder: Vec<Option<AgentId>> = vec![None; n];
    // target[x] = the agent x has proposed to
    let mut target: Vec<Option<AgentId>> = vec![None; n];
    let mut free: VecDeque<AgentId> = instance.agents().collect();

    while let Some(x) = free.pop_front() {
        if target[x.index()].is_some() {
            continue;
        }
        let Some(y) = table.first(x) else { continue };
        let pos = table.lists[y.index()]
            .iter()
            .position(|&z| z == x)
            .expect("acceptability is symmetric");
        let rejected: Vec<AgentId> = table.lists[y.index()][pos + 1..].to_vec();
        for z in rejected {
            table.delete_pair(y, z);
            if holder[y.index()] == Some(z) {
                holder[y.index()] = None;
                target[z.index()] = None;
                free.push_back(z);
            }
            if target[y.index()] == Some(z) {
                target[y.index()] = None;
                holder[z.index()] = None;
                free.push_back(y);
            }
        }
        holder[y.index()] = Some(x);
        target[x.index()] = Some(y);
    }

    for (a, list) in table.lists.iter().enumerate() {
        table.active[a] = !list.is_empty();
    }
    Ok(table)
}

/// All rotations exposed in `table`, canonicalised and sorted.
///
/// Found by the usual walk: from an agent `x` with at least two entries, go
/// to its second choice `y` and continue from the agent ranked last by `y`.
/// Every walk ends in a cycle, and each cycle is an exposed rotation.
pub fn exposed_rotations(table: &StableTable) -> Vec<Cycle> {
    let n = table.num_agents();
    let mut found: BTreeSet<Cycle> = BTreeSet::new();
    // agents already known to lead into a finished walk
    let mut done = vec![false; n];
    for start in 0..n {
        let start = AgentId::new(start);
        if done[start.index()] || table.list(start).len() < 2 {
            continue;
        }
        let mut seen_at: Vec<Option<usize>> = vec![None; 0];
        seen_at.resize(n, None);
        let mut path: Vec<AgentId> = Vec::new();
        let mut x = start;
        loop {
            if done[x.index()] {
                break;
            }
            if let Some(i) = seen_at[x.index()] {
                let pairs = path[i..]
                    .iter()
                    .map(|&p| (p, table.first(p).expect("walked agents have lists")))
                    .collect();
                found.insert(Cycle::new(pairs));
                break;
            }
            if table.list(x).len() < 2 {
                break;
            }
            seen_at[x.index()] = Some(path.len());
            path.push(x);
            let y = table.second(x).expect("length checked");
            match table.last(y) {
                Some(next) => x = next,
                None => break,
            }
        }
        for p in path {
            done[p.index()] = true;
        }
    }
    found.into_iter().collect()
}

/// Each `x_s` has `y_s` first and `y_{s+1}` second.
pub fn is_exposed(table: &StableTable, cycle: &Cycle) -> bool {
    let pairs = cycle.pairs();
    let r = pairs.len();
    (0..r).all(|s| {
        let (x, y) = pairs[s];
        let next = pairs[(s + 1) % r].1;
        table.first(x) == Some(y) && table.second(x) == Some(next)
    })
}

/// Eliminates an exposed rotation: each `y_s` drops everything it ranks
/// below `x_{s-1}`, symmetrically. Deletions are computed on the table
/// before any of them is applied.
pub fn eliminate(table: &StableTable, cycle: &Cycle) -> Result<StableTable> {
    if !is_exposed(table, cycle) {
        return Err(Error::RotationNotExposed);
    }
    let pairs = cycle.pairs();
    let r = pairs.len();
    let mut deletions = Vec::new();
    for s in 0..r {
        let y = pairs[s].1;
        let prev_x = pairs[(s + r - 1) % r].0;
        let list = table.list(y);
        let pos = list
            .iter()
            .position(|&z| z == prev_x)
            .ok_or(Error::RotationNotExposed)?;
        deletions.extend(list[pos + 1..].iter().map(|&z| (y, z)));
    }
    let mut next = table.clone();
    for (a, b) in deletions {
        next.delete_pair(a, b);
    }
    next.provenance.push(cycle.clone());
    Ok(next)
}
