use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::instance::{AgentId, Instance, Pair};
use crate::matching::Matching;
use crate::stability::{is_stable, StabilityNotion};

use super::table::{eliminate, exposed_rotations, is_exposed, phase1, Cycle, StableTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RotationId(pub usize);

impl fmt::Display for RotationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rotation {
    pub id: RotationId,
    pub cycle: Cycle,
    pub dual: Option<RotationId>,
}

impl Rotation {
    pub fn is_singular(&self) -> bool {
        self.dual.is_none()
    }
}

/// A set of rotation ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RotationSet(BTreeSet<RotationId>);

impl RotationSet {
    pub fn new() -> Self {
        RotationSet(BTreeSet::new())
    }

    pub fn contains(&self, r: RotationId) -> bool {
        self.0.contains(&r)
    }

    pub fn insert(&mut self, r: RotationId) -> bool {
        self.0.insert(r)
    }

    pub fn remove(&mut self, r: RotationId) -> bool {
        self.0.remove(&r)
    }

    pub fn iter(&self) -> impl Iterator<Item = RotationId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_set(&self) -> &BTreeSet<RotationId> {
        &self.0
    }
}

impl FromIterator<RotationId> for RotationSet {
    fn from_iter<I: IntoIterator<Item = RotationId>>(iter: I) -> Self {
        RotationSet(iter.into_iter().collect())
    }
}

/// Bound on the exhaustive stable-table exploration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PosetLimits {
    pub max_tables: usize,
}

impl Default for PosetLimits {
    fn default() -> Self {
        PosetLimits {
            max_tables: 1_000_000,
        }
    }
}

/// All rotations of a strict instance with their precedence relation and
/// dual pairing. Immutable after construction.
#[derive(Clone, Debug)]
pub struct RotationPoset {
    num_agents: usize,
    p0: StableTable,
    rotations: Vec<Rotation>,
    /// `precedes[a][b]`: `a` must be eliminated before `b` can be exposed.
    precedes: Vec<Vec<bool>>,
    preds: Vec<Vec<RotationId>>,
    succs: Vec<Vec<RotationId>>,
    by_cycle: HashMap<Cycle, RotationId>,
    pair_index: HashMap<(AgentId, AgentId), RotationId>,
    base_set: RotationSet,
    base_matching: Matching,
    tables_explored: usize,
}

/// Finds every rotation by exploring all stable tables reachable from the
/// phase-1 table.
///
/// Each time a rotation is exposed, the set of rotations eliminated so far is
/// recorded; `a` precedes `b` iff `a` lies in every set recorded for `b`.
/// Tables are memoised on their content.
pub fn build_rotation_poset(instance: &Instance, limits: PosetLimits) -> Result<RotationPoset> {
    let p0 = phase1(instance)?;
    if p0.is_infeasible() {
        return Err(Error::NoStableMatching);
    }

    let mut ids: HashMap<Cycle, usize> = HashMap::new();
    let mut cycles: Vec<Cycle> = Vec::new();
    // intersection of eliminated-before sets over all exposures
    let mut required: Vec<Option<BTreeSet<usize>>> = Vec::new();
    let mut visited: HashSet<Vec<u32>> = HashSet::new();
    let mut terminal: Option<(BTreeSet<usize>, Matching)> = None;

    visited.insert(p0.content_key());
    let mut stack: Vec<(StableTable, BTreeSet<usize>)> = vec![(p0.clone(), BTreeSet::new())];
    while let Some((table, eliminated)) = stack.pop() {
        if table.is_infeasible() {
            return Err(Error::NoStableMatching);
        }
        let exposed = exposed_rotations(&table);
        if exposed.is_empty() {
            let m = table.to_matching().ok_or(Error::NoStableMatching)?;
            if terminal.as_ref().is_none_or(|(s, _)| eliminated < *s) {
                terminal = Some((eliminated, m));
            }
            continue;
        }
        for cycle in exposed {
            let id = *ids.entry(cycle.clone()).or_insert_with(|| {
                cycles.push(cycle.clone());
                required.push(None);
                cycles.len() - 1
            });
            required[id] = Some(match required[id].take() {
                None => eliminated.clone(),
                Some(prev) => prev.intersection(&eliminated).copied().collect(),
            });
            let child = eliminate(&table, &cycle)?;
            if visited.insert(child.content_key()) {
                if visited.len() > limits.max_tables {
                    return Err(Error::ResourceExhausted {
                        what: "stable tables explored",
                        limit: limits.max_tables,
                    });
                }
                let mut next = eliminated.clone();
                next.insert(id);
                stack.push((child, next));
            }
        }
    }
    let (terminal_set, base_matching) = terminal.ok_or(Error::NoStableMatching)?;

    // Renumber rotations in canonical cycle order.
    let mut order: Vec<usize> = (0..cycles.len()).collect();
    order.sort_by(|&a, &b| cycles[a].cmp(&cycles[b]));
    let mut renumber = vec![0; cycles.len()];
    for (new, &old) in order.iter().enumerate() {
        renumber[old] = new;
    }
    let count = cycles.len();
    let mut by_cycle = HashMap::with_capacity(count);
    for (old, c) in cycles.iter().enumerate() {
        by_cycle.insert(c.clone(), RotationId(renumber[old]));
    }
    let mut rotations: Vec<Rotation> = order
        .iter()
        .enumerate()
        .map(|(new, &old)| Rotation {
            id: RotationId(new),
            cycle: cycles[old].clone(),
            dual: None,
        })
        .collect();
    for r in rotations.iter_mut() {
        r.dual = by_cycle.get(&r.cycle.dual()).copied();
    }

    let mut precedes = vec![vec![false; count]; count];
    for (old, req) in required.iter().enumerate() {
        let target = renumber[old];
        for &p in req.iter().flatten() {
            precedes[renumber[p]][target] = true;
        }
    }
    let preds = (0..count)
        .map(|b| {
            (0..count)
                .filter(|&a| precedes[a][b])
                .map(RotationId)
                .collect()
        })
        .collect();
    let succs = (0..count)
        .map(|a| {
            (0..count)
                .filter(|&b| precedes[a][b])
                .map(RotationId)
                .collect()
        })
        .collect();

    let mut pair_index = HashMap::new();
    for r in &rotations {
        for &(x, y) in r.cycle.pairs() {
            let prev = pair_index.insert((x, y), r.id);
            debug_assert!(prev.is_none(), "ordered pair in two rotations");
        }
    }

    let base_set = terminal_set
        .iter()
        .map(|&old| RotationId(renumber[old]))
        .collect();
    Ok(RotationPoset {
        num_agents: instance.n(),
        p0,
        rotations,
        precedes,
        preds,
        succs,
        by_cycle,
        pair_index,
        base_set,
        base_matching,
        tables_explored: visited.len(),
    })
}

impl RotationPoset {
    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn p0(&self) -> &StableTable {
        &self.p0
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn rotation(&self, id: RotationId) -> &Rotation {
        &self.rotations[id.0]
    }

    pub fn id_of(&self, cycle: &Cycle) -> Option<RotationId> {
        self.by_cycle.get(cycle).copied()
    }

    pub fn dual(&self, id: RotationId) -> Option<RotationId> {
        self.rotations[id.0].dual
    }

    pub fn singular(&self) -> RotationSet {
        self.rotations
            .iter()
            .filter(|r| r.is_singular())
            .map(|r| r.id)
            .collect()
    }

    /// Unordered dual pairs `(a, b)` with `a < b`.
    pub fn dual_pairs(&self) -> Vec<(RotationId, RotationId)> {
        self.rotations
            .iter()
            .filter_map(|r| r.dual.filter(|&d| r.id < d).map(|d| (r.id, d)))
            .collect()
    }

    pub fn precedes(&self, a: RotationId, b: RotationId) -> bool {
        self.precedes[a.0][b.0]
    }

    /// All `(a, b)` with `a` preceding `b`.
    pub fn precedence_pairs(&self) -> Vec<(RotationId, RotationId)> {
        let n = self.len();
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.precedes[a][b])
            .map(|(a, b)| (RotationId(a), RotationId(b)))
            .collect()
    }

    /// Precedence pairs with no rotation strictly between them.
    pub fn covering_pairs(&self) -> Vec<(RotationId, RotationId)> {
        self.precedence_pairs()
            .into_iter()
            .filter(|&(a, b)| !self.succs[a.0].iter().any(|&c| self.precedes[c.0][b.0]))
            .collect()
    }

    pub fn predecessors(&self, id: RotationId) -> &[RotationId] {
        &self.preds[id.0]
    }

    pub fn successors(&self, id: RotationId) -> &[RotationId] {
        &self.succs[id.0]
    }

    /// The ordered pair `(a, b)` belongs to this rotation, if any.
    pub fn rotation_containing(&self, a: AgentId, b: AgentId) -> Option<RotationId> {
        self.pair_index.get(&(a, b)).copied()
    }

    /// Number of distinct stable tables visited during construction.
    pub fn tables_explored(&self) -> usize {
        self.tables_explored
    }

    pub fn is_closed(&self, z: &RotationSet) -> bool {
        z.iter()
            .all(|r| self.preds[r.0].iter().all(|&p| z.contains(p)))
    }

    pub fn is_complete(&self, z: &RotationSet) -> bool {
        self.rotations.iter().all(|r| match r.dual {
            None => z.contains(r.id),
            Some(d) => z.contains(r.id) != z.contains(d),
        })
    }

    pub fn is_closed_complete(&self, z: &RotationSet) -> bool {
        z.iter().all(|r| r.0 < self.len()) && self.is_closed(z) && self.is_complete(z)
    }

    /// Some closed complete set, with its matching.
    pub fn base(&self) -> (&RotationSet, &Matching) {
        (&self.base_set, &self.base_matching)
    }

    /// Eliminates the rotations of `z` from the phase-1 table, always picking
    /// the exposed member with the smallest id, and reads off the matching.
    pub fn closed_set_to_matching(&self, z: &RotationSet) -> Result<Matching> {
        if !self.is_closed_complete(z) {
            return Err(Error::NotClosedComplete);
        }
        let table = self.eliminate_all(z, |_, _| {})?;
        table.to_matching().ok_or(Error::NotClosedComplete)
    }

    /// Eliminates all rotations of `z` in a precedence-respecting order,
    /// calling `visit(table, rotation)` right after each elimination.
    pub fn eliminate_all(
        &self,
        z: &RotationSet,
        mut visit: impl FnMut(&StableTable, RotationId),
    ) -> Result<StableTable> {
        let mut table = self.p0.clone();
        let mut remaining: BTreeSet<RotationId> = z.as_set().clone();
        while !remaining.is_empty() {
            let next = remaining
                .iter()
                .copied()
                .find(|&r| is_exposed(&table, &self.rotations[r.0].cycle))
                .ok_or(Error::NotClosedComplete)?;
            table = eliminate(&table, &self.rotations[next.0].cycle)?;
            visit(&table, next);
            remaining.remove(&next);
        }
        Ok(table)
    }

    /// The unique closed complete set whose elimination yields `m`.
    pub fn matching_to_closed_set(&self, instance: &Instance, m: &Matching) -> Result<RotationSet> {
        if m.num_agents() != self.num_agents || !is_stable(instance, m, StabilityNotion::Strict) {
            return Err(Error::NotStable);
        }
        let mut table = self.p0.clone();
        let mut z = RotationSet::new();
        loop {
            let exposed = exposed_rotations(&table);
            if exposed.is_empty() {
                break;
            }
            let mut progressed = false;
            for cycle in exposed {
                let next = eliminate(&table, &cycle)?;
                if m.pairs().all(|p| next.contains(p.lo(), p.hi())) {
                    let id = self.id_of(&cycle).ok_or(Error::NotStable)?;
                    z.insert(id);
                    table = next;
                    progressed = true;
                    break;
                }
            }
            if !progressed {
                return Err(Error::NotStable);
            }
        }
        match table.to_matching() {
            Some(found) if found == *m => Ok(z),
            _ => Err(Error::NotStable),
        }
    }

    /// Pairs contained in some stable matching.
    ///
    /// These are the pairs of one stable matching together with all pairs
    /// occurring in nonsingular rotations.
    pub fn stable_pairs(&self) -> BTreeSet<Pair> {
        let mut out: BTreeSet<Pair> = self.base_matching.pairs().collect();
        out.extend(self.rotating_pairs());
        out
    }

    /// Pairs contained in every stable matching.
    pub fn fixed_pairs(&self) -> BTreeSet<Pair> {
        let rotating = self.rotating_pairs();
        self.base_matching
            .pairs()
            .filter(|p| !rotating.contains(p))
            .collect()
    }

    fn rotating_pairs(&self) -> BTreeSet<Pair> {
        self.rotations
            .iter()
            .filter(|r| !r.is_singular())
            .flat_map(|r| r.cycle.pairs().iter().map(|&(x, y)| Pair::new(x, y)))
            .collect()
    }

    /// The dual of the rotation containing the ordered pair `(a, b)`, when that
    /// rotation exists and is nonsingular. Eliminating it makes `b` the last
    /// entry of `a`'s list.
    pub fn rho_of(&self, a: AgentId, b: AgentId) -> Option<RotationId> {
        self.rotation_containing(a, b).and_then(|r| self.dual(r))
    }

    /// Graphviz rendering: one node per rotation labelled with its cycle,
    /// solid arcs for covering precedence pairs, dashed undirected edges
    /// between duals.
    pub fn to_dot(&self, instance: &Instance) -> String {
        let mut out = String::from("digraph rotations {\n  node [shape=box];\n");
        for r in &self.rotations {
            let style = if r.is_singular() { ", style=bold" } else { "" };
            out.push_str(&format!(
                "  {} [label=\"{}\"{}];\n",
                r.id,
                r.cycle.display(instance),
                style
            ));
        }
        for (a, b) in self.covering_pairs() {
            out.push_str(&format!("  {a} -> {b};\n"));
        }
        for (a, b) in self.dual_pairs() {
            out.push_str(&format!("  {a} -> {b} [dir=none, style=dashed];\n"));
        }
        out.push_str("}\n");
        out
    }
}
