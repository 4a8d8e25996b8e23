//! Agents, preference lists and validated instances.
//!
//! An [`Instance`] is immutable once built. Every agent is addressed by a
//! dense [`AgentId`]; names are kept only for input and output. A rank
//! matrix is precomputed so that comparing two entries of a preference list
//! is a single lookup.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result, ValidationError, Violation};
use crate::matching::Matching;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn new(index: usize) -> Self {
        AgentId(u32::try_from(index).expect("agent index overflows u32"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// An unordered pair of distinct agents, stored with the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    lo: AgentId,
    hi: AgentId,
}

impl Pair {
    pub fn new(a: AgentId, b: AgentId) -> Self {
        assert_ne!(a, b, "a pair needs two distinct agents");
        if a < b {
            Pair { lo: a, hi: b }
        } else {
            Pair { lo: b, hi: a }
        }
    }

    pub fn lo(self) -> AgentId {
        self.lo
    }

    pub fn hi(self) -> AgentId {
        self.hi
    }

    pub fn contains(self, a: AgentId) -> bool {
        self.lo == a || self.hi == a
    }

    /// The endpoint that is not `a`. `a` must be an endpoint.
    pub fn other(self, a: AgentId) -> AgentId {
        debug_assert!(self.contains(a));
        if self.lo == a {
            self.hi
        } else {
            self.lo
        }
    }
}

/// Weak order over the acceptable agents, best tie group first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PreferenceList {
    groups: Vec<Vec<AgentId>>,
}

impl PreferenceList {
    pub fn new(groups: Vec<Vec<AgentId>>) -> Self {
        PreferenceList { groups }
    }

    pub fn strict(order: impl IntoIterator<Item = AgentId>) -> Self {
        PreferenceList {
            groups: order.into_iter().map(|a| vec![a]).collect(),
        }
    }

    pub fn groups(&self) -> &[Vec<AgentId>] {
        &self.groups
    }

    /// All entries, best first; agents inside a tie group keep their listed order.
    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.groups.iter().flatten().copied()
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn is_strict(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Roommates,
    Marriage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Unvalidated instance description, as produced by the parser.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawInstance {
    pub kind: RawKind,
    pub agents: Vec<RawAgent>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawKind {
    Roommates,
    Marriage {
        left: Vec<String>,
        right: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawAgent {
    pub name: String,
    pub groups: Vec<Vec<String>>,
}

const UNACCEPTABLE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct Instance {
    names: Vec<String>,
    prefs: Vec<PreferenceList>,
    kind: Kind,
    sides: Option<Vec<Side>>,
    rank: Vec<u32>,
    num_pairs: usize,
    by_name: HashMap<String, AgentId>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.prefs == other.prefs
            && self.kind == other.kind
            && self.sides == other.sides
    }
}

impl Eq for Instance {}

pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Resolves names and checks every instance invariant, reporting all
/// violations at once.
pub fn validate_instance(raw: &RawInstance) -> Result<Instance, ValidationError> {
    let mut violations = Vec::new();

    let (order, sides): (Vec<String>, Option<Vec<Side>>) = match &raw.kind {
        RawKind::Roommates => (raw.agents.iter().map(|a| a.name.clone()).collect(), None),
        RawKind::Marriage { left, right } => {
            let order: Vec<String> = left.iter().chain(right).cloned().collect();
            let sides = std::iter::repeat_n(Side::Left, left.len())
                .chain(std::iter::repeat_n(Side::Right, right.len()))
                .collect();
            (order, Some(sides))
        }
    };

    let mut by_name: HashMap<&str, usize> = HashMap::new();
    for (i, name) in order.iter().enumerate() {
        if !is_valid_name(name) {
            violations.push(Violation::InvalidName { name: name.clone() });
        }
        if by_name.insert(name.as_str(), i).is_some() {
            violations.push(Violation::DuplicateAgent {
                agent: name.clone(),
            });
        }
    }

    let mut lines: Vec<Option<&RawAgent>> = vec![None; order.len()];
    for agent in &raw.agents {
        match by_name.get(agent.name.as_str()) {
            Some(&i) => {
                if lines[i].is_some() && matches!(raw.kind, RawKind::Marriage { .. }) {
                    violations.push(Violation::DuplicateAgent {
                        agent: agent.name.clone(),
                    });
                }
                lines[i] = Some(agent);
            }
            None => violations.push(Violation::UnknownAgent {
                agent: agent.name.clone(),
                entry: agent.name.clone(),
            }),
        }
    }

    let mut prefs = Vec::with_capacity(order.len());
    for (i, line) in lines.iter().enumerate() {
        let Some(line) = line else {
            violations.push(Violation::MissingAgent {
                agent: order[i].clone(),
            });
            prefs.push(PreferenceList::default());
            continue;
        };
        let mut groups = Vec::with_capacity(line.groups.len());
        for group in &line.groups {
            let mut ids = Vec::with_capacity(group.len());
            for entry in group {
                match by_name.get(entry.as_str()) {
                    Some(&j) => ids.push(AgentId::new(j)),
                    None => violations.push(Violation::UnknownAgent {
                        agent: line.name.clone(),
                        entry: entry.clone(),
                    }),
                }
            }
            groups.push(ids);
        }
        prefs.push(PreferenceList::new(groups));
    }

    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }
    let kind = match raw.kind {
        RawKind::Roommates => Kind::Roommates,
        RawKind::Marriage { .. } => Kind::Marriage,
    };
    Instance::new(order, kind, sides, prefs)
}

impl Instance {
    /// Builds an instance from id-level preference lists. `sides` is required
    /// for marriage instances and ignored otherwise.
    pub fn new(
        names: Vec<String>,
        kind: Kind,
        sides: Option<Vec<Side>>,
        prefs: Vec<PreferenceList>,
    ) -> Result<Instance, ValidationError> {
        let n = names.len();
        let mut violations = Vec::new();
        let sides = match kind {
            Kind::Roommates => None,
            Kind::Marriage => sides,
        };
        if prefs.len() != n {
            violations.push(Violation::MissingAgent {
                agent: format!("<{} lists for {} agents>", prefs.len(), n),
            });
            return Err(ValidationError { violations });
        }
        if kind == Kind::Marriage && sides.as_ref().is_none_or(|s| s.len() != n) {
            violations.push(Violation::MissingAgent {
                agent: "<side assignment>".into(),
            });
            return Err(ValidationError { violations });
        }
        let mut by_name = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if !is_valid_name(name) {
                violations.push(Violation::InvalidName { name: name.clone() });
            }
            if by_name.insert(name.clone(), AgentId::new(i)).is_some() {
                violations.push(Violation::DuplicateAgent {
                    agent: name.clone(),
                });
            }
        }

        let mut rank = vec![UNACCEPTABLE; n * n];
        for (a, list) in prefs.iter().enumerate() {
            for (g, group) in list.groups().iter().enumerate() {
                if group.is_empty() {
                    violations.push(Violation::EmptyTieGroup {
                        agent: names[a].clone(),
                    });
                }
                for &b in group {
                    if b.index() >= n {
                        violations.push(Violation::UnknownAgent {
                            agent: names[a].clone(),
                            entry: format!("{b}"),
                        });
                        continue;
                    }
                    if b.index() == a {
                        violations.push(Violation::SelfReference {
                            agent: names[a].clone(),
                        });
                        continue;
                    }
                    if let Some(sides) = &sides {
                        if sides[a] == sides[b.index()] {
                            violations.push(Violation::CrossSide {
                                agent: names[a].clone(),
                                entry: names[b.index()].clone(),
                            });
                        }
                    }
                    let slot = &mut rank[a * n + b.index()];
                    if *slot != UNACCEPTABLE {
                        violations.push(Violation::DuplicateEntry {
                            agent: names[a].clone(),
                            entry: names[b.index()].clone(),
                        });
                    } else {
                        *slot = g as u32;
                    }
                }
            }
        }

        let mut num_pairs = 0;
        for a in 0..n {
            for b in 0..n {
                let ab = rank[a * n + b] != UNACCEPTABLE;
                let ba = rank[b * n + a] != UNACCEPTABLE;
                if ab && !ba {
                    violations.push(Violation::AsymmetricAcceptability {
                        listed_by: names[a].clone(),
                        listed: names[b].clone(),
                    });
                }
                if ab && ba && a < b {
                    num_pairs += 1;
                }
            }
        }

        if !violations.is_empty() {
            return Err(ValidationError { violations });
        }
        Ok(Instance {
            names,
            prefs,
            kind,
            sides,
            rank,
            num_pairs,
            by_name,
        })
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        self.names.len()
    }

    /// Number of mutually acceptable pairs.
    pub fn m(&self) -> usize {
        self.num_pairs
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn side(&self, a: AgentId) -> Option<Side> {
        self.sides.as_ref().map(|s| s[a.index()])
    }

    pub fn sides(&self) -> Option<&[Side]> {
        self.sides.as_deref()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.n()).map(AgentId::new)
    }

    pub fn agents_on(&self, side: Side) -> Vec<AgentId> {
        self.agents()
            .filter(|&a| self.side(a) == Some(side))
            .collect()
    }

    pub fn name(&self, a: AgentId) -> &str {
        &self.names[a.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn agent(&self, name: &str) -> Option<AgentId> {
        self.by_name.get(name).copied()
    }

    pub fn prefs(&self, a: AgentId) -> &PreferenceList {
        &self.prefs[a.index()]
    }

    pub fn is_strict(&self) -> bool {
        self.prefs.iter().all(PreferenceList::is_strict)
    }

    #[inline]
    pub fn rank_of(&self, a: AgentId, b: AgentId) -> Option<usize> {
        let r = self.rank[a.index() * self.n() + b.index()];
        (r != UNACCEPTABLE).then_some(r as usize)
    }

    /// Index of `b`'s tie group in `a`'s list.
    pub fn rank(&self, a: AgentId, b: AgentId) -> Result<usize> {
        self.rank_of(a, b).ok_or(Error::NotAcceptable { a, b })
    }

    #[inline]
    pub fn is_acceptable(&self, a: AgentId, b: AgentId) -> bool {
        a != b && self.rank_of(a, b).is_some()
    }

    /// `a` strictly prefers `b` to `c`. Both must be acceptable to `a`.
    #[inline]
    pub fn prefers(&self, a: AgentId, b: AgentId, c: AgentId) -> bool {
        self.rank_of(a, b).expect("b acceptable") < self.rank_of(a, c).expect("c acceptable")
    }

    /// All mutually acceptable pairs in ascending order.
    pub fn acceptable_pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.agents().flat_map(move |a| {
            self.prefs(a)
                .agents()
                .filter(move |&b| a < b)
                .map(move |b| Pair::new(a, b))
                .collect::<BTreeSet<_>>()
        })
    }

    pub fn pair_by_names(&self, a: &str, b: &str) -> Result<Pair> {
        let lookup = |s: &str| {
            self.agent(s)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown agent {s:?}")))
        };
        let (a, b) = (lookup(a)?, lookup(b)?);
        if a == b {
            return Err(Error::InvalidParameter(format!(
                "pair ({}, {}) repeats an agent",
                self.name(a),
                self.name(b)
            )));
        }
        Ok(Pair::new(a, b))
    }

    pub fn pair_name(&self, p: Pair) -> String {
        format!("{{{},{}}}", self.name(p.lo()), self.name(p.hi()))
    }

    /// Converts back into the name-level description.
    pub fn to_raw(&self) -> RawInstance {
        let kind = match self.kind {
            Kind::Roommates => RawKind::Roommates,
            Kind::Marriage => RawKind::Marriage {
                left: self
                    .agents_on(Side::Left)
                    .into_iter()
                    .map(|a| self.name(a).to_string())
                    .collect(),
                right: self
                    .agents_on(Side::Right)
                    .into_iter()
                    .map(|a| self.name(a).to_string())
                    .collect(),
            },
        };
        let agents = self
            .agents()
            .map(|a| RawAgent {
                name: self.name(a).to_string(),
                groups: self
                    .prefs(a)
                    .groups()
                    .iter()
                    .map(|g| g.iter().map(|&b| self.name(b).to_string()).collect())
                    .collect(),
            })
            .collect();
        RawInstance { kind, agents }
    }
}

/// Result of [`complete_with_dummies`].
#[derive(Clone, Debug)]
pub struct Completion {
    pub instance: Instance,
    pub matching: Matching,
    /// Agents with ids below this bound are the original agents.
    pub original_agents: usize,
}

impl Completion {
    pub fn is_dummy(&self, a: AgentId) -> bool {
        a.index() >= self.original_agents
    }

    /// Drops the dummy pairs and re-indexes the matching on the original instance.
    pub fn strip(&self, m: &Matching) -> Matching {
        let pairs = m
            .pairs()
            .filter(|p| !self.is_dummy(p.lo()) && !self.is_dummy(p.hi()));
        Matching::from_pairs(self.original_agents, pairs).expect("sub-matching stays valid")
    }
}

/// Gives every agent left unmatched by `m1` a private dummy partner that it
/// ranks last, so that `m1` extended by the dummy pairs is complete.
///
/// All stable matchings of the augmented instance contain every dummy pair;
/// restricted to the original agents they are exactly the stable matchings
/// of the input.
pub fn complete_with_dummies(instance: &Instance, m1: &Matching) -> Completion {
    let n = instance.n();
    let unmatched: Vec<AgentId> = instance
        .agents()
        .filter(|&a| m1.partner(a).is_none())
        .collect();
    if unmatched.is_empty() {
        return Completion {
            instance: instance.clone(),
            matching: m1.clone(),
            original_agents: n,
        };
    }

    let mut names = instance.names.clone();
    let mut prefs = instance.prefs.clone();
    let mut sides = instance.sides.clone();
    let mut taken: BTreeSet<String> = names.iter().cloned().collect();
    let mut pairs: Vec<Pair> = m1.pairs().collect();
    for (k, &b) in unmatched.iter().enumerate() {
        let dummy = AgentId::new(n + k);
        let mut name = format!("{}_dummy", instance.name(b));
        while taken.contains(&name) {
            name.push('_');
        }
        taken.insert(name.clone());
        names.push(name);
        prefs.push(PreferenceList::strict([b]));
        prefs[b.index()].groups.push(vec![dummy]);
        if let Some(sides) = sides.as_mut() {
            let opposite = match sides[b.index()] {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            };
            sides.push(opposite);
        }
        pairs.push(Pair::new(b, dummy));
    }
    let augmented =
        Instance::new(names, instance.kind, sides, prefs).expect("dummy augmentation is valid");
    let matching = Matching::from_pairs(augmented.n(), pairs).expect("dummy pairs are disjoint");
    Completion {
        instance: augmented,
        matching,
        original_agents: n,
    }
}
