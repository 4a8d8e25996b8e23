//! Adapting a stable roommates matching to forced and forbidden pairs.
//!
//! The search starts from the closed complete rotation set of `m1` and only
//! ever *integrates* rotations: add a rotation with everything preceding it,
//! drop its dual with everything the dual precedes. Every integration is one
//! the target matching cannot avoid, so the set reached is the one closest to
//! `m1`. Forbidden pairs already in `m1` are the only source of branching:
//! one endpoint has to improve and we try both.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{complete_with_dummies, AgentId, Completion, Instance, Pair};
use crate::matching::Matching;
use crate::query::AdaptQuery;
use crate::rotations::{build_rotation_poset, PosetLimits, RotationId, RotationPoset, RotationSet};
use crate::stability::{check_notion, is_stable, StabilityNotion};

/// `z` with `phi` and its predecessors added, and the dual of `phi` and its
/// successors removed.
pub fn integrate(poset: &RotationPoset, z: &RotationSet, phi: RotationId) -> Result<RotationSet> {
    let dual = poset.dual(phi).ok_or(Error::SingularRotation(phi.0))?;
    let mut out = z.clone();
    out.insert(phi);
    for &p in poset.predecessors(phi) {
        out.insert(p);
    }
    out.remove(dual);
    for &s in poset.successors(dual) {
        out.remove(s);
    }
    Ok(out)
}

/// For each forbidden pair of `m1`, the endpoint that has to end up with a
/// partner it prefers to the other endpoint.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct GuessVector(pub Vec<(Pair, AgentId)>);

impl GuessVector {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn respected_by(&self, instance: &Instance, m: &Matching) -> bool {
        self.0.iter().all(|&(pair, a)| match m.partner(a) {
            Some(c) => instance.prefers(a, c, pair.other(a)),
            None => false,
        })
    }

    pub fn display(&self, instance: &Instance) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(p, a)| format!("{}:{}", instance.pair_name(p), instance.name(a)))
            .collect();
        format!("[{}]", parts.join(", "))
    }
}

impl fmt::Display for GuessVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(p, a)| format!("{{{},{}}}:{}", p.lo(), p.hi(), a))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdaptOptions {
    pub poset: PosetLimits,
    /// Refuse more than `2^max_guess_bits` guesses.
    pub max_guess_bits: u32,
    pub parallel: bool,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions {
            poset: PosetLimits::default(),
            max_guess_bits: 24,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adaptation {
    pub matching: Matching,
    pub delta: usize,
    pub guess: GuessVector,
}

/// Everything `adapt` found, before the budget is applied.
#[derive(Clone, Debug)]
pub struct AdaptReport {
    /// Best admissible stable matching regardless of `k`.
    pub optimum: Option<Adaptation>,
    pub k: usize,
    pub guesses_evaluated: usize,
    pub rotations: usize,
    pub tables_explored: usize,
}

impl AdaptReport {
    pub fn within_budget(self) -> Option<Adaptation> {
        let k = self.k;
        self.optimum.filter(|a| a.delta <= k)
    }
}

/// Shared read-only state of one adaptation run.
struct Context<'a> {
    instance: &'a Instance,
    poset: &'a RotationPoset,
    m1: &'a Matching,
    /// Stable partners of each agent, best first.
    partners: Vec<Vec<AgentId>>,
}

impl<'a> Context<'a> {
    fn new(instance: &'a Instance, poset: &'a RotationPoset, m1: &'a Matching) -> Self {
        let mut partners = vec![Vec::new(); instance.n()];
        for p in poset.stable_pairs() {
            partners[p.lo().index()].push(p.hi());
            partners[p.hi().index()].push(p.lo());
        }
        for (a, list) in partners.iter_mut().enumerate() {
            let a = AgentId::new(a);
            list.sort_by_key(|&b| instance.rank_of(a, b));
        }
        Context {
            instance,
            poset,
            m1,
            partners,
        }
    }

    fn rank(&self, a: AgentId, b: AgentId) -> usize {
        self.instance
            .rank_of(a, b)
            .expect("stable partners are acceptable")
    }

    /// The least-preferred stable partner of `a` that `a` strictly prefers to `b`.
    fn least_better(&self, a: AgentId, b: AgentId) -> Option<AgentId> {
        let rb = self.rank(a, b);
        self.partners[a.index()]
            .iter()
            .copied()
            .rfind(|&c| self.rank(a, c) < rb)
    }

    fn has_worse_partner(&self, a: AgentId, b: AgentId) -> bool {
        let rb = self.rank(a, b);
        self.partners[a.index()]
            .iter()
            .any(|&c| self.rank(a, c) > rb)
    }
}

/// A rotation set under construction that remembers every rotation it was
/// forced to contain or to avoid, so that contradictions surface at once.
#[derive(Clone)]
struct Run<'c, 'a> {
    ctx: &'c Context<'a>,
    z: RotationSet,
    required: BTreeSet<RotationId>,
    excluded: BTreeSet<RotationId>,
}

impl<'c, 'a> Run<'c, 'a> {
    fn new(ctx: &'c Context<'a>, z: RotationSet) -> Self {
        Run {
            ctx,
            z,
            required: BTreeSet::new(),
            excluded: BTreeSet::new(),
        }
    }

    /// `None` on a clash.
    fn integrate(&mut self, phi: RotationId) -> Option<()> {
        let poset = self.ctx.poset;
        let dual = poset.dual(phi)?;
        let add = std::iter::once(phi).chain(poset.predecessors(phi).iter().copied());
        let drop = std::iter::once(dual).chain(poset.successors(dual).iter().copied());
        for r in add {
            if self.excluded.contains(&r) {
                return None;
            }
            self.required.insert(r);
        }
        for r in drop {
            if self.required.contains(&r) {
                return None;
            }
            self.excluded.insert(r);
        }
        self.z = integrate(poset, &self.z, phi).ok()?;
        debug_assert!(poset.is_closed_complete(&self.z));
        Some(())
    }

    /// Makes `a` end up with `b` or someone better.
    fn at_least(&mut self, a: AgentId, b: AgentId) -> Option<()> {
        match self.ctx.poset.rotation_containing(a, b) {
            // `a` never moves away from `b`: it is a's worst stable partner
            None => Some(()),
            Some(r) => self.integrate(self.ctx.poset.dual(r)?),
        }
    }

    /// Makes `a` end up with someone worse than `b`.
    fn beyond(&mut self, a: AgentId, b: AgentId) -> Option<()> {
        let r = self.ctx.poset.rotation_containing(a, b)?;
        match self.ctx.poset.dual(r) {
            None => self.z.contains(r).then_some(()),
            Some(_) => self.integrate(r),
        }
    }

    fn matching(&self) -> Matching {
        self.ctx
            .poset
            .closed_set_to_matching(&self.z)
            .expect("integration keeps the set closed and complete")
    }
}

/// Steps shared by every guess: forced pairs pin both endpoints.
fn force_pairs(run: &mut Run, forced: &BTreeSet<Pair>, fixed: &BTreeSet<Pair>) -> Option<()> {
    for &pair in forced {
        if fixed.contains(&pair) {
            continue;
        }
        let (x, y) = (pair.lo(), pair.hi());
        let (a, b) = if run.ctx.has_worse_partner(x, y) || !run.ctx.has_worse_partner(y, x) {
            (x, y)
        } else {
            (y, x)
        };
        run.at_least(a, b)?;
        let rb = run.ctx.rank(a, b);
        let better: Vec<AgentId> = run.ctx.partners[a.index()]
            .iter()
            .copied()
            .filter(|&c| run.ctx.rank(a, c) < rb)
            .collect();
        for c in better {
            run.beyond(a, c)?;
        }
    }
    Some(())
}

/// Guess-specific steps; returns the candidate matching of this guess.
fn resolve_guess(
    mut run: Run,
    guess: &GuessVector,
    forbidden_outside: &[Pair],
) -> Option<Matching> {
    for &(pair, a) in &guess.0 {
        let b = pair.other(a);
        let best = run.ctx.least_better(a, b)?;
        run.at_least(a, best)?;
    }
    loop {
        let m = run.matching();
        let Some(&e) = forbidden_outside.iter().find(|p| m.contains(p)) else {
            return Some(m);
        };
        let (x, y) = (e.lo(), e.hi());
        let m1 = run.ctx.m1;
        let improves = |a: AgentId, b: AgentId| {
            m1.partner(a)
                .is_none_or(|c| run.ctx.instance.prefers(a, b, c))
        };
        let (a, b) = if improves(x, y) { (x, y) } else { (y, x) };
        let target = run.ctx.least_better(a, b)?;
        let before = run.z.clone();
        run.at_least(a, target)?;
        if run.z == before {
            return None;
        }
    }
}

/// The stable matching closest to `query.m1` that contains every forced
/// pair and no forbidden pair, or `None` if it does not exist or is more
/// than `query.k` away.
pub fn adapt(instance: &Instance, query: &AdaptQuery) -> Result<Option<Adaptation>> {
    Ok(adapt_report(instance, query, AdaptOptions::default())?.within_budget())
}

pub fn adapt_report(
    instance: &Instance,
    query: &AdaptQuery,
    options: AdaptOptions,
) -> Result<AdaptReport> {
    query.validate(instance, StabilityNotion::Strict)?;
    let mut report = AdaptReport {
        optimum: None,
        k: query.k,
        guesses_evaluated: 0,
        rotations: 0,
        tables_explored: 0,
    };

    if query.forced.intersection(&query.forbidden).next().is_some() {
        return Ok(report);
    }
    let mut covered = BTreeSet::new();
    for p in &query.forced {
        if !covered.insert(p.lo()) || !covered.insert(p.hi()) {
            return Ok(report);
        }
    }

    let completion: Completion = complete_with_dummies(instance, &query.m1);
    let inst = &completion.instance;
    let m1 = &completion.matching;
    let poset = build_rotation_poset(inst, options.poset)?;
    report.rotations = poset.len();
    report.tables_explored = poset.tables_explored();

    let stable = poset.stable_pairs();
    let fixed = poset.fixed_pairs();
    if query.forced.iter().any(|p| !stable.contains(p))
        || query.forbidden.iter().any(|p| fixed.contains(p))
    {
        return Ok(report);
    }
    let forbidden: Vec<Pair> = query
        .forbidden
        .iter()
        .copied()
        .filter(|p| stable.contains(p))
        .collect();
    let (in_m1, outside): (Vec<Pair>, Vec<Pair>) =
        forbidden.into_iter().partition(|p| m1.contains(p));
    if in_m1.len() as u32 > options.max_guess_bits {
        return Err(Error::ResourceExhausted {
            what: "forbidden pairs of m1 to guess over",
            limit: options.max_guess_bits as usize,
        });
    }

    let ctx = Context::new(inst, &poset, m1);
    let z1 = poset.matching_to_closed_set(inst, m1)?;
    let mut base = Run::new(&ctx, z1);
    let guesses = 1usize << in_m1.len();
    report.guesses_evaluated = guesses;
    if force_pairs(&mut base, &query.forced, &fixed).is_none() {
        return Ok(report);
    }

    let evaluate = |mask: usize| -> Option<(usize, Matching, GuessVector)> {
        let guess = GuessVector(
            in_m1
                .iter()
                .enumerate()
                .map(|(bit, &p)| (p, if mask >> bit & 1 == 0 { p.lo() } else { p.hi() }))
                .collect(),
        );
        let m = resolve_guess(base.clone(), &guess, &outside)?;
        let valid = is_stable(inst, &m, StabilityNotion::Strict)
            && query.admits(&m)
            && guess.respected_by(inst, &m);
        valid.then(|| (m.difference_size(m1), m, guess))
    };
    let better = |a: Option<(usize, Matching, GuessVector)>,
                  b: Option<(usize, Matching, GuessVector)>| match (a, b) {
        (Some(a), Some(b)) => Some(if (a.0, &a.1) <= (b.0, &b.1) { a } else { b }),
        (a, b) => a.or(b),
    };
    let best = if options.parallel {
        (0..guesses)
            .into_par_iter()
            .map(evaluate)
            .reduce(|| None, better)
    } else {
        (0..guesses).map(evaluate).fold(None, better)
    };

    report.optimum = best.map(|(delta, m, guess)| Adaptation {
        matching: completion.strip(&m),
        delta,
        guess,
    });
    Ok(report)
}

/// Per-agent bounds: the adapted partner must be strictly worse than `upper`
/// and strictly better than `lower`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankWindow {
    pub agent: AgentId,
    pub upper: Option<AgentId>,
    pub lower: Option<AgentId>,
}

impl RankWindow {
    fn admits(&self, instance: &Instance, partner: Option<AgentId>) -> bool {
        let Some(p) = partner else {
            return self.upper.is_none() && self.lower.is_none();
        };
        self.upper
            .is_none_or(|u| instance.prefers(self.agent, u, p))
            && self
                .lower
                .is_none_or(|l| instance.prefers(self.agent, p, l))
    }
}

/// The stable matching closest to `m1` that places every agent inside its
/// window, or `None` if there is none within distance `k`.
pub fn adapt_with_rank_windows(
    instance: &Instance,
    m1: &Matching,
    windows: &[RankWindow],
    k: usize,
    options: AdaptOptions,
) -> Result<Option<Adaptation>> {
    check_notion(instance, StabilityNotion::Strict)?;
    m1.check_acceptable(instance)?;
    if !is_stable(instance, m1, StabilityNotion::Strict) {
        return Err(Error::NotStable);
    }
    for w in windows {
        if w.agent.index() >= instance.n() {
            return Err(Error::InvalidParameter(format!(
                "unknown agent {}",
                w.agent
            )));
        }
        for b in w.upper.into_iter().chain(w.lower) {
            if !instance.is_acceptable(w.agent, b) {
                return Err(Error::NotAcceptable { a: w.agent, b });
            }
        }
        if let (Some(u), Some(l)) = (w.upper, w.lower) {
            if !instance.prefers(w.agent, u, l) {
                return Err(Error::InvalidParameter(format!(
                    "window of {}: upper bound must be preferred to lower bound",
                    instance.name(w.agent)
                )));
            }
        }
    }

    let completion = complete_with_dummies(instance, m1);
    let inst = &completion.instance;
    let m1c = &completion.matching;
    let poset = build_rotation_poset(inst, options.poset)?;
    let ctx = Context::new(inst, &poset, m1c);

    for w in windows {
        let allowed = ctx.partners[w.agent.index()]
            .iter()
            .any(|&p| w.admits(inst, Some(p)));
        if !allowed {
            return Err(Error::WindowUnsatisfiable(w.agent));
        }
    }

    let mut run = Run::new(&ctx, poset.matching_to_closed_set(inst, m1c)?);
    let mut feasible = true;
    for w in windows {
        let a = w.agent;
        if let Some(l) = w.lower {
            if let Some(v) = ctx.least_better(a, l) {
                feasible &= run.at_least(a, v).is_some();
            }
        }
        if let Some(u) = w.upper {
            let ru = inst.rank_of(a, u).expect("checked acceptable");
            let blocked: Vec<AgentId> = ctx.partners[a.index()]
                .iter()
                .copied()
                .filter(|&c| ctx.rank(a, c) <= ru)
                .collect();
            for c in blocked {
                feasible &= run.beyond(a, c).is_some();
            }
        }
        if !feasible {
            return Ok(None);
        }
    }
    let m = run.matching();
    let valid = windows.iter().all(|w| w.admits(inst, m.partner(w.agent)));
    let delta = m.difference_size(m1c);
    if !valid || delta > k {
        return Ok(None);
    }
    Ok(Some(Adaptation {
        matching: completion.strip(&m),
        delta,
        guess: GuessVector::default(),
    }))
}
