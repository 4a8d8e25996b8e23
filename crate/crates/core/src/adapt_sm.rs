//! Adapting a stable marriage with strict preferences.
//!
//! Forced and forbidden pairs are encoded in pair weights so that a
//! minimum-weight stable matching answers the adaptation question. The
//! minimum-weight stable matching itself comes from the classical marriage
//! rotation poset: a minimum-weight closed rotation set, found with one
//! minimum cut.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::flow::max_weight_closure;
use crate::instance::{AgentId, Instance, Kind, Pair, Side};
use crate::matching::Matching;
use crate::query::AdaptQuery;
use crate::stability::StabilityNotion;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairWeights {
    weights: BTreeMap<Pair, i64>,
    /// The `n` the weights were built with.
    pub n: usize,
}

impl PairWeights {
    pub fn new(weights: BTreeMap<Pair, i64>, n: usize) -> Self {
        PairWeights { weights, n }
    }

    /// Weight of an acceptable pair; unknown pairs weigh 0.
    pub fn get(&self, p: &Pair) -> i64 {
        self.weights.get(p).copied().unwrap_or(0)
    }

    pub fn total(&self, m: &Matching) -> i64 {
        m.pairs().map(|p| self.get(&p)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Pair, &i64)> {
        self.weights.iter()
    }
}

fn require_marriage(instance: &Instance) -> Result<()> {
    if instance.kind() != Kind::Marriage {
        return Err(Error::InvalidParameter(
            "expected a marriage instance".into(),
        ));
    }
    if !instance.is_strict() {
        return Err(Error::TiesUnderStrictNotion);
    }
    Ok(())
}

/// Agents per side, taking the larger side when they differ.
pub fn agents_per_side(instance: &Instance) -> usize {
    let left = instance.agents_on(Side::Left).len();
    let right = instance.agents_on(Side::Right).len();
    left.max(right)
}

/// Weights over all acceptable pairs with `n` agents per side:
/// `3n` on forbidden pairs of `m1`, `3n + 2` on other forbidden pairs,
/// `-3n` on forced pairs of `m1`, `2 - 3n` on other forced pairs, `0` on the
/// remaining pairs of `m1` and `2` everywhere else.
///
/// With these weights every stable matching `M` satisfies
/// `w(M) = 3n(|P ∩ M| - |Q ∩ M|) + |M △ m1|`.
pub fn adaptation_weights(
    instance: &Instance,
    m1: &Matching,
    forced: &std::collections::BTreeSet<Pair>,
    forbidden: &std::collections::BTreeSet<Pair>,
) -> Result<PairWeights> {
    if forced.intersection(forbidden).next().is_some() {
        return Err(Error::ForcedForbiddenOverlap);
    }
    let n = agents_per_side(instance) as i64;
    let weights = instance
        .acceptable_pairs()
        .map(|e| {
            let in_m1 = m1.contains(&e);
            let w = if forbidden.contains(&e) {
                if in_m1 {
                    3 * n
                } else {
                    3 * n + 2
                }
            } else if forced.contains(&e) {
                if in_m1 {
                    -3 * n
                } else {
                    2 - 3 * n
                }
            } else if in_m1 {
                0
            } else {
                2
            };
            (e, w)
        })
        .collect();
    Ok(PairWeights::new(weights, n as usize))
}

/// Men-proposing deferred acceptance; returns the left-optimal stable matching.
pub fn gale_shapley(instance: &Instance) -> Result<Matching> {
    require_marriage(instance)?;
    let n = instance.n();
    let lists: Vec<Vec<AgentId>> = instance
        .agents()
        .map(|a| instance.prefs(a).agents().collect())
        .collect();
    let mut next = vec![0usize; n];
    let mut holds: Vec<Option<AgentId>> = vec![None; n];
    let mut free: Vec<AgentId> = instance.agents_on(Side::Left);
    free.reverse();
    while let Some(m) = free.pop() {
        let Some(&w) = lists[m.index()].get(next[m.index()]) else {
            continue;
        };
        next[m.index()] += 1;
        match holds[w.index()] {
            None => holds[w.index()] = Some(m),
            Some(cur) if instance.prefers(w, m, cur) => {
                holds[w.index()] = Some(m);
                free.push(cur);
            }
            Some(_) => free.push(m),
        }
    }
    let pairs = instance
        .agents_on(Side::Right)
        .into_iter()
        .filter_map(|w| holds[w.index()].map(|m| Pair::new(m, w)));
    Matching::from_pairs(n, pairs)
}

/// A rotation of a marriage instance: each `(m, from, to)` moves man `m`
/// from `from` to the next woman `to` on his list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmRotation {
    pub moves: Vec<(AgentId, AgentId, AgentId)>,
}

/// All rotations of a strict marriage instance, listed in one valid
/// elimination order from the left-optimal matching, with the generating
/// edges of the precedence relation.
#[derive(Clone, Debug)]
pub struct SmPoset {
    left_optimal: Matching,
    rotations: Vec<SmRotation>,
    /// `preds[r]`: rotations that must be eliminated before `r`.
    preds: Vec<Vec<usize>>,
}

/// Some rotation exposed in `partner`, if any.
fn find_exposed(
    instance: &Instance,
    partner: &[Option<AgentId>],
    men: &[AgentId],
) -> Option<SmRotation> {
    let n = partner.len();
    // next woman s(m) and the man she currently holds
    let mut step: Vec<Option<(AgentId, AgentId)>> = vec![None; n];
    for &m in men {
        let Some(cur) = partner[m.index()] else {
            continue;
        };
        let pos = instance.rank_of(m, cur).expect("partner acceptable");
        let s = instance
            .prefs(m)
            .agents()
            .skip(pos + 1)
            .find(|&w| match partner[w.index()] {
                None => true,
                Some(held) => instance.prefers(w, m, held),
            });
        if let Some(w) = s {
            if let Some(held) = partner[w.index()] {
                step[m.index()] = Some((w, held));
            }
        }
    }
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; n];
    for &start in men {
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            match state[cur.index()] {
                2 => break,
                1 => {
                    let at = path.iter().position(|&x| x == cur).expect("on path");
                    let cycle = &path[at..];
                    let moves = cycle
                        .iter()
                        .map(|&m: &AgentId| {
                            let (w, _) = step[m.index()].expect("on a cycle");
                            (m, partner[m.index()].expect("matched"), w)
                        })
                        .collect();
                    return Some(SmRotation { moves });
                }
                _ => {}
            }
            state[cur.index()] = 1;
            path.push(cur);
            match step[cur.index()] {
                Some((_, held)) => cur = held,
                None => break,
            }
        }
        for m in path {
            state[m.index()] = 2;
        }
    }
    None
}

pub fn sm_rotation_poset(instance: &Instance) -> Result<SmPoset> {
    let left_optimal = gale_shapley(instance)?;
    let n = instance.n();
    let men = instance.agents_on(Side::Left);
    let mut partner: Vec<Option<AgentId>> = (0..n)
        .map(|a| left_optimal.partner(AgentId::new(a)))
        .collect();
    let mut rotations = Vec::new();
    while let Some(r) = find_exposed(instance, &partner, &men) {
        for &(m, _, to) in &r.moves {
            partner[m.index()] = Some(to);
            partner[to.index()] = Some(m);
        }
        rotations.push(r);
    }

    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); rotations.len()];
    // (rotation, from, to) for each woman, in elimination order
    let mut woman_moves: Vec<Vec<(usize, AgentId, AgentId)>> = vec![Vec::new(); n];
    let mut man_last: Vec<Option<usize>> = vec![None; n];
    for (id, r) in rotations.iter().enumerate() {
        let k = r.moves.len();
        for (i, &(m, _, to)) in r.moves.iter().enumerate() {
            let (next_m, _, _) = r.moves[(i + 1) % k];
            woman_moves[to.index()].push((id, next_m, m));
            if let Some(p) = man_last[m.index()] {
                preds[id].push(p);
            }
            man_last[m.index()] = Some(id);
        }
    }
    for (id, r) in rotations.iter().enumerate() {
        for &(m, from, to) in &r.moves {
            let lo = instance.rank_of(m, from).expect("acceptable");
            let hi = instance.rank_of(m, to).expect("acceptable");
            for w in instance.prefs(m).agents().skip(lo + 1).take(hi - lo - 1) {
                let Some(rm) = instance.rank_of(w, m) else {
                    continue;
                };
                let lifted = woman_moves[w.index()].iter().find(|&&(_, was, now)| {
                    instance.rank_of(w, was).is_some_and(|r| r > rm)
                        && instance.rank_of(w, now).is_some_and(|r| r < rm)
                });
                if let Some(&(pi, _, _)) = lifted {
                    debug_assert!(pi < id);
                    preds[id].push(pi);
                }
            }
        }
        preds[id].sort_unstable();
        preds[id].dedup();
    }
    Ok(SmPoset {
        left_optimal,
        rotations,
        preds,
    })
}

impl SmPoset {
    pub fn left_optimal(&self) -> &Matching {
        &self.left_optimal
    }

    pub fn rotations(&self) -> &[SmRotation] {
        &self.rotations
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// Direct predecessors of rotation `r`.
    pub fn preds(&self, r: usize) -> &[usize] {
        &self.preds[r]
    }

    pub fn is_closed(&self, chosen: &[bool]) -> bool {
        (0..self.len()).all(|r| !chosen[r] || self.preds[r].iter().all(|&p| chosen[p]))
    }

    /// The stable matching obtained by eliminating the chosen rotations.
    pub fn matching_of(&self, chosen: &[bool]) -> Matching {
        let n = self.left_optimal.num_agents();
        let mut partner: Vec<Option<AgentId>> = (0..n)
            .map(|a| self.left_optimal.partner(AgentId::new(a)))
            .collect();
        for (r, rot) in self.rotations.iter().enumerate() {
            if chosen[r] {
                for &(m, _, to) in &rot.moves {
                    partner[m.index()] = Some(to);
                    partner[to.index()] = Some(m);
                }
            }
        }
        let pairs = (0..n).filter_map(|a| {
            let b = partner[a]?;
            (a < b.index()).then(|| Pair::new(AgentId::new(a), b))
        });
        Matching::from_pairs(n, pairs).expect("rotations keep a matching")
    }

    /// Weight change caused by eliminating rotation `r`.
    pub fn rotation_weight(&self, r: usize, weights: &PairWeights) -> i64 {
        self.rotations[r]
            .moves
            .iter()
            .map(|&(m, from, to)| weights.get(&Pair::new(m, to)) - weights.get(&Pair::new(m, from)))
            .sum()
    }

    /// Every closed rotation set, in no particular order; `None` once more
    /// than `cap` sets have been produced.
    pub fn closed_sets(&self, cap: usize) -> Option<Vec<Vec<bool>>> {
        fn go(
            poset: &SmPoset,
            r: usize,
            chosen: &mut Vec<bool>,
            out: &mut Vec<Vec<bool>>,
            cap: usize,
        ) -> bool {
            if r == poset.len() {
                out.push(chosen.clone());
                return out.len() <= cap;
            }
            if !go(poset, r + 1, chosen, out, cap) {
                return false;
            }
            if poset.preds[r].iter().all(|&p| chosen[p]) {
                chosen[r] = true;
                let ok = go(poset, r + 1, chosen, out, cap);
                chosen[r] = false;
                return ok;
            }
            true
        }
        let mut out = Vec::new();
        let mut chosen = vec![false; self.len()];
        go(self, 0, &mut chosen, &mut out, cap).then_some(out)
    }
}

/// A stable matching of minimum total weight, and that weight.
pub fn min_weight_stable_marriage(
    instance: &Instance,
    weights: &PairWeights,
) -> Result<(Matching, i64)> {
    let poset = sm_rotation_poset(instance)?;
    let profit: Vec<i64> = (0..poset.len())
        .map(|r| -poset.rotation_weight(r, weights))
        .collect();
    let (chosen, _) = max_weight_closure(&profit, &poset.preds);
    let m = poset.matching_of(&chosen);
    let w = weights.total(&m);
    Ok((m, w))
}

/// Same optimum as [`min_weight_stable_marriage`] by trying every closed
/// rotation set; ties go to the smallest matching.
pub fn min_weight_stable_marriage_exhaustive(
    instance: &Instance,
    weights: &PairWeights,
    cap: usize,
) -> Result<(Matching, i64)> {
    let poset = sm_rotation_poset(instance)?;
    let sets = poset.closed_sets(cap).ok_or(Error::ResourceExhausted {
        what: "closed rotation sets",
        limit: cap,
    })?;
    let best = sets
        .iter()
        .map(|s| {
            let m = poset.matching_of(s);
            (weights.total(&m), m)
        })
        .min()
        .expect("the empty set is closed");
    Ok((best.1, best.0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmAdaptation {
    pub matching: Matching,
    pub delta: usize,
    pub weight: i64,
    pub threshold: i64,
}

/// Decides the query with one minimum-weight stable matching computation.
/// Returns the matching when its weight is at most `-3n|Q| + k`.
pub fn adapt_sm(instance: &Instance, query: &AdaptQuery) -> Result<Option<SmAdaptation>> {
    require_marriage(instance)?;
    query.validate(instance, StabilityNotion::Strict)?;
    let weights = adaptation_weights(instance, &query.m1, &query.forced, &query.forbidden)?;
    if query
        .forced
        .iter()
        .any(|p| !instance.is_acceptable(p.lo(), p.hi()))
    {
        return Ok(None);
    }
    let n = weights.n as i64;
    // any admissible matching is within 2n of m1, and the threshold only
    // separates admissible from inadmissible matchings while k < 3n
    let k = query.k.min(2 * weights.n) as i64;
    let threshold = -3 * n * query.forced.len() as i64 + k;
    let (matching, weight) = min_weight_stable_marriage(instance, &weights)?;
    if weight > threshold {
        return Ok(None);
    }
    debug_assert!(query.admits(&matching));
    let delta = matching.difference_size(&query.m1);
    Ok(Some(SmAdaptation {
        matching,
        delta,
        weight,
        threshold,
    }))
}
