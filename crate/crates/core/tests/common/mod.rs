#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use matchadapt::gen::random_instance;
use matchadapt::oracle::enumerate_closed_complete_subsets;
use matchadapt::rotations::{eliminate, exposed_rotations};
use matchadapt::{
    build_rotation_poset, enumerate_stable_matchings, AdaptQuery, AgentId, Error, Instance, Kind,
    Matching, OracleLimits, Pair, PosetLimits, PreferenceList, RotationPoset, RotationSet, Side,
    StabilityNotion,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn limits(max_agents: usize) -> OracleLimits {
    OracleLimits {
        max_agents,
        ..OracleLimits::default()
    }
}

/// Independent stability check straight from the definition.
pub fn naive_stable(inst: &Instance, m: &Matching) -> bool {
    let better = |a: AgentId, b: AgentId| match m.partner(a) {
        None => true,
        Some(c) => inst.rank_of(a, b).unwrap() < inst.rank_of(a, c).unwrap(),
    };
    inst.agents().all(|a| {
        inst.prefs(a)
            .agents()
            .all(|b| m.partner(a) == Some(b) || !(better(a, b) && better(b, a)))
    })
}

/// The same preferences declared as a roommates instance.
pub fn as_roommates(inst: &Instance) -> Instance {
    let prefs = inst.agents().map(|a| inst.prefs(a).clone()).collect();
    Instance::new(inst.names().to_vec(), Kind::Roommates, None, prefs).unwrap()
}

/// A marriage instance with cyclic (Latin square) preferences, disturbed
/// by a few random adjacent swaps. These have many stable matchings.
pub fn perturbed_cyclic(r: &mut ChaCha8Rng, per_side: usize) -> Instance {
    let n = 2 * per_side;
    let mut lists: Vec<Vec<AgentId>> = Vec::with_capacity(n);
    for i in 0..per_side {
        lists.push(
            (0..per_side)
                .map(|s| AgentId::new(per_side + (i + s) % per_side))
                .collect(),
        );
    }
    for j in 0..per_side {
        lists.push(
            (0..per_side)
                .map(|s| AgentId::new((j + 1 + s) % per_side))
                .collect(),
        );
    }
    let swaps = r.gen_range(0..=per_side);
    for _ in 0..swaps {
        let a = r.gen_range(0..n);
        let pos = r.gen_range(0..per_side - 1);
        lists[a].swap(pos, pos + 1);
    }
    let names = (0..per_side)
        .map(|i| format!("m{i}"))
        .chain((0..per_side).map(|i| format!("w{i}")))
        .collect();
    let sides = (0..n)
        .map(|i| {
            if i < per_side {
                Side::Left
            } else {
                Side::Right
            }
        })
        .collect();
    let prefs = lists.into_iter().map(PreferenceList::strict).collect();
    Instance::new(names, Kind::Marriage, Some(sides), prefs).unwrap()
}

/// The n-th strict SR corpus instance with `n` from {4, 6, 8, 10}: a third
/// general random instances (complete or partial lists), a third with a
/// bipartite acceptability graph, a third perturbed cyclic ones.
pub fn sr_corpus_instance(index: u64) -> Instance {
    let mut r = rng(0x5eed_0000 + index);
    let n = [4, 6, 8, 10][r.gen_range(0..4)];
    let density = if r.gen_bool(0.5) { 1.0 } else { 0.75 };
    match index % 3 {
        0 => random_instance(n, Kind::Roommates, 0.0, density, r.gen()).unwrap(),
        1 => as_roommates(&random_instance(n, Kind::Marriage, 0.0, density, r.gen()).unwrap()),
        _ => as_roommates(&perturbed_cyclic(&mut r, n / 2)),
    }
}

/// Checks Lemma 2 (closed complete subsets <-> stable matchings) on one
/// instance. Returns the poset and all stable matchings when one exists.
pub fn check_bijection(inst: &Instance) -> Result<Option<(RotationPoset, Vec<Matching>)>, String> {
    let all = enumerate_stable_matchings(inst, StabilityNotion::Strict, limits(16))
        .map_err(|e| e.to_string())?;
    for m in &all {
        if !naive_stable(inst, m) {
            return Err(format!("oracle returned unstable {m:?}"));
        }
    }
    let poset = match build_rotation_poset(inst, PosetLimits::default()) {
        Err(Error::NoStableMatching) if all.is_empty() => return Ok(None),
        Err(e) => {
            return Err(format!(
                "poset failed with {e} but oracle found {} matchings",
                all.len()
            ))
        }
        Ok(_) if all.is_empty() => return Err("poset built but no stable matching exists".into()),
        Ok(p) => p,
    };
    let subsets = enumerate_closed_complete_subsets(&poset, OracleLimits::default())
        .map_err(|e| e.to_string())?;
    if subsets.len() != all.len() {
        return Err(format!(
            "{} closed complete subsets vs {} stable matchings",
            subsets.len(),
            all.len()
        ));
    }
    let mut images = BTreeSet::new();
    for z in &subsets {
        let m = poset.closed_set_to_matching(z).map_err(|e| e.to_string())?;
        if !all.contains(&m) {
            return Err(format!(
                "subset {z:?} maps to a matching the oracle does not know"
            ));
        }
        let back = poset
            .matching_to_closed_set(inst, &m)
            .map_err(|e| e.to_string())?;
        if &back != z {
            return Err(format!("round trip {z:?} -> {back:?}"));
        }
        images.insert(m);
    }
    if images.len() != all.len() {
        return Err("closed_set_to_matching is not injective".into());
    }
    Ok(Some((poset, all)))
}

fn partner_rank(inst: &Instance, a: AgentId, m: &Matching) -> usize {
    m.partner(a)
        .map_or(usize::MAX, |c| inst.rank_of(a, c).unwrap())
}

/// Eliminates the rotations of `z`, always choosing the exposed member with
/// the largest id (the library picks the smallest).
fn eliminate_reverse(poset: &RotationPoset, z: &RotationSet) -> Option<Matching> {
    let mut table = poset.p0().clone();
    let mut remaining: BTreeSet<_> = z.iter().collect();
    while !remaining.is_empty() {
        let next = *remaining
            .iter()
            .rev()
            .find(|&&r| exposed_rotations(&table).contains(&poset.rotation(r).cycle))?;
        table = eliminate(&table, &poset.rotation(next).cycle).ok()?;
        remaining.remove(&next);
    }
    table.to_matching()
}

/// Lemmas 1 and 3-6 plus dual involution and order independence.
pub fn check_lemmas(
    inst: &Instance,
    poset: &RotationPoset,
    all: &[Matching],
) -> Result<(), String> {
    let subsets = enumerate_closed_complete_subsets(poset, OracleLimits::default())
        .map_err(|e| e.to_string())?;

    for r in poset.rotations() {
        if let Some(d) = r.dual {
            if poset.dual(d) != Some(r.id) {
                return Err(format!("dual of dual of {} is not itself", r.id));
            }
            if poset.rotation(d).cycle != r.cycle.dual() {
                return Err("dual pairing disagrees with the dual formula".into());
            }
        }
    }

    // Lemma 1: exposed rotations satisfy the first/second/last conditions,
    // checked on every table met while eliminating each subset.
    for z in &subsets {
        let mut failure = None;
        let mut check = |table: &matchadapt::rotations::StableTable| {
            for cycle in exposed_rotations(table) {
                let p = cycle.pairs();
                let k = p.len();
                for s in 0..k {
                    let (x, y) = p[s];
                    let y_next = p[(s + 1) % k].1;
                    if table.first(x) != Some(y)
                        || table.second(x) != Some(y_next)
                        || table.last(y) != Some(x)
                    {
                        failure = Some(format!("Lemma 1 fails for {cycle}"));
                    }
                }
            }
        };
        check(poset.p0());
        poset
            .eliminate_all(z, |t, _| check(t))
            .map_err(|e| e.to_string())?;
        if let Some(f) = failure {
            return Err(f);
        }
        let forward = poset.closed_set_to_matching(z).map_err(|e| e.to_string())?;
        if eliminate_reverse(poset, z) != Some(forward) {
            return Err("elimination order changes the terminal matching".into());
        }
    }

    let stable = poset.stable_pairs();
    let oracle_union: BTreeSet<Pair> = all.iter().flat_map(|m| m.pairs()).collect();
    if stable != oracle_union {
        return Err("stable_pairs differs from the oracle union".into());
    }
    let oracle_fixed: BTreeSet<Pair> = oracle_union
        .iter()
        .copied()
        .filter(|p| all.iter().all(|m| m.contains(p)))
        .collect();
    if poset.fixed_pairs() != oracle_fixed {
        return Err("fixed_pairs differs from the oracle intersection".into());
    }

    let mut partners: BTreeMap<AgentId, Vec<AgentId>> = BTreeMap::new();
    for p in &stable {
        partners.entry(p.lo()).or_default().push(p.hi());
        partners.entry(p.hi()).or_default().push(p.lo());
    }

    for (&a, list) in &partners {
        for &b in list {
            let Some(rho) = poset.rho_of(a, b) else {
                continue;
            };
            for z in subsets.iter().filter(|z| z.contains(rho)) {
                // Lemma 3
                let mut last_ok = true;
                poset
                    .eliminate_all(z, |t, r| {
                        if r == rho && t.last(a) != Some(b) {
                            last_ok = false;
                        }
                    })
                    .map_err(|e| e.to_string())?;
                if !last_ok {
                    return Err(format!("Lemma 3 fails for ({a},{b})"));
                }
                // Lemma 4
                let m = poset.closed_set_to_matching(z).unwrap();
                let rank_b = inst.rank_of(a, b).unwrap();
                if partner_rank(inst, a, &m) > rank_b {
                    return Err(format!("Lemma 4 fails for ({a},{b})"));
                }
            }
        }
    }

    // Lemma 5
    for (&a, list) in &partners {
        for &b in list {
            let rb = inst.rank_of(a, b).unwrap();
            let has_worse = list.iter().any(|&c| inst.rank_of(a, c).unwrap() > rb);
            if !has_worse {
                continue;
            }
            let better: Vec<AgentId> = list
                .iter()
                .copied()
                .filter(|&c| inst.rank_of(a, c).unwrap() < rb)
                .collect();
            for z in &subsets {
                let m = poset.closed_set_to_matching(z).unwrap();
                let lhs = m.contains(&Pair::new(a, b));
                let rhs = poset.rho_of(a, b).is_some_and(|r| z.contains(r))
                    && better
                        .iter()
                        .all(|&c| poset.rho_of(a, c).is_none_or(|r| !z.contains(r)));
                if lhs != rhs {
                    return Err(format!("Lemma 5 fails for ({a},{b})"));
                }
            }
        }
    }

    // Lemma 6
    for e in &stable {
        let (a, b) = (e.lo(), e.hi());
        for n in all.iter().filter(|n| !n.contains(e)) {
            let (Some(na), Some(nb)) = (n.partner(a), n.partner(b)) else {
                return Err("agent of a stable pair unmatched".into());
            };
            let first = inst.prefers(a, na, b) && inst.prefers(b, a, nb);
            let second = inst.prefers(a, b, na) && inst.prefers(b, nb, a);
            if first == second {
                return Err(format!("Lemma 6 fails for {e:?}"));
            }
        }
    }
    Ok(())
}

/// A random adaptation query around a random stable matching.
pub fn random_query(r: &mut ChaCha8Rng, inst: &Instance, all: &[Matching]) -> AdaptQuery {
    let m1 = all.choose(r).unwrap().clone();
    let stable: Vec<Pair> = all
        .iter()
        .flat_map(|m| m.pairs())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let acceptable: Vec<Pair> = inst.acceptable_pairs().collect();
    let pick = |r: &mut ChaCha8Rng| -> Pair {
        if r.gen_bool(0.8) && !stable.is_empty() {
            *stable.choose(r).unwrap()
        } else {
            *acceptable.choose(r).unwrap()
        }
    };
    let q_len = r.gen_range(0..=2);
    let forced: BTreeSet<Pair> = (0..q_len).map(|_| pick(r)).collect();
    let p_len = r.gen_range(0..=3);
    let forbidden: BTreeSet<Pair> = (0..p_len)
        .map(|_| {
            if r.gen_bool(0.5) && !m1.is_empty() {
                *m1.pairs().collect::<Vec<_>>().choose(r).unwrap()
            } else {
                pick(r)
            }
        })
        .collect();
    let k = r.gen_range(0..=2 * inst.n());
    AdaptQuery::new(m1, forced, forbidden, k)
}
