//! Instance generators: seeded random instances and the hardness gadgets.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{AgentId, Instance, Kind, Pair, PreferenceList, Side};
use crate::matching::Matching;
use crate::query::AdaptQuery;
use crate::stability::{is_stable, StabilityNotion};

/// A simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Edges are stored as `(min, max)` in sorted order.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge {u}-{v} out of range"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidParameter(format!("duplicate edge {u}-{v}")));
            }
        }
        Ok(Graph {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbours of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| match (a == v, b == v) {
                (true, _) => Some(b),
                (_, true) => Some(a),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {x}"
        )));
    }
    Ok(())
}

/// A random instance with `n` agents.
///
/// Every admissible pair is acceptable with probability `density`. Each list
/// is shuffled, and neighbouring entries are merged into a tie with
/// probability `tie_probability`. Roommates agents are named `a0, a1, ...`;
/// marriage instances get `ceil(n/2)` men `m0, ...` and `floor(n/2)` women
/// `w0, ...`.
pub fn random_instance(
    n: usize,
    kind: Kind,
    tie_probability: f64,
    density: f64,
    seed: u64,
) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 agents, got {n}"
        )));
    }
    check_unit("tie probability", tie_probability)?;
    check_unit("acceptability density", density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (names, sides): (Vec<String>, Option<Vec<Side>>) = match kind {
        Kind::Roommates => ((0..n).map(|i| format!("a{i}")).collect(), None),
        Kind::Marriage => {
            let left = n.div_ceil(2);
            let names = (0..left)
                .map(|i| format!("m{i}"))
                .chain((0..n - left).map(|i| format!("w{i}")))
                .collect();
            let sides = (0..n)
                .map(|i| if i < left { Side::Left } else { Side::Right })
                .collect();
            (names, Some(sides))
        }
    };

    let mut acceptable: Vec<Vec<AgentId>> = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            if let Some(s) = &sides {
                if s[a] == s[b] {
                    continue;
                }
            }
            if density >= 1.0 || rng.gen_bool(density) {
                acceptable[a].push(AgentId::new(b));
                acceptable[b].push(AgentId::new(a));
            }
        }
    }

    let prefs = acceptable
        .into_iter()
        .map(|mut list| {
            list.shuffle(&mut rng);
            let mut groups: Vec<Vec<AgentId>> = Vec::new();
            for b in list {
                match groups.last_mut() {
                    Some(g) if tie_probability > 0.0 && rng.gen_bool(tie_probability) => g.push(b),
                    _ => groups.push(vec![b]),
                }
            }
            PreferenceList::new(groups)
        })
        .collect();
    Ok(Instance::new(names, kind, sides, prefs)?)
}

/// The independent-set gadget: ten agents per vertex, `m1` matching
/// `a_i^v` with `b_i^v`, every `{a_2^v, b_2^v}` forbidden, and budget
/// `8|V| - 4 ell`. A yes-instance exactly when `g` has an independent set of
/// size `ell`.
pub fn independent_set_gadget(g: &Graph, ell: usize) -> Result<(Instance, AdaptQuery)> {
    let nv = g.num_vertices();
    if nv == 0 {
        return Err(Error::InvalidParameter("graph has no vertices".into()));
    }
    if ell > nv {
        return Err(Error::InvalidParameter(format!(
            "ell = {ell} exceeds |V| = {nv}"
        )));
    }
    // a_i^v has id 10v + i - 1, b_i^v has id 10v + 4 + i
    let a = |v: usize, i: usize| AgentId::new(10 * v + i - 1);
    let b = |v: usize, i: usize| AgentId::new(10 * v + 4 + i);

    let mut names = Vec::with_capacity(10 * nv);
    let mut prefs = Vec::with_capacity(10 * nv);
    for v in 0..nv {
        for i in 1..=5 {
            names.push(format!("a{i}_{v}"));
        }
        for i in 1..=5 {
            names.push(format!("b{i}_{v}"));
        }
        let neighbours = g.neighbors(v).into_iter().map(|w| a(w, 2));
        prefs.push(PreferenceList::strict([b(v, 1), b(v, 2)]));
        prefs.push(PreferenceList::strict(
            [b(v, 3), b(v, 2)]
                .into_iter()
                .chain(neighbours)
                .chain([b(v, 1)]),
        ));
        prefs.push(PreferenceList::strict([b(v, 2), b(v, 3)]));
        prefs.push(PreferenceList::strict([b(v, 5), b(v, 3), b(v, 4)]));
        prefs.push(PreferenceList::strict([b(v, 4), b(v, 5)]));
        prefs.push(PreferenceList::strict([a(v, 2), a(v, 1)]));
        prefs.push(PreferenceList::strict([a(v, 1), a(v, 2), a(v, 3)]));
        prefs.push(PreferenceList::strict([a(v, 3), a(v, 4), a(v, 2)]));
        prefs.push(PreferenceList::strict([a(v, 4), a(v, 5)]));
        prefs.push(PreferenceList::strict([a(v, 5), a(v, 4)]));
    }
    let instance = Instance::new(names, Kind::Roommates, None, prefs)?;
    let m1 = Matching::on(
        &instance,
        (0..nv).flat_map(|v| (1..=5).map(move |i| Pair::new(a(v, i), b(v, i)))),
    )?;
    let forbidden = (0..nv).map(|v| Pair::new(a(v, 2), b(v, 2)));
    let query = AdaptQuery::new(m1, [], forbidden, 8 * nv - 4 * ell);
    assert!(is_stable(&instance, &query.m1, StabilityNotion::Strict));
    Ok((instance, query))
}

/// The base of a local-search gadget: a marriage instance with equal sides
/// and a weakly stable matching leaving exactly one agent per side single.
struct Base<'a> {
    instance: &'a Instance,
    n_matching: &'a Matching,
    men: Vec<AgentId>,
    women: Vec<AgentId>,
    single_man: AgentId,
    single_woman: AgentId,
}

fn check_base<'a>(instance: &'a Instance, n_matching: &'a Matching) -> Result<Base<'a>> {
    if instance.kind() != Kind::Marriage {
        return Err(Error::Precondition(
            "base must be a marriage instance".into(),
        ));
    }
    let men = instance.agents_on(Side::Left);
    let women = instance.agents_on(Side::Right);
    if men.len() != women.len() {
        return Err(Error::Precondition(
            "base sides must have equal size".into(),
        ));
    }
    n_matching.check_acceptable(instance)?;
    let single_men: Vec<AgentId> = men
        .iter()
        .copied()
        .filter(|&m| n_matching.partner(m).is_none())
        .collect();
    let single_women: Vec<AgentId> = women
        .iter()
        .copied()
        .filter(|&w| n_matching.partner(w).is_none())
        .collect();
    let (&[single_man], &[single_woman]) = (single_men.as_slice(), single_women.as_slice()) else {
        return Err(Error::Precondition(
            "the base matching must leave exactly one agent per side unmatched".into(),
        ));
    };
    if !is_stable(instance, n_matching, StabilityNotion::Weak) {
        return Err(Error::Precondition(
            "the base matching must be weakly stable".into(),
        ));
    }
    Ok(Base {
        instance,
        n_matching,
        men,
        women,
        single_man,
        single_woman,
    })
}

/// Copies the base and appends new agents; `extend(base_agent)` gives the
/// agents appended (as one last group each) to that agent's list.
fn augment(
    base: &Base,
    new_agents: &[(&str, Side, Vec<AgentId>)],
    extra_last: impl Fn(AgentId) -> Option<AgentId>,
) -> Result<Instance> {
    let inst = base.instance;
    let mut names: Vec<String> = inst.names().to_vec();
    let mut sides: Vec<Side> = inst.sides().expect("marriage instance").to_vec();
    let mut prefs: Vec<PreferenceList> = inst
        .agents()
        .map(|a| {
            let mut groups = inst.prefs(a).groups().to_vec();
            if let Some(x) = extra_last(a) {
                groups.push(vec![x]);
            }
            PreferenceList::new(groups)
        })
        .collect();
    for (name, side, list) in new_agents {
        let mut name = name.to_string();
        while names.contains(&name) {
            name.push('_');
        }
        names.push(name);
        sides.push(*side);
        prefs.push(PreferenceList::strict(list.iter().copied()));
    }
    Ok(Instance::new(names, Kind::Marriage, Some(sides), prefs)?)
}

/// The forced-pair gadget: adds `u_star` and `w_star`, forces them together,
/// and starts from `N` plus `u_star`, `w_star` matched to the two singles.
pub fn local_search_forced_gadget(
    base: &Instance,
    n_matching: &Matching,
    ell: usize,
) -> Result<(Instance, AdaptQuery)> {
    let b = check_base(base, n_matching)?;
    let n = base.n();
    let (u_star, w_star) = (AgentId::new(n), AgentId::new(n + 1));
    let instance = augment(
        &b,
        &[
            (
                "u_star",
                Side::Left,
                b.women.iter().copied().chain([w_star]).collect(),
            ),
            (
                "w_star",
                Side::Right,
                b.men.iter().copied().chain([u_star]).collect(),
            ),
        ],
        |a| match base.side(a) {
            Some(Side::Left) => Some(w_star),
            _ => Some(u_star),
        },
    )?;
    let m1 = Matching::from_pairs(
        instance.n(),
        b.n_matching.pairs().chain([
            Pair::new(u_star, b.single_woman),
            Pair::new(b.single_man, w_star),
        ]),
    )?;
    let query = AdaptQuery::new(m1, [Pair::new(u_star, w_star)], [], ell + 3);
    assert!(is_stable(&instance, &query.m1, StabilityNotion::Weak));
    Ok((instance, query))
}

/// The forbidden-pair gadget: adds `w_star`, `u_prime` and `w_prime`, and
/// forbids the `m1` pair `{u_prime, w_prime}`.
pub fn local_search_forbidden_gadget(
    base: &Instance,
    n_matching: &Matching,
    ell: usize,
) -> Result<(Instance, AdaptQuery)> {
    let b = check_base(base, n_matching)?;
    let n = base.n();
    let (w_star, u_prime, w_prime) = (AgentId::new(n), AgentId::new(n + 1), AgentId::new(n + 2));
    let instance = augment(
        &b,
        &[
            (
                "w_star",
                Side::Right,
                b.men.iter().copied().chain([u_prime]).collect(),
            ),
            ("u_prime", Side::Left, vec![w_star, w_prime]),
            ("w_prime", Side::Right, vec![u_prime]),
        ],
        |a| (base.side(a) == Some(Side::Left)).then_some(w_star),
    )?;
    let m1 = Matching::from_pairs(
        instance.n(),
        b.n_matching
            .pairs()
            .chain([Pair::new(b.single_man, w_star), Pair::new(u_prime, w_prime)]),
    )?;
    let query = AdaptQuery::new(m1, [], [Pair::new(u_prime, w_prime)], ell + 3);
    assert!(is_stable(&instance, &query.m1, StabilityNotion::Weak));
    Ok((instance, query))
}

/// The base configuration drawn in the forced-pair figure: three matched
/// couples plus one single man and one single woman, with ties on both sides.
pub fn figure3_base() -> (Instance, Matching) {
    let text = "\
kind sm
left u_single u1 u2 u3
right w_single w1 w2 w3
u_single : w1
u1 : ( w_single w1 )
u2 : w3 w1 w2
u3 : w3 w2
w_single : u1
w1 : u1 u2 u_single
w2 : ( u2 u3 )
w3 : u3 u2
";
    let instance = crate::format::parse_instance(text).expect("fixture parses");
    let m = crate::format::parse_matching(&instance, "u1 w1\nu2 w2\nu3 w3\n")
        .expect("fixture matching");
    (instance, m)
}
