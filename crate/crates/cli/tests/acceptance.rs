//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::fs;
use std::panic;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use matchadapt::adapt_sm::{adapt_sm, adaptation_weights};
use matchadapt::fixtures::{example1, example1_matching};
use matchadapt::gen::{
    independent_set_gadget, local_search_forbidden_gadget, local_search_forced_gadget,
    random_instance,
};
use matchadapt::oracle::oracle_optimum;
use matchadapt::rotations::Cycle;
use matchadapt::{
    adapt, adapt_report, build_rotation_poset, enumerate_closed_complete_subsets,
    enumerate_stable_matchings, oracle_adapt, AdaptOptions, AdaptQuery, Error, Graph, Kind,
    Matching, OracleLimits, Pair, PosetLimits, RotationId, RotationSet, StabilityNotion,
};
use rand::seq::SliceRandom;
use rand::Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_example1() -> Result<String, String> {
    let inst = example1();
    let poset = build_rotation_poset(&inst, PosetLimits::default()).map_err(|e| e.to_string())?;
    let rid = |pairs: [(&str, &str); 3]| -> Result<RotationId, String> {
        let cycle = Cycle::new(
            pairs
                .iter()
                .map(|(a, b)| (inst.agent(a).unwrap(), inst.agent(b).unwrap()))
                .collect(),
        );
        poset
            .id_of(&cycle)
            .ok_or_else(|| format!("rotation {pairs:?} missing"))
    };
    let phi = [
        rid([("m1", "w1"), ("m2", "w2"), ("m3", "w3")])?,
        rid([("w1", "m2"), ("w2", "m3"), ("w3", "m1")])?,
        rid([("m1", "w2"), ("m2", "w3"), ("m3", "w1")])?,
        rid([("w1", "m3"), ("w2", "m1"), ("w3", "m2")])?,
    ];
    ensure(poset.len() == 4, || format!("{} rotations", poset.len()))?;
    ensure(poset.singular().is_empty(), || {
        "singular rotations present".into()
    })?;
    let mut duals = poset.dual_pairs();
    duals.sort();
    let mut expected = vec![(phi[0], phi[3]), (phi[1], phi[2])];
    expected
        .iter_mut()
        .for_each(|p| *p = (p.0.min(p.1), p.0.max(p.1)));
    expected.sort();
    ensure(duals == expected, || format!("dual pairs {duals:?}"))?;
    let mut prec = vec![(phi[0], phi[2]), (phi[1], phi[3])];
    prec.sort();
    ensure(poset.precedence_pairs() == prec, || {
        format!("precedence {:?}", poset.precedence_pairs())
    })?;

    let subsets = enumerate_closed_complete_subsets(&poset, OracleLimits::default())
        .map_err(|e| e.to_string())?;
    let set = |ids: &[usize]| ids.iter().map(|&i| phi[i]).collect::<RotationSet>();
    let listed = [
        (set(&[0, 1]), [("m1", "w2"), ("m2", "w3"), ("m3", "w1")]),
        (set(&[0, 2]), [("m1", "w3"), ("m2", "w1"), ("m3", "w2")]),
        (set(&[1, 3]), [("m1", "w1"), ("m2", "w2"), ("m3", "w3")]),
    ];
    ensure(subsets.len() == 3, || {
        format!("{} closed complete subsets", subsets.len())
    })?;
    for (z, pairs) in &listed {
        ensure(subsets.contains(z), || {
            format!("{z:?} not closed and complete")
        })?;
        let m = poset.closed_set_to_matching(z).map_err(|e| e.to_string())?;
        ensure(m == example1_matching(&inst, pairs), || {
            format!("{z:?} maps to {}", m.display(&inst))
        })?;
    }
    Ok("4 rotations, 2 dual pairs, 2 precedence edges, 3 closed complete subsets".into())
}

const CORPUS: u64 = 500;

fn c2_bijection() -> Result<String, String> {
    let mut solvable = 0;
    let mut matchings = 0;
    for i in 0..CORPUS {
        if let Some((_, all)) =
            check_bijection(&sr_corpus_instance(i)).map_err(|e| format!("instance {i}: {e}"))?
        {
            solvable += 1;
            matchings += all.len();
        }
    }
    Ok(format!(
        "{CORPUS} instances, {solvable} solvable, {matchings} stable matchings"
    ))
}

fn c3_adapt_optimality() -> Result<String, String> {
    let (mut cases, mut feasible, mut index) = (0, 0, 0u64);
    while cases < 500 {
        index += 1;
        let inst = sr_corpus_instance(1_000_000 + index);
        let all = enumerate_stable_matchings(&inst, StabilityNotion::Strict, limits(16))
            .map_err(|e| e.to_string())?;
        if all.is_empty() {
            continue;
        }
        let mut r = rng(index);
        let q = random_query(&mut r, &inst, &all);
        let expected = oracle_adapt(&inst, &q, StabilityNotion::Strict, limits(16))
            .map_err(|e| e.to_string())?;
        let got = adapt(&inst, &q).map_err(|e| format!("case {index}: {e}"))?;
        cases += 1;
        match (&expected, &got) {
            (None, None) => {}
            (Some(e), Some(g)) if e.difference_size(&q.m1) == g.delta => {
                ensure(
                    naive_stable(&inst, &g.matching) && q.admits(&g.matching),
                    || format!("case {index}: returned matching invalid"),
                )?;
                feasible += 1;
            }
            _ => {
                return Err(format!(
                    "case {index}: oracle {:?}, adapt {:?}",
                    expected.map(|m| m.difference_size(&q.m1)),
                    got.map(|a| a.delta)
                ))
            }
        }
    }
    Ok(format!("{cases} cases, {feasible} feasible"))
}

fn c4_weight_identity() -> Result<String, String> {
    let mut checked = 0;
    for i in 0..200u64 {
        let mut r = rng(0x5a_0000 + i);
        let per_side = r.gen_range(2..=8);
        let density = if r.gen_bool(0.5) { 1.0 } else { 0.7 };
        let inst = random_instance(2 * per_side, Kind::Marriage, 0.0, density, r.gen()).unwrap();
        let all = enumerate_stable_matchings(&inst, StabilityNotion::Strict, limits(16))
            .map_err(|e| e.to_string())?;
        let mut q = random_query(&mut r, &inst, &all);
        q.forbidden = q.forbidden.difference(&q.forced).copied().collect();
        let w =
            adaptation_weights(&inst, &q.m1, &q.forced, &q.forbidden).map_err(|e| e.to_string())?;
        let n = w.n as i64;
        for m in &all {
            let p = q.forbidden.iter().filter(|e| m.contains(e)).count() as i64;
            let f = q.forced.iter().filter(|e| m.contains(e)).count() as i64;
            let expected = 3 * n * (p - f) + m.difference_size(&q.m1) as i64;
            ensure(w.total(m) == expected, || {
                format!(
                    "instance {i}: w(M) = {} but identity gives {expected}",
                    w.total(m)
                )
            })?;
            checked += 1;
        }
        let oracle = oracle_adapt(&inst, &q, StabilityNotion::Strict, limits(16))
            .map_err(|e| e.to_string())?;
        let got = adapt_sm(&inst, &q).map_err(|e| e.to_string())?;
        ensure(
            oracle.map(|m| m.difference_size(&q.m1)) == got.map(|a| a.delta),
            || format!("instance {i}: decision differs"),
        )?;
    }
    Ok(format!(
        "200 instances, identity on {checked} stable matchings"
    ))
}

fn max_independent_set(g: &Graph) -> usize {
    (0u32..1 << g.num_vertices())
        .filter(|&s| {
            g.edges()
                .iter()
                .all(|&(u, v)| s >> u & 1 == 0 || s >> v & 1 == 0)
        })
        .map(u32::count_ones)
        .max()
        .unwrap() as usize
}

fn edge_slots(nv: usize) -> Vec<(usize, usize)> {
    (0..nv)
        .flat_map(|u| (u + 1..nv).map(move |v| (u, v)))
        .collect()
}

fn graph_of(nv: usize, mask: u32) -> Graph {
    let slots = edge_slots(nv);
    Graph::new(
        nv,
        slots
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e),
    )
    .unwrap()
}

fn check_is_gadget(g: &Graph) -> Result<(), String> {
    let nv = g.num_vertices();
    let alpha = max_independent_set(g);
    let (inst, q0) = independent_set_gadget(g, 0).map_err(|e| e.to_string())?;
    let best = oracle_optimum(&inst, &q0, StabilityNotion::Strict, limits(10 * nv))
        .map_err(|e| e.to_string())?
        .map(|(_, d)| d);
    ensure(best == Some(4 * alpha + 8 * (nv - alpha)), || {
        format!("{g:?}: optimum {best:?}, alpha {alpha}")
    })?;
    for ell in 0..=nv {
        let (_, q) = independent_set_gadget(g, ell).map_err(|e| e.to_string())?;
        // oracle_adapt is the optimum filtered by the budget
        let yes = best.is_some_and(|d| d <= q.k);
        ensure(yes == (alpha >= ell), || {
            format!("{g:?}, ell {ell}: gadget {yes}, alpha {alpha}")
        })?;
    }
    Ok(())
}

fn c5_theorem1() -> Result<String, String> {
    let mut graphs = 0;
    for nv in 1..=5 {
        for mask in 0u32..1 << edge_slots(nv).len() {
            check_is_gadget(&graph_of(nv, mask))?;
            graphs += 1;
        }
    }
    let mut r = rng(0x6);
    for _ in 0..20 {
        check_is_gadget(&graph_of(6, r.gen_range(0..1 << 15)))?;
        graphs += 1;
    }
    Ok(format!(
        "{graphs} labelled graphs (all on <= 5 vertices, 20 sampled on 6), every ell"
    ))
}

fn c6_prop2() -> Result<String, String> {
    let (mut bases, mut yes, mut no, mut seed) = (0, 0, 0, 0u64);
    while bases < 50 {
        seed += 1;
        let mut r = rng(0x9_0000 + seed);
        let per_side = r.gen_range(2..=4);
        let base = random_instance(2 * per_side, Kind::Marriage, 0.3, 0.7, r.gen()).unwrap();
        let all = enumerate_stable_matchings(&base, StabilityNotion::Weak, limits(8))
            .map_err(|e| e.to_string())?;
        let candidates: Vec<&Matching> = all.iter().filter(|m| m.len() + 1 == per_side).collect();
        let Some(&n) = candidates.choose(&mut r) else {
            continue;
        };
        bases += 1;
        let dist = all
            .iter()
            .filter(|m| m.is_complete())
            .map(|m| m.difference_size(n))
            .min();
        for ell in 0..=base.n() {
            let expected = dist.is_some_and(|d| d <= ell);
            if expected {
                yes += 1
            } else {
                no += 1
            }
            let gadgets = [
                ("forced", local_search_forced_gadget(&base, n, ell)),
                ("forbidden", local_search_forbidden_gadget(&base, n, ell)),
            ];
            for (name, gadget) in gadgets {
                let (inst, q) = gadget.map_err(|e| e.to_string())?;
                let got = oracle_adapt(&inst, &q, StabilityNotion::Weak, limits(12))
                    .map_err(|e| e.to_string())?;
                ensure(got.is_some() == expected, || {
                    format!("{name} gadget, base {seed}, ell {ell}")
                })?;
            }
        }
    }
    Ok(format!(
        "{bases} bases, {yes} yes and {no} no cases per gadget"
    ))
}

fn c7_lemmas() -> Result<String, String> {
    let mut checked = 0;
    for i in 0..CORPUS {
        let inst = sr_corpus_instance(i);
        if let Some((poset, all)) =
            check_bijection(&inst).map_err(|e| format!("instance {i}: {e}"))?
        {
            check_lemmas(&inst, &poset, &all).map_err(|e| format!("instance {i}: {e}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} solvable instances"))
}

fn c8_fpt() -> Result<String, String> {
    let limits = PosetLimits::default();
    let (mut runs, mut seed, mut worst) = (0, 0u64, Duration::ZERO);
    while runs < 5 {
        seed += 1;
        let inst = random_instance(40, Kind::Roommates, 0.0, 1.0, 0xf0_0000 + seed).unwrap();
        let poset = match build_rotation_poset(&inst, limits) {
            Err(Error::NoStableMatching) => continue,
            other => other.map_err(|e| e.to_string())?,
        };
        let fixed = poset.fixed_pairs();
        let m1 = poset.base().1.clone();
        let movable: Vec<Pair> = m1.pairs().filter(|p| !fixed.contains(p)).collect();
        if movable.len() < 8 {
            continue;
        }
        let mut r = rng(seed);
        let forbidden: Vec<Pair> = movable.choose_multiple(&mut r, 8).copied().collect();
        let q = AdaptQuery::new(m1, [], forbidden, 2 * inst.n());
        let start = Instant::now();
        let report = adapt_report(&inst, &q, AdaptOptions::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let elapsed = start.elapsed();
        worst = worst.max(elapsed);
        ensure(report.guesses_evaluated == 1 << 8, || {
            format!("seed {seed}: {} guesses", report.guesses_evaluated)
        })?;
        ensure(report.tables_explored <= limits.max_tables, || {
            "exploration guard triggered".into()
        })?;
        ensure(elapsed < Duration::from_secs(10), || {
            format!("seed {seed}: {elapsed:?}")
        })?;
        runs += 1;
    }
    Ok(format!(
        "5 instances, n=40, |P cap M1|=8, 256 guesses each, slowest {worst:.2?}"
    ))
}

fn run_script(dir: &Path) -> Vec<(String, i32, Vec<u8>)> {
    let bin = env!("CARGO_BIN_EXE_matchadapt");
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    for f in [
        "example1.pref",
        "example1_sr.pref",
        "example1_m1.txt",
        "k3.edges",
    ] {
        fs::copy(data.join(f), dir.join(f)).unwrap();
    }
    fs::write(dir.join("bad.txt"), "m1 w2\nm2 w1\nm3 w3\n").unwrap();
    let script: &[&[&str]] = &[
        &["check", "example1.pref", "example1_m1.txt"],
        &["check", "example1.pref", "bad.txt"],
        &["rotations", "example1_sr.pref", "--dot", "ex1.dot"],
        &["gen", "random", "--n", "8", "--kind", "sr", "--seed", "7"],
        &[
            "gen", "random", "--n", "10", "--kind", "sr", "--seed", "11", "-o", "r10.pref",
        ],
        &["rotations", "r10.pref", "--dot", "r10.dot"],
        &[
            "gen", "random", "--n", "8", "--kind", "sm", "--ties", "0.3", "--seed", "3", "-o",
            "t8.pref",
        ],
        &[
            "gen",
            "is-gadget",
            "--graph",
            "k3.edges",
            "--ell",
            "1",
            "-o",
            "is.pref",
        ],
        &["gen", "ls-forced-gadget", "--ell", "2", "-o", "forced.pref"],
        &[
            "gen",
            "ls-forbidden-gadget",
            "--ell",
            "2",
            "-o",
            "forbidden.pref",
        ],
        &[
            "adapt",
            "example1.pref",
            "example1_m1.txt",
            "--forced",
            "m1 w2",
            "--k",
            "6",
            "--verify",
        ],
        &[
            "adapt",
            "example1_sr.pref",
            "example1_m1.txt",
            "--forbidden",
            "m1 w1",
            "--forbidden",
            "m2 w2",
        ],
        &[
            "adapt",
            "example1_sr.pref",
            "example1_m1.txt",
            "--forced",
            "m1 w2",
            "--oracle",
        ],
    ];
    script
        .iter()
        .map(|args| {
            let out = Command::new(bin)
                .args(*args)
                .current_dir(dir)
                .output()
                .unwrap();
            (args.join(" "), out.status.code().unwrap_or(-1), out.stdout)
        })
        .collect()
}

fn dir_contents(dir: &Path) -> BTreeSet<(String, Vec<u8>)> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn c9_determinism() -> Result<String, String> {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ra, rb) = (run_script(a.path()), run_script(b.path()));
    for (x, y) in ra.iter().zip(&rb) {
        ensure(x == y, || format!("`{}` differs between runs", x.0))?;
        ensure(x.1 != 2 && x.1 != 3, || {
            format!("`{}` exited with {}", x.0, x.1)
        })?;
    }
    let (fa, fb) = (dir_contents(a.path()), dir_contents(b.path()));
    ensure(fa == fb, || "written files differ between runs".into())?;
    Ok(format!(
        "{} commands, {} files byte-identical across two runs",
        ra.len(),
        fa.len()
    ))
}

fn main() {
    let criteria: [(&str, Check, Option<Duration>); 9] = [
        (
            "Example 1 golden fixture",
            c1_example1,
            Some(Duration::from_secs(1)),
        ),
        (
            "Lemma 2 bijection on random SR",
            c2_bijection,
            Some(Duration::from_secs(60)),
        ),
        (
            "adapt_sr optimality vs oracle",
            c3_adapt_optimality,
            Some(Duration::from_secs(120)),
        ),
        (
            "Prop. 1 weight identity and adapt_sm",
            c4_weight_identity,
            None,
        ),
        ("Theorem 1 reduction equivalence", c5_theorem1, None),
        ("Prop. 2 reduction equivalence", c6_prop2, None),
        ("Lemma suite", c7_lemmas, None),
        ("FPT behaviour, n=40", c8_fpt, None),
        ("CLI determinism", c9_determinism, None),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(l)) if elapsed >= l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        let limit = limit.map(|l| format!(", limit {l:?}")).unwrap_or_default();
        match result {
            Ok(detail) => println!(
                "criterion {}: PASS  {name}: {detail} ({elapsed:.2?}{limit})",
                i + 1
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {}: FAIL  {name}: {detail} ({elapsed:.2?}{limit})",
                    i + 1
                );
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
