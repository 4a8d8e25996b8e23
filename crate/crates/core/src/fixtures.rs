//! Small hand-written instances used by tests, examples and the CLI docs.

use crate::instance::{validate_instance, Instance, RawAgent, RawInstance, RawKind};
use crate::matching::Matching;

fn strict_raw(kind: RawKind, lines: &[(&str, &[&str])]) -> RawInstance {
    RawInstance {
        kind,
        agents: lines
            .iter()
            .map(|(name, list)| RawAgent {
                name: name.to_string(),
                groups: list.iter().map(|s| vec![s.to_string()]).collect(),
            })
            .collect(),
    }
}

/// Three men and three women with cyclic preferences; it has exactly three
/// stable matchings, which are pairwise disjoint.
pub fn example1() -> Instance {
    let kind = RawKind::Marriage {
        left: vec!["m1".into(), "m2".into(), "m3".into()],
        right: vec!["w1".into(), "w2".into(), "w3".into()],
    };
    let raw = strict_raw(
        kind,
        &[
            ("m1", &["w1", "w2", "w3"]),
            ("m2", &["w2", "w3", "w1"]),
            ("m3", &["w3", "w1", "w2"]),
            ("w1", &["m2", "m3", "m1"]),
            ("w2", &["m3", "m1", "m2"]),
            ("w3", &["m1", "m2", "m3"]),
        ],
    );
    validate_instance(&raw).expect("fixture is valid")
}

/// Same preferences as [`example1`], declared as a roommates instance.
pub fn example1_roommates() -> Instance {
    let raw = strict_raw(
        RawKind::Roommates,
        &[
            ("m1", &["w1", "w2", "w3"]),
            ("m2", &["w2", "w3", "w1"]),
            ("m3", &["w3", "w1", "w2"]),
            ("w1", &["m2", "m3", "m1"]),
            ("w2", &["m3", "m1", "m2"]),
            ("w3", &["m1", "m2", "m3"]),
        ],
    );
    validate_instance(&raw).expect("fixture is valid")
}

/// Builds a matching from name pairs; panics on unknown names.
pub fn example1_matching(instance: &Instance, pairs: &[(&str, &str)]) -> Matching {
    Matching::on(
        instance,
        pairs
            .iter()
            .map(|(a, b)| instance.pair_by_names(a, b).expect("known agents")),
    )
    .expect("valid matching")
}

/// Three agents with cyclic first choices plus an isolated fourth agent.
/// No stable matching exists.
pub fn odd_triangle_with_isolated() -> Instance {
    let raw = strict_raw(
        RawKind::Roommates,
        &[
            ("a", &["b", "c"]),
            ("b", &["c", "a"]),
            ("c", &["a", "b"]),
            ("d", &[]),
        ],
    );
    validate_instance(&raw).expect("fixture is valid")
}
