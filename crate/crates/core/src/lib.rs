//! Stable roommates and stable marriage: rotation posets, exhaustive
//! reference solvers, and algorithms that adapt a stable matching to forced
//! and forbidden pairs while staying as close to it as possible.
//!
//! ```
//! use matchadapt::fixtures::{example1_matching, example1_roommates};
//! use matchadapt::{adapt, AdaptQuery};
//!
//! let inst = example1_roommates();
//! let m1 = example1_matching(&inst, &[("m1", "w1"), ("m2", "w2"), ("m3", "w3")]);
//! let forced = inst.pair_by_names("m1", "w2").unwrap();
//! let got = adapt(&inst, &AdaptQuery::new(m1, [forced], [], 6)).unwrap().unwrap();
//! assert_eq!(got.delta, 6);
//! ```

pub mod adapt_sm;
pub mod adapt_sr;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod format;
pub mod gen;
pub mod instance;
pub mod matching;
pub mod oracle;
pub mod query;
pub mod rotations;
pub mod stability;

pub use adapt_sm::{
    adapt_sm, adaptation_weights, min_weight_stable_marriage, PairWeights, SmAdaptation,
};
pub use adapt_sr::{
    adapt, adapt_report, adapt_with_rank_windows, integrate, AdaptOptions, AdaptReport, Adaptation,
    GuessVector, RankWindow,
};
pub use error::{Error, Result, ValidationError, Violation};
pub use gen::Graph;
pub use instance::{
    complete_with_dummies, validate_instance, AgentId, Instance, Kind, Pair, PreferenceList, Side,
};
pub use matching::{symmetric_difference, Matching};
pub use oracle::{
    enumerate_closed_complete_subsets, enumerate_stable_matchings, oracle_adapt, OracleLimits,
};
pub use query::AdaptQuery;
pub use rotations::{
    build_rotation_poset, PosetLimits, Rotation, RotationId, RotationPoset, RotationSet,
};
pub use stability::{blocking_pairs, is_stable, StabilityNotion};
