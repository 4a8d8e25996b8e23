//! Rotations of strict roommates instances.
//!
//! [`table`] holds Irving's phase 1 and the elimination machinery on stable
//! tables; [`poset`] explores every stable table to collect all rotations,
//! their duals and the precedence relation, and maps between closed complete
//! rotation sets and stable matchings.

pub mod poset;
pub mod table;

pub use poset::{
    build_rotation_poset, PosetLimits, Rotation, RotationId, RotationPoset, RotationSet,
};
pub use table::{eliminate, exposed_rotations, is_exposed, phase1, Cycle, StableTable};
