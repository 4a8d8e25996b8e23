use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::instance::{Instance, Pair};
use crate::matching::Matching;
use crate::stability::{blocking_pairs, check_notion, StabilityNotion};

/// Input of the adaptation problem: a stable matching `m1`, pairs that must
/// appear (`forced`), pairs that must not appear (`forbidden`), and a bound
/// `k` on the symmetric difference to `m1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdaptQuery {
    pub m1: Matching,
    pub forced: BTreeSet<Pair>,
    pub forbidden: BTreeSet<Pair>,
    pub k: usize,
}

impl AdaptQuery {
    pub fn new(
        m1: Matching,
        forced: impl IntoIterator<Item = Pair>,
        forbidden: impl IntoIterator<Item = Pair>,
        k: usize,
    ) -> Self {
        AdaptQuery {
            m1,
            forced: forced.into_iter().collect(),
            forbidden: forbidden.into_iter().collect(),
            k,
        }
    }

    /// Checks that `m1` is a valid matching of `instance` and stable under `notion`.
    pub fn validate(&self, instance: &Instance, notion: StabilityNotion) -> Result<()> {
        check_notion(instance, notion)?;
        self.m1.check_acceptable(instance)?;
        for p in self.forced.iter().chain(&self.forbidden) {
            if p.hi().index() >= instance.n() {
                return Err(Error::InvalidParameter(format!(
                    "pair references unknown agent {}",
                    p.hi()
                )));
            }
        }
        if !blocking_pairs(instance, &self.m1, notion).is_empty() {
            return Err(Error::NotStable);
        }
        Ok(())
    }

    /// Whether `m` contains every forced pair and no forbidden pair.
    pub fn admits(&self, m: &Matching) -> bool {
        self.forced.iter().all(|p| m.contains(p)) && !self.forbidden.iter().any(|p| m.contains(p))
    }
}
