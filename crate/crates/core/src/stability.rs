use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::{AgentId, Instance, Pair};
use crate::matching::Matching;

/// Which pairs count as blocking.
///
/// `Strict` is plain stability for instances without ties. With ties, a pair
/// blocks under `Weak` if both agents strictly improve, and under `Strong`
/// if one strictly improves while the other does not get worse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StabilityNotion {
    Strict,
    Weak,
    Strong,
}

impl FromStr for StabilityNotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(StabilityNotion::Strict),
            "weak" => Ok(StabilityNotion::Weak),
            "strong" => Ok(StabilityNotion::Strong),
            other => Err(Error::InvalidParameter(format!(
                "unknown stability notion {other:?}"
            ))),
        }
    }
}

impl fmt::Display for StabilityNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilityNotion::Strict => "strict",
            StabilityNotion::Weak => "weak",
            StabilityNotion::Strong => "strong",
        })
    }
}

/// Rejects `Strict` on instances that contain ties.
pub fn check_notion(instance: &Instance, notion: StabilityNotion) -> Result<()> {
    if notion == StabilityNotion::Strict && !instance.is_strict() {
        return Err(Error::TiesUnderStrictNotion);
    }
    Ok(())
}

#[inline]
fn strictly_improves(
    instance: &Instance,
    a: AgentId,
    b: AgentId,
    current: Option<AgentId>,
) -> bool {
    match current {
        None => true,
        Some(c) => instance.rank_of(a, b) < instance.rank_of(a, c),
    }
}

#[inline]
fn weakly_improves(instance: &Instance, a: AgentId, b: AgentId, current: Option<AgentId>) -> bool {
    match current {
        None => true,
        Some(c) => instance.rank_of(a, b) <= instance.rank_of(a, c),
    }
}

/// Whether the acceptable pair `{a, b}`, not in `m`, blocks `m`.
#[inline]
pub fn pair_blocks(
    instance: &Instance,
    a_partner: Option<AgentId>,
    b_partner: Option<AgentId>,
    a: AgentId,
    b: AgentId,
    notion: StabilityNotion,
) -> bool {
    match notion {
        StabilityNotion::Strict | StabilityNotion::Weak => {
            strictly_improves(instance, a, b, a_partner)
                && strictly_improves(instance, b, a, b_partner)
        }
        StabilityNotion::Strong => {
            (strictly_improves(instance, a, b, a_partner)
                && weakly_improves(instance, b, a, b_partner))
                || (weakly_improves(instance, a, b, a_partner)
                    && strictly_improves(instance, b, a, b_partner))
        }
    }
}

/// Every pair that blocks `matching` under `notion`.
pub fn blocking_pairs(
    instance: &Instance,
    matching: &Matching,
    notion: StabilityNotion,
) -> BTreeSet<Pair> {
    instance
        .acceptable_pairs()
        .filter(|p| !matching.contains(p))
        .filter(|p| {
            pair_blocks(
                instance,
                matching.partner(p.lo()),
                matching.partner(p.hi()),
                p.lo(),
                p.hi(),
                notion,
            )
        })
        .collect()
}

pub fn is_stable(instance: &Instance, matching: &Matching, notion: StabilityNotion) -> bool {
    blocking_pairs(instance, matching, notion).is_empty()
}
