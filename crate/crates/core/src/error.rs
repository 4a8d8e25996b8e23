use std::fmt;

use thiserror::Error;

use crate::instance::AgentId;

/// A single broken invariant found while validating an instance description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `listed_by` accepts `listed` but not the other way round.
    AsymmetricAcceptability {
        listed_by: String,
        listed: String,
    },
    DuplicateEntry {
        agent: String,
        entry: String,
    },
    SelfReference {
        agent: String,
    },
    CrossSide {
        agent: String,
        entry: String,
    },
    UnknownAgent {
        agent: String,
        entry: String,
    },
    MissingAgent {
        agent: String,
    },
    DuplicateAgent {
        agent: String,
    },
    EmptyTieGroup {
        agent: String,
    },
    InvalidName {
        name: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AsymmetricAcceptability { listed_by, listed } => write!(
                f,
                "asymmetric acceptability ({listed_by},{listed}): {listed_by} lists {listed} but {listed} does not list {listed_by}"
            ),
            Violation::DuplicateEntry { agent, entry } => {
                write!(f, "{agent} lists {entry} more than once")
            }
            Violation::SelfReference { agent } => write!(f, "{agent} lists itself"),
            Violation::CrossSide { agent, entry } => {
                write!(f, "{agent} lists {entry} from its own side")
            }
            Violation::UnknownAgent { agent, entry } => {
                write!(f, "{agent} lists unknown agent {entry}")
            }
            Violation::MissingAgent { agent } => {
                write!(f, "agent {agent} has no preference line")
            }
            Violation::DuplicateAgent { agent } => {
                write!(f, "agent {agent} is defined more than once")
            }
            Violation::EmptyTieGroup { agent } => write!(f, "{agent} has an empty tie group"),
            Violation::InvalidName { name } => write!(f, "invalid agent name {name:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid instance ({} violations)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("agent {b} is not acceptable to agent {a}")]
    NotAcceptable { a: AgentId, b: AgentId },
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("strict stability requested on an instance with ties")]
    TiesUnderStrictNotion,
    #[error("the instance admits no stable matching")]
    NoStableMatching,
    #[error("rotation is not exposed in the table")]
    RotationNotExposed,
    #[error("rotation set is not closed and complete")]
    NotClosedComplete,
    #[error("matching is not stable")]
    NotStable,
    #[error("rotation r{0} is singular and has no dual")]
    SingularRotation(usize),
    #[error("forced and forbidden pairs overlap")]
    ForcedForbiddenOverlap,
    #[error("no stable partner of agent {0} lies inside its rank window")]
    WindowUnsatisfiable(AgentId),
    #[error("resource limit exceeded: {what} (limit {limit})")]
    ResourceExhausted { what: &'static str, limit: usize },
    #[error("instance too large for exhaustive search: {what} = {size} exceeds cap {cap}")]
    InstanceTooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
