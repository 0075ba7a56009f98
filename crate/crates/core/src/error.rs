//! Error type shared by every module.

use thiserror::Error;

use crate::cone_complex::LatticeVector;
use crate::trunc_ring::CurveClass;

pub type Result<T> = std::result::Result<T, MirrorError>;

/// One structure constant the caller has to supply.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MissingInvariant {
    pub p: LatticeVector,
    pub q: LatticeVector,
    pub r: LatticeVector,
    pub beta: CurveClass,
}

impl std::fmt::Display for MissingInvariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "N(p={}, q={}, r={}, beta={})", self.p, self.q, self.r, self.beta)
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MirrorError {
    #[error("not-in-complex: support {0} is not a cone of the complex")]
    NotInComplex(String),
    #[error("inconsistent strata: closure contains {0}, which was declared empty")]
    InconsistentPoset(String),
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("missing intersection number D_{component}.Z_rho for rho = {rho}")]
    MissingIntersection { rho: String, component: usize },
    #[error("missing-invariant: {}", .0.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("; "))]
    MissingInvariant(Vec<MissingInvariant>),
    #[error("invalid invariant table: {0}")]
    InvalidTable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("direction {0:?} is not primitive")]
    NonPrimitive(Vec<i64>),
    #[error("endpoint lies on a wall or chamber boundary: {0}")]
    EndpointOnWall(String),
    #[error("inconsistent structure: {0}")]
    Inconsistent(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("descriptor has no central fiber")]
    MissingCentralFiber,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema version {found} does not match expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
}
