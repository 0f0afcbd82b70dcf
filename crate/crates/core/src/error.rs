use thiserror::Error;

use crate::ising::{Site, Spin};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph has no sites")]
    EmptyGraph,
    #[error("site {0} is declared more than once")]
    DuplicateSite(Site),
    #[error("site {0} is not declared in the graph")]
    UnknownSite(Site),
    #[error("self-edge on site {0}")]
    SelfEdge(Site),
    #[error("edge {0}-{1} is listed more than once")]
    DuplicateEdge(Site, Site),
    #[error("configuration does not assign site {0}")]
    IncompleteConfiguration(Site),
    #[error("site {site} is clamped to {existing} and cannot also be {requested}")]
    InconsistentEvidence {
        site: Site,
        existing: Spin,
        requested: Spin,
    },
    #[error("{free} free sites exceed the enumeration cap of {cap}")]
    Capacity { free: usize, cap: usize },
    #[error("enumeration cap {0} is above the supported maximum of {max}", max = crate::ising::MAX_FREE_SITES_LIMIT)]
    CapTooLarge(usize),
    #[error("every site is clamped; there is nothing left to distribute over")]
    NoFreeSites,
    #[error("a distribution needs at least one site in scope")]
    EmptyScope,
    #[error("site {0} is not in the distribution scope")]
    Scope(Site),
    #[error("inverse temperature must be finite and nonnegative, got {0}")]
    InvalidBeta(f64),
    #[error("unknown geometry `{0}`")]
    UnknownGeometry(String),
    #[error("geometry `{0}` has already been revealed")]
    AlreadyRevealed(String),
    #[error("geometry `{requested}` is counterfactual once `{revealed}` has been revealed")]
    Counterfactual { requested: String, revealed: String },
    #[error("independence audit needs at least two geometries, got {0}")]
    AuditUndefined(usize),
    #[error("invalid geometry ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("site {0} has no time coordinate")]
    MissingTick(Site),
    #[error("gamma must be a positive finite angle, got {0}")]
    InvalidGamma(f64),
    #[error("angle must be finite, got {0}")]
    InvalidAngle(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
}
