//! Error type shared by all operator, solver and I/O paths.

use thiserror::Error;

/// Errors raised by the library.
///
/// Scalar payloads are carried as `f64` regardless of the working
/// precision; they are diagnostic only.
#[derive(Debug, Error)]
pub enum Error {
    /// A query point does not belong to the time scale.
    #[error("point t = {t} does not belong to the time scale")]
    OffScale { t: f64 },

    /// A query point is not a node of the discretization grid.
    #[error("point t = {t} is not a grid node")]
    NotAGridNode { t: f64 },

    /// Differentiation requested outside the kappa restriction.
    #[error("t = {t} lies outside the differentiable part of the scale")]
    OutsideKappa { t: f64 },

    /// Integration bounds out of order.
    #[error("integration bounds out of order: a = {a}, b = {b}")]
    BoundsOrder { a: f64, b: f64 },

    /// Invalid parameter value or a missing optional parameter.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Gamma function evaluated at a non-positive integer.
    #[error("gamma function pole at x = {x}")]
    GammaPole { x: f64 },

    /// The weight function has a vanishing delta derivative where a
    /// division by it is required.
    #[error("weight function has zero delta derivative at t = {t}")]
    SingularWeight { t: f64 },

    /// Not enough neighboring nodes for the requested stencil.
    #[error("insufficient grid resolution near t = {t}")]
    Resolution { t: f64 },

    /// A staged operator produced a non-finite intermediate value.
    #[error("non-finite value in stage '{stage}' at node t = {t}")]
    NonFinite { stage: &'static str, t: f64 },

    /// A boundary term of a reconstruction identity diverged.
    #[error("divergent boundary term: {0}")]
    DivergentBoundary(String),

    /// The scale does not contain the points 0 and 1.
    #[error("time scale does not contain both 0 and 1")]
    MissingUnitHull,

    /// Time-scale construction violated an invariant.
    #[error("invalid time scale: {0}")]
    Construction(String),

    /// Input document failed schema validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// Unknown identity name passed to the audit catalog.
    #[error("unknown identity '{0}' in audit catalog")]
    UnknownIdentity(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by the CLI to pick exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: schema, parameters, domain violations. Exit code 2.
    Validation,
    /// Numerical failure during an otherwise valid run. Exit code 3.
    Numerical,
    /// Everything else. Exit code 1.
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            OffScale { .. }
            | NotAGridNode { .. }
            | OutsideKappa { .. }
            | BoundsOrder { .. }
            | Parameter(_)
            | MissingUnitHull
            | Construction(_)
            | Validation(_)
            | UnknownIdentity(_)
            | Json(_) => ErrorClass::Validation,
            GammaPole { .. }
            | SingularWeight { .. }
            | Resolution { .. }
            | NonFinite { .. }
            | DivergentBoundary(_) => ErrorClass::Numerical,
            Io(_) => ErrorClass::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
