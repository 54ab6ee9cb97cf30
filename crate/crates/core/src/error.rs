use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A module cap was exceeded. `module` names the owner of the cap.
    #[error("{module}: {what} = {requested} exceeds cap {limit}")]
    Capacity {
        module: &'static str,
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("measurement branch has zero probability")]
    ImpossibleCollapse,

    #[error("conditioning on an outcome of probability zero")]
    UndefinedConditioning,

    #[error("protected evaluation hit a rejecting branch")]
    EvaluationFailure,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn capacity(
    module: &'static str,
    what: &'static str,
    requested: impl Into<u128>,
    limit: impl Into<u128>,
) -> Result<()> {
    let (requested, limit) = (requested.into(), limit.into());
    if requested > limit {
        Err(Error::Capacity {
            module,
            what,
            requested,
            limit,
        })
    } else {
        Ok(())
    }
}
