use thiserror::Error;

/// Errors raised by the library. The harness maps these onto process exit
/// codes: validation problems exit with 1, numerical problems with 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("cannot evaluate at pole r = {r} (f vanishes there)")]
    PoleEvaluation { r: f64 },

    #[error("3-D embedding unavailable for beta = {beta} > 1 (abstract metric only)")]
    EmbeddingUnavailable { beta: f64 },

    #[error("McGehee coordinates degenerate at the equator r = {r} (Theta = 0)")]
    EquatorDegeneracy { r: f64 },

    #[error("state r = {r} lies outside the {chart} chart")]
    ChartDomain { r: f64, chart: &'static str },

    #[error("radial orbit (p_theta = 0) has no conic form")]
    DegenerateOrbit,

    #[error("block size delta = {delta} exceeds delta_0: convexity margin {margin} <= 0")]
    BlockTooLarge { delta: f64, margin: f64 },

    #[error("u = {u} outside the block boundary circle (u^2 > {bound})")]
    ZetaDomain { u: f64, bound: f64 },

    #[error("u = 0 lies on the asymptotic set a+; the map across the block is undefined there")]
    AsymptoticSet,

    #[error("transit did not exit the block before tau = {tau_cap}")]
    TransitTimeout { tau_cap: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for problems with user-provided input rather than with the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::EmbeddingUnavailable { .. }
                | Error::ChartDomain { .. }
                | Error::DegenerateOrbit
                | Error::BlockTooLarge { .. }
                | Error::ZetaDomain { .. }
                | Error::AsymptoticSet
                | Error::EquatorDegeneracy { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
