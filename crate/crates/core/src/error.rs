use thiserror::Error;

/// Errors raised by the model, the numerical engines and the optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative horizontal distance {0} m")]
    NegativeDistance(f64),

    #[error("link distance {r} m is below the serving tier altitude {altitude} m")]
    BelowAltitude { r: f64, altitude: f64 },

    #[error("a homogeneous tier (beta = 0) over an unbounded region has infinite expected UAV count")]
    DivergentCount,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("derivative order {0} is not supported (maximum 4); use the approximate coverage path")]
    DerivativeOrder(u32),

    #[error("Nakagami shape {0} needs derivatives above order 4; use the approximate coverage path")]
    ShapeTooLarge(u32),

    #[error("no feasible point in the search space")]
    NoFeasiblePoint,

    #[error("infeasible starting point: {0}")]
    InfeasibleStart(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
