use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integrand is not finite at node {node}")]
    Evaluation { node: f64 },

    #[error("integrand is not finite at node ({alpha}, {beta})")]
    Evaluation2d { alpha: f64, beta: f64 },

    #[error("quadrature did not converge: last two estimates {previous} and {last}")]
    Convergence { previous: f64, last: f64 },

    #[error("no sign change over [{lo}, {hi}] (g(lo) = {g_lo}, g(hi) = {g_hi})")]
    Bracketing { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("degenerate elevation angle: {0}")]
    DegenerateAngle(String),

    #[error("target RMS delay spread {target:.6e} s is unreachable; attainable range is [{min:.6e}, {max:.6e}] s")]
    UnreachableTarget { target: f64, min: f64, max: f64 },

    #[error("(u, v) transform needs an azimuth support symmetric under alpha -> -alpha; use the binned PSD instead")]
    UnsupportedTransform,

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors that come from a numerical method failing rather than
    /// from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Evaluation { .. }
                | Error::Evaluation2d { .. }
                | Error::Convergence { .. }
                | Error::Inconsistent(_)
                | Error::UnreachableTarget { .. }
        )
    }
}
