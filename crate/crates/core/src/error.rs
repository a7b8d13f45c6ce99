use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("density {0} lies outside [0, 1]")]
    Domain(f64),

    #[error("inadmissible model: {0}")]
    Inadmissible(String),

    #[error("ill-conditioned shock range: Phi(alpha) - Phi(beta) = {0:e}")]
    IllConditioned(f64),

    #[error("shock potential {phi_s} outside [{lower}, {upper}]")]
    PotentialOutOfRange { phi_s: f64, lower: f64, upper: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root finder hit the iteration limit near x = {0}")]
    RootIterationLimit(f64),

    #[error("quadrature on [{a}, {b}] did not reach tolerance (error estimate {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("weight function is not positive at u = {u} (value {value})")]
    NonPositiveWeight { u: f64, value: f64 },

    #[error("no sign change of the area residual for |A| <= {limit}; residual curve: {curve:?}")]
    NoWeightBracket { limit: f64, curve: Vec<(f64, f64)> },

    #[error("equilibrium at u = {u} is not a saddle (determinant {det:e})")]
    NotSaddle { u: f64, det: f64 },

    #[error("trajectory escaped before reaching u = {target}: last point (u, p) = ({u}, {p}) at psi = {psi}")]
    Escape {
        target: f64,
        u: f64,
        p: f64,
        psi: f64,
    },

    #[error("mismatch p(u_r) - p(u_l) has no sign change for c in [{c_min}, {c_max}]")]
    NoSpeedBracket { c_min: f64, c_max: f64 },

    #[error("zero reaction has no saddle structure; use the simulator instead")]
    ZeroReaction,

    #[error("ODE step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("non-finite state at t = {t} (grid index {index})")]
    Instability { t: f64, index: usize },

    #[error("singular banded matrix at row {0}")]
    Singular(usize),

    #[error("no localised front in profile (peak slope {peak:e}, mean slope {mean:e})")]
    NoFront { peak: f64, mean: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 1 usage or I/O, 2 model, 3 solver, 4 instability.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io { .. } | Error::Json(_) => 1,
            Error::Domain(_)
            | Error::Inadmissible(_)
            | Error::IllConditioned(_)
            | Error::PotentialOutOfRange { .. }
            | Error::NonPositiveWeight { .. }
            | Error::ZeroReaction
            | Error::NotSaddle { .. } => 2,
            Error::NoBracket { .. }
            | Error::RootIterationLimit(_)
            | Error::Quadrature { .. }
            | Error::NoWeightBracket { .. }
            | Error::Escape { .. }
            | Error::NoSpeedBracket { .. }
            | Error::NoFront { .. }
            | Error::Singular(_) => 3,
            Error::StepUnderflow { .. } | Error::Instability { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
