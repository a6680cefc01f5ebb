use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Exact tau(n) would not fit the reconstruction width.
    #[error("coefficient expansion to n_max={n_max} exceeds exact-arithmetic range (limit {limit})")]
    Overflow { n_max: usize, limit: usize },

    #[error("multi-modular reconstruction inconsistent at n={n}")]
    Reconstruction { n: usize },

    #[error("missing Hecke eigenvalue for prime {0}")]
    MissingPrime(u64),

    #[error("eigenvalue at prime {p} is {value}, outside the Deligne range [-2, 2]")]
    DeligneViolation { p: u64, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coefficient table too short: need n_max >= {required}, have {available}")]
    Truncation { required: usize, available: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    #[error("quadrature failed to reach tolerance; worst subinterval [{a}, {b}] with error estimate {error:e}")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("prime cutoff {cutoff} too small: tail estimate {achieved:e} exceeds {required:e}")]
    CutoffTooSmall {
        cutoff: u64,
        achieved: f64,
        required: f64,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A per-twist failure inside a family-wide computation.
    #[error("at discriminant 8d={discriminant}: {source}")]
    AtTwist {
        discriminant: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("corrupt coefficient cache: {0}")]
    CacheCorrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// The underlying error with any per-twist context removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTwist { source, .. } => source.root(),
            e => e,
        }
    }
}
