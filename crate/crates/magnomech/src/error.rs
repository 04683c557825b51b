use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Variants map onto the CLI exit-code classes:
/// configuration problems, numerical singularities/domain failures, and
/// spectral extraction failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid physical input (non-positive frequency, negative rate, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Covariance handling is restricted to the two- and three-mode bases.
    #[error("unsupported dimension {0}; expected 4 (two modes) or 6 (three modes)")]
    UnsupportedDim(usize),

    /// The steady-state cubic has no physically admissible root.
    #[error("infeasible drive: steady-state amplitude equation has no admissible root")]
    InfeasibleDrive,

    /// atanh argument out of range when converting the Kerr shift to a
    /// squeezing parameter: requires 2|K| < magnon detuning.
    #[error("squeezing parameter undefined: 2|K| = {twice_abs_kerr} is not below the magnon detuning {delta_m}")]
    HyperbolicDomain { twice_abs_kerr: f64, delta_m: f64 },

    /// Steady-state phase bookkeeping is inconsistent (e.g. negative Kerr
    /// coefficient or an externally supplied amplitude with the wrong phase).
    #[error("inconsistent phase convention: {0}")]
    PhaseMismatch(String),

    /// A denominator or linear solve is too close to singular to trust.
    #[error("numerical singularity: {0}")]
    Singular(String),

    /// The drift matrix is not Hurwitz where a steady state was requested.
    #[error("drift matrix is not Hurwitz (spectral abscissa {0:.6e}); no steady state exists")]
    Unstable(f64),

    /// The requested quantity is undefined for these parameters.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Level-attraction signature absent: nothing to extract.
    #[error("extraction failure: {0}")]
    Extraction(String),

    /// Exact propagation overflowed even after step subdivision.
    #[error("propagation overflow: step {0:.6e} produced non-finite entries after maximal subdivision")]
    Overflow(f64),

    /// Bad run configuration (CLI arguments or config file).
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code class for the CLI. 0 is success; 2 config errors;
    /// 3 numerical/domain failures; 4 extraction failures; 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Extraction(_) => 4,
            Error::Io(_) => 5,
            _ => 3,
        }
    }
}
