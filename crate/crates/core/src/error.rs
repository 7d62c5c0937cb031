use thiserror::Error;

/// Error taxonomy shared by every module.  The CLI maps these onto its exit
/// codes: config errors -> 2, geometry/mesh errors -> 3, solver
/// non-convergence -> 4, audit failures -> 5.
#[derive(Debug, Error)]
pub enum Error {
    /// A coordinate fell outside a chart's parameter rectangle.
    #[error("domain error: {0}")]
    Domain(String),

    /// The chart is not an immersion (degenerate first fundamental form).
    #[error("immersion error: {0}")]
    Immersion(String),

    /// Pages fail the transversality floor at a binding.
    #[error("transversality error: {0}")]
    Transversality(String),

    /// An open book spec failed validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// Generic geometric construction failure (overlaps, bad traces, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Requested fattening width exceeds what the geometry admits.
    #[error("fattening error: {0}")]
    Fattening(String),

    /// A mesh is too coarse (or too fine) for the requested construction.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Node sets that must glue across an interface do not match.
    #[error("conformity error: {0}")]
    Conformity(String),

    /// Sector foliation construction failed (segment property, coverage).
    #[error("foliation error: {0}")]
    Foliation(String),

    /// Finite element assembly failure (inverted cells, missing caches).
    #[error("assembly error: {0}")]
    Assembly(String),

    /// Bad input handed to a solver (indefinite mass, zero norm, sizes).
    #[error("solver input error: {0}")]
    SolverInput(String),

    /// The iterative eigensolver did not reach tolerance.
    #[error("solver did not converge: {0}")]
    NonConverged(String),

    /// Requested more data than a result holds.
    #[error("size error: {0}")]
    Size(String),

    /// Configuration parsing or schema violation.
    #[error("config error: {0}")]
    Config(String),

    /// Axisymmetric reduction requested on a non-axisymmetric spec.
    #[error("symmetry error: {0}")]
    Symmetry(String),

    /// An audit recorded at least one failing inequality.
    #[error("audit failure: {0}")]
    AuditFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::NonConverged(_) | Error::SolverInput(_) => 4,
            Error::AuditFailure(_) => 5,
            Error::Io(_) => 2,
            _ => 3,
        }
    }
}
