use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("energy {z} lies within {tol:e} of a pole at {pole}")]
    PoleProximity { z: f64, pole: f64, tol: f64 },
    #[error("Dyson denominator |1 - delta*G| = {0:e} is numerically zero")]
    ResonanceDenominator(f64),
    #[error("isolated {found} roots, expected {expected}")]
    RootCountMismatch { found: usize, expected: usize },
    #[error("Lippmann-Schwinger system is singular at E = {0}")]
    SingularSystem(f64),
    #[error("eigenvalue {0:e} is numerically zero; coupling sums undefined")]
    ZeroEigenvalue(f64),
    #[error("even chain at delta^2 = j^2 (|delta^2 - j^2| = {0:e})")]
    EvenChainResonance(f64),

    #[error("excitation sector {0} is not supported (max 2)")]
    UnsupportedSector(usize),

    #[error("detuning must be nonzero")]
    ZeroDetuning,
    #[error("gate condition violated: |omega1| = {omega1}, |omega2| = {omega2}")]
    ConditionViolated { omega1: f64, omega2: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("integrator did not converge: deviation {deviation:e} after {halvings} halvings")]
    ToleranceNotMet { deviation: f64, halvings: usize },
    #[error("density operator drifted: {0}")]
    IntegratorDrift(String),

    #[error("chi matrix has zero trace")]
    ZeroTrace,
}
