use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("L must be a multiple of 4 (got L = {0})")]
    LengthNotMultipleOfFour(usize),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("coupling must be positive (got g = {0})")]
    NonPositiveCoupling(f64),

    #[error("order parameter must be positive (got delta = {0})")]
    NonPositiveDelta(f64),

    #[error("gap solver failed: {0}")]
    Solver(String),

    #[error("momentum index {0} is not in the positive half of the dual lattice")]
    NotInPlusHalf(usize),

    #[error(
        "Fock space with {modes} modes exceeds the cap of {cap} modes \
         (2^{modes} amplitudes, about {bytes} bytes per state vector)"
    )]
    FockCapExceeded { modes: usize, cap: usize, bytes: u128 },

    #[error("mode order mismatch: {0}")]
    ModeOrder(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("inadmissible density matrix: {0}")]
    Inadmissible(String),

    #[error("iteration did not converge after {iterations} steps (last estimate {last})")]
    NoConvergence { iterations: usize, last: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
