use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sector dimension for {n_modes} modes and {total_atoms} atoms overflows the index type")]
    DimensionOverflow { n_modes: usize, total_atoms: u32 },

    #[error("cannot annihilate an atom in the empty sector")]
    EmptySector,

    #[error("state norm {norm:e} is too small to normalize")]
    Annihilated { norm: f64 },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("precision loss: norm {norm} deviates from {expected}")]
    PrecisionLoss { norm: f64, expected: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no cat structure: peak/mean ratio {ratio:.3} is at most 1.5")]
    NoCatStructure { ratio: f64 },

    #[error("fringe period undefined: cat peaks are {separation:.4} rad apart, on the swap diagonal")]
    FringePeriodUndefined { separation: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}
