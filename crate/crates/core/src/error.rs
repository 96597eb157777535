use thiserror::Error;

/// Errors produced by family, type-space, lattice, code, and converse
/// operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parameter outside family domain: {0}")]
    OutsideDomain(String),

    #[error("Fisher information is singular at the simplex boundary: {0}")]
    BoundarySingularity(String),

    #[error(
        "type space has {size} types, above the exact threshold {threshold}; \
         switch to the Monte Carlo estimator"
    )]
    TypeSpaceTooLarge { size: u128, threshold: u64 },

    #[error("lattice with span {t} at n = {n} has no points inside the domain")]
    EmptyLattice { t: f64, n: u32 },

    #[error("lattice point {0} is unreachable: no type maps to it")]
    EmptyCell(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("relative entropy is infinite: absolute continuity violated")]
    InfiniteDivergence,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
