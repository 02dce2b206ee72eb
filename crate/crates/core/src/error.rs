use thiserror::Error;

/// Errors raised by the transforms, decompositions and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("singular frame: window coverage vanishes at sample {index}")]
    SingularFrame { index: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("Toeplitz matrix of order {dim} has full numerical rank {rank}")]
    Rank { rank: usize, dim: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            found,
        })
    }
}
