use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "infeasible geometry: span {span} cannot hold {n_antennas} antennas at spacing {min_spacing}"
    )]
    InfeasibleGeometry {
        span: f64,
        n_antennas: usize,
        min_spacing: f64,
    },

    #[error("user channel Gram matrix is rank deficient (condition number {condition:e})")]
    RankDeficient { condition: f64 },

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("decode order is not a permutation of 0..{0}")]
    InvalidPermutation(usize),

    #[error("user index {index} out of range for {n_users} users")]
    IndexOutOfRange { index: usize, n_users: usize },

    #[error("{what} has imaginary residue {residue:e}")]
    ImaginaryResidue { what: &'static str, residue: f64 },

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),
}
