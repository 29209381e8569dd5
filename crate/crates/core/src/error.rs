use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed automorphism: {0}")]
    MalformedAutomorphism(String),
    #[error("invalid representation label: {0}")]
    InvalidLabel(String),
    #[error("truncation order {0} is too small (need N >= {1})")]
    TruncationTooSmall(usize, usize),
    #[error("invalid spin structure: {0}")]
    InvalidSpin(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration radius overflows: {0}")]
    EnumerationOverflow(String),
    #[error("spectrum routes disagree: {0}")]
    RouteMismatch(String),
    #[error("unsupported for C-type labels: the whole summand is the kernel")]
    CTypeLabel,
    #[error("series does not converge: {0}")]
    NonConvergent(String),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("cannot parse `{0}` as a surd")]
    Surd(String),
}
