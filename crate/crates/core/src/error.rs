use thiserror::Error;

/// Failure modes shared by every engine in the crate.
///
/// Protocol aborts (eavesdropper detected, forged singlet) are *not* errors:
/// they are a normal outcome and are carried by the run result instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is valid but exceeds what the dense engine will allocate.
    #[error("capability exceeded: {0}")]
    Capability(String),
    /// Protocol bookkeeping is inconsistent (missing announcement, record mismatch, ...).
    #[error("protocol error: {0}")]
    Protocol(String),
    /// Something that must not happen if the simulator is correct.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
pub(crate) use domain;
