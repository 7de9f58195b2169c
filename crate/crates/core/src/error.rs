use alloc::string::String;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument or configuration is unusable.
    #[error("usage error: {0}")]
    Usage(String),
    /// A computation would exceed a configured size limit.
    #[error("capacity exceeded: {what} requires {required}, limit is {limit}")]
    Capacity {
        what: String,
        required: u128,
        limit: u128,
    },
    /// A group recipe does not describe a valid group.
    #[error("invalid group construction: {0}")]
    Construction(String),
    /// An operator violates a mathematical precondition (PSD, ordering, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// The numerical kernel failed or produced inconsistent output.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The cipherstate was not recognised by any message sector.
    #[error("decryption failed: residual outcome probability {residual:.3e}")]
    DecryptionFailure { residual: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn capacity(what: impl Into<String>, required: u128, limit: u128) -> Self {
        Error::Capacity {
            what: what.into(),
            required,
            limit,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
