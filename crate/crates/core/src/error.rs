use std::fmt;

/// Axis-aligned rectangle identity carried by numeric failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelId {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl fmt::Display for PanelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.x0, self.x1, self.y0, self.y1)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite integrand value on panel {panel}")]
    NonFinite { panel: PanelId },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::NumericFailure(msg.into())
    }

    /// True for failures of the computation itself rather than of its inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::NumericFailure(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
