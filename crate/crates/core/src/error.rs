use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("free group needs at least 2 generators and at most 26, got {0}")]
    InvalidGeneratorCount(u32),

    #[error("letter code {code} out of range for a group on {k} generators")]
    InvalidLetter { code: u32, k: u32 },

    #[error("cannot parse word {0:?}")]
    ParseWord(String),

    #[error("cannot parse rational literal {0:?}")]
    ParseRational(String),

    #[error("budget exceeded: {what} needs {needed} elements, cap is {cap}")]
    BudgetExceeded { what: String, needed: String, cap: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("objects belong to different free groups (k={left} vs k={right})")]
    ContextMismatch { left: u32, right: u32 },

    #[error("integer overflow while accumulating {0}")]
    Overflow(&'static str),

    #[error("degenerate fit: need at least {needed} points, got {got}")]
    DegenerateFit { needed: usize, got: usize },
}

impl Error {
    pub(crate) fn budget(what: impl Into<String>, needed: impl ToString, cap: u64) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            needed: needed.to_string(),
            cap,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
