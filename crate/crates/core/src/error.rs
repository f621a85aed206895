use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-contract input. `path` locates the offending field
    /// or argument when one exists.
    #[error("invalid input{}: {message}", fmt_path(.path))]
    Input { path: String, message: String },

    /// An operation was invoked in a state where its precondition does not hold.
    #[error("invalid state: {0}")]
    State(String),

    /// A size or time budget would be exceeded.
    #[error("budget exceeded: {0}")]
    Resource(String),

    /// A numerical invariant was violated beyond tolerance.
    #[error("numerical check failed: {0}")]
    Numeric(String),
}

fn fmt_path(path: &str) -> String {
    if path.is_empty() {
        String::new()
    } else {
        format!(" at `{path}`")
    }
}

impl Error {
    pub fn input(message: impl Into<String>) -> Self {
        Error::Input { path: String::new(), message: message.into() }
    }

    pub fn input_at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Input { path: path.into(), message: message.into() }
    }

    /// Prefixes the path of an input error with an enclosing field name.
    pub fn within(self, prefix: &str) -> Self {
        match self {
            Error::Input { path, message } => {
                let path = if path.is_empty() {
                    prefix.to_string()
                } else if path.starts_with('[') {
                    format!("{prefix}{path}")
                } else {
                    format!("{prefix}.{path}")
                };
                Error::Input { path, message }
            }
            other => other,
        }
    }
}
