use std::fmt;

/// Everything that ends a run early, with its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Malformed or unknown config content; `line` is 1-based when known.
    Config { line: Option<usize>, field: Option<String>, message: String },
    /// Bad command-line input, missing files, CSV schema mismatch.
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn config(line: Option<usize>, field: impl Into<String>, message: impl Into<String>) -> Self {
        Failure::Config { line, field: Some(field.into()), message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config { .. } | Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Config { line, field, message } => serde_json::json!({
                "error": "invalid_config",
                "line": line,
                "field": field,
                "message": message,
            }),
            Failure::Usage(m) => serde_json::json!({ "error": "usage", "message": m }),
            Failure::Numerical(m) => serde_json::json!({ "error": "numerical_failure", "message": m }),
            Failure::Io(m) => serde_json::json!({ "error": "io", "message": m }),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl From<memolab_core::Error> for Failure {
    fn from(e: memolab_core::Error) -> Self {
        use memolab_core::Error as E;
        match e {
            E::Shape(_) | E::InvalidInput(_) | E::Parse { .. } => {
                Failure::Config { line: None, field: None, message: e.to_string() }
            }
            E::NonFinite(_) | E::NonConvergence { .. } | E::Divergence { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;
