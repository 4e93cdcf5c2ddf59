use serde_json::json;
use thiserror::Error;
use wave_lab_core::WaveError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("config field {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Core(#[from] WaveError),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Core(WaveError::Serialization(e))
    }
}

impl CliError {
    /// 2 for usage and configuration problems, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config { .. } => 2,
            Self::Core(_) | Self::Io(_) => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let body = match self {
            Self::Usage(msg) => json!({ "kind": "usage", "message": msg }),
            Self::Config { field, message } => {
                json!({ "kind": "config", "field": field, "message": message })
            }
            Self::Core(e) => json!({ "kind": "module", "message": e.to_string() }),
            Self::Io(msg) => json!({ "kind": "io", "message": msg }),
        };
        serde_json::to_string_pretty(&json!({ "error": body })).expect("plain JSON value")
    }
}
