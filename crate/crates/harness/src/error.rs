use tiltphase::actions::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: {reason}")]
    ConfigLine { line: usize, reason: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("imu log row {row}: {reason}")]
    ImuLog { row: usize, reason: String },
    #[error("trace line {line}: {reason}")]
    Trace { line: usize, reason: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
