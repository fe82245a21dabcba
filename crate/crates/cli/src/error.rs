use graspid_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("metadata mismatch: {0}")]
    MetadataMismatch(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: Error,
    },
}

impl From<Error> for CliError {
    fn from(source: Error) -> Self {
        CliError::Core {
            context: "error".into(),
            source,
        }
    }
}

impl CliError {
    /// 2 for anything wrong with the inputs, 3 for failures while working.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::MetadataMismatch(_) => 2,
            CliError::Core { source, .. } => match source {
                Error::Config(_)
                | Error::ShapeMismatch(_)
                | Error::NotNormalizedModel
                | Error::MissingModelForZ(_)
                | Error::InvalidPolicy(_)
                | Error::InvalidZ { .. }
                | Error::InvalidK { .. }
                | Error::InvalidDims(_)
                | Error::InvalidModel(_)
                | Error::Parse { .. } => 2,
                _ => 3,
            },
        }
    }
}

pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, Error> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: what(),
            source,
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;
