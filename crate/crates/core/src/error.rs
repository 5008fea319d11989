use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("label mapping error: class {class} is not covered by the binarization map")]
    Mapping { class: usize },

    #[error("class weighting error: class {class} has no samples")]
    Weighting { class: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("unlearning input error: {0}")]
    UnlearnInput(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
