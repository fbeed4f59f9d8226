use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no support detected")]
    NoSupport,

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn scene(msg: impl Into<String>) -> Self {
        Error::InvalidScene(msg.into())
    }

    pub(crate) fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code for the command line front end:
    /// 2 configuration, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::InvalidArgument(_)
            | Error::InvalidScene(_)
            | Error::Config { .. }
            | Error::Parse(_) => 2,
            Error::MissingData(_) | Error::Numerical(_) | Error::NoSupport => 3,
            Error::Io(_) => 4,
            Error::Stage { .. } => unreachable!("root() strips stage wrappers"),
        }
    }
}
