use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading or validating input documents.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported schema_version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("core type `{core}`: missing cpi entry for {class}")]
    MissingCpi { core: String, class: String },
    #[error("core type `{core}`: field `{field}` {reason}")]
    InvalidCore {
        core: String,
        field: &'static str,
        reason: String,
    },
    #[error("duplicate core type `{0}`")]
    DuplicateCore(String),
    #[error("unknown core type `{0}`")]
    UnknownCoreType(String),
    #[error("profile `{profile}`: empty phase list")]
    EmptyPhases { profile: String },
    #[error("profile `{profile}`, phase {phase}: {reason}")]
    InvalidPhase {
        profile: String,
        phase: usize,
        reason: String,
    },
    #[error("profile `{profile}`: {reason}")]
    InvalidProfile { profile: String, reason: String },
    #[error("system `{system}`: {reason}")]
    InvalidSystem { system: String, reason: String },
    #[error("query: {0}")]
    InvalidQuery(String),
}

impl ConfigError {
    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        ConfigError::Json {
            context: context.into(),
            source,
        }
    }
}

/// Errors raised while simulating a workload on a configuration.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("system `{0}`: no enabled cores")]
    NoEnabledCores(String),
    #[error("unknown core type `{0}`")]
    UnknownCoreType(String),
    #[error("workload `{workload}` on `{config}`: {source}")]
    Annotated {
        workload: String,
        config: String,
        #[source]
        source: Box<SimError>,
    },
}

/// Top-level error for operations that both load inputs and simulate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
