use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig {
        field: &'static str,
        reason: &'static str,
    },

    #[error("unknown scenario `{name}` (valid scenarios: {valid})")]
    UnknownScenario { name: String, valid: String },

    #[error("coincident positions (separation {separation:e} m)")]
    Coincident { separation: f64 },

    #[error("agents {i} and {j} are coincident (separation {separation:e} m)")]
    CoincidentAgents { i: usize, j: usize, separation: f64 },

    #[error("instability: agent {agent} reached speed {speed:.3e} m/s (limit {limit:.3e})")]
    Instability {
        agent: usize,
        speed: f64,
        limit: f64,
    },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("config serialization error: {0}")]
    Serialize(#[from] toml::ser::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: &'static str) -> Self {
        Error::InvalidConfig { field, reason }
    }

    /// Strips any step annotation.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}
