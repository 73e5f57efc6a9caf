use thiserror::Error;

/// Everything that can go wrong while configuring or running an episode.
///
/// The variants map onto the CLI's exit-code classes: `Config` and `Registry`
/// are configuration problems, `Contract` is a caller violating an operation's
/// preconditions, `Io` is the filesystem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    Registry {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Error::Io(std::io::Error::other(msg.into()))
    }

    /// Same error class with `prefix` prepended to the message.
    pub fn context(self, prefix: impl std::fmt::Display) -> Self {
        match self {
            Error::Config(m) => Error::Config(format!("{prefix}: {m}")),
            Error::Contract(m) => Error::Contract(format!("{prefix}: {m}")),
            Error::Io(e) => Error::Io(std::io::Error::new(e.kind(), format!("{prefix}: {e}"))),
            e @ Error::Registry { .. } => e,
        }
    }

    pub fn registry<'a>(
        kind: &'static str,
        name: &str,
        known: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        let known: Vec<&str> = known.into_iter().collect();
        Error::Registry {
            kind,
            name: name.to_string(),
            known: known.join(", "),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
