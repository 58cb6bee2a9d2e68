use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// TOML syntax or type errors; the message carries line and column.
    #[error("{0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Box<Error> },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Numerical(#[from] pmtk_core::Error),
}

impl Error {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Attributes a parameter error to the configuration field `prefix`.
    pub fn at(self, prefix: &str) -> Self {
        match self {
            Error::Config { field, message } => Error::Config {
                field: format!("{prefix}.{field}"),
                message,
            },
            Error::Numerical(e) => Error::config(prefix, e.to_string()),
            e => e,
        }
    }

    pub fn in_file(self, path: &Path) -> Self {
        Error::InFile {
            path: path.to_path_buf(),
            source: Box::new(self),
        }
    }

    /// 2 for usage, configuration and file errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InFile { source, .. } => source.exit_code(),
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}
