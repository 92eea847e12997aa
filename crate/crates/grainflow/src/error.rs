use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Data {
        path: PathBuf,
        source: grainflow_core::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] grainflow_core::Error),
}

impl Error {
    /// 2 for invalid input or usage, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        use grainflow_core::Error as C;
        match self {
            Error::Read { .. } | Error::Parse { .. } | Error::Data { .. } | Error::Usage(_) => 2,
            Error::Write { .. } => 3,
            Error::Core(e) => match e {
                C::KeyCollision(_)
                | C::DegenerateData(_)
                | C::Schema(_)
                | C::UnknownAttribute { .. }
                | C::ReferentialIntegrity { .. }
                | C::Config(_) => 2,
                _ => 3,
            },
        }
    }

    pub(crate) fn parse(path: &std::path::Path, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}
