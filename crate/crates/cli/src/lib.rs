//! Library side of the `ppmx` command: corpus benchmarking, CSV tables and
//! SVG plots.

pub mod bench;
pub mod plot;

use std::path::PathBuf;

use ppmx::ppm_codec::CodecError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("no benchmark results: {0}")]
    NoResults(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    ///
    /// | code | meaning |
    /// |------|---------|
    /// | 2 | bad command line |
    /// | 3 | I/O or CSV error |
    /// | 4 | invalid model configuration |
    /// | 5 | benchmark produced no results |
    /// | 11 | container shorter than its header |
    /// | 12 | bad magic |
    /// | 13 | unsupported version |
    /// | 14 | unknown mode |
    /// | 15 | order/pitch out of range |
    /// | 16 | code table violates the Kraft equality |
    /// | 17 | other code table error |
    /// | 20 | corrupt payload |
    /// | 21 | encoder/decoder state mismatch |
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Csv { .. } => 3,
            CliError::NoResults(_) => 5,
            CliError::Codec(e) => match e {
                CodecError::Config(_) => 4,
                CodecError::Format(f) => 10 + f.code(),
                CodecError::Coder(_) | CodecError::Corrupt(_) => 20,
                CodecError::StateMismatch(_) => 21,
            },
        }
    }
}

pub const EXIT_USAGE: u8 = 2;
