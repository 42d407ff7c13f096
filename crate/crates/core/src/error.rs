use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("terrain generation exhausted after {attempts} attempts (seed {seed}); abundance band or threshold is infeasible")]
    GenerationExhausted { attempts: u32, seed: u64 },

    #[error("episode already terminated with status {0}")]
    EpisodeTerminated(crate::simenv::EpisodeStatus),

    #[error("unknown method `{0}` (expected one of: square, lissajous, heuristic-square, heuristic-lissajous)")]
    UnknownMethod(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}
