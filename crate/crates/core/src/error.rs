use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("actor {actor_id} infeasible: {survivors} plausible trajectories, need {required}")]
    ActorInfeasible {
        actor_id: u32,
        survivors: usize,
        required: usize,
    },

    #[error("found {found} feasible actors, need {required}")]
    NotEnoughActors { found: usize, required: usize },

    #[error("unknown actor {0}")]
    UnknownActor(u32),

    #[error("range image mismatch: {0}")]
    RangeImageMismatch(String),

    #[error("objective failed at query {query}: {message}")]
    Objective { query: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
