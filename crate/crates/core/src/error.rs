use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// The three node families of a tagging network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    User,
    Item,
    Tag,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::User => "user",
            EntityKind::Item => "item",
            EntityKind::Tag => "tag",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown {kind} id {id}")]
    UnknownId { kind: EntityKind, id: usize },

    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: EntityKind, name: String },

    #[error("signature axes differ: {left} vs {right}")]
    AxisMismatch { left: EntityKind, right: EntityKind },

    #[error("view {view} does not apply to the {family} family")]
    ViewMismatch { family: EntityKind, view: String },

    #[error("event ({user}, {item}) has no tags after normalization")]
    EmptyTagSet { user: String, item: String },

    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("invalid UTF-8 at byte offset {offset} (line {line})")]
    InvalidUtf8 { line: u64, offset: u64 },

    #[error("filter threshold {0} is outside [0, 1)")]
    InvalidThreshold(f64),

    #[error("invalid filter grid: start {start}, step {step}")]
    InvalidGrid { start: f64, step: f64 },

    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("tags missing from the sine matrix: {}", .0.join(", "))]
    MissingTags(Vec<String>),

    #[error("distance is undefined: diversity of {0} spectrum is zero")]
    UndefinedDistance(&'static str),

    #[error("activity report does not belong to this tree: {0}")]
    TreeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
