use std::fmt;

use thiserror::Error;

/// Which positivity requirement was violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositivityKind {
    Density,
    InternalEnergy,
    Pressure,
}

impl fmt::Display for PositivityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PositivityKind::Density => write!(f, "density"),
            PositivityKind::InternalEnergy => write!(f, "internal energy"),
            PositivityKind::Pressure => write!(f, "pressure"),
        }
    }
}

/// Where a positivity fault was detected.
#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    Unknown,
    Node(usize),
    Cell(usize),
    Point([f64; 2]),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Unknown => write!(f, "unknown location"),
            Location::Node(i) => write!(f, "node {i}"),
            Location::Cell(k) => write!(f, "cell {k}"),
            Location::Point(p) => write!(f, "point ({}, {})", p[0], p[1]),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("periodic pairing error: {0}")]
    Pairing(String),

    #[error("non-positive {kind} ({value:e}) at {location}")]
    Positivity {
        kind: PositivityKind,
        value: f64,
        location: Location,
    },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite value in component {component} at node {node}")]
    NonFinite { component: usize, node: usize },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Wraps the error with a description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Strips any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_positivity_fault(&self) -> bool {
        matches!(self.root(), Error::Positivity { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
