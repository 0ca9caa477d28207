//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A series failed validation (wrong length, negative or non-finite values).
    InvalidSeries(String),
    /// Tariff definition violates its invariants.
    InvalidTariff(String),
    /// Battery or system configuration violates its invariants.
    InvalidConfig(String),
    /// Two inputs that must be aligned have different lengths.
    LengthMismatch { expected: usize, got: usize, what: String },
    /// A caller broke an operation precondition.
    Contract(String),
    /// Numerical solver failure (LP/MILP).
    Solver(String),
    /// An optimisation instance has no feasible solution.
    Infeasible(String),
    /// Not enough data to run an operation (e.g. policy training).
    InsufficientData(String),
    /// Malformed input file.
    Data(String),
    /// Config file could not be parsed or is missing keys.
    Config(String),
    /// Economic formula outside its domain (e.g. d' <= 0).
    Economics(String),
    Io(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidSeries(m) => write!(f, "invalid series: {m}"),
            CoreError::InvalidTariff(m) => write!(f, "invalid tariff: {m}"),
            CoreError::InvalidConfig(m) => write!(f, "invalid configuration: {m}"),
            CoreError::LengthMismatch { expected, got, what } => {
                write!(f, "length mismatch for {what}: expected {expected}, got {got}")
            }
            CoreError::Contract(m) => write!(f, "contract violation: {m}"),
            CoreError::Solver(m) => write!(f, "solver failure: {m}"),
            CoreError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CoreError::InsufficientData(m) => write!(f, "insufficient data: {m}"),
            CoreError::Data(m) => write!(f, "data error: {m}"),
            CoreError::Config(m) => write!(f, "config error: {m}"),
            CoreError::Economics(m) => write!(f, "economics error: {m}"),
            CoreError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CoreError {}

impl From<std::io::Error> for CoreError {
    fn from(e: std::io::Error) -> Self {
        CoreError::Io(e.to_string())
    }
}
