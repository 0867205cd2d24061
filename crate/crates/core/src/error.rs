use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative water depth h = {0}")]
    NegativeDepth(f64),
    #[error("state is dry (h = {0}), derived quantity undefined")]
    DryState(f64),
    #[error("dry interface: both neighbouring states are dry")]
    DryInterface,
    #[error("sonic interface: Roe eigenvalue {lambda:e} below floor {floor:e}")]
    SonicInterface { lambda: f64, floor: f64 },
    #[error("no admissible root: invariant level {level} below critical minimum {minimum}")]
    NoAdmissibleRoot { level: f64, minimum: f64 },
    #[error("near-critical state (Fr^2 = {0}), branch ambiguous")]
    NearCritical(f64),
    #[error("transcritical profile: no root on the inlet branch at x = {0}")]
    TranscriticalProfile(f64),
    #[error("all cells are dry, no time step can be computed")]
    AllDry,
    #[error("non-finite value in cell {cell} at t = {time}")]
    NonFinite { cell: usize, time: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    NotImplemented(String),
    #[error("step limit of {0} reached before the stop rule was met")]
    MaxSteps(usize),
}
