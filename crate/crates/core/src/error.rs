use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("facilitation constraint violated: detuning {detuning} + nn_interaction {nn_interaction} != 0")]
    FacilitationViolation { detuning: f64, nn_interaction: f64 },

    #[error("spin configuration {spins} is not in the single-domain sector: {reason}")]
    NotInSector { spins: String, reason: &'static str },

    #[error("index out of range: {what} = {value} (allowed {lo}..={hi})")]
    OutOfRange { what: &'static str, value: i64, lo: i64, hi: i64 },

    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity { what: &'static str, needed: u128, limit: u128 },

    #[error(
        "resonant energy denominator {which} = {value:e} for k={k}, k'={kp}, p={p} \
         (tolerance {tolerance:e}); the perturbative elimination is invalid here"
    )]
    Resonance { which: &'static str, value: f64, tolerance: f64, k: usize, kp: usize, p: usize },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("variance undefined: total Rydberg density is zero")]
    UndefinedVariance,

    #[error("need at least {needed} usable samples in the fit window, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("parity mismatch: {0}")]
    ParityMismatch(String),

    #[error("propagation step failed at t={t}: step {dt:e} below minimum, error estimate {estimate:e}")]
    StepSize { t: f64, dt: f64, estimate: f64 },

    #[error("truncation leakage {leakage:e} exceeds {limit:e} for the requested vibrational state")]
    Leakage { leakage: f64, limit: f64 },
}
