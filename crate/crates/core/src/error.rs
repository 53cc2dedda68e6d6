use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("evaluation point {re}{im:+}j coincides with a pole")]
    PoleHit { re: f64, im: f64 },
    #[error("poles {0} and {1} are closer than the merge tolerance")]
    RepeatedPole(String, String),
    #[error("transfer function must be strictly proper (deg num {num} >= deg den {den})")]
    NotStrictlyProper { num: usize, den: usize },
    #[error("denominator polynomial is identically zero")]
    ZeroDenominator,
    #[error("window of {periods} periods is not an integer number of periods of the probe frequency")]
    NonCoherentWindow { periods: f64 },
    #[error("probe frequency {f_hz} Hz is not below the Nyquist rate of the sample stream")]
    AboveNyquist { f_hz: f64 },
    #[error("steady-state duty {0} is outside (0, 1)")]
    DutyOutOfRange(f64),
    #[error("a measured plant override cannot be simulated")]
    OverrideNotSimulable,
    #[error("operation is not defined for symmetric modulation")]
    SymNotApplicable,
    #[error("loop expression is singular (|denominator| = {0:e})")]
    Singular(f64),
    #[error("no periodic steady state after {cycles} cycles (last residual {residual:e})")]
    NoConvergence { cycles: usize, residual: f64 },
    #[error("compare register clamped during the measurement window")]
    ClampDuringMeasure,
    #[error("steady state not available: {0}")]
    NoSteadyState(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid probe frequency: {0}")]
    InvalidFrequency(String),
}
