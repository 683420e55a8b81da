use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("delta must be positive (delta > 0), got {0}")]
    NonPositiveDelta(f64),
    #[error("beta must be positive (beta > 0), got {0}")]
    NonPositiveBeta(f64),
    #[error("coupling {name} must be non-negative, got {value}")]
    NegativeCoupling { name: &'static str, value: f64 },
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
    #[error("interaction window is empty: t_start = {start} is not before t_end = {end}")]
    EmptyWindow { start: f64, end: f64 },
    #[error("eigenvalues coincide at t = {t} (decoupled crossing)")]
    DegenerateEigenvalue { t: f64 },
    #[error("requires equal couplings, got omega12 = {omega12}, omega23 = {omega23}")]
    SymmetryRequired { omega12: f64, omega23: f64 },
    #[error("quadrature over [{from}, {to}] did not reach tolerance {tol} (estimated error {estimate})")]
    QuadratureFailure {
        from: f64,
        to: f64,
        tol: f64,
        estimate: f64,
    },
    #[error("window [{t_i}, {t_f}] must contain both crossings at -{tau} and {tau}")]
    CrossingsOutsideWindow { t_i: f64, t_f: f64, tau: f64 },
    #[error("window half-length T = {t_half} must exceed the crossing time tau = {tau}")]
    WindowTooShort { t_half: f64, tau: f64 },
    #[error("time t = {t} must lie after both crossings (t > tau = {tau})")]
    AfterCrossingsRequired { t: f64, tau: f64 },
    #[error("an explicit propagator needs a finite window; use the transition table for infinite ends")]
    InfiniteWindow,
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    StepBudgetExhausted { t: f64 },
    #[error("start time magnitude {t0} is below the asymptotic threshold {min}")]
    T0TooSmall { t0: f64, min: f64 },
    #[error("diabatic state index must be 1, 2 or 3, got {0}")]
    BadStateIndex(usize),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Errors caused by bad input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::QuadratureFailure { .. }
                | Error::StepSizeUnderflow { .. }
                | Error::StepBudgetExhausted { .. }
                | Error::DegenerateEigenvalue { .. }
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
