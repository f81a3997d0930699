use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("no equilibrium angle in (0, theta0]: {0}")]
    NoEquilibrium(String),

    #[error("{which} is imaginary (squared frequency {squared:.6e}); configuration is statically unstable")]
    ImaginaryFrequency { which: &'static str, squared: f64 },

    #[error("slip equation is singular at t = {t:.9e} (1 + mu_k*sgn*tan(theta) = {denominator:.3e})")]
    SingularSlip { t: f64, denominator: f64 },

    #[error("leg geometry left 0 < y < R at t = {t:.9e} (y = {y:.6e})")]
    Geometry { t: f64, y: f64 },

    #[error("step size underflow at t = {t:.9e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("chatter: {events} transitions within one drive period ending at t = {t:.9e}")]
    Chatter { t: f64, events: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
