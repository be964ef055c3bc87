use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate couplings: g1 = g2 = 0 leaves the eigenbasis undefined")]
    DegenerateCouplings,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("time {t} outside schedule support [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("singular auxiliary angle alpha = {alpha}{}", fmt_time(*t))]
    SingularAngle { t: Option<f64>, alpha: f64 },

    #[error("non-finite state encountered; last good time {last_good_t}")]
    Divergence { last_good_t: f64 },

    #[error("accuracy target {tolerance:e} not met; best estimate {estimate:e} at dt = {dt:e}")]
    Accuracy { estimate: f64, tolerance: f64, dt: f64 },

    #[error("negative radicand {radicand} in instantaneous cost (g0 = {g0}, kappa = {kappa}, theta = {theta})")]
    Domain { radicand: f64, g0: f64, kappa: f64, theta: f64 },
}

fn fmt_time(t: Option<f64>) -> String {
    t.map(|t| format!(" at t = {t}")).unwrap_or_default()
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {value}")))
    }
}
