use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("singular chart point at {u:?}: {reason}")]
    SingularPoint { u: Vec<f64>, reason: String },

    #[error("tolerance error: {0}")]
    Tolerance(String),

    #[error("distance {distance:e} to the origin is below the 1e-8 singularity threshold")]
    NearOrigin { distance: f64 },

    #[error("degenerate translator ODE at R = {radius:e} (u' = {slope:e})")]
    DegenerateOde { radius: f64, slope: f64 },

    #[error("step size collapsed; last good radius R = {last_good_radius:e}")]
    StiffFailure { last_good_radius: f64 },

    #[error("profile stopped being graphical near R = {radius:e}")]
    GraphicalBreakdown { radius: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GeomError {
    fn from(e: std::io::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
