use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{quantity} must be positive, got {value}")]
    Domain { quantity: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Riccati-Bessel function overflow at order {order} for argument {re}{im:+}i")]
    Range { order: usize, re: f64, im: f64 },

    #[error("vanishing denominator in Mie coefficient of order {order} at {omega_ev} eV")]
    Singular { order: usize, omega_ev: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("degenerate poles {first} and {second} (separation {separation:e}); perturb the fit parameters")]
    DegenerateRoots { first: num_complex::Complex64, second: num_complex::Complex64, separation: f64 },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error(
        "kernel band truncation: estimated {missing_area:.3} meV² outside the band \
         ({:.3}% of the total, limit {:.3}%)",
        100.0 * missing_fraction,
        100.0 * limit
    )]
    BandTruncation { missing_area: f64, missing_fraction: f64, limit: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Geometry(_) => 1,
            Error::Io(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
