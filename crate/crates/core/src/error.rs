use core::fmt;

/// Errors raised by the sparse kernels, the KKT assembly and the factorization.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Shapes or index ranges do not conform.
    Structure(&'static str),
    /// Non-finite or otherwise invalid numerical input.
    Data(&'static str),
    /// The iterate violates strict positivity of `x` or `z`.
    State { index: usize },
    /// The final dense block of the multilevel factorization is singular.
    SingularFactor { level: usize, index: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Structure(msg) => write!(f, "structural error: {msg}"),
            Error::Data(msg) => write!(f, "data error: {msg}"),
            Error::State { index } => {
                write!(f, "iterate is not strictly interior at component {index}")
            }
            Error::SingularFactor { level, index } => write!(
                f,
                "numerically singular remainder at level {level}, local index {index}"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
