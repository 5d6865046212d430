pub mod cones;
pub mod decorated;
pub mod exactlin;
pub mod fractions;
pub mod relations;
pub mod zeta;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("rank error: {0}")]
    Rank(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition error: {0}")]
    Precondition(String),
    #[error("pole error: form {0} vanishes")]
    Pole(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
