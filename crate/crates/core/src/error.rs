use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("argument must be positive, got 0")]
    Zero,
    #[error("value {value} exceeds the supported limit {limit} for {what}")]
    OutOfRange { what: &'static str, value: u64, limit: u64 },
    #[error("modulus must be odd and at least {min}, got {value}")]
    InvalidModulus { value: u64, min: u64 },
    #[error("{value} must be squarefree")]
    NotSquarefree { value: u64 },
    #[error("{what} = {value} is not coprime to {modulus}")]
    NotCoprime {
        what: &'static str,
        value: i64,
        modulus: u64,
    },
    #[error("{divisor} does not divide {value}")]
    NotDivisor { divisor: u64, value: u64 },
    #[error("the principal character is not allowed here")]
    PrincipalCharacter,
    #[error("{0}")]
    InvalidParameter(String),
}
