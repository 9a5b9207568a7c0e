use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NlbtError {
    #[error("linear drift is not Hurwitz (spectral abscissa {abscissa:.3e})")]
    NotHurwitz { abscissa: f64 },
    #[error("controllability Gramian is singular or indefinite")]
    SingularGramian,
    #[error("observability Gramian is singular or indefinite")]
    SingularObservability,
    #[error("resonant eigenvalue sum {value:.3e} at degree {degree}")]
    Resonance { degree: usize, value: f64 },
    #[error("Hankel singular values {i} and {j} coincide within tolerance")]
    RepeatedHankel { i: usize, j: usize },
    #[error("Hankel singular value {i} is zero within tolerance")]
    ZeroHankel { i: usize },
    #[error("non-positive singular value function at state {state}")]
    NonPositiveSigma { state: usize },
    #[error("Newton iteration did not converge (residual {residual:.3e})")]
    NewtonDiverged { iterate: Vec<f64>, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("refusing allocation of {bytes} bytes (limit {limit})")]
    ResourceRefusal { bytes: u128, limit: u128 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, NlbtError>;
