use thiserror::Error;

use crate::quad::Estimate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(
        "coincident points: separation {separation:e} is below the exclusion radius {radius:e}"
    )]
    CoincidentPoints { separation: f64, radius: f64 },

    #[error("degenerate triangle: shortest side {side:e} is below the exclusion radius")]
    DegenerateTriangle { side: f64 },

    #[error("validity violation: {0}")]
    ValidityViolation(String),

    #[error("quadrature did not reach tolerance (best value {:e}, error {:e}, {} evaluations)", .estimate.value, .estimate.std_err, .estimate.evals)]
    ToleranceNotReached { estimate: Estimate },

    #[error("Richardson extrapolation did not converge: successive levels differ by {difference:e} ({sigmas:.1} sigma)")]
    NonConvergentExtrapolation { difference: f64, sigmas: f64 },

    #[error("refusing computation: {0}")]
    ComplexityRefusal(String),

    #[error("size {size} exceeds the supported maximum {max}")]
    SizeRefusal { size: usize, max: usize },

    #[error("bodies {first} and {second} overlap")]
    Overlap { first: usize, second: usize },

    #[error("atom at {position:?} lies inside a body")]
    AtomInsideBody { position: [f64; 3] },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
