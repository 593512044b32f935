use thiserror::Error;

/// Errors reported by the exact-arithmetic layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bi-index must have depth at least 1")]
    EmptyIndex,

    #[error("invalid bi-index: {0}")]
    InvalidIndex(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("lambda coefficient index j={j} out of range 1..={max} for (k1,k2)=({k1},{k2})")]
    LambdaOutOfRange { k1: u32, k2: u32, j: u32, max: u32 },

    #[error("closed-form partition relation only available for depth <= 2 (got depth {0})")]
    DepthUnsupported(usize),

    #[error("divided difference requires the input to vanish on the {0} diagonal")]
    NotAntisymmetric(&'static str),

    #[error("coefficient extraction at ({k1},{k2};{d1},{d2}) exceeds degree bound {bound}")]
    CoefficientOutOfBounds { k1: u32, k2: u32, d1: u32, d2: u32, bound: usize },

    #[error("mixed weights in formal vector: {0} and {1}")]
    MixedWeight(u32, u32),

    #[error("weight mismatch: vector has weight {vector}, relation set has weight {relations}")]
    WeightMismatch { vector: u32, relations: u32 },

    #[error("symbol {0} has no image under this realization")]
    UnsupportedSymbol(String),

    #[error("{0}")]
    OutOfRange(String),

    #[error("multiple zeta value diverges: leading entry must be >= 2")]
    DivergentIndex,

    #[error("q = {0} outside the open interval (0,1)")]
    InvalidQ(f64),

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
}
