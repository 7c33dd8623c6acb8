use thiserror::Error;

/// Errors raised by constructors, conversions and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("{what} is singular")]
    Singular { what: &'static str },

    #[error("{what} is not {expected} triangular")]
    NotTriangular {
        what: &'static str,
        expected: &'static str,
    },

    #[error("pole order k = {k} is not allowed here (need k >= {min})")]
    InvalidPoleOrder { k: usize, min: usize },

    #[error("Cartan element is not affine-regular: entries {i} and {j} differ by an integer")]
    NotAffineRegular { i: usize, j: usize },

    #[error("Cartan element is not regular: entries {i} and {j} coincide")]
    NotRegular { i: usize, j: usize },

    #[error("factor {index} is a {found} factor, expected {expected}")]
    FactorMismatch {
        index: usize,
        expected: &'static str,
        found: &'static str,
    },

    #[error("factor index {index} out of range ({count} factors)")]
    NoSuchFactor { index: usize, count: usize },

    #[error("element is not in the Lie algebra of the acting factor")]
    NotInFactorAlgebra,

    #[error("triangular factorization failed: pivot {index} vanishes")]
    FactorizationFailed { index: usize },

    #[error("moment map is not the identity (residual {residual:e})")]
    MomentNotIdentity { residual: f64 },

    #[error("leading coefficient does not match the irregular type (residual {residual:e})")]
    LeadingCoefficientMismatch { residual: f64 },

    #[error("point is not on the fixed B_k orbit (diagonal mismatch {residual:e} at order {order})")]
    NotOnOrbit { order: usize, residual: f64 },

    #[error("invalid point: {0}")]
    InvalidPoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
