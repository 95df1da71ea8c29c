//! Exact rational polynomials graded by dilation weights.

mod compiled;
mod linalg;
mod parse;
mod poly;
mod weights;

pub use compiled::{CompiledMap, CompiledPoly, Interval};
pub use linalg::{det, solve_square, EchelonBasis, RationalMatrix};
pub use parse::{parse_polynomial, parse_rational};
pub use poly::{Exponents, Homogeneity, WeightedPolynomial};
pub use weights::DilationWeights;

use num_bigint::BigInt;
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("singular matrix")]
    Singular,
}

/// `n/d` as a rational.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer `n` as a rational.
pub fn qi(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}
