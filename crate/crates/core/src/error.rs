use alloc::string::String;
use core::fmt;

use crate::expr::Expression;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone)]
pub enum Error {
    /// Expression text does not match the grammar.
    Syntax {
        pos: usize,
        msg: String,
    },
    UnknownField(String),
    /// A component or derivative index is outside `1..=n` or has the wrong arity.
    IndexOutOfRange {
        pos: usize,
        msg: String,
    },
    MalformedMultiIndex {
        pos: usize,
    },
    /// Division or negative power of something that is not a unit of the expression class.
    NotInvertible(String),
    InvalidBundle(String),
    /// A total derivative would produce a jet variable above the bundle's order bound.
    OrderBoundExceeded {
        bound: usize,
    },
    /// Partial derivatives are only defined for coordinate atoms.
    NotACoordinate,
    MissingAtom(String),
    InconsistentRoot(String),
    /// The input is outside the polynomial class required by a homotopy formula.
    NotPolynomial(String),
    ComponentMismatch(String),
    /// A divergence extraction left a nonzero remainder.
    NotExact {
        residual: Expression,
    },
    /// An internal consistency check failed.
    Invariant(String),
    UnknownModel(String),
    /// A model's stated source equation differs from the Euler–Lagrange form of its Lagrangian.
    InconsistentModel(String),
    UnsupportedBundle(String),
    Cancelled,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Syntax { pos, msg } => write!(f, "syntax error at {pos}: {msg}"),
            Error::UnknownField(name) => write!(f, "unknown field `{name}`"),
            Error::IndexOutOfRange { pos, msg } => write!(f, "index out of range at {pos}: {msg}"),
            Error::MalformedMultiIndex { pos } => write!(f, "malformed multi-index at {pos}"),
            Error::NotInvertible(what) => write!(f, "cannot invert {what}"),
            Error::InvalidBundle(msg) => write!(f, "invalid bundle: {msg}"),
            Error::OrderBoundExceeded { bound } => write!(f, "jet order bound {bound} exceeded"),
            Error::NotACoordinate => write!(
                f,
                "partial derivative with respect to a non-coordinate atom"
            ),
            Error::MissingAtom(a) => write!(f, "no value assigned to {a}"),
            Error::InconsistentRoot(msg) => write!(f, "inconsistent sqrtdet value: {msg}"),
            Error::NotPolynomial(msg) => write!(f, "not polynomial: {msg}"),
            Error::ComponentMismatch(msg) => write!(f, "component mismatch: {msg}"),
            Error::NotExact { residual } => {
                write!(
                    f,
                    "not horizontally exact; residual has {} terms",
                    residual.len()
                )
            }
            Error::Invariant(msg) => write!(f, "internal invariant violated: {msg}"),
            Error::UnknownModel(name) => write!(f, "unknown model `{name}`"),
            Error::InconsistentModel(msg) => write!(f, "inconsistent model: {msg}"),
            Error::UnsupportedBundle(msg) => write!(f, "unsupported bundle: {msg}"),
            Error::Cancelled => write!(f, "computation cancelled"),
        }
    }
}

impl core::error::Error for Error {}
