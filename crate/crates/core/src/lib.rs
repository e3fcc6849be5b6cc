//! Exact computations with polynomial automorphisms of affine space over
//! the rationals and finite fields.

pub mod degeneration;
pub mod endo;
pub mod error;
pub mod field;
pub mod finite_action;
pub mod identities;
pub mod linalg;
pub mod poly;
pub mod quotient_v;
pub mod sample;
pub mod tame;

pub use endo::Endo;
pub use error::{Error, Result};
pub use field::{Field, ParamKind, ParamRing, Scalar, Value};
pub use linalg::Matrix;
pub use poly::{parse_poly, Mono, MultiPoly};
pub use tame::{TameFactor, TameWord};
