use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // fields and scalars
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("invalid extension degree {0}")]
    InvalidDegree(u32),
    #[error("field cardinality {p}^{r} exceeds 2^16")]
    CardinalityTooLarge { p: u64, r: u32 },
    #[error("operands live over different fields ({0} vs {1})")]
    FieldMismatch(String, String),
    #[error("division by zero")]
    DivisionByZero,

    // polynomials
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("negative power of t in a ring without 1/t")]
    NegativeTPower,
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at offset {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} is outside the supported range")]
    DimensionTooLarge(usize),
    #[error("the map has a parameter t; a parameter-free map is required")]
    ParameterPresent,

    // automorphisms
    #[error("Jacobian {0} is not a unit")]
    JacobianNotUnit(String),
    #[error("Jacobian {0} is not 1")]
    JacobianNotOne(String),
    #[error("no polynomial inverse up to degree {0}")]
    NotInvertible(u32),
    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("triangular diagonal coefficient is zero")]
    ZeroDiagonal,
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    // degeneration
    #[error("the family is the identity")]
    IdentityInput,
    #[error("the family does not specialise to the identity at t = 0")]
    NotIdAtZero,
    #[error("no witness found on the search grid")]
    NoWitness,
    #[error("the map is a translation")]
    IsTranslation,
    #[error("the map does not fix the origin")]
    DoesNotFixOrigin,
    #[error("h(p) differs from q")]
    FixedPointMissing,
    #[error("p and q coincide")]
    DegenerateGeometry,
    #[error("this operation requires an infinite base field (QQ)")]
    InfiniteFieldRequired,

    // identities
    #[error("polynomial involves x1")]
    VariableLeak,
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("wrong characteristic: expected {expected}, found {found}")]
    WrongCharacteristic { expected: u64, found: u64 },
    #[error("a scalar parameter must be nonzero")]
    ZeroScalar,

    // finite fields
    #[error("{0} points exceed the enumeration limit")]
    TooManyPoints(u128),
    #[error("operation requires a finite field")]
    FiniteFieldRequired,
    #[error("not in SAut: {0}")]
    NotSAut(String),
    #[error("expected a polynomial in x1 only")]
    NotUnivariate,
    #[error("stratum bound {given} is below the required {needed}")]
    StratumTooSmall { given: usize, needed: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
