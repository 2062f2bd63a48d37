use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants in the "theorem violation" group are not bugs in the usual sense:
/// they carry a witness and are turned into failed report records by the
/// experiment harness instead of aborting a batch.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // finite fields
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("modulus {modulus:?} is reducible over F_{p}")]
    ReducibleModulus { p: u32, modulus: Vec<u32> },
    #[error("modulus {modulus:?} is not a monic polynomial of degree {m} over F_{p}")]
    DegreeMismatch { p: u32, m: u32, modulus: Vec<u32> },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different fields")]
    FieldMismatch,
    #[error("F_{sub} is not a subfield of F_{size}")]
    NotASubfield { sub: u64, size: u64 },
    #[error("no embedding of F_{src} into F_{dst}")]
    NoEmbedding { src: u64, dst: u64 },

    // algebras
    #[error("structure constants are not associative at basis triple {0:?}")]
    NotAssociative((usize, usize, usize)),
    #[error("algebra is not nilpotent; nonzero element of A^(d+1): {witness:?}")]
    NotNilpotent { witness: Vec<u32> },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("algebra is not defined over F_{0}")]
    NotDefinedOverSubfield(u32),

    // groups
    #[error("group of order {order} exceeds the enumeration bound {bound}")]
    TooLarge { order: u128, bound: u64 },
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("subspace is not a subalgebra")]
    NotSubgroup,
    #[error("character stabilizer is not an algebra subgroup")]
    StabilizerNotAlgebraSubgroup { elements: usize, span_rank: usize },

    // characters
    #[error("cyclotomic levels {0} and {1} differ")]
    LevelMismatch(u32, u32),
    #[error("level {level} is too small for a character of exponent {needed}")]
    LevelTooSmall { level: u32, needed: u32 },
    #[error("inner product sum is not an integer multiple of |G|: {0}")]
    NotAnInteger(String),
    #[error("class functions live on different groups")]
    GroupMismatch,

    // K1 and norm maps
    #[error("matrix over the hull is not invertible")]
    NotInvertible,
    #[error("norm table is not a homomorphism at {0:?}")]
    NotAHomomorphism(Vec<u32>),
    #[error("norm is not constant on the derived coset of {0:?}")]
    NotConstantOnCosets(Vec<u32>),

    // strongly Heisenberg machinery
    #[error("character of 1+A^2 is not G-invariant")]
    NotInvariant,
    #[error("kernel of the commutator pairing is not a k-subspace")]
    RadicalNotSubspace,
    #[error("isotropic extension failed")]
    IsotropicExtensionFailed,
    #[error("no extension of the central character to G_phi")]
    NoExtension,
    #[error("radical of the base-changed character differs from the scalar extension")]
    RadicalMismatch,

    // irreducibles and base change
    #[error("sum of squared degrees {got} differs from |G| = {expected}")]
    SumOfSquaresMismatch { got: u64, expected: u64 },
    #[error("G-invariant irreducible of 1+A^2 has degree {0}")]
    InvariantNotLinear(u64),
    #[error("degree {degree} is not a power of q = {q}")]
    NotAPowerOfQ { degree: u64, q: u64 },
    #[error("class function is not irreducible")]
    NotIrreducible,
    #[error("base-changed representation is not irreducible")]
    NotIrreducibleAfterBaseChange,
    #[error("base-changed representation is not Galois invariant")]
    NotGaloisInvariant,
    #[error("first reduction step of the base change does not match")]
    ReductionMismatch,
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    // catalog / io
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("validation error in {name}: {source}")]
    ValidationError { name: String, source: Box<Error> },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that report a falsified theorem rather than bad input
    /// or an arithmetic bug.
    pub fn is_theorem_violation(&self) -> bool {
        matches!(
            self,
            Error::StabilizerNotAlgebraSubgroup { .. }
                | Error::NotAHomomorphism(_)
                | Error::NotConstantOnCosets(_)
                | Error::RadicalNotSubspace
                | Error::IsotropicExtensionFailed
                | Error::NoExtension
                | Error::RadicalMismatch
                | Error::InvariantNotLinear(_)
                | Error::NotAPowerOfQ { .. }
                | Error::NotIrreducibleAfterBaseChange
                | Error::NotGaloisInvariant
                | Error::ReductionMismatch
        )
    }
}
