//! Exact arithmetic over prime fields and finite matrix groups.

mod catalog;
mod group;
mod matrix;

use thiserror::Error;

pub use catalog::{catalog_generators, level2_transvection, symplectic_form, Catalog};
pub use group::{
    commutator_subgroup, enumerate_group, is_generated_by_order_ell, is_perfect, plus_subgroup,
    quotient_index_prime_to_ell, subgroup_closure, symmetrize, GeneratorSet, GroupTable,
    DEFAULT_CAP,
};
pub use matrix::{is_prime, Matrix, MAX_MODULUS};

pub(crate) use matrix::{apply_entries, mod_inverse, mul_entries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported maximum {MAX_MODULUS}")]
    ModulusTooLarge(u32),
    #[error("expected {dim}x{dim} entries, got {len}")]
    BadShape { dim: usize, len: usize },
    #[error("generator {index} is singular")]
    Singular { index: usize },
    #[error("mixed moduli: expected {expected}, found {found}")]
    MixedModuli { expected: u32, found: u32 },
    #[error("mixed dimensions: expected {expected}, found {found}")]
    MixedDimensions { expected: usize, found: usize },
    #[error("empty generator list")]
    EmptyGenerators,
    #[error("cap must be at least 1")]
    ZeroCap,
    #[error("group closure exceeds cap {cap} (stopped at {partial} elements)")]
    CapExceeded { cap: usize, partial: usize },
    #[error("prime {found} does not match the group modulus {expected}")]
    ModulusMismatch { expected: u32, found: u32 },
    #[error(
        "ℓ = {ell} is smaller than m - 1 for m = {dim}; order-ℓ elements and unipotents differ"
    )]
    PrimeTooSmall { ell: u32, dim: usize },
    #[error("catalog `{0}` is undefined for ℓ = 2 (level-2 generators reduce to the identity)")]
    EvenModulus(&'static str),
    #[error("{0}")]
    InvalidCatalog(String),
    #[error("custom matrix {index} is malformed: {reason}")]
    MalformedCustom { index: usize, reason: String },
}
