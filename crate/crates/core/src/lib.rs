//! Spectral gaps of Cayley and Schreier graphs of congruence quotients, and
//! the chain of inequalities that turns them into genus and gonality lower
//! bounds for the associated covering curves.
//!
//! * [`algebra`]: matrices over F_ℓ, generator sets, group enumeration and
//!   the order-ℓ / perfectness predicates.
//! * [`graph`]: Cayley and Schreier multigraphs and the combinatorial
//!   Laplacian `Δ = r·I − A`.
//! * [`spectral`]: `λ₁(Δ)` by dense decomposition or restarted Lanczos.
//! * [`metrics`]: diameters, the Diaconis–Saloff-Coste and interlacing
//!   checks, esperantist fits, Kelner ratios.
//! * [`surfaces`]: Riemann–Hurwitz genus, hyperbolic area and gonality
//!   certificates.
//! * [`pipeline`]: configs, ℓ-sweeps, caching and reports.

pub mod algebra;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod spectral;
pub mod surfaces;

/// Version stamped into graph exports, cache entries and result records.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every vertex carries one incidence per generator; a fixed point is a
/// loop contributing 1 to the diagonal of `A`.
pub const LOOP_CONVENTION: &str = "one-incidence-per-generator";

/// `στ` means apply `τ` first.
pub const PERMUTATION_CONVENTION: &str = "right-to-left";

pub const LOG_BASE: &str = "natural";
