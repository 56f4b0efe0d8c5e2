//! Generalized coherent states as pointer states of Lie-algebraic Markovian
//! open quantum systems.
//!
//! The crate builds concrete representations of the dynamical algebras
//! (spins, bosons, squeezing, collective spins), the coherent-state manifolds
//! they generate, the invariant uncertainty derived from the quantum Fisher
//! information, and a Lindblad evolution engine. On top of these it runs a
//! predictability sieve (minimization of purity loss over pure states) and
//! compares the minimizers with the coherent-state manifold.

pub mod error;
pub mod gcs;
pub mod liealg;
pub mod lindblad;
pub mod opsalg;
pub mod policy;
pub mod scenarios;
pub mod sieve;
pub mod structure;
pub mod uncertainty;

pub use error::{Error, Result};
pub use policy::NumericPolicy;

/// Deterministic random number generator used for every seeded procedure.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Creates the crate-wide RNG from a seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
