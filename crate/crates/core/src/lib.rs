//! Executable constructions behind hardness results for Max k-Colorable
//! Subgraph.
//!
//! The crate is organised by construction:
//!
//! * [`graph`]: weighted multigraphs with exact rational weights, colorings,
//!   scoring and small exact/heuristic solvers.
//! * [`csp`]: the tripartite `(x ∨ (Y = z)) ∧ (¬x ∨ (Y = z'))` constraint
//!   systems, generators and an exhaustive max-sat oracle.
//! * [`reduce3`]: CSP → weighted 3-coloring gadget reduction with its
//!   assignment encoder and coloring decoder.
//! * [`reducek`]: tensor-product lift from 3 to k colors, padding for
//!   `k mod 3 ≠ 0`, and weighted → unweighted expansion.
//! * [`spectral`]: Markov noise operators, a symmetric eigen-solver, and Fourier
//!   analysis (influences, noise stability) of tabulated functions on `[q]^N`.
//! * [`pcp`]: 2-to-1 label cover, Long Code proofs, and an exact simulator of
//!   the k-coloring verifier.
//! * [`pipeline`]: the end-to-end lemma check run by `kcolor verify`.

pub mod csp;
mod error;
pub mod graph;
pub mod pcp;
pub mod pipeline;
pub mod reduce3;
pub mod reducek;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Coloring, ScoreReport, Weight, WeightedGraph};

/// Seeded generator used everywhere randomness is needed.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Builds the crate's deterministic generator from a seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
