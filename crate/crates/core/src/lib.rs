//! Constrained integer least squares:
//!
//! ```text
//! minimize ‖Y − G·X‖²  over X ∈ S^{N×L}
//! subject to A·Xᵀ = 0, ‖row_i(X)‖₀ ≤ K, rank(X) = N
//! ```
//!
//! [`dioph`] enumerates every admissible row (the set `F`), [`spheredec`] decodes
//! columns of `X` with per-coordinate alphabets, and [`assembler`] combines the two
//! under the rank constraint. [`oracle`] holds brute-force references and
//! [`harness`] generates seeded instances and benchmarks.

pub mod assembler;
pub mod dioph;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod instance_file;
pub mod intlin;
pub mod oracle;
pub mod spheredec;

#[cfg(test)]
pub(crate) mod testutil;

pub use assembler::{
    derive_column_sets, objective, prune_with_column, solve, solve_ils_eq, solve_with,
    verify_solution, IlsMode, ProblemInstance, RowTreeBundle, SolveOptions, SolveResult,
    SolveStats,
};
pub use dioph::{solve_diophantine_sparse, tree_leaves, Alphabet, DiophStats, SolutionTree};
pub use error::{CilsError, Result};
pub use intlin::{hermite_normal_form, int_rank, validate_hnf, HnfResult, IntMatrix};
pub use spheredec::{
    babai_radius, qr_positive, sphere_decode, CandidateSets, RealMatrix, RealVector,
    SphereCandidate,
};
