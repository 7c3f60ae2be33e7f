//! Set-valued systemic risk measure engine.
//!
//! `R(Y) = { k : Y_k ∈ A }` is an upper set of capital allocations. It is
//! approximated on a lattice by [`grid_search`], sharpened by [`refine`],
//! and scalarized into efficient allocation rules by [`ear`].

mod approximation;
mod ear;
mod lattice;
mod oracle;
mod probe;
mod search;

pub use approximation::{Degeneracy, GridApproximation, Label, SandwichCertificate};
pub use ear::{ear, is_undominated, EarResult};
pub use lattice::{GridSpec, MAX_DIM};
pub use oracle::{membership, FnOracle, ModelOracle, Oracle};
pub use probe::{quasiconvexity_probe, ProbeReport};
pub use search::{diagonal_bisection, grid_search, refine, DiagonalOutcome};
