//! Automatic quantum error correction by engineered dissipation.
//!
//! A small code is kept alive without measurement or feedback: every
//! correctable error is funnelled, by a static Hamiltonian plus always-on
//! ancilla cooling, back into the codeword it came from. This crate provides
//! the pieces needed to build, analyze, and verify such schemes:
//!
//! * [`ops`] — labeled tensor-product Hilbert spaces, kets, operators, and
//!   the spin-1/2 algebra (see its docs for the basis conventions).
//! * [`liouville`] — the vectorized Lindblad generator: propagation and full
//!   spectral decomposition.
//! * [`models`] — toy single-codeword models and the 14-state two-codeword
//!   spin-flip-correcting model, with JSON configuration and bundled
//!   parameter sets.
//! * [`metrics`] — linear entropy, codeword populations, and coherence along
//!   trajectories.
//! * [`conditions`] — checkable repairability conditions (KL, DFS,
//!   FUNNEL_PARTITION, DRAINAGE, SYMMETRY) with witness reporting.
//! * [`jump`] — a discrete jump expansion of the dissipative dynamics over
//!   explicit bath registers, plus the two-path phase-matching factor.
//! * [`spin_cavity`] — a concrete realization study: dipole spectrum of a
//!   three-spin chain, rectangular-cavity mode placement, and the combined
//!   design report.
//! * [`numerics`] — dense linear-algebra helpers (expm, eigendecompositions,
//!   PSD projection) shared by the physics modules.

pub mod conditions;
pub mod error;
pub mod jump;
pub mod liouville;
pub mod metrics;
pub mod models;
pub mod numerics;
pub mod ops;
pub mod spin_cavity;
