//! Finite-mode second-quantization engine with a density–phase
//! reconstruction and verification harness.
//!
//! `fockforge` enumerates exactly-diagonalizable fermionic (and capped
//! bosonic) Fock sectors over a periodic momentum grid, realizes the
//! observable bilinears — densities `ρ(k,s)` and currents `j(k,s)` — as
//! exact sparse operators, and provides a formal translation-series calculus
//! for reconstructing the annihilation operator from those bilinears through
//! a density–phase ansatz `ψ = e^{−iΠ} e^{iΦ[ρ]} √ρ`.
//!
//! Everything splits into two regimes, and the harness keeps them apart:
//!
//! * **exact identities** that close on the finite grid in wrap mode
//!   (canonical anticommutation, density commutativity, hermiticity pairings
//!   `ρ(k)† = ρ(−k)`, sector block structure) are asserted entrywise;
//! * **series-truncation residuals** (canonical-commutator deviation of the
//!   reconstructed phase coefficients, residual of the reconstructed field
//!   against the exact annihilator) are measured as residual-vs-order
//!   tables, never as single numbers, and reported rather than assumed.
//!
//! Modules:
//!
//! * [`lattice`] — momentum grid, spins, mode enumeration, boundary modes;
//! * [`fock`] — occupation bases, sparse operator algebra, ladder operators;
//! * [`bilinears`] — density, current and fluctuation operators;
//! * [`transeries`] — translation-operator series, analytic functions of
//!   them, and the Fourier-composition lemma checker;
//! * [`density_phase`] — high-density phase tables, conjugate-phase
//!   coefficients, field reconstruction and its verification suites;
//! * [`harness`] — config-driven job runner with JSON/CSV reports;
//! * [`reference`] — brute-force tensor-space oracles for the test suites.
//!
//! The `fockforge` binary exposes the suites as subcommands; the crate's
//! `examples/` directory walks through each capability.

pub mod bilinears;
pub mod density_phase;
pub mod error;
pub mod fock;
pub mod harness;
pub mod lattice;
pub mod reference;
pub mod transeries;

pub use error::{Error, Result};
