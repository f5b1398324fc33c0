//! Density–phase reconstruction of the annihilation operator, and the
//! verification suites around it.
//!
//! The ansatz `ψ = e^{−iΠ} e^{iΦ[ρ]} √ρ` trades the field for three pieces
//! built from observables: a phase `Π` canonically conjugate to the density
//! (`[Π(x), ρ(y)] = i δ(x−y)`), a statistics-encoding functional `Φ[ρ]`,
//! and the density itself. This module realizes all three on finite Fock
//! towers:
//!
//! * [`phase`] tabulates the high-density `Φ` (zero for bosons, linear in
//!   the density with coefficients `U₀(q)` for fermions) and evaluates the
//!   deletion recursion that pins `Φ` down;
//! * [`conjugate`] builds the Fourier coefficients `X_q` of `Π` two ways —
//!   from field fluctuations and from currents/densities — and measures
//!   `[X_q, ρ_k]` against the canonical target order by order;
//! * [`field`] reassembles `ψ̃` from `X`, `φ` and `δρ`, and tabulates
//!   `‖ψ̃(k) − ψ(k)‖` on the home sector as a function of truncation order.
//!
//! No formula here closes at finite order, so the truncation-order sweep is
//! the universal instrument: every verdict is a residual-vs-order table.

pub mod conjugate;
pub mod field;
pub mod phase;

pub use conjugate::{
    build_conjugate, build_conjugates, canonical_commutator_deviation, non_increasing,
    verify_canonical_commutator, CanonicalRow, ConjugateCoefficient, ConjugateForm, ConjugateSet,
    DensityPhaseContext,
};
pub use field::{
    build_reconstructed_field, reconstructed_field_series, verify_conjecture, ConjectureReport,
    ConjectureRow, FieldSeries, MonotonicityVerdict,
};
pub use phase::{
    build_phase_hd, lambda_weight, recursion_residual, FermiParams, ParticleConfig, PhaseForm,
    PhaseFunctional, PhaseRow, PointSpin, RecursionOutcome,
};
