//! Reconstruction of the annihilation operator from the density–phase data,
//! and the residual instrument that compares it to the exact one.
//!
//! The reconstructed field is the three-factor series
//!
//! ```text
//! ψ̃(k,s) = exp(−i Σ_q T_{−q} X_{q,s}) · exp(+i Σ_q T_q φ(q,s))
//!          · (N⁰ + Σ_q δρ(q,s) T_q)^{1/2} · δ_{k,0}
//! ```
//!
//! multiplied in the written order and evaluated against the delta at `k`.
//! The whole series is independent of `k`, so one build per order serves
//! every momentum.
//!
//! Residuals compare `ψ̃(k)` with the exact annihilator `ψ(k)` on the home
//! sector. At `k = 0` the `X₀ ≡ 0` convention removes the number-shift
//! phase from `ψ̃`, so the comparison target there is the polar part left
//! over, the square root of the spin-`s` number operator; the raw distance
//! to `ψ(0)` is recorded alongside. Block leakage — reconstructed amplitude
//! that fails to land in the `(N_s − 1)` sector — and truncation mass are
//! reported per row. Residual-vs-order tables are the output; nothing here
//! asserts convergence.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{sqrt_number_operator, SparseOperator};
use crate::lattice::{neg_tuple, IntTuple};
use crate::transeries::{AnalyticFunction, TransSeries, TruncationReport};

use super::conjugate::{build_conjugates, ConjugateForm, ConjugateSet, DensityPhaseContext};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The `k`-independent reconstruction series at one order.
pub struct FieldSeries {
    pub form: ConjugateForm,
    pub order: u32,
    series: TransSeries<SparseOperator>,
    pub flags: Vec<String>,
}

impl FieldSeries {
    pub fn truncation(&self) -> TruncationReport {
        self.series.truncation()
    }

    /// `ψ̃(k,s)`: evaluate the series against the delta at `k`.
    pub fn at(&self, k: &IntTuple) -> SparseOperator {
        self.series.evaluate_at_delta(k)
    }
}

/// Build the reconstruction series from an already-built conjugate set.
pub fn reconstructed_field_series(
    ctx: &DensityPhaseContext,
    conjugates: &ConjugateSet,
) -> Result<FieldSeries> {
    let order = conjugates.order;
    let zero = SparseOperator::zero(ctx.tower().space(), ctx.tower().space());
    let mut shift_argument = TransSeries::zero(ctx.algebra(), order, zero);
    for (q, coefficient) in &conjugates.coefficients {
        for (&degree, part) in &coefficient.graded {
            shift_argument.add_term(degree, neg_tuple(q), part.scaled(-I))?;
        }
    }
    let shift_exp = shift_argument.apply_function(&AnalyticFunction::exp(order), order)?;
    let phase_exp = ctx.phase_exponential(1.0, order)?;
    let sqrt_density = ctx
        .density_factor(order)?
        .apply_function(&AnalyticFunction::power_around_one(0.5, order), order)?
        .scale(Complex64::new(ctx.n0().sqrt(), 0.0));
    let series = shift_exp.multiply(&phase_exp)?.multiply(&sqrt_density)?;
    let mut flags = conjugates.flags.clone();
    if series.truncation().dropped_offsets > 0 {
        flags.push(format!("window_dropped_mass:{:.3e}", series.truncation().dropped_mass));
    }
    Ok(FieldSeries { form: conjugates.form, order, series, flags })
}

/// Convenience: build conjugates and the field series in one call.
pub fn build_reconstructed_field(
    ctx: &DensityPhaseContext,
    form: ConjugateForm,
    order: u32,
) -> Result<FieldSeries> {
    let conjugates = build_conjugates(ctx, form, order)?;
    reconstructed_field_series(ctx, &conjugates)
}

/// One `(k, order)` row of the conjecture instrument.
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureRow {
    pub form: ConjugateForm,
    pub k: IntTuple,
    pub order: u32,
    /// `‖(ψ̃(k) − target)|_home‖`; target is `ψ(k)` for `k ≠ 0` and
    /// `√N̂_s` at `k = 0` (number-shift phase quotiented out).
    pub residual: f64,
    /// `‖(ψ̃(0) − ψ(0))|_home‖`, recorded alongside the quotiented value.
    pub raw_residual: Option<f64>,
    /// Home-sector amplitude that misses the `(N_s − 1)` block (`k ≠ 0`).
    pub block_leakage: Option<f64>,
    pub dropped_offsets: u64,
    pub dropped_mass: f64,
    pub flags: Vec<String>,
}

/// Verdict per momentum: is the residual non-increasing in order?
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityVerdict {
    pub k: IntTuple,
    pub residuals: Vec<f64>,
    pub non_increasing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    pub rows: Vec<ConjectureRow>,
    pub verdicts: Vec<MonotonicityVerdict>,
    /// Momenta×orders whose residual beat the configured tolerance, if one
    /// was configured.
    pub tolerance: Option<f64>,
    pub within_tolerance_at_max_order: Option<bool>,
}

/// Run the residual instrument: for each order build `ψ̃`, compare against
/// the exact annihilator on the home sector, and tabulate residual vs order.
pub fn verify_conjecture(
    ctx: &DensityPhaseContext,
    form: ConjugateForm,
    k_list: &[IntTuple],
    orders: &[u32],
    tolerance: Option<f64>,
) -> Result<ConjectureReport> {
    if orders.is_empty() || orders.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("order list must be nonempty and ascending".into()));
    }
    let home = ctx.home_dim();
    let sqrt_number = sqrt_number_operator(ctx.tower(), ctx.spin());
    let mut rows = Vec::new();
    for &order in orders {
        let conjugates = build_conjugates(ctx, form, order)?;
        let field = reconstructed_field_series(ctx, &conjugates)?;
        for k in k_list {
            let reduced = ctx
                .grid()
                .reduce(k)
                .ok_or_else(|| Error::ModeOutOfRange(format!("momentum {k:?} off the grid")))?;
            let reconstructed = field.at(&reduced);
            let mut flags = field.flags.clone();
            let (residual, raw_residual) = if reduced == [0, 0, 0] {
                flags.push("zero_mode_phase_quotient".into());
                let quotiented = reconstructed
                    .sub(&sqrt_number)?
                    .restrict_columns(0, home)
                    .operator_norm();
                let raw = reconstructed
                    .sub(ctx.annihilator(&reduced)?)?
                    .restrict_columns(0, home)
                    .operator_norm();
                (quotiented, Some(raw))
            } else {
                let target = ctx.annihilator(&reduced)?;
                (
                    reconstructed.sub(target)?.restrict_columns(0, home).operator_norm(),
                    None,
                )
            };
            let block_leakage = if reduced == [0, 0, 0] {
                None
            } else {
                let restricted = reconstructed.restrict_columns(0, home);
                let lowered_block = ctx.tower().sector_blocks().get(1);
                let total_sq = restricted.frobenius_norm().powi(2);
                let inside_sq = lowered_block
                    .map(|&(_, start, len)| restricted.row_block_mass(start, len).powi(2))
                    .unwrap_or(0.0);
                Some((total_sq - inside_sq).max(0.0).sqrt())
            };
            let truncation = field.truncation();
            rows.push(ConjectureRow {
                form,
                k: reduced,
                order,
                residual,
                raw_residual,
                block_leakage,
                dropped_offsets: truncation.dropped_offsets,
                dropped_mass: truncation.dropped_mass,
                flags,
            });
        }
    }
    let mut verdicts = Vec::new();
    for k in k_list {
        let reduced = ctx.grid().reduce(k).expect("validated above");
        let residuals: Vec<f64> = rows
            .iter()
            .filter(|row| row.k == reduced)
            .map(|row| row.residual)
            .collect();
        verdicts.push(MonotonicityVerdict {
            k: reduced,
            non_increasing: super::conjugate::non_increasing(&residuals),
            residuals,
        });
    }
    let within = tolerance.map(|tol| {
        let max_order = *orders.last().expect("nonempty");
        rows.iter().filter(|row| row.order == max_order).all(|row| row.residual <= tol)
    });
    Ok(ConjectureReport { rows, verdicts, tolerance, within_tolerance_at_max_order: within })
}
