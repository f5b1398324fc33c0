//! Fourier coefficients of the phase canonically conjugate to the density.
//!
//! Two constructions of the same object `X_q` are built and compared, never
//! assumed equal:
//!
//! * **field form** — `X_q = i·ln[ A · B^{−1/2} · e^{−iΣφT} ] δ_{q,0}` with
//!   `A = 1 + (1/√N⁰) Σ_k δψ(k) T_{−k}` and
//!   `B = 1 + (1/N⁰) Σ_k δρ(k) T_k`; the log expands around the unit
//!   leading term;
//! * **current form** — for `q ≠ 0`,
//!   `X_q = (1/q²)(i/N⁰)·[1 + (1/N⁰)Σ δρ T]^{−1}·[Σ_p q·δj(p) T_p] δ_{q,0}
//!   − i q·F([ρ];q)/q²`, the geometric inversion truncated at the working
//!   order. For a linear phase functional the commutator inside `F`
//!   collapses to a scalar through the canonical convention, leaving
//!   `−i q·F(q)/q² = U₀(−q)·δρ(−q) + ½·U₀(−q/2)·I` (the half-momentum term
//!   exists when `−q/2` lands on the grid; on wrapped grids `2` is
//!   invertible modulo the odd period, so it always does).
//!
//! `X₀ ≡ 0` by convention — the omitted piece is the number-shift phase.
//! Both forms are graded by fluctuation degree so that every truncation
//! order is a finite sum; the field form's coefficients lower the particle
//! number and therefore live on a sector tower, while the current form is
//! number conserving.
//!
//! Fourier conventions used by every sign-sensitive step here:
//! `Π_s(x) = Σ_q e^{iq·x} X_{q,s}`, `ρ_s(y) = (1/V) Σ_k e^{ik·y} ρ(k,s)`,
//! `Φ([ρ]; x,s) = Σ_k φ([ρ];k,s) e^{−ik·x}` with `φ(k,s) = U₀(k)·ρ(k,s)`,
//! which together give the target `[X_q, ρ_k] = i·δ_{k,−q}`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::bilinears::{build_current, build_delta_psi, build_delta_rho, build_density};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, SparseOperator, SpinCounts, Statistics};
use crate::lattice::{neg_tuple, GridSpec, IntTuple, Spin, MAX_DIM};
use crate::transeries::{AnalyticFunction, OffsetAlgebra, TransSeries, TruncationReport};

use super::phase::{PhaseForm, PhaseFunctional};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which construction produced a conjugate coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugateForm {
    /// From the field fluctuations (the log formula).
    Field,
    /// From currents and densities (the geometric-inverse formula).
    Current,
}

impl std::fmt::Display for ConjugateForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConjugateForm::Field => write!(f, "field"),
            ConjugateForm::Current => write!(f, "current"),
        }
    }
}

/// Everything the reconstruction needs about one spin channel of one home
/// sector: the ambient tower, cached bilinears, and the phase functional.
pub struct DensityPhaseContext {
    tower: FockBasis,
    spin: Spin,
    n0: f64,
    phase: PhaseFunctional,
    algebra: OffsetAlgebra,
    identity: SparseOperator,
    delta_rho: BTreeMap<(Spin, IntTuple), SparseOperator>,
    density: BTreeMap<(Spin, IntTuple), SparseOperator>,
    psi: BTreeMap<IntTuple, SparseOperator>,
    delta_psi: BTreeMap<IntTuple, SparseOperator>,
    current: BTreeMap<IntTuple, Vec<SparseOperator>>,
    /// Undefined-U₀ momenta whose φ coefficient was replaced by zero.
    phi_gaps: Vec<IntTuple>,
}

impl DensityPhaseContext {
    /// Build the tower for `home` with `spin` active and cache every
    /// bilinear the series need.
    pub fn new(
        grid: &GridSpec,
        statistics: Statistics,
        home: SpinCounts,
        spin: Spin,
        boson_cap: u32,
        phase: PhaseFunctional,
    ) -> Result<DensityPhaseContext> {
        if home.get(spin) == 0 {
            return Err(Error::EmptySector(
                "the reconstruction needs at least one particle in the active spin channel".into(),
            ));
        }
        let tower = FockBasis::tower(grid, statistics, home, spin, boson_cap)?;
        let n0 = home.get(spin) as f64;
        let algebra = OffsetAlgebra::for_grid(grid);
        let identity = SparseOperator::identity(tower.space());
        let mut delta_rho = BTreeMap::new();
        let mut density = BTreeMap::new();
        let mut psi = BTreeMap::new();
        let mut delta_psi = BTreeMap::new();
        let mut current = BTreeMap::new();
        for k in grid.tuples() {
            for s in Spin::ALL {
                delta_rho.insert((s, k), build_delta_rho(&tower, &k, s)?);
                density.insert((s, k), build_density(&tower, &k, s)?);
            }
            psi.insert(k, crate::fock::build_annihilation(&tower, &crate::lattice::Mode::new(k, spin))?);
            delta_psi.insert(k, build_delta_psi(&tower, &k, spin)?);
            let components: Result<Vec<SparseOperator>> =
                (0..grid.dim).map(|c| build_current(&tower, &k, spin, c)).collect();
            current.insert(k, components?);
        }
        let phi_gaps = match phase.form() {
            PhaseForm::Zero => Vec::new(),
            _ => grid
                .tuples()
                .into_iter()
                .filter(|q| *q != [0, 0, 0] && phase.u0(q).is_none())
                .collect(),
        };
        Ok(DensityPhaseContext {
            tower,
            spin,
            n0,
            phase,
            algebra,
            identity,
            delta_rho,
            density,
            psi,
            delta_psi,
            current,
            phi_gaps,
        })
    }

    pub fn tower(&self) -> &FockBasis {
        &self.tower
    }

    pub fn grid(&self) -> &GridSpec {
        self.tower.grid()
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn phase(&self) -> &PhaseFunctional {
        &self.phase
    }

    pub fn algebra(&self) -> OffsetAlgebra {
        self.algebra
    }

    pub fn home_dim(&self) -> usize {
        self.tower.home_dim()
    }

    pub fn identity(&self) -> &SparseOperator {
        &self.identity
    }

    /// Momenta whose φ coefficient fell back to zero because `U₀` was
    /// undefined there.
    pub fn phi_gaps(&self) -> &[IntTuple] {
        &self.phi_gaps
    }

    pub fn annihilator(&self, k: &IntTuple) -> Result<&SparseOperator> {
        let k = self.reduce_to_grid(k)?;
        Ok(&self.psi[&k])
    }

    pub fn density_op(&self, k: &IntTuple, s: Spin) -> Result<SparseOperator> {
        match self.grid().reduce(k) {
            Some(reduced) => Ok(self.density[&(s, reduced)].clone()),
            None => build_density(&self.tower, k, s),
        }
    }

    fn reduce_to_grid(&self, k: &IntTuple) -> Result<IntTuple> {
        self.grid()
            .reduce(k)
            .ok_or_else(|| Error::ModeOutOfRange(format!("momentum {k:?} left the truncated grid")))
    }

    /// φ([ρ]; q, s) = U₀(q)·δρ(q,s) for q ≠ 0 where U₀ is defined.
    fn phi_op(&self, q: &IntTuple) -> Option<SparseOperator> {
        if *q == [0, 0, 0] {
            return None;
        }
        let u0 = self.phase.u0(q)?;
        Some(self.delta_rho[&(self.spin, *q)].scaled(Complex64::new(u0, 0.0)))
    }

    fn zero_series(&self, order: u32) -> TransSeries<SparseOperator> {
        TransSeries::zero(self.algebra, order, SparseOperator::zero(self.tower.space(), self.tower.space()))
    }

    fn unit_series(&self, order: u32) -> Result<TransSeries<SparseOperator>> {
        TransSeries::unit(self.algebra, order, &SparseOperator::zero(self.tower.space(), self.tower.space()))
    }

    /// `1 + (1/N⁰) Σ_k δρ(k,s) T_k` — shared by both forms and the field
    /// reconstruction.
    pub(crate) fn density_factor(&self, order: u32) -> Result<TransSeries<SparseOperator>> {
        let mut series = self.unit_series(order)?;
        let scale = Complex64::new(1.0 / self.n0, 0.0);
        for k in self.grid().tuples() {
            series.add_term(1, k, self.delta_rho[&(self.spin, k)].scaled(scale))?;
        }
        Ok(series)
    }

    /// `exp(∓i Σ_k φ(k,s) T_k)` with the sign chosen by the caller.
    pub(crate) fn phase_exponential(&self, sign: f64, order: u32) -> Result<TransSeries<SparseOperator>> {
        let mut argument = self.zero_series(order);
        for q in self.grid().tuples() {
            if let Some(phi) = self.phi_op(&q) {
                argument.add_term(1, q, phi.scaled(I * sign))?;
            }
        }
        argument.apply_function(&AnalyticFunction::exp(order), order)
    }

    /// The log series `L(q) = ln[A·B^{−1/2}·e^{−iΣφT}]`; `X_q` is `i` times
    /// its delta evaluation. Building the whole series once serves every `q`.
    pub(crate) fn field_log_series(&self, order: u32) -> Result<TransSeries<SparseOperator>> {
        let mut field_factor = self.unit_series(order)?;
        let scale = Complex64::new(1.0 / self.n0.sqrt(), 0.0);
        for k in self.grid().tuples() {
            field_factor.add_term(1, neg_tuple(&k), self.delta_psi[&k].scaled(scale))?;
        }
        let inv_sqrt = self
            .density_factor(order)?
            .apply_function(&AnalyticFunction::power_around_one(-0.5, order), order)?;
        let phase_exp = self.phase_exponential(-1.0, order)?;
        let product = field_factor.multiply(&inv_sqrt)?.multiply(&phase_exp)?;
        product.apply_function(&AnalyticFunction::log_around_one(order), order)
    }

    /// `[1 + (1/N⁰)ΣδρT]^{−1} · [Σ_p j_c(p) T_p]` per component; contracting
    /// with `q` afterwards keeps one series build serving every `q`.
    pub(crate) fn current_component_series(&self, order: u32) -> Result<Vec<TransSeries<SparseOperator>>> {
        let inverse = self
            .density_factor(order)?
            .apply_function(&AnalyticFunction::power_around_one(-1.0, order), order)?;
        let mut out = Vec::with_capacity(self.grid().dim);
        for component in 0..self.grid().dim {
            let mut current_series = self.zero_series(order);
            for p in self.grid().tuples() {
                current_series.add_term(1, p, self.current[&p][component].clone())?;
            }
            out.push(inverse.multiply(&current_series)?);
        }
        Ok(out)
    }

    /// The half-momentum point `h` with `2h = −q` on the grid, where the
    /// scalar part of the commutator term in `F` lives. Odd wrap periods
    /// make `2` invertible, so wrap grids always have one.
    fn half_of_minus_q(&self, q: &IntTuple) -> Option<IntTuple> {
        let grid = self.grid();
        let minus_q = neg_tuple(q);
        match grid.boundary_mode {
            crate::lattice::BoundaryMode::Truncate => {
                if (0..grid.dim).any(|axis| minus_q[axis].rem_euclid(2) != 0) {
                    return None;
                }
                let half = [minus_q[0] / 2, minus_q[1] / 2, minus_q[2] / 2];
                grid.contains(&half).then_some(half)
            }
            crate::lattice::BoundaryMode::Wrap => {
                let w = grid.width();
                let inv2 = (w + 1) / 2;
                let mut half = [0i32; MAX_DIM];
                for axis in 0..grid.dim {
                    half[axis] = minus_q[axis] * inv2;
                }
                Some(grid.wrap_tuple(&half))
            }
        }
    }
}

/// One evaluated conjugate coefficient, graded by fluctuation degree.
#[derive(Debug, Clone)]
pub struct ConjugateCoefficient {
    pub q: IntTuple,
    pub spin: Spin,
    pub form: ConjugateForm,
    pub order: u32,
    /// Degree-resolved parts; their sum is `evaluated`.
    pub graded: BTreeMap<u32, SparseOperator>,
    pub evaluated: SparseOperator,
    pub truncation: TruncationReport,
    pub flags: Vec<String>,
}

/// All conjugate coefficients of one form at one order.
pub struct ConjugateSet {
    pub form: ConjugateForm,
    pub order: u32,
    pub coefficients: BTreeMap<IntTuple, ConjugateCoefficient>,
    pub flags: Vec<String>,
}

impl ConjugateSet {
    pub fn get(&self, q: &IntTuple) -> Option<&ConjugateCoefficient> {
        self.coefficients.get(q)
    }
}

fn sum_graded(
    ctx: &DensityPhaseContext,
    graded: &BTreeMap<u32, SparseOperator>,
) -> Result<SparseOperator> {
    let mut acc = SparseOperator::zero(ctx.tower.space(), ctx.tower.space());
    for part in graded.values() {
        acc = acc.add(part)?;
    }
    Ok(acc)
}

/// Build every `X_q` (q over the grid, `X₀ ≡ 0`) for one form and order.
pub fn build_conjugates(
    ctx: &DensityPhaseContext,
    form: ConjugateForm,
    order: u32,
) -> Result<ConjugateSet> {
    if order == 0 {
        return Err(Error::Config("conjugate coefficients need order >= 1".into()));
    }
    let mut flags: Vec<String> = Vec::new();
    if !ctx.phi_gaps().is_empty() {
        flags.push(format!(
            "phi_undefined_u0_zeroed:{}",
            ctx.phi_gaps().len()
        ));
    }
    let mut coefficients = BTreeMap::new();
    match form {
        ConjugateForm::Field => {
            let log_series = ctx.field_log_series(order)?;
            let truncation = log_series.truncation();
            for q in ctx.grid().tuples() {
                if q == [0, 0, 0] {
                    coefficients.insert(q, zero_coefficient(ctx, form, order, q));
                    continue;
                }
                let mut graded = log_series.evaluate_at_delta_graded(&q);
                for part in graded.values_mut() {
                    *part = part.scaled(I);
                }
                let evaluated = sum_graded(ctx, &graded)?;
                coefficients.insert(
                    q,
                    ConjugateCoefficient {
                        q,
                        spin: ctx.spin,
                        form,
                        order,
                        graded,
                        evaluated,
                        truncation,
                        flags: Vec::new(),
                    },
                );
            }
        }
        ConjugateForm::Current => {
            let component_series = ctx.current_component_series(order)?;
            for q in ctx.grid().tuples() {
                if q == [0, 0, 0] {
                    coefficients.insert(q, zero_coefficient(ctx, form, order, q));
                    continue;
                }
                let q_phys = ctx.grid().momentum(&q);
                let q_sq: f64 = q_phys.iter().map(|x| x * x).sum();
                let prefactor = I * Complex64::new(1.0 / (ctx.n0 * q_sq), 0.0);
                let mut graded: BTreeMap<u32, SparseOperator> = BTreeMap::new();
                let mut truncation = TruncationReport::default();
                let mut local_flags = Vec::new();
                for (component, series) in component_series.iter().enumerate() {
                    truncation.merge(&series.truncation());
                    for (degree, part) in series.evaluate_at_delta_graded(&q) {
                        let scaled = part.scaled(prefactor * Complex64::new(q_phys[component], 0.0));
                        merge_graded(&mut graded, degree, scaled)?;
                    }
                }
                // −i q·F(q)/q² for the linear functional:
                //   U₀(−q)·δρ(−q)  +  ½·U₀(−q/2)·I
                if ctx.phase.form() != PhaseForm::Zero {
                    let minus_q = ctx.grid().reduce(&neg_tuple(&q));
                    if let Some(minus_q) = minus_q {
                        match ctx.phase.u0(&minus_q) {
                            Some(u0) => {
                                let term = ctx.delta_rho[&(ctx.spin, minus_q)]
                                    .scaled(Complex64::new(u0, 0.0));
                                merge_graded(&mut graded, 1, term)?;
                            }
                            None => local_flags.push(format!("gradient_term_undefined_at:{minus_q:?}")),
                        }
                    }
                    if let Some(half) = ctx.half_of_minus_q(&q) {
                        if half != [0, 0, 0] {
                            match ctx.phase.u0(&half) {
                                Some(u0) => {
                                    let term = ctx.identity.scaled(Complex64::new(0.5 * u0, 0.0));
                                    merge_graded(&mut graded, 1, term)?;
                                }
                                None => {
                                    local_flags.push(format!("commutator_term_undefined_at:{half:?}"))
                                }
                            }
                        }
                    }
                }
                let evaluated = sum_graded(ctx, &graded)?;
                coefficients.insert(
                    q,
                    ConjugateCoefficient {
                        q,
                        spin: ctx.spin,
                        form,
                        order,
                        graded,
                        evaluated,
                        truncation,
                        flags: local_flags,
                    },
                );
            }
        }
    }
    Ok(ConjugateSet { form, order, coefficients, flags })
}

/// Single-coefficient convenience wrapper around [`build_conjugates`].
pub fn build_conjugate(
    ctx: &DensityPhaseContext,
    form: ConjugateForm,
    q: &IntTuple,
    order: u32,
) -> Result<ConjugateCoefficient> {
    let reduced = ctx
        .grid()
        .reduce(q)
        .ok_or_else(|| Error::ModeOutOfRange(format!("momentum {q:?} off the grid")))?;
    let set = build_conjugates(ctx, form, order)?;
    set.coefficients
        .get(&reduced)
        .cloned()
        .ok_or_else(|| Error::ModeOutOfRange(format!("momentum {reduced:?} not tabulated")))
}

fn zero_coefficient(
    ctx: &DensityPhaseContext,
    form: ConjugateForm,
    order: u32,
    q: IntTuple,
) -> ConjugateCoefficient {
    ConjugateCoefficient {
        q,
        spin: ctx.spin,
        form,
        order,
        graded: BTreeMap::new(),
        evaluated: SparseOperator::zero(ctx.tower.space(), ctx.tower.space()),
        truncation: TruncationReport::default(),
        flags: vec!["zero_mode_convention".into()],
    }
}

fn merge_graded(
    graded: &mut BTreeMap<u32, SparseOperator>,
    degree: u32,
    term: SparseOperator,
) -> Result<()> {
    match graded.remove(&degree) {
        Some(existing) => {
            let merged = existing.add(&term)?;
            if !merged.is_zero() {
                graded.insert(degree, merged);
            }
        }
        None => {
            if !term.is_zero() {
                graded.insert(degree, term);
            }
        }
    }
    Ok(())
}

/// One row of the canonical-commutator report.
#[derive(Debug, Clone, Serialize)]
pub struct CanonicalRow {
    pub form: ConjugateForm,
    pub q: IntTuple,
    pub k: IntTuple,
    pub other_spin: bool,
    pub order: u32,
    /// Operator-norm deviation of `[X_q, ρ(k,s')]` from `i·δ_{s,s'}·δ_{k,−q}·I`.
    pub deviation: f64,
    /// `‖adjoint(X_q) − X_{−q}‖`; self-adjointness is reported, not assumed.
    pub hermiticity_gap: f64,
}

/// Deviation of `[X_q, ρ(k,s')]` from the canonical target for one pair.
pub fn canonical_commutator_deviation(
    ctx: &DensityPhaseContext,
    x: &ConjugateCoefficient,
    k: &IntTuple,
    rho_spin: Spin,
) -> Result<f64> {
    let rho = ctx.density_op(k, rho_spin)?;
    let mut commutator = x.evaluated.commutator(&rho)?;
    let same_spin = rho_spin == ctx.spin;
    let matched = match (ctx.grid().reduce(k), ctx.grid().reduce(&neg_tuple(&x.q))) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    };
    if same_spin && matched {
        commutator = commutator.sub(&ctx.identity.scaled(I))?;
    }
    Ok(commutator.operator_norm())
}

/// Sweep `[X_q, ρ_k]` deviations over momenta, spins and truncation orders,
/// for one or both constructions.
pub fn verify_canonical_commutator(
    ctx: &DensityPhaseContext,
    forms: &[ConjugateForm],
    orders: &[u32],
) -> Result<Vec<CanonicalRow>> {
    let mut rows = Vec::new();
    let tuples = ctx.grid().tuples();
    for &form in forms {
        for &order in orders {
            let set = build_conjugates(ctx, form, order)?;
            for q in &tuples {
                if *q == [0, 0, 0] {
                    continue;
                }
                let x = set.get(q).expect("all grid momenta tabulated");
                let minus_q = ctx.grid().wrap_tuple(&neg_tuple(q));
                let hermiticity_gap = match set.get(&minus_q) {
                    Some(other) if minus_q != [0, 0, 0] => {
                        x.evaluated.adjoint().sub(&other.evaluated)?.operator_norm()
                    }
                    _ => f64::NAN,
                };
                for k in &tuples {
                    for rho_spin in Spin::ALL {
                        let deviation = canonical_commutator_deviation(ctx, x, k, rho_spin)?;
                        rows.push(CanonicalRow {
                            form,
                            q: *q,
                            k: *k,
                            other_spin: rho_spin != ctx.spin,
                            order,
                            deviation,
                            hermiticity_gap,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// True when the sequence never increases beyond float-tie noise.
pub fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + 1e-12)
}
