//! Translation-operator series: formal sums `Σ_q A_q T_q(k)` with scalar or
//! operator coefficients.
//!
//! `T_q(k) = exp(q·∇_k)` translates the momentum label of the Kronecker
//! delta standing on the extreme right, so products compose offsets,
//! `T_a T_b = T_{a+b}`, while coefficients multiply in written order (the
//! left factor's coefficient stays leftmost — operator coefficients need
//! not commute). Evaluating a series against `δ_{k,0}` at label `k` picks
//! out the coefficient stored at offset `−k`: that single rule turns every
//! formula of the shape `[…T…(k)…] δ_{k,0}` into a coefficient extraction.
//!
//! Each stored term also carries a fluctuation degree. Series built from a
//! leading unit plus fluctuation terms of degree one stay graded under
//! products, and analytic functions of them truncate by total degree — every
//! truncation order is then a finite, well-defined sum even when no norm
//! convergence is available. Offsets compose inside a hard window (truncate
//! grids, dropped mass is tallied, never silent) or modulo the grid period
//! (wrap grids, where the offset algebra closes exactly).

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::lattice::{GridSpec, IntTuple, MAX_DIM};

/// How offsets combine under series products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetAlgebra {
    /// Offsets live in `Z^d` restricted to `|o_i| ≤ max_offset`; products
    /// escaping the window are dropped and tallied.
    Window { max_offset: i32 },
    /// Offsets live in the cyclic group `Z_w^d` (wrap-mode grids); the
    /// algebra closes exactly and nothing is dropped.
    Modular { period: IntTuple },
}

impl OffsetAlgebra {
    /// Natural algebra for a grid: modular for wrap, a doubled-range window
    /// for truncate.
    pub fn for_grid(grid: &GridSpec) -> OffsetAlgebra {
        match grid.boundary_mode {
            crate::lattice::BoundaryMode::Wrap => {
                let mut period = [1i32; MAX_DIM];
                for axis in 0..grid.dim {
                    period[axis] = grid.width();
                }
                OffsetAlgebra::Modular { period }
            }
            crate::lattice::BoundaryMode::Truncate => {
                OffsetAlgebra::Window { max_offset: (4 * grid.n_max).max(1) }
            }
        }
    }

    pub fn reduce(&self, offset: &IntTuple) -> Option<IntTuple> {
        match self {
            OffsetAlgebra::Window { max_offset } => {
                if offset.iter().any(|o| o.abs() > *max_offset) {
                    None
                } else {
                    Some(*offset)
                }
            }
            OffsetAlgebra::Modular { period } => {
                let mut out = [0i32; MAX_DIM];
                for axis in 0..MAX_DIM {
                    let w = period[axis];
                    let half = (w - 1) / 2;
                    out[axis] = (offset[axis] + half).rem_euclid(w) - half;
                }
                Some(out)
            }
        }
    }

    fn compose(&self, a: &IntTuple, b: &IntTuple) -> Option<IntTuple> {
        self.reduce(&[a[0] + b[0], a[1] + b[1], a[2] + b[2]])
    }
}

/// Coefficient algebra required by the series arithmetic.
pub trait SeriesCoef: Clone {
    fn zero_like(&self) -> Self;
    /// The multiplicative unit with this coefficient's shape. Errors for
    /// non-square operator coefficients.
    fn identity_like(&self) -> Result<Self>;
    fn add(&self, other: &Self) -> Result<Self>;
    fn scale(&self, factor: Complex64) -> Self;
    /// Product with this coefficient on the left.
    fn mul(&self, other: &Self) -> Result<Self>;
    fn is_zero(&self) -> bool;
    /// Magnitude used for truncation accounting.
    fn mass(&self) -> f64;
}

impl SeriesCoef for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::ZERO
    }

    fn identity_like(&self) -> Result<Self> {
        Ok(Complex64::ONE)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }

    fn scale(&self, factor: Complex64) -> Self {
        self * factor
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn mass(&self) -> f64 {
        self.norm()
    }
}

impl SeriesCoef for SparseOperator {
    fn zero_like(&self) -> Self {
        SparseOperator::zero(self.codomain(), self.domain())
    }

    fn identity_like(&self) -> Result<Self> {
        if !self.is_endomorphism() {
            return Err(Error::ShapeMismatch(
                "series unit requires endomorphism coefficients".into(),
            ));
        }
        Ok(SparseOperator::identity(self.domain()))
    }

    fn add(&self, other: &Self) -> Result<Self> {
        SparseOperator::add(self, other)
    }

    fn scale(&self, factor: Complex64) -> Self {
        self.scaled(factor)
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.compose(other)
    }

    fn is_zero(&self) -> bool {
        SparseOperator::is_zero(self)
    }

    fn mass(&self) -> f64 {
        self.frobenius_norm()
    }
}

/// Truncation bookkeeping carried along every series operation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TruncationReport {
    /// Product offsets that escaped the window.
    pub dropped_offsets: u64,
    /// Coefficient mass lost to the window (product of factor masses).
    pub dropped_mass: f64,
    /// Product terms past the degree cap (the expansion remainder).
    pub dropped_degrees: u64,
}

impl TruncationReport {
    pub fn merge(&mut self, other: &TruncationReport) {
        self.dropped_offsets += other.dropped_offsets;
        self.dropped_mass += other.dropped_mass;
        self.dropped_degrees += other.dropped_degrees;
    }
}

/// Formal translation series with graded coefficients.
#[derive(Debug, Clone)]
pub struct TransSeries<C: SeriesCoef> {
    algebra: OffsetAlgebra,
    max_degree: u32,
    template: C,
    terms: BTreeMap<(u32, IntTuple), C>,
    truncation: TruncationReport,
}

impl<C: SeriesCoef> TransSeries<C> {
    /// Empty series. `template` fixes the coefficient shape (any zero
    /// coefficient of the right shape).
    pub fn zero(algebra: OffsetAlgebra, max_degree: u32, template: C) -> TransSeries<C> {
        TransSeries {
            algebra,
            max_degree,
            template: template.zero_like(),
            terms: BTreeMap::new(),
            truncation: TruncationReport::default(),
        }
    }

    /// The unit series: identity coefficient at offset zero, degree zero.
    pub fn unit(algebra: OffsetAlgebra, max_degree: u32, template: &C) -> Result<TransSeries<C>> {
        let mut s = TransSeries::zero(algebra, max_degree, template.clone());
        s.add_term(0, [0, 0, 0], template.identity_like()?)?;
        Ok(s)
    }

    pub fn algebra(&self) -> OffsetAlgebra {
        self.algebra
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn truncation(&self) -> TruncationReport {
        self.truncation
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Accumulate a coefficient at `(degree, offset)`. Degrees past the cap
    /// are tallied as expansion remainder; offsets are reduced by the
    /// algebra.
    pub fn add_term(&mut self, degree: u32, offset: IntTuple, coef: C) -> Result<()> {
        if coef.is_zero() {
            return Ok(());
        }
        if degree > self.max_degree {
            self.truncation.dropped_degrees += 1;
            return Ok(());
        }
        let Some(offset) = self.algebra.reduce(&offset) else {
            self.truncation.dropped_offsets += 1;
            self.truncation.dropped_mass += coef.mass();
            return Ok(());
        };
        let key = (degree, offset);
        let merged = match self.terms.get(&key) {
            Some(existing) => existing.add(&coef)?,
            None => coef,
        };
        if merged.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, merged);
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, IntTuple, &C)> + '_ {
        self.terms.iter().map(|(&(d, o), c)| (d, o, c))
    }

    /// Sum of all degrees stored at one offset.
    pub fn coefficient_at(&self, offset: &IntTuple) -> C {
        let Some(offset) = self.algebra.reduce(offset) else {
            return self.template.zero_like();
        };
        let mut acc = self.template.zero_like();
        for (&(_, o), c) in &self.terms {
            if o == offset {
                acc = acc.add(c).expect("shapes agree within one series");
            }
        }
        acc
    }

    fn compatible(&self, other: &TransSeries<C>) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::SeriesMismatch("offset algebras differ".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &TransSeries<C>) -> Result<TransSeries<C>> {
        self.compatible(other)?;
        let mut out = self.clone();
        out.max_degree = self.max_degree.min(other.max_degree);
        out.truncation.merge(&other.truncation);
        for (&(d, o), c) in &other.terms {
            out.add_term(d, o, c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> TransSeries<C> {
        let mut out = TransSeries {
            algebra: self.algebra,
            max_degree: self.max_degree,
            template: self.template.clone(),
            terms: BTreeMap::new(),
            truncation: self.truncation,
        };
        if factor.re == 0.0 && factor.im == 0.0 {
            return out;
        }
        for (&k, c) in &self.terms {
            let scaled = c.scale(factor);
            if !scaled.is_zero() {
                out.terms.insert(k, scaled);
            }
        }
        out
    }

    /// Offset convolution with order-preserving coefficient products:
    /// `(S1·S2)_q = Σ_{q1+q2=q} A_{q1}·B_{q2}`, left coefficients leftmost.
    pub fn multiply(&self, other: &TransSeries<C>) -> Result<TransSeries<C>> {
        self.compatible(other)?;
        let template = if self.terms.is_empty() { other.template.clone() } else { self.template.clone() };
        let mut out = TransSeries::zero(self.algebra, self.max_degree.min(other.max_degree), template);
        out.truncation.merge(&self.truncation);
        out.truncation.merge(&other.truncation);
        for (&(d1, o1), c1) in &self.terms {
            for (&(d2, o2), c2) in &other.terms {
                let degree = d1 + d2;
                if degree > out.max_degree {
                    out.truncation.dropped_degrees += 1;
                    continue;
                }
                match out.algebra.compose(&o1, &o2) {
                    Some(offset) => {
                        let product = c1.mul(c2)?;
                        out.add_term(degree, offset, product)?;
                    }
                    None => {
                        out.truncation.dropped_offsets += 1;
                        out.truncation.dropped_mass += c1.mass() * c2.mass();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Truncated Taylor evaluation of `F` at `S − a·1`, where `a` is the
    /// function's expansion point. The degree-zero part of `S − a·1` must
    /// vanish (that is the precondition "the leading scalar equals the
    /// expansion point"); everything else is graded, so `uⁿ` starts at
    /// degree `n` and the sum below order `order` is finite and exact
    /// within the grading.
    pub fn apply_function(&self, f: &AnalyticFunction, order: u32) -> Result<TransSeries<C>> {
        let unit = TransSeries::unit(self.algebra, self.max_degree, &self.leading_template()?)?;
        let mut fluct = self.clone();
        // subtract a at (degree 0, offset 0)
        if f.expansion_point != Complex64::ZERO {
            let minus_a = self.leading_template()?.identity_like()?.scale(-f.expansion_point);
            fluct.add_term(0, [0, 0, 0], minus_a)?;
        }
        let residue: f64 = fluct
            .terms
            .iter()
            .filter(|(&(d, _), _)| d == 0)
            .map(|(_, c)| c.mass())
            .sum();
        if residue > 1e-12 {
            return Err(Error::LeadingMismatch { residue });
        }
        fluct.terms.retain(|&(d, _), _| d > 0);

        let taylor = f.taylor();
        let mut result = unit.scale(*taylor.first().unwrap_or(&Complex64::ZERO));
        result.truncation.merge(&self.truncation);
        let mut power = TransSeries::unit(self.algebra, self.max_degree, &self.leading_template()?)?;
        for coefficient in taylor.iter().take(order as usize + 1).skip(1) {
            power = power.multiply(&fluct)?;
            if power.is_empty() {
                break;
            }
            result = result.add(&power.scale(*coefficient))?;
        }
        Ok(result)
    }

    fn leading_template(&self) -> Result<C> {
        match self.terms.values().next() {
            Some(c) => Ok(c.zero_like()),
            None => Ok(self.template.clone()),
        }
    }

    /// Evaluate against the rightmost Kronecker delta at label `k`:
    /// `T_q(k) δ_{k,0}` is nonzero precisely when `k = −q`, so this returns
    /// the (degree-summed) coefficient stored at offset `−k`.
    pub fn evaluate_at_delta(&self, k_label: &IntTuple) -> C {
        self.coefficient_at(&[-k_label[0], -k_label[1], -k_label[2]])
    }

    /// Like [`TransSeries::evaluate_at_delta`] but keeping the degree
    /// grading, for feeding one evaluated object into another series.
    pub fn evaluate_at_delta_graded(&self, k_label: &IntTuple) -> BTreeMap<u32, C> {
        let Some(offset) = self.algebra.reduce(&[-k_label[0], -k_label[1], -k_label[2]]) else {
            return BTreeMap::new();
        };
        let mut out = BTreeMap::new();
        for (&(d, o), c) in &self.terms {
            if o == offset {
                out.insert(d, c.clone());
            }
        }
        out
    }

    /// JSON dump: one record per stored term.
    pub fn dump_json(&self) -> serde_json::Value
    where
        C: SeriesDump,
    {
        let items: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(&(d, o), c)| {
                let mut obj = serde_json::json!({"offset": o.to_vec(), "degree": d});
                c.dump_into(obj.as_object_mut().expect("object"));
                obj
            })
            .collect();
        serde_json::Value::Array(items)
    }
}

/// Coefficient serialization hook for series dumps.
pub trait SeriesDump {
    fn dump_into(&self, obj: &mut serde_json::Map<String, serde_json::Value>);
}

impl SeriesDump for Complex64 {
    fn dump_into(&self, obj: &mut serde_json::Map<String, serde_json::Value>) {
        obj.insert("re".into(), self.re.into());
        obj.insert("im".into(), self.im.into());
    }
}

impl SeriesDump for SparseOperator {
    fn dump_into(&self, obj: &mut serde_json::Map<String, serde_json::Value>) {
        obj.insert("operator_nnz".into(), self.nnz().into());
        obj.insert("operator_frobenius".into(), self.frobenius_norm().into());
    }
}

/// Truncated Taylor data `F(a + y) = Σ_n taylor[n]·yⁿ` around an expansion
/// point `a`, together with the exact function for oracle evaluation.
#[derive(Debug, Clone)]
pub struct AnalyticFunction {
    kind: FunctionKind,
    expansion_point: Complex64,
    taylor: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FunctionKind {
    Polynomial,
    Exp,
    Log,
    Power(f64),
    Custom,
}

impl AnalyticFunction {
    /// `F(y) = y`.
    pub fn identity() -> AnalyticFunction {
        AnalyticFunction {
            kind: FunctionKind::Polynomial,
            expansion_point: Complex64::ZERO,
            taylor: vec![Complex64::ZERO, Complex64::ONE],
        }
    }

    /// Polynomial with coefficients around zero, lowest degree first.
    pub fn polynomial(coefficients: Vec<Complex64>) -> AnalyticFunction {
        let taylor = if coefficients.is_empty() { vec![Complex64::ZERO] } else { coefficients };
        AnalyticFunction { kind: FunctionKind::Polynomial, expansion_point: Complex64::ZERO, taylor }
    }

    /// `exp` around zero, truncated at `order`.
    pub fn exp(order: u32) -> AnalyticFunction {
        let mut taylor = Vec::with_capacity(order as usize + 1);
        let mut factorial = 1.0;
        for n in 0..=order as usize {
            if n > 0 {
                factorial *= n as f64;
            }
            taylor.push(Complex64::new(1.0 / factorial, 0.0));
        }
        AnalyticFunction { kind: FunctionKind::Exp, expansion_point: Complex64::ZERO, taylor }
    }

    /// `ln` expanded around the unit leading term: `ln(1+u) = Σ (−1)^{n+1} uⁿ/n`.
    pub fn log_around_one(order: u32) -> AnalyticFunction {
        let mut taylor = vec![Complex64::ZERO];
        for n in 1..=order as usize {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            taylor.push(Complex64::new(sign / n as f64, 0.0));
        }
        AnalyticFunction { kind: FunctionKind::Log, expansion_point: Complex64::ONE, taylor }
    }

    /// `(1+u)^alpha` around the unit leading term (binomial series); covers
    /// the square root, inverse square root and geometric inverse.
    pub fn power_around_one(alpha: f64, order: u32) -> AnalyticFunction {
        let mut taylor = Vec::with_capacity(order as usize + 1);
        let mut coefficient = 1.0;
        taylor.push(Complex64::ONE);
        for n in 1..=order as usize {
            coefficient *= (alpha - (n as f64 - 1.0)) / n as f64;
            taylor.push(Complex64::new(coefficient, 0.0));
        }
        AnalyticFunction { kind: FunctionKind::Power(alpha), expansion_point: Complex64::ONE, taylor }
    }

    pub fn custom(expansion_point: Complex64, taylor: Vec<Complex64>) -> AnalyticFunction {
        AnalyticFunction { kind: FunctionKind::Custom, expansion_point, taylor }
    }

    pub fn expansion_point(&self) -> Complex64 {
        self.expansion_point
    }

    pub fn taylor(&self) -> &[Complex64] {
        &self.taylor
    }

    /// Exact scalar evaluation (true function where one exists, Taylor sum
    /// otherwise); this is what real-space oracles apply pointwise.
    pub fn eval_exact(&self, y: Complex64) -> Complex64 {
        match self.kind {
            FunctionKind::Polynomial => {
                let mut acc = Complex64::ZERO;
                for c in self.taylor.iter().rev() {
                    acc = acc * y + c;
                }
                acc
            }
            FunctionKind::Exp => y.exp(),
            FunctionKind::Log => y.ln(),
            FunctionKind::Power(alpha) => y.powf(alpha),
            FunctionKind::Custom => {
                let u = y - self.expansion_point;
                let mut acc = Complex64::ZERO;
                for c in self.taylor.iter().rev() {
                    acc = acc * u + c;
                }
                acc
            }
        }
    }
}

/// Scalar Fourier-coefficient series `Σ_q f̃_q T_{−q}(k)` for a 1D mode
/// list `(q, f̃_q)`; every term enters at fluctuation degree one.
pub fn fourier_series(
    algebra: OffsetAlgebra,
    max_degree: u32,
    coefficients: &[(i32, Complex64)],
) -> Result<TransSeries<Complex64>> {
    let mut s = TransSeries::zero(algebra, max_degree, Complex64::ZERO);
    for &(q, amp) in coefficients {
        s.add_term(1, [-q, 0, 0], amp)?;
    }
    Ok(s)
}

/// Outcome of one Fourier-composition check.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub max_abs_error: f64,
    /// Largest order-to-order movement of the series-path coefficients; the
    /// check is flagged divergent when this dominates the error budget.
    pub order_delta: f64,
    pub diverged: bool,
    pub compared_coefficients: usize,
}

/// Check the composition rule two ways: the translation-series path
/// `[F(Σ_q f̃_q T_{−q}(k))] δ_{k,0}` versus a real-space oracle that samples
/// `f` on a uniform grid, applies `F` pointwise and transforms back.
pub fn lemma_check(
    f: &AnalyticFunction,
    f_coeffs: &TransSeries<Complex64>,
    grid_points: usize,
    order: u32,
) -> Result<LemmaReport> {
    if grid_points < 4 {
        return Err(Error::Config("lemma oracle needs at least 4 grid points".into()));
    }
    let composed = f_coeffs.apply_function(f, order)?;
    let previous = if order > 0 { Some(f_coeffs.apply_function(f, order - 1)?) } else { None };

    // real-space oracle on the unit circle
    let g = grid_points;
    let mut samples = vec![Complex64::ZERO; g];
    for (j, sample) in samples.iter_mut().enumerate() {
        let x = 2.0 * std::f64::consts::PI * j as f64 / g as f64;
        let mut value = Complex64::ZERO;
        for (_, offset, amp) in f_coeffs.terms() {
            let q = -offset[0]; // stored at offset −q
            value += amp * Complex64::new(0.0, q as f64 * x).exp();
        }
        *sample = f.eval_exact(value);
    }
    let half = (g / 2) as i32;
    let mut max_abs_error = 0.0f64;
    let mut order_delta = 0.0f64;
    let mut compared = 0usize;
    for k in -(half - 1)..=(half - 1) {
        let mut oracle = Complex64::ZERO;
        for (j, sample) in samples.iter().enumerate() {
            let x = 2.0 * std::f64::consts::PI * j as f64 / g as f64;
            oracle += sample * Complex64::new(0.0, -(k as f64) * x).exp();
        }
        oracle /= g as f64;
        let series = composed.evaluate_at_delta(&[k, 0, 0]);
        max_abs_error = max_abs_error.max((series - oracle).norm());
        if let Some(prev) = &previous {
            order_delta = order_delta.max((series - prev.evaluate_at_delta(&[k, 0, 0])).norm());
        }
        compared += 1;
    }
    let diverged = order_delta > 1e-8;
    Ok(LemmaReport { max_abs_error, order_delta, diverged, compared_coefficients: compared })
}

/// Seeded randomized lemma instances: polynomial `F` of bounded degree,
/// real `f` with a bounded number of Fourier modes and amplitudes.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaSuiteReport {
    pub instances: usize,
    pub max_abs_error: f64,
    pub diverged_instances: usize,
}

pub fn lemma_random_suite(
    seed: u64,
    instances: usize,
    max_poly_degree: usize,
    max_modes: usize,
    max_amplitude: f64,
    grid_points: usize,
    order: u32,
) -> Result<LemmaSuiteReport> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let algebra = OffsetAlgebra::Window { max_offset: 64 };
    let mut max_abs_error = 0.0f64;
    let mut diverged = 0usize;
    for _ in 0..instances {
        let degree = rng.gen_range(1..=max_poly_degree);
        let coefficients: Vec<Complex64> =
            (0..=degree).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let f = AnalyticFunction::polynomial(coefficients);

        // real f: conjugate-symmetric mode pairs, optionally a zero mode
        let mut modes: Vec<(i32, Complex64)> = Vec::new();
        let mut budget = rng.gen_range(1..=max_modes);
        if budget % 2 == 1 {
            modes.push((0, Complex64::new(rng.gen_range(-max_amplitude..max_amplitude), 0.0)));
            budget -= 1;
        }
        let mut used: Vec<i32> = Vec::new();
        while budget >= 2 {
            let q = loop {
                let q = rng.gen_range(1..=5);
                if !used.contains(&q) {
                    break q;
                }
            };
            used.push(q);
            let amp = Complex64::new(
                rng.gen_range(-max_amplitude..max_amplitude) / 2f64.sqrt(),
                rng.gen_range(-max_amplitude..max_amplitude) / 2f64.sqrt(),
            );
            modes.push((q, amp));
            modes.push((-q, amp.conj()));
            budget -= 2;
        }
        let series = fourier_series(algebra, order.max(degree as u32), &modes)?;
        let report = lemma_check(&f, &series, grid_points, order.max(degree as u32))?;
        max_abs_error = max_abs_error.max(report.max_abs_error);
        if report.diverged {
            diverged += 1;
        }
    }
    Ok(LemmaSuiteReport { instances, max_abs_error, diverged_instances: diverged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{SpaceId, SparseOperator};

    fn window(max_offset: i32) -> OffsetAlgebra {
        OffsetAlgebra::Window { max_offset }
    }

    fn scalar_series(max_degree: u32) -> TransSeries<Complex64> {
        TransSeries::zero(window(16), max_degree, Complex64::ZERO)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn translations_compose_offsets() {
        let mut ta = scalar_series(4);
        ta.add_term(1, [2, 0, 0], c(1.0, 0.0)).unwrap();
        let mut tb = scalar_series(4);
        tb.add_term(1, [3, 0, 0], c(1.0, 0.0)).unwrap();
        let product = ta.multiply(&tb).unwrap();
        assert_eq!(product.coefficient_at(&[5, 0, 0]), c(1.0, 0.0));
        assert_eq!(product.evaluate_at_delta(&[-5, 0, 0]), c(1.0, 0.0));
        assert_eq!(product.term_count(), 1);
    }

    #[test]
    fn scalar_product_matches_direct_convolution() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..8 {
            let a: Vec<(i32, Complex64)> =
                (-2..=2).map(|q| (q, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
            let b: Vec<(i32, Complex64)> =
                (-2..=2).map(|q| (q, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
            let mut sa = scalar_series(8);
            let mut sb = scalar_series(8);
            for &(q, z) in &a {
                sa.add_term(1, [q, 0, 0], z).unwrap();
            }
            for &(q, z) in &b {
                sb.add_term(1, [q, 0, 0], z).unwrap();
            }
            let product = sa.multiply(&sb).unwrap();
            for out in -4..=4 {
                let mut direct = Complex64::ZERO;
                for &(qa, za) in &a {
                    for &(qb, zb) in &b {
                        if qa + qb == out {
                            direct += za * zb;
                        }
                    }
                }
                assert!((product.coefficient_at(&[out, 0, 0]) - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn operator_coefficients_keep_their_order() {
        let space = SpaceId::new(2, 99);
        let mut a = SparseOperator::zero(space, space);
        a.insert_add(0, 1, c(1.0, 0.0));
        let mut b = SparseOperator::zero(space, space);
        b.insert_add(1, 0, c(1.0, 0.0));
        let ab = a.compose(&b).unwrap();
        let ba = b.compose(&a).unwrap();
        assert!(ab.max_abs_diff(&ba).unwrap() > 0.5, "A and B must not commute");

        let algebra = window(8);
        let mut sa = TransSeries::zero(algebra, 4, SparseOperator::zero(space, space));
        sa.add_term(1, [1, 0, 0], a).unwrap();
        let mut sb = TransSeries::zero(algebra, 4, SparseOperator::zero(space, space));
        sb.add_term(1, [2, 0, 0], b).unwrap();
        let product = sa.multiply(&sb).unwrap();
        let coefficient = product.coefficient_at(&[3, 0, 0]);
        assert_eq!(coefficient.max_abs_diff(&ab).unwrap(), 0.0);
        assert!(coefficient.max_abs_diff(&ba).unwrap() > 0.5);
    }

    #[test]
    fn identity_function_returns_the_series() {
        let mut s = scalar_series(6);
        s.add_term(1, [1, 0, 0], c(0.25, -0.5)).unwrap();
        s.add_term(1, [-2, 0, 0], c(0.0, 0.125)).unwrap();
        let out = s.apply_function(&AnalyticFunction::identity(), 6).unwrap();
        for k in -4..=4 {
            assert!((out.coefficient_at(&[k, 0, 0]) - s.coefficient_at(&[k, 0, 0])).norm() < 1e-15);
        }
    }

    #[test]
    fn square_of_single_mode_lands_at_doubled_offset() {
        let mut s = scalar_series(6);
        let a = c(0.3, 0.1);
        s.add_term(1, [-2, 0, 0], a).unwrap(); // a·T_{q0}, q0 = −2... offset −2
        let squared = s.apply_function(&AnalyticFunction::polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]), 6).unwrap();
        assert!((squared.coefficient_at(&[-4, 0, 0]) - a * a).norm() < 1e-15);
        assert_eq!(squared.term_count(), 1);
    }

    #[test]
    fn exp_of_zero_is_the_unit_series() {
        let s = scalar_series(6);
        let out = s.apply_function(&AnalyticFunction::exp(6), 6).unwrap();
        assert!((out.coefficient_at(&[0, 0, 0]) - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(out.term_count(), 1);
    }

    #[test]
    fn leading_mismatch_is_an_error() {
        let mut s = scalar_series(4);
        s.add_term(0, [0, 0, 0], c(0.5, 0.0)).unwrap(); // degree-0 junk ≠ 1
        let err = s.apply_function(&AnalyticFunction::log_around_one(4), 4);
        assert!(matches!(err, Err(Error::LeadingMismatch { .. })));
    }

    #[test]
    fn delta_evaluation_rules() {
        // S = f̃_{q0}·T_{−q0} with q0 = 3: evaluate at k = q0 gives f̃_{q0}
        let mut s = scalar_series(4);
        let amp = c(0.7, -0.2);
        s.add_term(1, [-3, 0, 0], amp).unwrap();
        assert_eq!(s.evaluate_at_delta(&[3, 0, 0]), amp);
        assert_eq!(s.evaluate_at_delta(&[1, 0, 0]), Complex64::ZERO);
    }

    #[test]
    fn delta_evaluation_is_linear() {
        let mut s1 = scalar_series(4);
        s1.add_term(1, [2, 0, 0], c(0.5, 0.25)).unwrap();
        let mut s2 = scalar_series(4);
        s2.add_term(1, [2, 0, 0], c(-1.0, 1.0)).unwrap();
        let alpha = c(2.0, -0.5);
        let beta = c(0.0, 3.0);
        let combined = s1.scale(alpha).add(&s2.scale(beta)).unwrap();
        let lhs = combined.evaluate_at_delta(&[-2, 0, 0]);
        let rhs = s1.evaluate_at_delta(&[-2, 0, 0]) * alpha + s2.evaluate_at_delta(&[-2, 0, 0]) * beta;
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn associativity_is_exact_on_integer_coefficients() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..16 {
            let mut build = || {
                let mut s = scalar_series(8);
                for _ in 0..4 {
                    let q = rng.gen_range(-3..=3);
                    let re = rng.gen_range(-3..=3) as f64;
                    let im = rng.gen_range(-3..=3) as f64;
                    s.add_term(1, [q, 0, 0], c(re, im)).unwrap();
                }
                s
            };
            let s1 = build();
            let s2 = build();
            let s3 = build();
            let left = s1.multiply(&s2).unwrap().multiply(&s3).unwrap();
            let right = s1.multiply(&s2.multiply(&s3).unwrap()).unwrap();
            for k in -8..=8 {
                assert_eq!(left.coefficient_at(&[k, 0, 0]), right.coefficient_at(&[k, 0, 0]));
            }
        }
    }

    #[test]
    fn window_truncation_is_tallied_not_silent() {
        let mut s = TransSeries::zero(window(2), 8, Complex64::ZERO);
        s.add_term(1, [2, 0, 0], c(1.0, 0.0)).unwrap();
        let squared = s.multiply(&s).unwrap();
        assert!(squared.is_empty());
        assert_eq!(squared.truncation().dropped_offsets, 1);
        assert!(squared.truncation().dropped_mass > 0.9);
    }

    #[test]
    fn modular_offsets_close_exactly() {
        let algebra = OffsetAlgebra::Modular { period: [3, 1, 1] };
        let mut s = TransSeries::zero(algebra, 8, Complex64::ZERO);
        s.add_term(1, [1, 0, 0], c(1.0, 0.0)).unwrap();
        let squared = s.multiply(&s).unwrap();
        assert_eq!(squared.coefficient_at(&[-1, 0, 0]), c(1.0, 0.0));
        assert_eq!(squared.truncation().dropped_offsets, 0);
    }

    #[test]
    fn lemma_identity_and_square() {
        let algebra = window(32);
        let series = fourier_series(algebra, 8, &[(1, c(0.2, 0.1)), (-1, c(0.2, -0.1))]).unwrap();
        let id = lemma_check(&AnalyticFunction::identity(), &series, 64, 8).unwrap();
        assert!(id.max_abs_error < 1e-12);

        let sq = AnalyticFunction::polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let single = fourier_series(algebra, 8, &[(2, c(0.25, 0.0)), (-2, c(0.25, 0.0))]).unwrap();
        let report = lemma_check(&sq, &single, 64, 8).unwrap();
        assert!(report.max_abs_error < 1e-12);
    }

    #[test]
    fn lemma_exp_small_amplitudes() {
        let algebra = window(64);
        let series = fourier_series(algebra, 12, &[(1, c(0.05, 0.0)), (-1, c(0.05, 0.0))]).unwrap();
        let report = lemma_check(&AnalyticFunction::exp(12), &series, 128, 12).unwrap();
        assert!(report.max_abs_error < 1e-9, "error {}", report.max_abs_error);
    }

    #[test]
    fn lemma_randomized_suite_is_tight_and_deterministic() {
        let a = lemma_random_suite(7, 20, 6, 5, 0.3, 128, 10).unwrap();
        let b = lemma_random_suite(7, 20, 6, 5, 0.3, 128, 10).unwrap();
        assert!(a.max_abs_error < 1e-9);
        assert_eq!(a.max_abs_error, b.max_abs_error);
    }
}
