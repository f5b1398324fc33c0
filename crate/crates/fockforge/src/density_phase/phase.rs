//! The phase functional `Φ[ρ]` and its high-density fermi solution.
//!
//! In the high-density limit the functional is linear in the density,
//! `Φ([ρ]; x) = Σ_{q≠0} ρ_q U₀(q) e^{−iq·x}`, with coefficients
//!
//! ```text
//! U₀(q) = (1/N)·√( (θ(k_f − |q|) − w₁(q)) / w₂(q) )
//! w₁(q) = (1/(4·N·ε_q²)) Σ_k (k·q/m)² Λ_k(−q)²         ε_q = q²/(2m)
//! w₂(q) = (1/N) Σ_k Λ_k(−q)²
//! Λ_k(q) = n_F(k + q/2)·(1 − n_F(k − q/2))
//! ```
//!
//! summed over the grid momenta. The dispersion `ε_q = q²/(2m)` is the free
//! one (the only choice consistent with a free Fermi sea); note it makes the
//! mass drop out of `w₁` altogether. Points where `w₂` vanishes or the
//! radicand is negative leave `U₀` undefined: they are recorded and
//! reported, never clamped, and operator builders treat an undefined
//! coefficient as zero while flagging the substitution.
//!
//! The sharp occupation `n_F(p) = θ(k_f − |p|)` uses a strict inequality;
//! pick `k_f` strictly between shells.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::Statistics;
use crate::lattice::{GridSpec, IntTuple, Spin, MAX_DIM};

/// Inputs of the high-density fermi solution.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FermiParams {
    /// Fermi momentum (physical units).
    pub k_f: f64,
    /// Particle mass entering the dispersion `ε_q = q²/(2m)`.
    pub mass: f64,
    /// Particle number `N` appearing in the `1/N` normalizations.
    pub n_particles: u32,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseForm {
    /// `Φ ≡ 0`: the bose high-density solution.
    Zero,
    /// Linear in the density with tabulated `U₀(q)`: the fermi
    /// high-density solution.
    LinearInRho,
    /// Linear with user-supplied coefficients.
    Custom,
}

/// One tabulated momentum of the high-density solution.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseRow {
    pub q: IntTuple,
    pub w1: f64,
    pub w2: f64,
    pub radicand: f64,
    pub u0: Option<f64>,
    pub undefined_reason: Option<String>,
}

/// A linear-in-density phase functional: coefficients `U₀(q)` on the grid
/// (q = 0 excluded), plus whatever produced them.
#[derive(Debug, Clone)]
pub struct PhaseFunctional {
    form: PhaseForm,
    u0: std::collections::BTreeMap<IntTuple, f64>,
    undefined: std::collections::BTreeMap<IntTuple, String>,
    rows: Vec<PhaseRow>,
    params: Option<FermiParams>,
}

impl PhaseFunctional {
    /// `Φ ≡ 0` (bose high-density limit).
    pub fn zero() -> PhaseFunctional {
        PhaseFunctional {
            form: PhaseForm::Zero,
            u0: Default::default(),
            undefined: Default::default(),
            rows: Vec::new(),
            params: None,
        }
    }

    /// Linear functional with hand-supplied coefficients (q = 0 entries are
    /// rejected).
    pub fn custom(grid: &GridSpec, coefficients: &[(IntTuple, f64)]) -> Result<PhaseFunctional> {
        let mut u0 = std::collections::BTreeMap::new();
        for (q, value) in coefficients {
            let reduced = grid
                .reduce(q)
                .ok_or_else(|| Error::UnsupportedPhase(format!("coefficient momentum {q:?} off grid")))?;
            if reduced == [0, 0, 0] {
                return Err(Error::UnsupportedPhase("U₀ is defined for q ≠ 0 only".into()));
            }
            u0.insert(reduced, *value);
        }
        Ok(PhaseFunctional {
            form: PhaseForm::Custom,
            u0,
            undefined: Default::default(),
            rows: Vec::new(),
            params: None,
        })
    }

    pub fn form(&self) -> PhaseForm {
        self.form
    }

    pub fn params(&self) -> Option<&FermiParams> {
        self.params.as_ref()
    }

    pub fn rows(&self) -> &[PhaseRow] {
        &self.rows
    }

    /// Defined coefficient at a reduced momentum; `None` covers both "not
    /// tabulated" and "undefined radicand".
    pub fn u0(&self, q: &IntTuple) -> Option<f64> {
        self.u0.get(q).copied()
    }

    pub fn undefined(&self) -> impl Iterator<Item = (&IntTuple, &str)> {
        self.undefined.iter().map(|(q, reason)| (q, reason.as_str()))
    }

    pub fn undefined_count(&self) -> usize {
        self.undefined.len()
    }

    pub fn defined_count(&self) -> usize {
        self.u0.len()
    }

    /// Evaluate `Φ([ρ]; x, σ)` on a c-number particle configuration, with
    /// optional formal deletions (`ρ_q` shifted by `−e^{iq·y}` per deleted
    /// particle of the matching spin).
    pub fn evaluate(
        &self,
        grid: &GridSpec,
        config: &ParticleConfig,
        deletions: &[(PointSpin, ())],
        x: [f64; MAX_DIM],
        sigma: Spin,
    ) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (&q, &u0) in &self.u0 {
            let q_phys = grid.momentum(&q);
            let mut rho_q = Complex64::ZERO;
            for point in &config.points {
                if point.spin == sigma {
                    rho_q += phase_factor(&q_phys, &point.position);
                }
            }
            for (deleted, ()) in deletions {
                if deleted.spin == sigma {
                    rho_q -= phase_factor(&q_phys, &deleted.position);
                }
            }
            let wave = phase_factor(&q_phys, &x).conj(); // e^{−i q·x}
            acc += u0 * rho_q * wave;
        }
        acc
    }
}

/// A particle at a position with a spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpin {
    pub position: [f64; MAX_DIM],
    pub spin: Spin,
}

/// A c-number occupation snapshot: point particles in the box.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParticleConfig {
    pub points: Vec<PointSpin>,
}

fn phase_factor(q_phys: &[f64; MAX_DIM], y: &[f64; MAX_DIM]) -> Complex64 {
    let dot: f64 = q_phys.iter().zip(y).map(|(a, b)| a * b).sum();
    Complex64::new(0.0, dot).exp()
}

/// Sharp Fermi occupation `θ(k_f − |p|)` with strict inequality.
fn n_fermi(p: &[f64; MAX_DIM], k_f: f64) -> f64 {
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < k_f {
        1.0
    } else {
        0.0
    }
}

/// Particle–hole weight `Λ_k(q) = n_F(k + q/2)(1 − n_F(k − q/2))`.
pub fn lambda_weight(k: &[f64; MAX_DIM], q: &[f64; MAX_DIM], k_f: f64) -> f64 {
    let plus = [k[0] + q[0] / 2.0, k[1] + q[1] / 2.0, k[2] + q[2] / 2.0];
    let minus = [k[0] - q[0] / 2.0, k[1] - q[1] / 2.0, k[2] - q[2] / 2.0];
    n_fermi(&plus, k_f) * (1.0 - n_fermi(&minus, k_f))
}

/// Tabulate the high-density fermi solution over the grid.
pub fn build_phase_hd(params: &FermiParams) -> Result<PhaseFunctional> {
    params.grid.validate()?;
    if !(params.k_f > 0.0) {
        return Err(Error::UnsupportedPhase(format!("k_f must be > 0, got {}", params.k_f)));
    }
    if !(params.mass > 0.0) {
        return Err(Error::UnsupportedPhase(format!("mass must be > 0, got {}", params.mass)));
    }
    if params.n_particles == 0 {
        return Err(Error::UnsupportedPhase("N must be >= 1".into()));
    }
    let grid = &params.grid;
    let tuples = grid.tuples();
    let sea: usize = tuples.iter().filter(|n| n_fermi(&grid.momentum(n), params.k_f) > 0.0).count();
    if sea == 0 {
        return Err(Error::UnsupportedPhase("the Fermi sea contains no grid point".into()));
    }
    let n = params.n_particles as f64;
    let mass = params.mass;
    let mut u0 = std::collections::BTreeMap::new();
    let mut undefined = std::collections::BTreeMap::new();
    let mut rows = Vec::new();
    for q in &tuples {
        if *q == [0, 0, 0] {
            continue;
        }
        let q_phys = grid.momentum(q);
        let q_sq: f64 = q_phys.iter().map(|x| x * x).sum();
        let minus_q = [-q_phys[0], -q_phys[1], -q_phys[2]];
        let epsilon = q_sq / (2.0 * mass);
        let mut w1 = 0.0;
        let mut w2 = 0.0;
        for k in &tuples {
            let k_phys = grid.momentum(k);
            let weight = lambda_weight(&k_phys, &minus_q, params.k_f);
            let weight_sq = weight * weight;
            let k_dot_q: f64 = k_phys.iter().zip(&q_phys).map(|(a, b)| a * b).sum();
            w1 += (k_dot_q / mass).powi(2) * weight_sq;
            w2 += weight_sq;
        }
        w1 /= 4.0 * n * epsilon * epsilon;
        w2 /= n;
        let q_norm: f64 = q_sq.sqrt();
        let theta = if q_norm < params.k_f { 1.0 } else { 0.0 };
        let mut row = PhaseRow { q: *q, w1, w2, radicand: f64::NAN, u0: None, undefined_reason: None };
        if w2 == 0.0 {
            row.undefined_reason = Some("w2 = 0".into());
            undefined.insert(*q, "w2 = 0".to_string());
        } else {
            let radicand = (theta - w1) / w2;
            row.radicand = radicand;
            if radicand < 0.0 {
                row.undefined_reason = Some("negative radicand".into());
                undefined.insert(*q, "negative radicand".to_string());
            } else {
                let value = radicand.sqrt() / n;
                row.u0 = Some(value);
                u0.insert(*q, value);
            }
        }
        rows.push(row);
    }
    Ok(PhaseFunctional { form: PhaseForm::LinearInRho, u0, undefined, rows, params: Some(*params) })
}

/// Result of one evaluation of the deletion recursion.
#[derive(Debug, Clone, Serialize)]
pub struct RecursionOutcome {
    /// The four-term combination before subtracting `mπ`.
    pub raw_re: f64,
    pub raw_im: f64,
    /// Nearest integer to `Re(raw)/π`.
    pub m: i64,
    /// `raw − mπ`.
    pub residual_re: f64,
    pub residual_im: f64,
    /// Whether `m` has the statistics-mandated parity (odd for fermions,
    /// even for bosons).
    pub parity_ok: bool,
}

impl RecursionOutcome {
    pub fn raw(&self) -> Complex64 {
        Complex64::new(self.raw_re, self.raw_im)
    }

    pub fn residual(&self) -> Complex64 {
        Complex64::new(self.residual_re, self.residual_im)
    }
}

/// Evaluate the deletion recursion
/// `Φ([ρ−δ_{x'σ'}]; xσ) + Φ([ρ]; x'σ') − Φ([ρ]; xσ) − Φ([ρ−δ_{xσ}]; x'σ')`
/// on a configuration, returning the residual after removing the nearest
/// `mπ` and the inferred `m` with its parity verdict.
pub fn recursion_residual(
    phase: &PhaseFunctional,
    grid: &GridSpec,
    config: &ParticleConfig,
    x: [f64; MAX_DIM],
    x_prime: [f64; MAX_DIM],
    sigma: Spin,
    sigma_prime: Spin,
    statistics: Statistics,
) -> RecursionOutcome {
    let delete_xp = [(PointSpin { position: x_prime, spin: sigma_prime }, ())];
    let delete_x = [(PointSpin { position: x, spin: sigma }, ())];
    let term1 = phase.evaluate(grid, config, &delete_xp, x, sigma);
    let term2 = phase.evaluate(grid, config, &[], x_prime, sigma_prime);
    let term3 = phase.evaluate(grid, config, &[], x, sigma);
    let term4 = phase.evaluate(grid, config, &delete_x, x_prime, sigma_prime);
    let raw = term1 + term2 - term3 - term4;
    let m = (raw.re / std::f64::consts::PI).round() as i64;
    let residual = raw - Complex64::new(m as f64 * std::f64::consts::PI, 0.0);
    let parity_ok = match statistics {
        Statistics::Fermi => m.rem_euclid(2) == 1,
        Statistics::Bose => m.rem_euclid(2) == 0,
    };
    RecursionOutcome {
        raw_re: raw.re,
        raw_im: raw.im,
        m,
        residual_re: residual.re,
        residual_im: residual.im,
        parity_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{tuple1, BoundaryMode};
    use rand::Rng;
    use rand::SeedableRng;

    fn grid1d(n_max: i32) -> GridSpec {
        GridSpec::new(1, 2.0 * std::f64::consts::PI, n_max, BoundaryMode::Wrap).unwrap()
    }

    fn params_three_point() -> FermiParams {
        // k_f = 1.5 in grid-step units covers n ∈ {−1, 0, 1}
        let grid = grid1d(8);
        FermiParams { k_f: 1.5 * grid.momentum_step(), mass: 1.0, n_particles: 3, grid }
    }

    #[test]
    fn lambda_vanishes_at_zero_transfer() {
        let grid = grid1d(8);
        let k_f = 1.5 * grid.momentum_step();
        for n in grid.tuples() {
            let k = grid.momentum(&n);
            assert_eq!(lambda_weight(&k, &[0.0; 3], k_f), 0.0);
        }
    }

    #[test]
    fn tables_match_independent_sums() {
        let params = params_three_point();
        let phase = build_phase_hd(&params).unwrap();
        let grid = &params.grid;
        let step = grid.momentum_step();
        let n = params.n_particles as f64;
        // independent brute-force loop, written directly from the formulas
        for row in phase.rows() {
            let q = row.q[0] as f64 * step;
            let mut w1 = 0.0;
            let mut w2 = 0.0;
            for nk in -8..=8 {
                let k = nk as f64 * step;
                let nf = |p: f64| if p.abs() < params.k_f { 1.0 } else { 0.0 };
                let lam = nf(k - q / 2.0) * (1.0 - nf(k + q / 2.0));
                w1 += (k * q / params.mass).powi(2) * lam * lam;
                w2 += lam * lam;
            }
            let eps = q * q / (2.0 * params.mass);
            w1 /= 4.0 * n * eps * eps;
            w2 /= n;
            assert!((row.w1 - w1).abs() < 1e-12, "w1 at q={:?}", row.q);
            assert!((row.w2 - w2).abs() < 1e-12, "w2 at q={:?}", row.q);
            if w2 > 0.0 {
                let theta = if q.abs() < params.k_f { 1.0 } else { 0.0 };
                let radicand = (theta - w1) / w2;
                match row.u0 {
                    Some(u0) => assert!((u0 - radicand.sqrt() / n).abs() < 1e-12),
                    None => assert!(radicand < 0.0),
                }
            }
        }
    }

    #[test]
    fn undefined_points_are_reported_not_clamped() {
        let phase = build_phase_hd(&params_three_point()).unwrap();
        // outside the sea θ = 0 and w1 > 0 makes the radicand negative
        assert!(phase.undefined_count() > 0);
        for (q, _) in phase.undefined() {
            assert!(phase.u0(q).is_none());
        }
        for row in phase.rows() {
            if row.undefined_reason.is_some() {
                assert!(row.u0.is_none());
            }
        }
    }

    #[test]
    fn bose_form_is_identically_zero() {
        let phase = PhaseFunctional::zero();
        assert_eq!(phase.form(), PhaseForm::Zero);
        let grid = grid1d(2);
        let config = ParticleConfig {
            points: vec![PointSpin { position: [1.0, 0.0, 0.0], spin: Spin::Up }],
        };
        let value = phase.evaluate(&grid, &config, &[], [0.3, 0.0, 0.0], Spin::Up);
        assert_eq!(value, Complex64::ZERO);
    }

    #[test]
    fn evaluation_is_linear_in_the_density() {
        let phase = build_phase_hd(&params_three_point()).unwrap();
        let grid = grid1d(8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut random_config = |count: usize| ParticleConfig {
            points: (0..count)
                .map(|_| PointSpin {
                    position: [rng.gen_range(0.0..grid.box_length), 0.0, 0.0],
                    spin: Spin::Up,
                })
                .collect(),
        };
        let a = random_config(2);
        let b = random_config(3);
        let mut joint = a.clone();
        joint.points.extend(b.points.iter().copied());
        let x = [0.7, 0.0, 0.0];
        let lhs = phase.evaluate(&grid, &joint, &[], x, Spin::Up);
        let rhs = phase.evaluate(&grid, &a, &[], x, Spin::Up)
            + phase.evaluate(&grid, &b, &[], x, Spin::Up);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn recursion_reduces_to_the_closed_form() {
        let params = params_three_point();
        let phase = build_phase_hd(&params).unwrap();
        let grid = &params.grid;
        let step = grid.momentum_step();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let config = ParticleConfig {
            points: (0..3)
                .map(|_| PointSpin {
                    position: [rng.gen_range(0.0..grid.box_length), 0.0, 0.0],
                    spin: Spin::Up,
                })
                .collect(),
        };
        for _ in 0..20 {
            let x = [rng.gen_range(0.0..grid.box_length), 0.0, 0.0];
            let xp = [rng.gen_range(0.0..grid.box_length), 0.0, 0.0];
            let outcome = recursion_residual(
                &phase, grid, &config, x, xp, Spin::Up, Spin::Up, Statistics::Fermi,
            );
            // Σ_q U₀(q)(e^{iq(x−x')} − e^{−iq(x−x')}), defined coefficients only
            let mut closed = Complex64::ZERO;
            for row in phase.rows() {
                if let Some(u0) = row.u0 {
                    let q = row.q[0] as f64 * step;
                    let d = x[0] - xp[0];
                    closed += u0
                        * (Complex64::new(0.0, q * d).exp() - Complex64::new(0.0, -q * d).exp());
                }
            }
            assert!((outcome.raw() - closed).norm() < 1e-12);
            // different spins: the deletion deltas vanish and the Φ terms cancel
            let cross = recursion_residual(
                &phase, grid, &config, x, xp, Spin::Up, Spin::Down, Statistics::Fermi,
            );
            assert!(cross.raw().norm() < 1e-12);
        }
    }

    #[test]
    fn recursion_degenerate_point_vanishes() {
        let params = params_three_point();
        let phase = build_phase_hd(&params).unwrap();
        let config = ParticleConfig {
            points: vec![PointSpin { position: [2.0, 0.0, 0.0], spin: Spin::Up }],
        };
        let x = [1.25, 0.0, 0.0];
        let outcome = recursion_residual(
            &phase, &params.grid, &config, x, x, Spin::Up, Spin::Up, Statistics::Fermi,
        );
        assert!(outcome.raw().norm() < 1e-14);
    }

    #[test]
    fn bose_zero_phase_gives_even_m() {
        let phase = PhaseFunctional::zero();
        let grid = grid1d(4);
        let config = ParticleConfig { points: vec![] };
        let outcome = recursion_residual(
            &phase,
            &grid,
            &config,
            [0.1, 0.0, 0.0],
            [2.4, 0.0, 0.0],
            Spin::Up,
            Spin::Up,
            Statistics::Bose,
        );
        assert_eq!(outcome.m, 0);
        assert!(outcome.parity_ok);
        assert_eq!(outcome.residual().norm(), 0.0);
    }
}
