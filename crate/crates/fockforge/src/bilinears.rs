//! Observable bilinears: density, current, number operator and their
//! fluctuation forms.
//!
//! In momentum space the density is `ρ(k,s) = Σ_q c†_{q+k,s} c_{q,s}` and is
//! dimensionless; `ρ(0,s)` is the number operator `N_s`. The current
//! component carries physical units (momentum step `2π/L`):
//!
//! `j_c(k,s) = Σ_q ((q + q')/2)_c · c†_{q',s} c_{q,s}`, with `q' = q + k`.
//!
//! The midpoint amplitude equals the textbook `(q + k/2)_c` whenever the
//! shift stays inside the grid, and keeps the hermiticity pairing
//! `j(k)† = j(−k)` exact when wrap mode folds `q + k` back into range. The
//! first-quantized equivalence suite pins this convention against the dense
//! tensor-space action in [`crate::reference`].
//!
//! Boundary handling follows the basis grid: truncate drops out-of-range
//! terms, wrap reduces them modulo the grid period.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilate_occ, create_occ, FockBasis, SparseOperator};
use crate::lattice::{mode_index, momentum_shift, IntTuple, Mode, Spin};

/// Descriptor for one bilinear, as used by configs and the export CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BilinearSpec {
    Density { k: IntTuple, spin: Spin },
    CurrentComponent { k: IntTuple, spin: Spin, component: usize },
}

impl BilinearSpec {
    pub fn build(&self, basis: &FockBasis) -> Result<SparseOperator> {
        match self {
            BilinearSpec::Density { k, spin } => build_density(basis, k, *spin),
            BilinearSpec::CurrentComponent { k, spin, component } => {
                build_current(basis, k, *spin, *component)
            }
        }
    }
}

fn check_transfer(basis: &FockBasis, k: &IntTuple) -> Result<IntTuple> {
    let grid = basis.grid();
    for axis in grid.dim..crate::lattice::MAX_DIM {
        if k[axis] != 0 {
            return Err(Error::ModeOutOfRange(format!(
                "momentum transfer {k:?} uses axes beyond dim {}",
                grid.dim
            )));
        }
    }
    match grid.boundary_mode {
        crate::lattice::BoundaryMode::Wrap => Ok(grid.wrap_tuple(k)),
        crate::lattice::BoundaryMode::Truncate => {
            let doubled = 2 * grid.n_max;
            if (0..grid.dim).any(|axis| k[axis].abs() > doubled) {
                return Err(Error::ModeOutOfRange(format!(
                    "momentum transfer {k:?} outside the doubled grid range ±{doubled}"
                )));
            }
            Ok(*k)
        }
    }
}

/// Shared loop for number-conserving one-body bilinears
/// `Σ_q amp(q, q+k) c†_{q+k,s} c_{q,s}`.
fn build_one_body<F>(basis: &FockBasis, k: &IntTuple, spin: Spin, amp: F) -> Result<SparseOperator>
where
    F: Fn(&Mode, &Mode) -> f64,
{
    let k = check_transfer(basis, k)?;
    let grid = basis.grid();
    let statistics = basis.statistics();
    let cap = basis.boson_cap();
    let mut op = SparseOperator::zero(basis.space(), basis.space());
    let spin_modes: Vec<(usize, Mode)> = basis
        .modes()
        .iter()
        .enumerate()
        .filter(|(_, m)| m.spin == spin)
        .map(|(i, m)| (i, *m))
        .collect();
    for (col, occ) in basis.states().iter().enumerate() {
        for &(slot, mode) in &spin_modes {
            if occ[slot] == 0 {
                continue;
            }
            let Some(target) = momentum_shift(&mode, &k, grid) else {
                continue;
            };
            let weight = amp(&mode, &target);
            if weight == 0.0 {
                continue;
            }
            let target_slot = mode_index(grid, &target).expect("shifted mode is on the grid");
            if target_slot == slot {
                // c†_q c_q counts the occupation.
                op.insert_add(col, col, Complex64::new(weight * occ[slot] as f64, 0.0));
                continue;
            }
            let Some((lowered, a1)) = annihilate_occ(occ, slot, statistics) else {
                continue;
            };
            let Some((raised, a2)) = create_occ(&lowered, target_slot, statistics, cap) else {
                continue;
            };
            let row = basis
                .index_of(&raised)
                .ok_or_else(|| Error::ShapeMismatch("bilinear image missing from basis".into()))?;
            op.insert_add(row, col, Complex64::new(weight * a1 * a2, 0.0));
        }
    }
    Ok(op)
}

/// Momentum-space density `ρ(k,s) = Σ_q c†_{q+k,s} c_{q,s}`. Number
/// conserving; `ρ(0,s)` is diagonal with eigenvalue `N_s`.
pub fn build_density(basis: &FockBasis, k: &IntTuple, spin: Spin) -> Result<SparseOperator> {
    build_one_body(basis, k, spin, |_, _| 1.0)
}

/// Momentum-space current component, midpoint amplitude in physical units.
pub fn build_current(basis: &FockBasis, k: &IntTuple, spin: Spin, component: usize) -> Result<SparseOperator> {
    let grid = basis.grid();
    if component >= grid.dim {
        return Err(Error::ModeOutOfRange(format!(
            "current component {component} outside dim {}",
            grid.dim
        )));
    }
    let step = grid.momentum_step();
    build_one_body(basis, k, spin, move |from, to| {
        0.5 * step * (from.n[component] + to.n[component]) as f64
    })
}

/// Density fluctuation `δρ(k,s) = ρ(k,s) − N_s⁰ δ_{k,0}·I`. The c-number
/// `N_s⁰` is the home-sector particle count of the basis.
pub fn build_delta_rho(basis: &FockBasis, k: &IntTuple, spin: Spin) -> Result<SparseOperator> {
    let rho = build_density(basis, k, spin)?;
    if !is_zero_transfer(basis, k) {
        return Ok(rho);
    }
    let n0 = home_count(basis, spin)?;
    let id = SparseOperator::identity(basis.space());
    rho.sub(&id.scaled(Complex64::new(n0, 0.0)))
}

/// Current fluctuation; identical to the current itself at every `k`.
pub fn build_delta_j(basis: &FockBasis, k: &IntTuple, spin: Spin, component: usize) -> Result<SparseOperator> {
    build_current(basis, k, spin, component)
}

/// Field fluctuation `δψ(k,s) = ψ(k,s) − √(N_s⁰) δ_{k,0}·I`.
///
/// The subtraction mixes a sector-lowering map with a multiple of the
/// identity, so it only exists on a space containing the whole ladder of
/// sectors; build it on a tower.
pub fn build_delta_psi(basis: &FockBasis, k: &IntTuple, spin: Spin) -> Result<SparseOperator> {
    if basis.is_single_sector() {
        return Err(Error::ShapeMismatch(
            "delta_psi mixes sectors; build it on a tower basis".into(),
        ));
    }
    let k = check_transfer(basis, k)?;
    if !basis.grid().contains(&k) {
        return Err(Error::ModeOutOfRange(format!("field momentum {k:?} is outside the grid")));
    }
    let psi = crate::fock::build_annihilation(basis, &Mode::new(k, spin))?;
    if !is_zero_transfer(basis, &k) {
        return Ok(psi);
    }
    let n0 = home_count(basis, spin)?;
    let id = SparseOperator::identity(basis.space());
    psi.sub(&id.scaled(Complex64::new(n0.sqrt(), 0.0)))
}

fn is_zero_transfer(basis: &FockBasis, k: &IntTuple) -> bool {
    match basis.grid().reduce(k) {
        Some(reduced) => reduced == [0, 0, 0],
        None => false,
    }
}

fn home_count(basis: &FockBasis, spin: Spin) -> Result<f64> {
    basis
        .home_counts()
        .map(|counts| counts.get(spin) as f64)
        .ok_or_else(|| Error::ShapeMismatch("basis has no home sector for the N⁰ subtraction".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, FockBasis, SpinCounts, Statistics};
    use crate::lattice::{enumerate_modes, neg_tuple, tuple1, BoundaryMode, GridSpec};
    use crate::reference::{
        decode_occupation, encode_occupation, first_quantized_current, first_quantized_density,
    };

    fn grid1d(n_max: i32, boundary: BoundaryMode) -> GridSpec {
        GridSpec::new(1, 2.0 * std::f64::consts::PI, n_max, boundary).unwrap()
    }

    #[test]
    fn density_at_zero_is_the_number_operator() {
        let g = grid1d(1, BoundaryMode::Truncate);
        let b = build_basis(&g, Statistics::Fermi, SpinCounts::new(2, 1), 1).unwrap();
        let rho0 = build_density(&b, &tuple1(0), Spin::Up).unwrap();
        let expected = SparseOperator::identity(b.space()).scaled(Complex64::new(2.0, 0.0));
        assert_eq!(rho0.max_abs_diff(&expected).unwrap(), 0.0);
    }

    #[test]
    fn density_moves_a_single_particle() {
        // one up particle at n=0; rho(+1) sends it to n=+1 exactly
        let g = grid1d(1, BoundaryMode::Truncate);
        let b = build_basis(&g, Statistics::Fermi, SpinCounts::new(1, 0), 1).unwrap();
        let rho = build_density(&b, &tuple1(1), Spin::Up).unwrap();
        let from = b.index_of(&[0, 1, 0, 0, 0, 0]).unwrap();
        let to = b.index_of(&[0, 0, 1, 0, 0, 0]).unwrap();
        let image = rho.apply(&b.basis_vector(from)).unwrap();
        for (i, amp) in image.amplitudes().iter().enumerate() {
            let expected = if i == to { Complex64::ONE } else { Complex64::ZERO };
            assert_eq!(*amp, expected);
        }
    }

    #[test]
    fn adjoint_pairings_hold_exactly() {
        for boundary in [BoundaryMode::Wrap, BoundaryMode::Truncate] {
            let g = grid1d(1, boundary);
            let b = build_basis(&g, Statistics::Fermi, SpinCounts::new(1, 1), 1).unwrap();
            for k in -2..=2 {
                let k = tuple1(k);
                if boundary == BoundaryMode::Truncate && k[0].abs() > 2 {
                    continue;
                }
                for spin in Spin::ALL {
                    let rho = build_density(&b, &k, spin).unwrap();
                    let rho_neg = build_density(&b, &neg_tuple(&k), spin).unwrap();
                    assert_eq!(rho.adjoint().max_abs_diff(&rho_neg).unwrap(), 0.0);
                    let j = build_current(&b, &k, spin, 0).unwrap();
                    let j_neg = build_current(&b, &neg_tuple(&k), spin, 0).unwrap();
                    assert_eq!(j.adjoint().max_abs_diff(&j_neg).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn densities_commute_in_wrap_mode() {
        let g = grid1d(1, BoundaryMode::Wrap);
        let b = build_basis(&g, Statistics::Fermi, SpinCounts::new(2, 1), 1).unwrap();
        for k1 in -1..=1 {
            for k2 in -1..=1 {
                for s1 in Spin::ALL {
                    for s2 in Spin::ALL {
                        let a = build_density(&b, &tuple1(k1), s1).unwrap();
                        let c = build_density(&b, &tuple1(k2), s2).unwrap();
                        assert!(a.commutator(&c).unwrap().is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn current_at_zero_measures_total_momentum() {
        let g = grid1d(1, BoundaryMode::Truncate);
        let b = build_basis(&g, Statistics::Fermi, SpinCounts::new(2, 0), 1).unwrap();
        let j0 = build_current(&b, &tuple1(0), Spin::Up, 0).unwrap();
        let step = g.momentum_step();
        for (idx, occ) in b.states().iter().enumerate() {
            let expected: f64 = [-1i32, 0, 1]
                .iter()
                .enumerate()
                .map(|(slot, &n)| occ[slot] as f64 * n as f64 * step)
                .sum();
            assert!((j0.get(idx, idx) - Complex64::new(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn current_midpoint_zero_annihilates_the_transition() {
        // single particle at n=+1, k=-2: midpoint (1 + (-1))/2 = 0
        let g = grid1d(1, BoundaryMode::Truncate);
        let b = build_basis(&g, Statistics::Fermi, SpinCounts::new(1, 0), 1).unwrap();
        let j = build_current(&b, &tuple1(-2), Spin::Up, 0).unwrap();
        let from = b.index_of(&[0, 0, 1, 0, 0, 0]).unwrap();
        let image = j.apply(&b.basis_vector(from)).unwrap();
        assert_eq!(image.norm(), 0.0);
    }

    #[test]
    fn delta_forms() {
        let g = grid1d(1, BoundaryMode::Wrap);
        let b = build_basis(&g, Statistics::Fermi, SpinCounts::new(2, 0), 1).unwrap();
        let d0 = build_delta_rho(&b, &tuple1(0), Spin::Up).unwrap();
        assert!(d0.is_zero());
        let d1 = build_delta_rho(&b, &tuple1(1), Spin::Up).unwrap();
        let rho1 = build_density(&b, &tuple1(1), Spin::Up).unwrap();
        assert_eq!(d1.max_abs_diff(&rho1).unwrap(), 0.0);
        for k in -1..=1 {
            let dj = build_delta_j(&b, &tuple1(k), Spin::Up, 0).unwrap();
            let j = build_current(&b, &tuple1(k), Spin::Up, 0).unwrap();
            assert_eq!(dj.max_abs_diff(&j).unwrap(), 0.0);
        }
    }

    #[test]
    fn delta_psi_needs_a_tower_and_lowers_by_one() {
        let g = grid1d(1, BoundaryMode::Wrap);
        let sector = build_basis(&g, Statistics::Fermi, SpinCounts::new(2, 0), 1).unwrap();
        assert!(build_delta_psi(&sector, &tuple1(0), Spin::Up).is_err());
        let tower = FockBasis::tower(&g, Statistics::Fermi, SpinCounts::new(2, 0), Spin::Up, 1).unwrap();
        let dpsi = build_delta_psi(&tower, &tuple1(1), Spin::Up).unwrap();
        for (row, col, _) in dpsi.entries() {
            let from = tower.spin_count(tower.state(col), Spin::Up);
            let to = tower.spin_count(tower.state(row), Spin::Up);
            assert_eq!(to + 1, from);
        }
        let dpsi0 = build_delta_psi(&tower, &tuple1(0), Spin::Up).unwrap();
        let psi0 = crate::fock::build_annihilation(&tower, &Mode::new(tuple1(0), Spin::Up)).unwrap();
        let id = SparseOperator::identity(tower.space());
        let expected = psi0.sub(&id.scaled(Complex64::new(2f64.sqrt(), 0.0))).unwrap();
        assert_eq!(dpsi0.max_abs_diff(&expected).unwrap(), 0.0);
    }

    #[test]
    fn number_conservation_commutators_vanish() {
        let g = grid1d(1, BoundaryMode::Wrap);
        let b = build_basis(&g, Statistics::Fermi, SpinCounts::new(2, 1), 1).unwrap();
        let n_up = build_density(&b, &tuple1(0), Spin::Up).unwrap();
        for k in -1..=1 {
            let rho = build_density(&b, &tuple1(k), Spin::Up).unwrap();
            let j = build_current(&b, &tuple1(k), Spin::Up, 0).unwrap();
            assert!(rho.commutator(&n_up).unwrap().is_zero());
            assert!(j.commutator(&n_up).unwrap().is_zero());
        }
    }

    /// Current algebra [j_c(p,s), ρ(k,s)] = k_c·ρ(p+k,s) on states deep in
    /// the interior of a truncated grid, where no cutoff term activates.
    #[test]
    fn current_density_commutator_closes_in_the_interior() {
        let g = grid1d(3, BoundaryMode::Truncate);
        let b = build_basis(&g, Statistics::Fermi, SpinCounts::new(1, 0), 1).unwrap();
        let step = g.momentum_step();
        let center = b.index_of(&[0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        let v = b.basis_vector(center);
        for p in -1..=1 {
            for k in -1..=1i32 {
                let j = build_current(&b, &tuple1(p), Spin::Up, 0).unwrap();
                let rho = build_density(&b, &tuple1(k), Spin::Up).unwrap();
                let lhs = j.commutator(&rho).unwrap().apply(&v).unwrap();
                let rhs = build_density(&b, &tuple1(p + k), Spin::Up)
                    .unwrap()
                    .apply(&v)
                    .unwrap()
                    .scaled(Complex64::new(k as f64 * step, 0.0));
                assert!(lhs.sub(&rhs).unwrap().norm() < 1e-12, "p={p} k={k}");
            }
        }
    }

    /// The state-loop construction agrees with the literal composite
    /// Σ_q amp·c†_{q'}·c_q built from ladder operators.
    #[test]
    fn bilinears_match_composed_ladder_operators() {
        let g = grid1d(1, BoundaryMode::Wrap);
        let b = build_basis(&g, Statistics::Fermi, SpinCounts::new(2, 1), 1).unwrap();
        let step = g.momentum_step();
        let tuples = g.tuples();
        for k in -1..=1i32 {
            let k = tuple1(k);
            for spin in Spin::ALL {
                let mut rho_direct = SparseOperator::zero(b.space(), b.space());
                let mut j_direct = SparseOperator::zero(b.space(), b.space());
                for q in &tuples {
                    let from = Mode::new(*q, spin);
                    let Some(to) = momentum_shift(&from, &k, &g) else { continue };
                    let c = crate::fock::build_annihilation(&b, &from).unwrap();
                    let cdag = crate::fock::build_creation(&b.lowered(spin).unwrap(), &to).unwrap();
                    let term = cdag.compose(&c).unwrap();
                    rho_direct = rho_direct.add(&term).unwrap();
                    let mid = 0.5 * step * (from.n[0] + to.n[0]) as f64;
                    j_direct = j_direct.add(&term.scaled(Complex64::new(mid, 0.0))).unwrap();
                }
                let rho = build_density(&b, &k, spin).unwrap();
                let j = build_current(&b, &k, spin, 0).unwrap();
                assert_eq!(rho.max_abs_diff(&rho_direct).unwrap(), 0.0);
                assert_eq!(j.max_abs_diff(&j_direct).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn first_quantized_equivalence_small_sectors() {
        let g = grid1d(1, BoundaryMode::Truncate);
        let modes = enumerate_modes(&g);
        for counts in [SpinCounts::new(1, 0), SpinCounts::new(2, 0), SpinCounts::new(1, 1)] {
            let b = build_basis(&g, Statistics::Fermi, counts, 1).unwrap();
            let n = counts.total() as usize;
            for k in -1..=1 {
                let k = tuple1(k);
                for spin in Spin::ALL {
                    let j = build_current(&b, &k, spin, 0).unwrap();
                    let rho = build_density(&b, &k, spin).unwrap();
                    for col in 0..b.dim() {
                        let mut amps = vec![Complex64::ZERO; b.dim()];
                        amps[col] = Complex64::ONE;
                        let encoded = encode_occupation(&b, &amps, n).unwrap();

                        let via_op = j.apply(&b.basis_vector(col)).unwrap();
                        let via_tensor = first_quantized_current(&g, &modes, &k, spin, 0, &encoded);
                        let decoded = decode_occupation(&b, &via_tensor).unwrap();
                        for (a, b_amp) in via_op.amplitudes().iter().zip(&decoded) {
                            assert!((a - b_amp).norm() < 1e-10);
                        }

                        let via_rho = rho.apply(&b.basis_vector(col)).unwrap();
                        let rho_tensor = first_quantized_density(&g, &modes, &k, spin, &encoded);
                        let decoded = decode_occupation(&b, &rho_tensor).unwrap();
                        for (a, b_amp) in via_rho.amplitudes().iter().zip(&decoded) {
                            assert!((a - b_amp).norm() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bilinears_build_on_bose_bases_too() {
        let g = grid1d(1, BoundaryMode::Wrap);
        let b = build_basis(&g, Statistics::Bose, SpinCounts::new(2, 0), 3).unwrap();
        let rho0 = build_density(&b, &tuple1(0), Spin::Up).unwrap();
        let expected = SparseOperator::identity(b.space()).scaled(Complex64::new(2.0, 0.0));
        assert_eq!(rho0.max_abs_diff(&expected).unwrap(), 0.0);
        // cross-statistics application is a shape error
        let fermi = build_basis(&g, Statistics::Fermi, SpinCounts::new(2, 0), 1).unwrap();
        let rho_fermi = build_density(&fermi, &tuple1(1), Spin::Up).unwrap();
        assert!(rho_fermi.apply(&b.basis_vector(0)).is_err());
    }
}
