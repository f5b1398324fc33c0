//! Brute-force reference constructions, kept independent of the production
//! operator paths.
//!
//! Everything here works on literal dense tensor products `H^⊗n` with `H =
//! C^M` (one axis per particle, indices mixed-radix base `M`), applies the
//! projector `P₋` by summing signed permutations, and moves between that
//! picture and the occupation encoding explicitly. The verification suites
//! use these as oracles for the occupation-encoded ladder operators and the
//! momentum-space current; none of the production builders call into this
//! module.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::lattice::{mode_index, momentum_shift, GridSpec, Mode};

/// Dense vector in `H^⊗n`, `H = C^dim`. Index layout: particle 1 is the
/// most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorState {
    pub particles: usize,
    pub dim: usize,
    pub amps: Vec<Complex64>,
}

impl TensorState {
    pub fn zero(particles: usize, dim: usize) -> TensorState {
        TensorState { particles, dim, amps: vec![Complex64::ZERO; dim.pow(particles as u32)] }
    }

    /// Decomposable vector `f_1 ⊗ … ⊗ f_n`.
    pub fn product(factors: &[&[Complex64]]) -> TensorState {
        let particles = factors.len();
        let dim = if particles == 0 { 1 } else { factors[0].len() };
        let mut out = TensorState::zero(particles, dim);
        for (flat, amp) in out.amps.iter_mut().enumerate() {
            let mut value = Complex64::ONE;
            let mut rest = flat;
            for p in (0..particles).rev() {
                let idx = rest % dim;
                rest /= dim;
                value *= factors[p][idx];
            }
            *amp = value;
        }
        out
    }

    pub fn scaled(&self, factor: Complex64) -> TensorState {
        TensorState {
            particles: self.particles,
            dim: self.dim,
            amps: self.amps.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &TensorState) -> TensorState {
        assert_eq!(self.amps.len(), other.amps.len());
        TensorState {
            particles: self.particles,
            dim: self.dim,
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &TensorState) -> TensorState {
        self.add(&other.scaled(-Complex64::ONE))
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &TensorState) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    fn digits(&self, flat: usize) -> Vec<usize> {
        let mut digits = vec![0usize; self.particles];
        let mut rest = flat;
        for p in (0..self.particles).rev() {
            digits[p] = rest % self.dim;
            rest /= self.dim;
        }
        digits
    }

    fn flat(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0usize, |acc, &d| acc * self.dim + d)
    }
}

/// `b(f) f_1⊗…⊗f_n = √n (f, f_1) f_2⊗…⊗f_n`, extended linearly. The inner
/// product is conjugate-linear in `f`.
pub fn b_annihilate(f: &[Complex64], state: &TensorState) -> TensorState {
    assert!(state.particles >= 1);
    let mut out = TensorState::zero(state.particles - 1, state.dim);
    let scale = (state.particles as f64).sqrt();
    for (flat, amp) in state.amps.iter().enumerate() {
        if amp.re == 0.0 && amp.im == 0.0 {
            continue;
        }
        let digits = state.digits(flat);
        let weight = f[digits[0]].conj() * amp * scale;
        let rest = out.flat(&digits[1..]);
        out.amps[rest] += weight;
    }
    out
}

/// `b*(f) f_1⊗…⊗f_n = √(n+1) f ⊗ f_1⊗…⊗f_n`, extended linearly.
pub fn b_create(f: &[Complex64], state: &TensorState) -> TensorState {
    let mut out = TensorState::zero(state.particles + 1, state.dim);
    let scale = ((state.particles + 1) as f64).sqrt();
    for (flat, amp) in state.amps.iter().enumerate() {
        if amp.re == 0.0 && amp.im == 0.0 {
            continue;
        }
        let digits = state.digits(flat);
        for first in 0..state.dim {
            let mut new_digits = Vec::with_capacity(state.particles + 1);
            new_digits.push(first);
            new_digits.extend_from_slice(&digits);
            let target = out.flat(&new_digits);
            out.amps[target] += f[first] * amp * scale;
        }
    }
    out
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    heap_permutations(&mut perm, n, &mut out);
    out
}

fn heap_permutations(perm: &mut Vec<usize>, k: usize, out: &mut Vec<(Vec<usize>, f64)>) {
    if k == 1 {
        out.push((perm.clone(), permutation_sign(perm)));
        return;
    }
    for i in 0..k {
        heap_permutations(perm, k - 1, out);
        if k % 2 == 0 {
            perm.swap(i, k - 1);
        } else {
            perm.swap(0, k - 1);
        }
    }
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1.0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut length = 0;
        let mut at = start;
        while !seen[at] {
            seen[at] = true;
            at = perm[at];
            length += 1;
        }
        if length % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Antisymmetrizer `P₋ = (1/n!) Σ_π sgn(π) π`.
pub fn antisymmetrize(state: &TensorState) -> TensorState {
    let n = state.particles;
    if n <= 1 {
        return state.clone();
    }
    let mut out = TensorState::zero(n, state.dim);
    let perms = permutations(n);
    let weight = 1.0 / perms.len() as f64;
    for (flat, amp) in state.amps.iter().enumerate() {
        if amp.re == 0.0 && amp.im == 0.0 {
            continue;
        }
        let digits = state.digits(flat);
        for (perm, sign) in &perms {
            let permuted: Vec<usize> = (0..n).map(|slot| digits[perm[slot]]).collect();
            let target = out.flat(&permuted);
            out.amps[target] += amp * weight * *sign;
        }
    }
    out
}

/// `c(f) = P₋ b(f) P₋` on the literal tensor space.
pub fn c_annihilate(f: &[Complex64], state: &TensorState) -> TensorState {
    antisymmetrize(&b_annihilate(f, &antisymmetrize(state)))
}

/// `c*(f) = P₋ b*(f) P₋` on the literal tensor space.
pub fn c_create(f: &[Complex64], state: &TensorState) -> TensorState {
    antisymmetrize(&b_create(f, &antisymmetrize(state)))
}

/// Encode an occupation-basis amplitude vector into the tensor space.
///
/// An occupied mode set `{m_1 < … < m_n}` maps to the normalized
/// antisymmetric tensor `(1/√n!) Σ_π sgn(π) e_{m_π(1)}⊗…⊗e_{m_π(n)}`.
pub fn encode_occupation(basis: &FockBasis, amplitudes: &[Complex64], particles: usize) -> Result<TensorState> {
    let dim = basis.modes().len();
    let mut out = TensorState::zero(particles, dim);
    for (state_idx, amp) in amplitudes.iter().enumerate() {
        if amp.re == 0.0 && amp.im == 0.0 {
            continue;
        }
        let occ = basis.state(state_idx);
        let occupied: Vec<usize> = occ
            .iter()
            .enumerate()
            .flat_map(|(slot, &count)| std::iter::repeat(slot).take(count as usize))
            .collect();
        if occupied.len() != particles {
            return Err(Error::ShapeMismatch(format!(
                "state {state_idx} holds {} particles, expected {particles}",
                occupied.len()
            )));
        }
        if occ.iter().any(|&c| c > 1) {
            return Err(Error::ShapeMismatch("encode_occupation expects fermionic occupations".into()));
        }
        let perms = permutations(particles.max(1));
        let norm = 1.0 / (factorial(particles)).sqrt();
        if particles == 0 {
            out.amps[0] += *amp;
            continue;
        }
        for (perm, sign) in &perms {
            let digits: Vec<usize> = (0..particles).map(|slot| occupied[perm[slot]]).collect();
            let target = out.flat(&digits);
            out.amps[target] += amp * *sign * norm;
        }
    }
    Ok(out)
}

/// Project a tensor-space vector back onto the occupation basis
/// (inner products against the encoded basis states).
pub fn decode_occupation(basis: &FockBasis, state: &TensorState) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::ZERO; basis.dim()];
    for idx in 0..basis.dim() {
        let mut unit = vec![Complex64::ZERO; basis.dim()];
        unit[idx] = Complex64::ONE;
        let encoded = encode_occupation(basis, &unit, state.particles)?;
        out[idx] = encoded
            .amps
            .iter()
            .zip(&state.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
    }
    Ok(out)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
}

/// First-quantized current applied to a tensor state: for each particle
/// slot, `exp(i k·x) ⊗ ξ_s` maps plane-wave mode `(q, σ)` to `(q + k, σ)`
/// with the analytic amplitude `(q + k/2)_component`, zero across spins.
/// Shifts leaving a truncated grid are dropped, matching the projection of
/// the action back onto the finite-mode space.
pub fn first_quantized_current(
    grid: &GridSpec,
    modes: &[Mode],
    k: &[i32; 3],
    spin: crate::lattice::Spin,
    component: usize,
    state: &TensorState,
) -> TensorState {
    let step = grid.momentum_step();
    let mut out = TensorState::zero(state.particles, state.dim);
    for (flat, amp) in state.amps.iter().enumerate() {
        if amp.re == 0.0 && amp.im == 0.0 {
            continue;
        }
        let digits = state.digits(flat);
        for slot in 0..state.particles {
            let mode = modes[digits[slot]];
            if mode.spin != spin {
                continue;
            }
            let Some(shifted) = momentum_shift(&mode, k, grid) else {
                continue;
            };
            let weight = 0.5 * step * (mode.n[component] + shifted.n[component]) as f64;
            if weight == 0.0 {
                continue;
            }
            let mut new_digits = digits.clone();
            new_digits[slot] = mode_index(grid, &shifted).expect("shifted mode is on the grid");
            let target = out.flat(&new_digits);
            out.amps[target] += amp * weight;
        }
    }
    out
}

/// Same for the density: each slot picks up `exp(i k·x)` and shifts
/// `q → q + k` with unit amplitude.
pub fn first_quantized_density(
    grid: &GridSpec,
    modes: &[Mode],
    k: &[i32; 3],
    spin: crate::lattice::Spin,
    state: &TensorState,
) -> TensorState {
    let mut out = TensorState::zero(state.particles, state.dim);
    for (flat, amp) in state.amps.iter().enumerate() {
        if amp.re == 0.0 && amp.im == 0.0 {
            continue;
        }
        let digits = state.digits(flat);
        for slot in 0..state.particles {
            let mode = modes[digits[slot]];
            if mode.spin != spin {
                continue;
            }
            let Some(shifted) = momentum_shift(&mode, k, grid) else {
                continue;
            };
            let mut new_digits = digits.clone();
            new_digits[slot] = mode_index(grid, &shifted).expect("shifted mode is on the grid");
            let target = out.flat(&new_digits);
            out.amps[target] += amp;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cvec(values: &[(f64, f64)]) -> Vec<Complex64> {
        values.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
    }

    #[test]
    fn antisymmetrizer_is_a_projector() {
        let f1 = cvec(&[(1.0, 0.0), (0.5, -0.25), (0.0, 1.0)]);
        let f2 = cvec(&[(0.0, 0.5), (1.0, 0.0), (-1.0, 0.75)]);
        let v = TensorState::product(&[&f1, &f2]);
        let once = antisymmetrize(&v);
        let twice = antisymmetrize(&once);
        assert!(once.max_abs_diff(&twice) < 1e-14);
    }

    #[test]
    fn two_particle_swap_is_odd() {
        let e0 = cvec(&[(1.0, 0.0), (0.0, 0.0)]);
        let e1 = cvec(&[(0.0, 0.0), (1.0, 0.0)]);
        let v = antisymmetrize(&TensorState::product(&[&e0, &e1]));
        let swapped = antisymmetrize(&TensorState::product(&[&e1, &e0]));
        assert!(v.add(&swapped).norm() < 1e-14);
    }

    #[test]
    fn b_pair_adjointness_on_samples() {
        // (psi, b*(f) phi) == (b(f) psi, phi)
        let f = cvec(&[(0.3, 0.1), (0.0, -0.7), (1.0, 0.0)]);
        let phi = TensorState::product(&[&cvec(&[(1.0, 0.0), (0.2, 0.0), (0.0, 0.4)])]);
        let psi = TensorState::product(&[
            &cvec(&[(0.0, 1.0), (1.0, 0.0), (0.5, 0.5)]),
            &cvec(&[(1.0, 0.0), (0.0, 0.0), (-0.3, 0.2)]),
        ]);
        let lhs: Complex64 = psi
            .amps
            .iter()
            .zip(&b_create(&f, &phi).amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let rhs: Complex64 = b_annihilate(&f, &psi)
            .amps
            .iter()
            .zip(&phi.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((lhs - rhs).norm() < 1e-13);
    }
}
