//! Exact sparse complex operators between enumerated Fock spaces.
//!
//! Storage is a `BTreeMap<(row, col), Complex64>` with explicit zeros pruned,
//! so every arithmetic path iterates in a fixed order and results are
//! bit-reproducible. Dimensions here are desk scale; the operator norm is the
//! largest singular value computed densely.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Identity of an enumerated space: dimension plus a content fingerprint.
///
/// Two spaces compare equal only if they were enumerated from identical
/// content, which is what the shape checks rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceId {
    pub dim: usize,
    pub fingerprint: u64,
}

impl SpaceId {
    pub fn new(dim: usize, fingerprint: u64) -> SpaceId {
        SpaceId { dim, fingerprint }
    }

    fn derived(&self, tag: u64, extra: u64) -> SpaceId {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.fingerprint.hash(&mut h);
        tag.hash(&mut h);
        extra.hash(&mut h);
        SpaceId { dim: self.dim, fingerprint: h.finish() }
    }
}

/// Complex amplitudes over a fixed enumerated space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: SpaceId,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(space: SpaceId) -> StateVector {
        StateVector { space, amps: vec![Complex64::ZERO; space.dim] }
    }

    pub fn from_amplitudes(space: SpaceId, amps: Vec<Complex64>) -> Result<StateVector> {
        if amps.len() != space.dim {
            return Err(Error::ShapeMismatch(format!(
                "amplitude count {} does not match space dimension {}",
                amps.len(),
                space.dim
            )));
        }
        Ok(StateVector { space, amps })
    }

    pub fn unit(space: SpaceId, index: usize) -> StateVector {
        let mut v = StateVector::zero(space);
        v.amps[index] = Complex64::ONE;
        v
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector { space: self.space, amps: self.amps.iter().map(|z| z * factor).collect() }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if self.space != other.space {
            return Err(Error::ShapeMismatch("adding vectors over different spaces".into()));
        }
        let amps = self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect();
        Ok(StateVector { space: self.space, amps })
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        self.add(&other.scaled(-Complex64::ONE))
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.space != other.space {
            return Err(Error::ShapeMismatch("inner product over different spaces".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// One JSON object per line: `{"index": i, "re": x, "im": y}`.
    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> Result<()> {
        for (i, z) in self.amps.iter().enumerate() {
            if z.re != 0.0 || z.im != 0.0 {
                writeln!(w, "{{\"index\":{},\"re\":{:?},\"im\":{:?}}}", i, z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Exact sparse complex matrix between two enumerated spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    codomain: SpaceId,
    domain: SpaceId,
    entries: BTreeMap<(u32, u32), Complex64>,
}

impl SparseOperator {
    pub fn zero(codomain: SpaceId, domain: SpaceId) -> SparseOperator {
        SparseOperator { codomain, domain, entries: BTreeMap::new() }
    }

    pub fn identity(space: SpaceId) -> SparseOperator {
        let mut op = SparseOperator::zero(space, space);
        for i in 0..space.dim {
            op.entries.insert((i as u32, i as u32), Complex64::ONE);
        }
        op
    }

    /// Diagonal operator from per-state values.
    pub fn diagonal(space: SpaceId, values: &[f64]) -> Result<SparseOperator> {
        if values.len() != space.dim {
            return Err(Error::ShapeMismatch("diagonal length does not match space".into()));
        }
        let mut op = SparseOperator::zero(space, space);
        for (i, v) in values.iter().enumerate() {
            if *v != 0.0 {
                op.entries.insert((i as u32, i as u32), Complex64::new(*v, 0.0));
            }
        }
        Ok(op)
    }

    pub fn domain(&self) -> SpaceId {
        self.domain
    }

    pub fn codomain(&self) -> SpaceId {
        self.codomain
    }

    pub fn is_endomorphism(&self) -> bool {
        self.domain == self.codomain
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries.iter().map(|(&(r, c), &z)| (r as usize, c as usize, z))
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries.get(&(row as u32, col as u32)).copied().unwrap_or(Complex64::ZERO)
    }

    /// Accumulate into an entry, pruning exact zeros.
    pub fn insert_add(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(row < self.codomain.dim && col < self.domain.dim);
        if value.re == 0.0 && value.im == 0.0 {
            return;
        }
        let key = (row as u32, col as u32);
        let entry = self.entries.entry(key).or_insert(Complex64::ZERO);
        *entry += value;
        if entry.re == 0.0 && entry.im == 0.0 {
            self.entries.remove(&key);
        }
    }

    pub fn add(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::ShapeMismatch("adding operators with different spaces".into()));
        }
        let mut out = self.clone();
        for (&(r, c), &z) in &other.entries {
            out.insert_add(r as usize, c as usize, z);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.add(&other.scaled(-Complex64::ONE))
    }

    pub fn scaled(&self, factor: Complex64) -> SparseOperator {
        if factor.re == 0.0 && factor.im == 0.0 {
            return SparseOperator::zero(self.codomain, self.domain);
        }
        let entries = self.entries.iter().map(|(&k, &z)| (k, z * factor)).collect();
        SparseOperator { codomain: self.codomain, domain: self.domain, entries }
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.domain != other.codomain {
            return Err(Error::ShapeMismatch(format!(
                "compose: left domain dim {} does not match right codomain dim {}",
                self.domain.dim, other.codomain.dim
            )));
        }
        let mut out = SparseOperator::zero(self.codomain, other.domain);
        for (&(i, j), &a) in &self.entries {
            for (&(_, k), &b) in other.entries.range((j, 0)..=(j, u32::MAX)) {
                out.insert_add(i as usize, k as usize, a * b);
            }
        }
        Ok(out)
    }

    /// Conjugate transpose. `adjoint(adjoint(A)) == A` exactly.
    pub fn adjoint(&self) -> SparseOperator {
        let mut out = SparseOperator::zero(self.domain, self.codomain);
        for (&(r, c), &z) in &self.entries {
            out.entries.insert((c, r), z.conj());
        }
        out
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// `{self, other} = self·other + other·self`.
    pub fn anticommutator(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.compose(other)?.add(&other.compose(self)?)
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.space() != self.domain {
            return Err(Error::ShapeMismatch("apply: vector space does not match operator domain".into()));
        }
        let mut out = StateVector::zero(self.codomain);
        for (&(r, c), &z) in &self.entries {
            out.amps[r as usize] += z * v.amps[c as usize];
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.codomain.dim, self.domain.dim);
        for (&(r, c), &z) in &self.entries {
            m[(r as usize, c as usize)] = z;
        }
        m
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        if self.entries.is_empty() || self.codomain.dim == 0 || self.domain.dim == 0 {
            return 0.0;
        }
        let sv = self.to_dense().singular_values();
        sv.iter().fold(0.0f64, |acc, s| acc.max(*s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation between two operators over the union of
    /// their supports.
    pub fn max_abs_diff(&self, other: &SparseOperator) -> Result<f64> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::ShapeMismatch("max_abs_diff over different spaces".into()));
        }
        let mut worst = 0.0f64;
        for (&k, &z) in &self.entries {
            worst = worst.max((z - other.entries.get(&k).copied().unwrap_or(Complex64::ZERO)).norm());
        }
        for (&k, &z) in &other.entries {
            if !self.entries.contains_key(&k) {
                worst = worst.max(z.norm());
            }
        }
        Ok(worst)
    }

    /// Restrict the domain to a contiguous column block, keeping all rows.
    pub fn restrict_columns(&self, start: usize, len: usize) -> SparseOperator {
        let domain = SpaceId { dim: len, ..self.domain.derived(0x636f6c73, (start as u64) << 32 | len as u64) };
        let mut out = SparseOperator::zero(self.codomain, domain);
        for (&(r, c), &z) in &self.entries {
            let c = c as usize;
            if c >= start && c < start + len {
                out.entries.insert((r, (c - start) as u32), z);
            }
        }
        out
    }

    /// Restrict the codomain to a contiguous row block, keeping all columns.
    pub fn restrict_rows(&self, start: usize, len: usize) -> SparseOperator {
        let codomain = SpaceId { dim: len, ..self.codomain.derived(0x726f7773, (start as u64) << 32 | len as u64) };
        let mut out = SparseOperator::zero(codomain, self.domain);
        for (&(r, c), &z) in &self.entries {
            let r = r as usize;
            if r >= start && r < start + len {
                out.entries.insert(((r - start) as u32, c), z);
            }
        }
        out
    }

    /// Frobenius mass of the entries inside a row block.
    pub fn row_block_mass(&self, start: usize, len: usize) -> f64 {
        let mut mass = 0.0;
        for (&(r, _), &z) in &self.entries {
            let r = r as usize;
            if r >= start && r < start + len {
                mass += z.norm_sqr();
            }
        }
        mass.sqrt()
    }

    /// One JSON object per line: `{"row": r, "col": c, "re": x, "im": y}`.
    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> Result<()> {
        for (&(r, c), &z) in &self.entries {
            writeln!(w, "{{\"row\":{},\"col\":{},\"re\":{:?},\"im\":{:?}}}", r, c, z.re, z.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(dim: usize, tag: u64) -> SpaceId {
        SpaceId::new(dim, tag)
    }

    #[test]
    fn adjoint_is_involutive_and_antilinear() {
        let s = space(2, 1);
        let mut a = SparseOperator::zero(s, s);
        a.insert_add(0, 1, Complex64::new(1.0, 2.0));
        a.insert_add(1, 0, Complex64::new(-0.5, 0.25));
        assert_eq!(a.adjoint().adjoint(), a);
        let alpha = Complex64::new(0.3, -0.7);
        let lhs = a.scaled(alpha).adjoint();
        let rhs = a.adjoint().scaled(alpha.conj());
        assert!(lhs.max_abs_diff(&rhs).unwrap() == 0.0);
        let id = SparseOperator::identity(s);
        assert_eq!(id.adjoint(), id);
    }

    #[test]
    fn compose_requires_matching_spaces() {
        let s2 = space(2, 1);
        let s3 = space(3, 2);
        let a = SparseOperator::identity(s2);
        let b = SparseOperator::identity(s3);
        assert!(a.compose(&b).is_err());
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn commutator_with_self_vanishes() {
        let s = space(3, 9);
        let mut a = SparseOperator::zero(s, s);
        a.insert_add(0, 1, Complex64::new(2.0, 1.0));
        a.insert_add(2, 2, Complex64::new(0.0, -1.0));
        assert!(a.commutator(&a).unwrap().is_zero());
    }

    #[test]
    fn operator_norm_is_largest_singular_value() {
        let s = space(2, 4);
        let mut a = SparseOperator::zero(s, s);
        a.insert_add(0, 0, Complex64::new(3.0, 0.0));
        a.insert_add(1, 1, Complex64::new(0.0, -4.0));
        assert!((a.operator_norm() - 4.0).abs() < 1e-12);
        assert_eq!(SparseOperator::zero(s, s).operator_norm(), 0.0);
    }

    #[test]
    fn apply_is_linear() {
        let s = space(3, 7);
        let mut a = SparseOperator::zero(s, s);
        a.insert_add(0, 1, Complex64::new(1.5, -0.5));
        a.insert_add(2, 0, Complex64::new(0.0, 2.0));
        let u = StateVector::from_amplitudes(
            s,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.5)],
        )
        .unwrap();
        let v = StateVector::unit(s, 1);
        let alpha = Complex64::new(0.25, -1.0);
        let beta = Complex64::new(-2.0, 0.125);
        let lhs = a.apply(&u.scaled(alpha).add(&v.scaled(beta)).unwrap()).unwrap();
        let rhs = a.apply(&u).unwrap().scaled(alpha).add(&a.apply(&v).unwrap().scaled(beta)).unwrap();
        let diff = lhs.sub(&rhs).unwrap();
        assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn explicit_zeros_are_pruned() {
        let s = space(2, 3);
        let mut a = SparseOperator::zero(s, s);
        a.insert_add(0, 0, Complex64::new(1.0, 0.0));
        a.insert_add(0, 0, Complex64::new(-1.0, 0.0));
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn jsonl_round_trip_shape() {
        let s = space(2, 5);
        let mut a = SparseOperator::zero(s, s);
        a.insert_add(1, 0, Complex64::new(0.5, -2.0));
        let mut buf = Vec::new();
        a.write_jsonl(&mut buf).unwrap();
        let line: serde_json::Value = serde_json::from_slice(buf.trim_ascii_end()).unwrap();
        assert_eq!(line["row"], 1);
        assert_eq!(line["col"], 0);
        assert_eq!(line["re"], 0.5);
        assert_eq!(line["im"], -2.0);
    }
}
