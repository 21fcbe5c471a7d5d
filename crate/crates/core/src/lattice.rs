//! Subsets of `N = {1..n}` as bitmasks, and the signed subset-sum transforms
//! on the Boolean lattice that every other module is built on.
//!
//! Variable `i` (1-based) lives in bit `i - 1`; index `0` is the empty set.
//! A [`LatticeVector`] holds one real value per subset, indexed by mask.
//!
//! The transforms run dimension by dimension in `O(n * 2^n)`:
//!
//! ```text
//! mobius_and(u)[T] =  sum_{L ⊆ T} (-1)^{|T|-|L|} u[L]
//! mobius_or(u)[T]  = -sum_{L ⊆ T} (-1)^{|T|-|L|} u[N \ L]
//! zeta_subsets(I)[S] = sum_{T ⊆ S} I[T]
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported variable count; a full table then has 16M entries.
pub const MAX_VARIABLES: usize = 24;

/// Numeric tolerances shared by the extraction checks, the oracle
/// comparisons and the axiom suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Reconstruction error allowed by universal matching, relative to `max(1, max|v|)`.
    pub matching_rel: f64,
    /// Absolute agreement between fast transforms and the literal sums.
    pub oracle_abs: f64,
    /// Per-axiom tolerance in the axiom suite, relative to `max(1, max|v|)`.
    pub axiom_rel: f64,
    /// Probability clamp applied before the logit.
    pub logit_clamp: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    matching_rel: 1e-8,
    oracle_abs: 1e-10,
    axiom_rel: 1e-8,
    logit_clamp: 1e-7,
};

/// A subset `S ⊆ N` of a fixed universe of `n` variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    bits: u32,
    n: u8,
}

impl SubsetIndex {
    pub fn new(bits: u32, n: usize) -> Result<Self> {
        check_n(n)?;
        if (bits as u64) >> n != 0 {
            return Err(Error::arg(format!("mask {bits:#b} has bits beyond n = {n}")));
        }
        Ok(SubsetIndex { bits, n: n as u8 })
    }

    /// Builds a subset from 1-based variable indices.
    pub fn from_variables(vars: &[usize], n: usize) -> Result<Self> {
        check_n(n)?;
        let mut bits = 0u32;
        for &v in vars {
            if v == 0 || v > n {
                return Err(Error::arg(format!("variable {v} outside 1..={n}")));
            }
            bits |= 1 << (v - 1);
        }
        Ok(SubsetIndex { bits, n: n as u8 })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn full(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(SubsetIndex {
            bits: full_mask(n) as u32,
            n: n as u8,
        })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn n(self) -> usize {
        self.n as usize
    }

    pub fn index(self) -> usize {
        self.bits as usize
    }

    pub fn order(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn contains(self, var: usize) -> bool {
        var >= 1 && var <= self.n() && self.bits & (1 << (var - 1)) != 0
    }

    pub fn is_subset_of(self, other: SubsetIndex) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn complement(self) -> SubsetIndex {
        SubsetIndex {
            bits: !self.bits & full_mask(self.n()) as u32,
            n: self.n,
        }
    }

    /// 1-based variables in increasing order.
    pub fn variables(self) -> Vec<usize> {
        (1..=self.n()).filter(|&v| self.contains(v)).collect()
    }
}

impl std::fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let vars: Vec<String> = self.variables().iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", vars.join(","))
    }
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_VARIABLES {
        return Err(Error::size(format!("variable count {n} outside 1..={MAX_VARIABLES}")));
    }
    Ok(())
}

pub(crate) fn full_mask(n: usize) -> usize {
    (1usize << n) - 1
}

/// One finite real value per subset of `N`, indexed by bitmask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLatticeVector", into = "RawLatticeVector")]
pub struct LatticeVector {
    n: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawLatticeVector {
    n: usize,
    values: Vec<f64>,
}

impl TryFrom<RawLatticeVector> for LatticeVector {
    type Error = Error;

    fn try_from(raw: RawLatticeVector) -> Result<Self> {
        LatticeVector::new(raw.n, raw.values)
    }
}

impl From<LatticeVector> for RawLatticeVector {
    fn from(v: LatticeVector) -> Self {
        RawLatticeVector {
            n: v.n,
            values: v.values,
        }
    }
}

impl LatticeVector {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        if values.len() != 1 << n {
            return Err(Error::size(format!(
                "expected 2^{n} = {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::arg(format!("non-finite value at mask {i}")));
        }
        Ok(LatticeVector { n, values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(LatticeVector {
            n,
            values: vec![0.0; 1 << n],
        })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        check_n(n)?;
        Self::new(n, vec![c; 1 << n])
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Result<Self> {
        check_n(n)?;
        Self::new(n, (0..1usize << n).map(f).collect())
    }

    /// Internal constructor for values produced by exact arithmetic on
    /// already-validated vectors.
    pub(crate) fn from_parts(n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), 1 << n);
        LatticeVector { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, s: SubsetIndex) -> f64 {
        self.values[s.index()]
    }

    pub fn full_mask(&self) -> usize {
        full_mask(self.n)
    }

    pub fn add(&self, other: &LatticeVector) -> Result<LatticeVector> {
        self.same_n(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(LatticeVector::from_parts(self.n, values))
    }

    pub fn scale(&self, alpha: f64) -> LatticeVector {
        LatticeVector::from_parts(self.n, self.values.iter().map(|x| alpha * x).collect())
    }

    /// `out[N \ S] = self[S]`.
    pub fn complement_reindexed(&self) -> LatticeVector {
        let full = self.full_mask();
        let mut out = vec![0.0; self.values.len()];
        for (s, &x) in self.values.iter().enumerate() {
            out[full ^ s] = x;
        }
        LatticeVector::from_parts(self.n, out)
    }

    /// Relabels variables: `out[π(S)] = self[S]`, where `perm[i]` is the
    /// 0-based image of 0-based variable `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<LatticeVector> {
        let mask_map = permutation_mask_map(perm, self.n)?;
        let mut out = vec![0.0; self.values.len()];
        for (s, &x) in self.values.iter().enumerate() {
            out[mask_map(s)] = x;
        }
        Ok(LatticeVector::from_parts(self.n, out))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn same_n(&self, other: &LatticeVector) -> Result<()> {
        if self.n != other.n {
            return Err(Error::size(format!(
                "variable counts differ: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for LatticeVector {
    type Output = f64;

    fn index(&self, mask: usize) -> &f64 {
        &self.values[mask]
    }
}

/// Returns a function mapping a mask to its image under the variable
/// permutation `perm` (0-based, `perm[i]` is where variable `i` goes).
pub fn permutation_mask_map(perm: &[usize], n: usize) -> Result<impl Fn(usize) -> usize + '_> {
    if perm.len() != n {
        return Err(Error::arg(format!(
            "permutation has {} entries, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::arg("not a permutation of 0..n"));
        }
        seen[p] = true;
    }
    Ok(move |s: usize| {
        let mut out = 0usize;
        for (i, &p) in perm.iter().enumerate() {
            if s >> i & 1 == 1 {
                out |= 1 << p;
            }
        }
        out
    })
}

/// In-place difference transform: `x[T] <- sum_{L ⊆ T} (-1)^{|T|-|L|} x[L]`.
pub fn mobius_in_place(x: &mut [f64]) {
    debug_assert!(x.len().is_power_of_two());
    let mut half = 1;
    while half < x.len() {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (h, l) in hi.iter_mut().zip(lo.iter()) {
                *h -= *l;
            }
        }
        half <<= 1;
    }
}

/// In-place subset-sum transform: `x[S] <- sum_{T ⊆ S} x[T]`.
pub fn zeta_in_place(x: &mut [f64]) {
    debug_assert!(x.len().is_power_of_two());
    let mut half = 1;
    while half < x.len() {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (h, l) in hi.iter_mut().zip(lo.iter()) {
                *h += *l;
            }
        }
        half <<= 1;
    }
}

/// AND (Harsanyi) effects of a component table.
pub fn mobius_and(u: &LatticeVector) -> Result<LatticeVector> {
    check_n(u.n)?;
    let mut out = u.values.clone();
    mobius_in_place(&mut out);
    Ok(LatticeVector::from_parts(u.n, out))
}

/// OR effects of a component table: complement reindex, difference
/// transform, sign flip.
pub fn mobius_or(u: &LatticeVector) -> Result<LatticeVector> {
    check_n(u.n)?;
    let mut out = u.complement_reindexed().values;
    mobius_in_place(&mut out);
    for x in &mut out {
        *x = -*x;
    }
    Ok(LatticeVector::from_parts(u.n, out))
}

pub fn zeta_subsets(effects: &LatticeVector) -> Result<LatticeVector> {
    check_n(effects.n)?;
    let mut out = effects.values.clone();
    zeta_in_place(&mut out);
    Ok(LatticeVector::from_parts(effects.n, out))
}

/// `out[S] = sum_{T : T ∩ S ≠ ∅} effects[T]`, the value table spanned by OR effects.
pub fn or_synthesis(effects: &LatticeVector) -> Result<LatticeVector> {
    let mut sums = effects.values.clone();
    zeta_in_place(&mut sums);
    let full = effects.full_mask();
    let total = sums[full];
    let out = (0..sums.len()).map(|s| total - sums[full ^ s]).collect();
    Ok(LatticeVector::from_parts(effects.n, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(n: usize, v: &[f64]) -> LatticeVector {
        LatticeVector::new(n, v.to_vec()).unwrap()
    }

    #[test]
    fn order_is_popcount() {
        let s = SubsetIndex::from_variables(&[1, 3, 4], 5).unwrap();
        assert_eq!(s.bits(), 0b1101);
        assert_eq!(s.order(), 3);
        assert_eq!(s.to_string(), "{1,3,4}");
        assert_eq!(s.complement().variables(), vec![2, 5]);
    }

    #[test]
    fn subset_index_rejects_out_of_range() {
        assert!(SubsetIndex::new(0b100, 2).is_err());
        assert!(SubsetIndex::from_variables(&[0], 3).is_err());
        assert!(SubsetIndex::new(0, 25).is_err());
        assert!(SubsetIndex::new(0, 0).is_err());
    }

    #[test]
    fn lattice_vector_validates() {
        assert!(LatticeVector::new(2, vec![0.0; 3]).is_err());
        assert!(LatticeVector::new(1, vec![0.0, f64::NAN]).is_err());
        assert!(LatticeVector::new(25, vec![]).is_err());
    }

    #[test]
    fn mobius_and_first_order() {
        let i = mobius_and(&lv(1, &[0.0, 3.0])).unwrap();
        assert_eq!(i.values(), &[0.0, 3.0]);
    }

    #[test]
    fn mobius_and_two_variables() {
        let i = mobius_and(&lv(2, &[0.0, 1.0, 2.0, 5.0])).unwrap();
        assert_eq!(i.values(), &[0.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn mobius_and_constant_telescopes() {
        let i = mobius_and(&LatticeVector::constant(4, 2.5).unwrap()).unwrap();
        assert_eq!(i[0], 2.5);
        assert!(i.values()[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mobius_or_first_order() {
        let i = mobius_or(&lv(1, &[0.0, 4.0])).unwrap();
        assert_eq!(i[1], 4.0);
    }

    #[test]
    fn mobius_or_constant_cancels() {
        let i = mobius_or(&LatticeVector::constant(3, -1.5).unwrap()).unwrap();
        assert!(i.values()[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mobius_or_single_or_function() {
        // v(S) = c iff S ∩ T != ∅, with T = {1, 3} in n = 3.
        let t = 0b101;
        let u = LatticeVector::from_fn(3, |s| if s & t != 0 { 2.0 } else { 0.0 }).unwrap();
        let i = mobius_or(&u).unwrap();
        for mask in 1..8 {
            let expect = if mask == t { 2.0 } else { 0.0 };
            assert_eq!(i[mask], expect, "mask {mask:#b}");
        }
    }

    #[test]
    fn zeta_cases() {
        assert_eq!(
            zeta_subsets(&lv(2, &[0.0, 1.0, 2.0, 2.0])).unwrap().values(),
            &[0.0, 1.0, 2.0, 5.0]
        );
        assert!(zeta_subsets(&LatticeVector::zeros(3).unwrap())
            .unwrap()
            .values()
            .iter()
            .all(|&x| x == 0.0));
        let mut b = vec![0.0; 8];
        b[0] = 7.0;
        assert!(zeta_subsets(&lv(3, &b)).unwrap().values().iter().all(|&x| x == 7.0));
    }

    #[test]
    fn or_synthesis_matches_definition() {
        let mut e = vec![0.0; 8];
        e[0b011] = 2.0;
        e[0b100] = -1.0;
        let u = or_synthesis(&lv(3, &e)).unwrap();
        for s in 0..8usize {
            let expect = if s & 0b011 != 0 { 2.0 } else { 0.0 } + if s & 0b100 != 0 { -1.0 } else { 0.0 };
            assert_eq!(u[s], expect);
        }
    }

    #[test]
    fn permuted_moves_masks() {
        let v = LatticeVector::from_fn(3, |s| s as f64).unwrap();
        // variable 0 -> 2, 1 -> 0, 2 -> 1
        let p = v.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p[0b100], 1.0);
        assert_eq!(p[0b001], 2.0);
        assert_eq!(p[0b101], 3.0);
        assert!(v.permuted(&[0, 0, 1]).is_err());
    }
}
