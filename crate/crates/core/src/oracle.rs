//! Deliberately naive reference implementations. Nothing here calls the
//! butterfly transforms or any other fast path; every sum is spelled out
//! over explicit subset enumerations.

use crate::error::{Error, Result};
use crate::extraction::{Decomposition, InteractionSet};
use crate::lattice::{LatticeVector, SubsetIndex};
use crate::models::ValueTable;

pub const MAX_ORACLE_VARIABLES: usize = 14;

fn check_oracle_n(n: usize) -> Result<()> {
    if n > MAX_ORACLE_VARIABLES {
        return Err(Error::Size(format!(
            "oracle supports at most {MAX_ORACLE_VARIABLES} variables, got {n}"
        )));
    }
    Ok(())
}

fn parity_sign(bits: usize) -> f64 {
    if bits.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Every subset of `t`, largest first, ending with the empty set.
fn subsets_of(t: usize) -> impl Iterator<Item = usize> {
    let mut next = Some(t);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & t) };
        Some(cur)
    })
}

/// `I[T] = Σ_{L⊆T} (−1)^{|T|−|L|} u[L]`, summed literally.
pub fn brute_and(u: &LatticeVector) -> Result<LatticeVector> {
    check_oracle_n(u.n())?;
    let size = u.len();
    let mut out = vec![0.0; size];
    for (t, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for l in subsets_of(t) {
            acc += parity_sign(t ^ l) * u[l];
        }
        *slot = acc;
    }
    LatticeVector::new(u.n(), out)
}

/// `I[T] = −Σ_{L⊆T} (−1)^{|T|−|L|} u[N∖L]`, summed literally.
pub fn brute_or(u: &LatticeVector) -> Result<LatticeVector> {
    check_oracle_n(u.n())?;
    let size = u.len();
    let full = size - 1;
    let mut out = vec![0.0; size];
    for (t, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for l in subsets_of(t) {
            acc += parity_sign(t ^ l) * u[full & !l];
        }
        *slot = -acc;
    }
    LatticeVector::new(u.n(), out)
}

/// `g[S] = Σ_{T⊆S} x[T]`, by testing every `T` against every `S`.
pub fn literal_zeta(x: &LatticeVector) -> Result<LatticeVector> {
    check_oracle_n(x.n())?;
    let size = x.len();
    let mut out = vec![0.0; size];
    for (s, slot) in out.iter_mut().enumerate() {
        *slot = (0..size).filter(|&t| t & s == t).map(|t| x[t]).sum();
    }
    LatticeVector::new(x.n(), out)
}

/// Largest `|h(x_S) − (v(x_S) − δ_S)|` over all `S`, with `h` summed
/// literally from the set's effects.
pub fn verify_matching(v: &ValueTable, d: &Decomposition, set: &InteractionSet) -> Result<f64> {
    let n = v.n();
    check_oracle_n(n)?;
    if d.n() != n || set.n() != n {
        return Err(Error::Size(format!(
            "table n = {n}, decomposition n = {}, set n = {}",
            d.n(),
            set.n()
        )));
    }
    let size = 1usize << n;
    let (and, or) = (set.i_and(), set.i_or());
    let mut worst = 0.0f64;
    for s in 0..size {
        let mut h = set.bias();
        for t in 1..size {
            if t & s == t {
                h += and[t];
            }
            if t & s != 0 {
                h += or[t];
            }
        }
        let target = v.values()[s] - d.delta()[s];
        worst = worst.max((h - target).abs());
    }
    Ok(worst)
}

/// `Σ_{L⊆T} (−1)^{|T|−|L|} v(x_{L∪{i}})`, the AND effect of `T` on the
/// game where variable `i` is always present.
pub fn conditioned_and(v: &ValueTable, t: SubsetIndex, i: usize) -> Result<f64> {
    check_oracle_n(v.n())?;
    if t.n() != v.n() {
        return Err(Error::Size(format!(
            "subset over {} variables, table over {}",
            t.n(),
            v.n()
        )));
    }
    if i == 0 || i > v.n() {
        return Err(Error::Argument(format!("variable {i} outside 1..={}", v.n())));
    }
    if t.contains(i) {
        return Err(Error::Argument(format!("variable {i} is already in {t}")));
    }
    let bit = 1usize << (i - 1);
    let tb = t.index();
    Ok(subsets_of(tb).map(|l| parity_sign(tb ^ l) * v.values()[l | bit]).sum())
}
