//! AND-OR interaction extraction.
//!
//! A [`Decomposition`] splits each denoised output `v(x_L) - δ_L` into an
//! AND component `0.5·(v_L − δ_L) + γ_L` and an OR component
//! `0.5·(v_L − δ_L) − γ_L`. AND effects are the difference transform of the
//! AND component; OR effects are the complement-reindexed difference
//! transform of the OR component, negated. The empty-set output is pinned
//! entirely to AND and surfaces as the bias.

mod sparsify;

use std::collections::BTreeMap;

pub use sparsify::{sparsify, SparsifyConfig, SparsifyResult};

use crate::error::{Error, Result};
use crate::lattice::{mobius_and, mobius_or, or_synthesis, zeta_subsets, LatticeVector};
use crate::models::{GroundTruthGame, Kind, ValueTable};

/// Learnable split of a table into AND and OR components.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    gamma: LatticeVector,
    delta: LatticeVector,
    zeta_bound: f64,
}

/// `|gamma[∅] - 0.5·v[∅]|` allowed by validation.
fn pin_slack(v: &ValueTable) -> f64 {
    1e-12 * (1.0 + v.empty_value().abs())
}

impl Decomposition {
    /// Validating constructor; `v` is the table the decomposition applies to.
    pub fn new(v: &ValueTable, gamma: LatticeVector, delta: LatticeVector, zeta_bound: f64) -> Result<Self> {
        let d = Decomposition {
            gamma,
            delta,
            zeta_bound,
        };
        d.validate(v)?;
        Ok(d)
    }

    /// `γ = 0` beyond the pin, `δ = 0`: AND and OR components are equal on `L ≠ ∅`.
    pub fn even_split(v: &ValueTable, zeta_bound: f64) -> Self {
        let n = v.n();
        let mut gamma = vec![0.0; 1 << n];
        gamma[0] = 0.5 * v.empty_value();
        Decomposition {
            gamma: LatticeVector::from_parts(n, gamma),
            delta: LatticeVector::from_parts(n, vec![0.0; 1 << n]),
            zeta_bound: zeta_bound.max(0.0),
        }
    }

    /// Everything to AND: `u_and = v`, `u_or = 0`.
    pub fn all_and(v: &ValueTable) -> Self {
        Decomposition {
            gamma: v.values().scale(0.5),
            delta: LatticeVector::from_parts(v.n(), vec![0.0; 1 << v.n()]),
            zeta_bound: 0.0,
        }
    }

    /// Everything except the pinned empty output to OR.
    pub fn all_or(v: &ValueTable) -> Self {
        let mut gamma = v.values().scale(-0.5).into_values();
        gamma[0] = 0.5 * v.empty_value();
        Decomposition {
            gamma: LatticeVector::from_parts(v.n(), gamma),
            delta: LatticeVector::from_parts(v.n(), vec![0.0; 1 << v.n()]),
            zeta_bound: 0.0,
        }
    }

    /// The decomposition whose OR component is the one `game` generates.
    /// Extracting `realize_table(game)` with it returns the game's effects.
    pub fn ground_truth(v: &ValueTable, game: &GroundTruthGame) -> Result<Self> {
        if game.n != v.n() {
            return Err(Error::size(format!("game has n = {}, table n = {}", game.n, v.n())));
        }
        let (_, or) = game.effect_vectors();
        let u_or = or_synthesis(&or)?;
        Self::from_or_component(v, &u_or, LatticeVector::from_parts(v.n(), vec![0.0; 1 << v.n()]), 0.0)
    }

    /// Solves `γ` from a target OR component: `γ_L = 0.5·(v_L − δ_L) − u_or_L`.
    pub fn from_or_component(
        v: &ValueTable,
        u_or: &LatticeVector,
        delta: LatticeVector,
        zeta_bound: f64,
    ) -> Result<Self> {
        if u_or.n() != v.n() || delta.n() != v.n() {
            return Err(Error::size("component and table sizes differ"));
        }
        let gamma: Vec<f64> = (0..v.values().len())
            .map(|l| 0.5 * (v.values()[l] - delta[l]) - u_or[l])
            .collect();
        Self::new(v, LatticeVector::new(v.n(), gamma)?, delta, zeta_bound)
    }

    pub fn gamma(&self) -> &LatticeVector {
        &self.gamma
    }

    pub fn delta(&self) -> &LatticeVector {
        &self.delta
    }

    pub fn zeta_bound(&self) -> f64 {
        self.zeta_bound
    }

    pub fn n(&self) -> usize {
        self.gamma.n()
    }

    pub fn validate(&self, v: &ValueTable) -> Result<()> {
        let n = v.n();
        if self.gamma.n() != n || self.delta.n() != n {
            return Err(Error::size(format!(
                "decomposition has n = {}/{}, table n = {n}",
                self.gamma.n(),
                self.delta.n()
            )));
        }
        if !(self.zeta_bound >= 0.0) || !self.zeta_bound.is_finite() {
            return Err(Error::Invariant(format!(
                "noise bound {} is not a finite non-negative number",
                self.zeta_bound
            )));
        }
        if self.delta[0] != 0.0 {
            return Err(Error::Invariant(format!(
                "delta at the empty set is {}, must be 0",
                self.delta[0]
            )));
        }
        if (self.gamma[0] - 0.5 * v.empty_value()).abs() > pin_slack(v) {
            return Err(Error::Invariant(format!(
                "gamma at the empty set is {}, must be half the empty output {}",
                self.gamma[0],
                v.empty_value()
            )));
        }
        if let Some((l, d)) = self
            .delta
            .values()
            .iter()
            .enumerate()
            .find(|(_, d)| d.abs() > self.zeta_bound)
        {
            return Err(Error::Invariant(format!(
                "delta at mask {l} is {d}, outside [-{z}, {z}]",
                z = self.zeta_bound
            )));
        }
        Ok(())
    }
}

/// `(u_and, u_or)` with `u_and + u_or = v − δ`.
pub fn split_components(v: &ValueTable, d: &Decomposition) -> Result<(LatticeVector, LatticeVector)> {
    d.validate(v)?;
    let size = v.values().len();
    let mut u_and = Vec::with_capacity(size);
    let mut u_or = Vec::with_capacity(size);
    for l in 0..size {
        let half = 0.5 * (v.values()[l] - d.delta[l]);
        u_and.push(half + d.gamma[l]);
        u_or.push(half - d.gamma[l]);
    }
    // The pin makes this exact rather than merely within rounding.
    u_and[0] = v.empty_value();
    u_or[0] = 0.0;
    Ok((
        LatticeVector::from_parts(v.n(), u_and),
        LatticeVector::from_parts(v.n(), u_or),
    ))
}

/// AND and OR effects of one sample. The empty-set slots are always zero;
/// the bias `v(x_∅)` is held separately.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSet {
    bias: f64,
    i_and: LatticeVector,
    i_or: LatticeVector,
    pub label: Option<String>,
}

impl InteractionSet {
    pub fn new(bias: f64, i_and: LatticeVector, i_or: LatticeVector) -> Result<Self> {
        if i_and.n() != i_or.n() {
            return Err(Error::size("AND and OR effect vectors differ in n"));
        }
        if !bias.is_finite() {
            return Err(Error::arg("non-finite bias"));
        }
        if i_and[0] != 0.0 || i_or[0] != 0.0 {
            return Err(Error::Invariant("effects at the empty set must be 0".into()));
        }
        Ok(InteractionSet {
            bias,
            i_and,
            i_or,
            label: None,
        })
    }

    /// Builds a set from sparse `(mask, value)` maps.
    pub fn from_sparse(n: usize, bias: f64, and: &BTreeMap<u32, f64>, or: &BTreeMap<u32, f64>) -> Result<Self> {
        let mut a = LatticeVector::zeros(n)?.into_values();
        let mut o = a.clone();
        for (dense, sparse) in [(&mut a, and), (&mut o, or)] {
            for (&mask, &value) in sparse {
                let slot = dense
                    .get_mut(mask as usize)
                    .ok_or_else(|| Error::arg(format!("mask {mask} out of range for n = {n}")))?;
                *slot = value;
            }
        }
        Self::new(bias, LatticeVector::new(n, a)?, LatticeVector::new(n, o)?)
    }

    pub fn n(&self) -> usize {
        self.i_and.n()
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn i_and(&self) -> &LatticeVector {
        &self.i_and
    }

    pub fn i_or(&self) -> &LatticeVector {
        &self.i_or
    }

    pub fn effect(&self, kind: Kind, mask: usize) -> f64 {
        match kind {
            Kind::And => self.i_and[mask],
            Kind::Or => self.i_or[mask],
        }
    }

    pub fn with_label(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }

    /// `sum_{T ≠ ∅} |I^and_T| + |I^or_T|`, the sparsity objective.
    pub fn l1_loss(&self) -> f64 {
        self.i_and
            .values()
            .iter()
            .chain(self.i_or.values())
            .map(|x| x.abs())
            .sum()
    }

    /// Nonzero effects as `(kind, mask, value)`, AND first, masks ascending.
    pub fn nonzero(&self) -> Vec<(Kind, u32, f64)> {
        let mut out = Vec::new();
        for (kind, vec) in [(Kind::And, &self.i_and), (Kind::Or, &self.i_or)] {
            for (mask, &x) in vec.values().iter().enumerate().skip(1) {
                if x != 0.0 {
                    out.push((kind, mask as u32, x));
                }
            }
        }
        out
    }

    /// Model output on every masked state: `b + Σ_{∅≠T⊆S} I^and_T + Σ_{T∩S≠∅} I^or_T`.
    pub fn reconstruct(&self) -> LatticeVector {
        let and = zeta_subsets(&self.i_and).expect("validated size");
        let or = or_synthesis(&self.i_or).expect("validated size");
        let values = and
            .values()
            .iter()
            .zip(or.values())
            .map(|(a, o)| self.bias + a + o)
            .collect();
        LatticeVector::from_parts(self.n(), values)
    }
}

/// Closed-form effects for a given decomposition.
pub fn extract(v: &ValueTable, d: &Decomposition) -> Result<InteractionSet> {
    let (u_and, u_or) = split_components(v, d)?;
    let mut i_and = mobius_and(&u_and)?.into_values();
    let bias = i_and[0];
    i_and[0] = 0.0;
    let mut i_or = mobius_or(&u_or)?.into_values();
    // The empty OR term never fires; its transform value is meaningless.
    i_or[0] = 0.0;
    let set = InteractionSet::new(
        bias,
        LatticeVector::from_parts(v.n(), i_and),
        LatticeVector::from_parts(v.n(), i_or),
    )?;
    Ok(set.with_label(v.label.clone()))
}

/// How a batch picks each sample's decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractMode {
    AllAnd,
    AllOr,
    EvenSplit,
    Sparsify,
}

impl std::str::FromStr for ExtractMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-and" => Ok(ExtractMode::AllAnd),
            "all-or" => Ok(ExtractMode::AllOr),
            "even-split" => Ok(ExtractMode::EvenSplit),
            "sparsify" => Ok(ExtractMode::Sparsify),
            other => Err(Error::arg(format!("unknown extraction mode {other:?}"))),
        }
    }
}

/// One sample's decomposition, effects, and loss trajectory. Closed-form
/// modes have a single-entry history.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub decomposition: Decomposition,
    pub set: InteractionSet,
    pub loss_history: Vec<f64>,
}

pub fn extract_with(v: &ValueTable, mode: ExtractMode, cfg: &SparsifyConfig) -> Result<Extraction> {
    let closed = |d: Decomposition| -> Result<Extraction> {
        let set = extract(v, &d)?;
        Ok(Extraction {
            loss_history: vec![set.l1_loss()],
            decomposition: d,
            set,
        })
    };
    match mode {
        ExtractMode::AllAnd => closed(Decomposition::all_and(v)),
        ExtractMode::AllOr => closed(Decomposition::all_or(v)),
        ExtractMode::EvenSplit => closed(Decomposition::even_split(v, 0.0)),
        ExtractMode::Sparsify => {
            let r = sparsify(v, cfg)?;
            Ok(Extraction {
                decomposition: r.decomposition,
                set: r.set,
                loss_history: r.loss_history,
            })
        }
    }
}

/// Extracts every table of a batch. Samples are independent.
pub fn extract_batch(tables: &[ValueTable], mode: ExtractMode, cfg: &SparsifyConfig) -> Result<Vec<Extraction>> {
    tables.iter().map(|v| extract_with(v, mode, cfg)).collect()
}

/// `fraction · mean_x |v(x_N) − v(x_∅)|` over a batch.
pub fn salience_threshold(tables: &[ValueTable], fraction: f64) -> Result<f64> {
    let gaps: Vec<f64> = tables.iter().map(ValueTable::gap).collect();
    salience_threshold_from_gaps(&gaps, fraction)
}

pub fn salience_threshold_from_gaps(gaps: &[f64], fraction: f64) -> Result<f64> {
    if gaps.is_empty() {
        return Err(Error::arg("salience threshold of an empty batch"));
    }
    if !(fraction >= 0.0) || !fraction.is_finite() {
        return Err(Error::arg(format!("bad salience fraction {fraction}")));
    }
    let mean = gaps.iter().map(|g| g.abs()).sum::<f64>() / gaps.len() as f64;
    Ok(fraction * mean)
}

/// Anything that can enumerate `(kind, mask, value)` effects over `n` variables.
pub trait EffectSource {
    fn n(&self) -> usize;
    fn effects(&self) -> Vec<(Kind, u32, f64)>;
}

impl EffectSource for InteractionSet {
    fn n(&self) -> usize {
        InteractionSet::n(self)
    }

    fn effects(&self) -> Vec<(Kind, u32, f64)> {
        self.nonzero()
    }
}

/// The effects of a set that exceed the salience threshold in magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SalientSet {
    pub n: usize,
    pub bias: f64,
    pub tau: f64,
    pub and: BTreeMap<u32, f64>,
    pub or: BTreeMap<u32, f64>,
    pub label: Option<String>,
}

impl SalientSet {
    pub fn len(&self) -> usize {
        self.and.len() + self.or.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Survivor counts indexed `[order]` for `order` in `0..=n`.
    pub fn counts_by_order(&self, kind: Kind) -> Vec<usize> {
        let mut counts = vec![0; self.n + 1];
        let map = match kind {
            Kind::And => &self.and,
            Kind::Or => &self.or,
        };
        for mask in map.keys() {
            counts[mask.count_ones() as usize] += 1;
        }
        counts
    }

    pub fn max_order(&self) -> usize {
        self.and
            .keys()
            .chain(self.or.keys())
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// The support as `(kind, mask)` pairs.
    pub fn support(&self) -> Vec<(Kind, u32)> {
        self.and
            .keys()
            .map(|&m| (Kind::And, m))
            .chain(self.or.keys().map(|&m| (Kind::Or, m)))
            .collect()
    }

    pub fn to_interaction_set(&self) -> InteractionSet {
        InteractionSet::from_sparse(self.n, self.bias, &self.and, &self.or)
            .expect("salient entries come from a valid set")
            .with_label(self.label.clone())
    }
}

impl EffectSource for SalientSet {
    fn n(&self) -> usize {
        self.n
    }

    fn effects(&self) -> Vec<(Kind, u32, f64)> {
        self.and
            .iter()
            .map(|(&m, &v)| (Kind::And, m, v))
            .chain(self.or.iter().map(|(&m, &v)| (Kind::Or, m, v)))
            .collect()
    }
}

/// Keeps effects with `|effect| > τ` (strict).
pub fn filter_salient(set: &InteractionSet, tau: f64) -> SalientSet {
    let mut and = BTreeMap::new();
    let mut or = BTreeMap::new();
    for (kind, mask, value) in set.nonzero() {
        if value.abs() > tau {
            match kind {
                Kind::And => and.insert(mask, value),
                Kind::Or => or.insert(mask, value),
            };
        }
    }
    SalientSet {
        n: set.n(),
        bias: set.bias(),
        tau,
        and,
        or,
        label: set.label.clone(),
    }
}
