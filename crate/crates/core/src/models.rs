//! Value tables and the generators that produce them: exact AND-OR games,
//! single interaction functions, overfitting injections, and a tiny
//! dense network evaluated under baseline masking.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{check_n, or_synthesis, zeta_subsets, LatticeVector, SubsetIndex, TOLERANCES};
use crate::rng::seeded;

/// The two interaction families of the logical model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    And,
    Or,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::And => "and",
            Kind::Or => "or",
        })
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "and" => Ok(Kind::And),
            "or" => Ok(Kind::Or),
            other => Err(Error::arg(format!("unknown interaction kind {other:?}"))),
        }
    }
}

/// The outputs `v(x_S)` of one sample over all `2^n` masked states.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    values: LatticeVector,
    pub label: Option<String>,
    pub meta: String,
}

impl ValueTable {
    pub fn new(values: LatticeVector) -> Self {
        ValueTable {
            values,
            label: None,
            meta: String::new(),
        }
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        Ok(Self::new(LatticeVector::new(n, values)?))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_meta(mut self, meta: impl Into<String>) -> Self {
        self.meta = meta.into();
        self
    }

    pub fn n(&self) -> usize {
        self.values.n()
    }

    pub fn values(&self) -> &LatticeVector {
        &self.values
    }

    /// `v(x_∅)`, the all-masked output.
    pub fn empty_value(&self) -> f64 {
        self.values[0]
    }

    /// `v(x_N)`, the unmasked output.
    pub fn full_value(&self) -> f64 {
        self.values[self.values.full_mask()]
    }

    pub fn gap(&self) -> f64 {
        self.full_value() - self.empty_value()
    }
}

/// A sparse AND-OR game with known effects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthGame {
    pub n: usize,
    pub bias: f64,
    #[serde(rename = "and", with = "sparse_entries")]
    pub and_effects: BTreeMap<u32, f64>,
    #[serde(rename = "or", with = "sparse_entries")]
    pub or_effects: BTreeMap<u32, f64>,
}

/// Effects as a list of `{mask, value}` records, ordered by mask.
pub(crate) mod sparse_entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        mask: u32,
        value: f64,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<u32, f64>, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = map.iter().map(|(&mask, &value)| Entry { mask, value }).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, f64>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries.into_iter().map(|e| (e.mask, e.value)).collect())
    }
}

impl GroundTruthGame {
    pub fn new(n: usize, bias: f64) -> Result<Self> {
        check_n(n)?;
        Ok(GroundTruthGame {
            n,
            bias,
            and_effects: BTreeMap::new(),
            or_effects: BTreeMap::new(),
        })
    }

    pub fn effects(&self, kind: Kind) -> &BTreeMap<u32, f64> {
        match kind {
            Kind::And => &self.and_effects,
            Kind::Or => &self.or_effects,
        }
    }

    pub fn insert(&mut self, kind: Kind, mask: u32, value: f64) -> Result<()> {
        SubsetIndex::new(mask, self.n)?;
        if mask == 0 {
            return Err(Error::arg("the empty set carries the bias, not an effect"));
        }
        match kind {
            Kind::And => self.and_effects.insert(mask, value),
            Kind::Or => self.or_effects.insert(mask, value),
        };
        Ok(())
    }

    pub fn contains(&self, kind: Kind, mask: u32) -> bool {
        self.effects(kind).contains_key(&mask)
    }

    pub fn effect_count(&self) -> usize {
        self.and_effects.len() + self.or_effects.len()
    }

    /// All `(kind, mask, value)` triples, AND effects first.
    pub fn entries(&self) -> impl Iterator<Item = (Kind, u32, f64)> + '_ {
        self.and_effects
            .iter()
            .map(|(&m, &v)| (Kind::And, m, v))
            .chain(self.or_effects.iter().map(|(&m, &v)| (Kind::Or, m, v)))
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        if !self.bias.is_finite() {
            return Err(Error::arg("non-finite bias"));
        }
        for (kind, mask, value) in self.entries() {
            if mask == 0 {
                return Err(Error::Invariant(format!("{kind} effect on the empty set")));
            }
            SubsetIndex::new(mask, self.n)?;
            if !value.is_finite() {
                return Err(Error::arg(format!("non-finite {kind} effect at mask {mask}")));
            }
        }
        Ok(())
    }

    /// The ground-truth AND and OR effect vectors, with the bias in the AND ∅ slot.
    pub fn effect_vectors(&self) -> (LatticeVector, LatticeVector) {
        let size = 1usize << self.n;
        let mut and = vec![0.0; size];
        let mut or = vec![0.0; size];
        and[0] = self.bias;
        for (&m, &v) in &self.and_effects {
            and[m as usize] = v;
        }
        for (&m, &v) in &self.or_effects {
            or[m as usize] = v;
        }
        (
            LatticeVector::from_parts(self.n, and),
            LatticeVector::from_parts(self.n, or),
        )
    }
}

/// Table of a pure interaction function: AND pays `c` on supersets of `T`,
/// OR pays `c` whenever `S` meets `T`.
pub fn interaction_function_table(t: SubsetIndex, c: f64, kind: Kind) -> Result<ValueTable> {
    if t.is_empty() {
        return Err(Error::arg("interaction function needs a non-empty subset"));
    }
    let tb = t.index();
    let values = LatticeVector::from_fn(t.n(), |s| {
        let hit = match kind {
            Kind::And => s & tb == tb,
            Kind::Or => s & tb != 0,
        };
        if hit {
            c
        } else {
            0.0
        }
    })?;
    Ok(ValueTable::new(values).with_meta(format!("interaction-function kind={kind} mask={tb} c={c}")))
}

/// `v(x_S) = bias + sum_{∅≠T⊆S} I^and_T + sum_{T∩S≠∅} I^or_T`.
pub fn realize_table(game: &GroundTruthGame) -> Result<ValueTable> {
    game.validate()?;
    let (and, or) = game.effect_vectors();
    let and_part = zeta_subsets(&and)?;
    let or_part = or_synthesis(&or)?;
    Ok(ValueTable::new(and_part.add(&or_part)?).with_meta("realized ground-truth game"))
}

/// Effect magnitudes drawn uniformly from `[floor, ceil]` with a random sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectRange {
    pub floor: f64,
    pub ceil: f64,
}

impl EffectRange {
    pub fn new(floor: f64, ceil: f64) -> Result<Self> {
        if !(floor >= 0.0 && ceil >= floor && ceil.is_finite()) {
            return Err(Error::arg(format!("bad effect range [{floor}, {ceil}]")));
        }
        Ok(EffectRange { floor, ceil })
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        let mag = if self.ceil > self.floor {
            rng.gen_range(self.floor..=self.ceil)
        } else {
            self.floor
        };
        if rng.gen_bool(0.5) {
            mag
        } else {
            -mag
        }
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Number of distinct `(kind, T)` slots of order `k`. Singleton AND and OR
/// functions coincide, so order-1 slots are AND only.
fn slot_capacity(n: usize, k: usize) -> u64 {
    let c = binomial(n, k);
    if k == 1 {
        c
    } else {
        2 * c
    }
}

fn random_subset(rng: &mut impl Rng, n: usize, k: usize) -> u32 {
    index::sample(rng, n, k).into_iter().fold(0u32, |acc, i| acc | (1 << i))
}

fn draw_kind(rng: &mut impl Rng, order: usize) -> Kind {
    if order == 1 || rng.gen_bool(0.5) {
        Kind::And
    } else {
        Kind::Or
    }
}

/// Picks a free `(kind, T)` slot of the given order uniformly at random.
fn draw_free_slot(rng: &mut impl Rng, game: &GroundTruthGame, order: usize, used_at_order: u64) -> (Kind, u32) {
    let cap = slot_capacity(game.n, order);
    if used_at_order * 2 < cap {
        loop {
            let mask = random_subset(rng, game.n, order);
            let kind = draw_kind(rng, order);
            if !game.contains(kind, mask) {
                return (kind, mask);
            }
        }
    }
    let mut free = Vec::new();
    for mask in 1u32..(1 << game.n) {
        if mask.count_ones() as usize != order {
            continue;
        }
        for kind in [Kind::And, Kind::Or] {
            if kind == Kind::Or && order == 1 {
                continue;
            }
            if !game.contains(kind, mask) {
                free.push((kind, mask));
            }
        }
    }
    free[rng.gen_range(0..free.len())]
}

fn orders_in(game: &GroundTruthGame) -> Vec<u64> {
    let mut used = vec![0u64; game.n + 1];
    for (_, mask, _) in game.entries() {
        used[mask.count_ones() as usize] += 1;
    }
    used
}

/// Draws `m` distinct effects with orders distributed by `order_weights`
/// (index `k - 1` holds the weight of order `k`).
pub fn sample_sparse_game(
    n: usize,
    m: usize,
    order_weights: &[f64],
    range: EffectRange,
    seed: u64,
) -> Result<GroundTruthGame> {
    check_n(n)?;
    if order_weights.len() != n {
        return Err(Error::arg(format!(
            "need {n} order weights, got {}",
            order_weights.len()
        )));
    }
    if order_weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::arg("order weights must be non-negative"));
    }
    let total: f64 = order_weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::arg(format!("order weights sum to {total}, not 1")));
    }
    let capacity: u64 = (1..=n)
        .filter(|&k| order_weights[k - 1] > 0.0)
        .map(|k| slot_capacity(n, k))
        .sum();
    if m as u64 > capacity {
        return Err(Error::arg(format!(
            "cannot place {m} distinct effects; only {capacity} slots have positive weight"
        )));
    }

    let mut rng = seeded(seed, 0);
    let mut game = GroundTruthGame::new(n, 0.0)?;
    game.bias = rng.gen_range(-range.ceil..=range.ceil);
    let mut used = vec![0u64; n + 1];
    for _ in 0..m {
        // Renormalize over orders that still have free slots.
        let weights: Vec<f64> = (1..=n)
            .map(|k| {
                if used[k] < slot_capacity(n, k) {
                    order_weights[k - 1]
                } else {
                    0.0
                }
            })
            .collect();
        let order = pick_weighted(&mut rng, &weights) + 1;
        let (kind, mask) = draw_free_slot(&mut rng, &game, order, used[order]);
        game.insert(kind, mask, range.draw(&mut rng))?;
        used[order] += 1;
    }
    Ok(game)
}

fn pick_weighted(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen_range(0.0..total);
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Adds `pair_count` offsetting pairs of high-order effects: each pair is a
/// `+magnitude` and a `-magnitude` effect of the same kind on two distinct
/// subsets of order at least `min_order`.
pub fn inject_overfit(
    game: &GroundTruthGame,
    min_order: usize,
    pair_count: usize,
    magnitude: f64,
    seed: u64,
) -> Result<GroundTruthGame> {
    game.validate()?;
    let n = game.n;
    if min_order == 0 || min_order > n {
        return Err(Error::arg(format!("minimum order {min_order} outside 1..={n}")));
    }
    if !magnitude.is_finite() {
        return Err(Error::arg("non-finite magnitude"));
    }
    let mut out = game.clone();
    if pair_count == 0 {
        return Ok(out);
    }
    let used = orders_in(game);
    let free: u64 = (min_order..=n).map(|k| slot_capacity(n, k) - used[k]).sum();
    if 2 * pair_count as u64 > free {
        return Err(Error::arg(format!(
            "only {free} free slots of order >= {min_order}, need {}",
            2 * pair_count
        )));
    }

    let mut rng = seeded(seed, 1);
    let mut used = used;
    for _ in 0..pair_count {
        // Pick the kind first so both halves of a pair share it.
        let kind = if min_order == 1 && rng.gen_bool(0.5) {
            Kind::And
        } else if rng.gen_bool(0.5) {
            Kind::And
        } else {
            Kind::Or
        };
        for sign in [1.0, -1.0] {
            let weights: Vec<f64> = (1..=n)
                .map(|k| {
                    let free_k = free_of_kind(&out, k, kind);
                    if k >= min_order && free_k > 0 {
                        free_k as f64
                    } else {
                        0.0
                    }
                })
                .collect();
            let (kind, mask) = if weights.iter().any(|&w| w > 0.0) {
                let order = pick_weighted(&mut rng, &weights) + 1;
                (kind, draw_free_of_kind(&mut rng, &out, order, kind))
            } else {
                // This kind is exhausted; fall back to whichever slot is free.
                let weights: Vec<f64> = (1..=n)
                    .map(|k| {
                        if k >= min_order {
                            (slot_capacity(n, k) - used[k]) as f64
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let order = pick_weighted(&mut rng, &weights) + 1;
                draw_free_slot(&mut rng, &out, order, used[order])
            };
            out.insert(kind, mask, sign * magnitude)?;
            used[mask.count_ones() as usize] += 1;
        }
    }
    Ok(out)
}

fn free_of_kind(game: &GroundTruthGame, order: usize, kind: Kind) -> u64 {
    if kind == Kind::Or && order == 1 {
        return 0;
    }
    let taken = game
        .effects(kind)
        .keys()
        .filter(|m| m.count_ones() as usize == order)
        .count() as u64;
    binomial(game.n, order) - taken
}

fn draw_free_of_kind(rng: &mut impl Rng, game: &GroundTruthGame, order: usize, kind: Kind) -> u32 {
    let free = free_of_kind(game, order, kind);
    if free * 2 >= binomial(game.n, order) {
        loop {
            let mask = random_subset(rng, game.n, order);
            if !game.contains(kind, mask) {
                return mask;
            }
        }
    }
    let masks: Vec<u32> = (1u32..(1 << game.n))
        .filter(|m| m.count_ones() as usize == order && !game.contains(kind, *m))
        .collect();
    masks[rng.gen_range(0..masks.len())]
}

/// Keeps the sample's values on `S` and the baseline's elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingScheme {
    pub sample: Vec<f64>,
    pub baseline: Vec<f64>,
}

impl MaskingScheme {
    pub fn new(sample: Vec<f64>, baseline: Vec<f64>) -> Result<Self> {
        if sample.len() != baseline.len() {
            return Err(Error::arg(format!(
                "sample has {} features, baseline {}",
                sample.len(),
                baseline.len()
            )));
        }
        check_n(sample.len())?;
        Ok(MaskingScheme { sample, baseline })
    }

    pub fn n(&self) -> usize {
        self.sample.len()
    }

    pub fn masked_input(&self, s: usize) -> Vec<f64> {
        self.sample
            .iter()
            .zip(&self.baseline)
            .enumerate()
            .map(|(i, (&x, &b))| if s >> i & 1 == 1 { x } else { b })
            .collect()
    }
}

/// Per-feature mean over a set of samples, the usual masking baseline.
pub fn mean_baseline(samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::arg("mean baseline of an empty sample set"))?;
    let width = first.len();
    let mut mean = vec![0.0; width];
    for s in samples {
        if s.len() != width {
            return Err(Error::arg("samples have different widths"));
        }
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    let count = samples.len() as f64;
    mean.iter_mut().for_each(|m| *m /= count);
    Ok(mean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn new(inputs: usize, outputs: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != inputs * outputs || bias.len() != outputs {
            return Err(Error::arg(format!(
                "layer {inputs}->{outputs} got {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|w| !w.is_finite()) {
            return Err(Error::arg("non-finite layer parameter"));
        }
        Ok(DenseLayer {
            inputs,
            outputs,
            weights,
            bias,
        })
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b)
            .collect()
    }
}

/// Dense layers with rectified-linear hidden activations and a two-class
/// score head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TinyNet {
    layers: Vec<DenseLayer>,
}

impl TinyNet {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        let last = layers.last().ok_or_else(|| Error::arg("network has no layers"))?;
        if last.outputs != 2 {
            return Err(Error::arg(format!(
                "output head must have 2 scores, has {}",
                last.outputs
            )));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::arg(format!(
                    "layer widths do not chain: {} -> {}",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        Ok(TinyNet { layers })
    }

    /// Uniform Glorot-style initialization. `widths` lists the input width
    /// and every hidden width; the two-score head is appended.
    pub fn random(widths: &[usize], seed: u64) -> Result<Self> {
        if widths.is_empty() || widths.contains(&0) {
            return Err(Error::arg("layer widths must be positive"));
        }
        let mut rng = seeded(seed, 2);
        let mut dims = widths.to_vec();
        dims.push(2);
        let layers = dims
            .windows(2)
            .map(|w| {
                let (i, o) = (w[0], w[1]);
                let limit = (6.0 / (i + o) as f64).sqrt();
                let weights = (0..i * o).map(|_| rng.gen_range(-limit..=limit)).collect();
                let bias = (0..o).map(|_| rng.gen_range(-0.1..=0.1)).collect();
                DenseLayer::new(i, o, weights, bias)
            })
            .collect::<Result<Vec<_>>>()?;
        TinyNet::new(layers)
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn scores(&self, x: &[f64]) -> [f64; 2] {
        let mut h = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.forward(&h);
            if i < last {
                h.iter_mut().for_each(|z| *z = z.max(0.0));
            }
        }
        [h[0], h[1]]
    }

    /// `log(p / (1 - p))` of the softmax probability of `class`, with `p`
    /// clamped away from 0 and 1.
    pub fn confidence(&self, x: &[f64], class: usize) -> f64 {
        let s = self.scores(x);
        let other = 1 - class;
        // p = 1 / (1 + exp(s_other - s_class)), computed without overflow.
        let d = s[other] - s[class];
        let p = if d > 0.0 {
            let e = (-d).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + d.exp())
        };
        let eps = TOLERANCES.logit_clamp;
        let p = p.clamp(eps, 1.0 - eps);
        (p / (1.0 - p)).ln()
    }
}

pub fn net_value_table(net: &TinyNet, scheme: &MaskingScheme, class_index: usize) -> Result<ValueTable> {
    if net.input_width() != scheme.n() {
        return Err(Error::arg(format!(
            "network expects {} inputs, masking scheme has {}",
            net.input_width(),
            scheme.n()
        )));
    }
    if class_index > 1 {
        return Err(Error::arg(format!("class index {class_index} not in {{0, 1}}")));
    }
    let values = LatticeVector::from_fn(scheme.n(), |s| net.confidence(&scheme.masked_input(s), class_index))?;
    Ok(ValueTable::new(values).with_meta(format!("tiny-net class={class_index}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::mobius_and;

    #[test]
    fn and_interaction_function() {
        let t = SubsetIndex::from_variables(&[1, 2], 3).unwrap();
        let table = interaction_function_table(t, 3.0, Kind::And).unwrap();
        let hits: Vec<usize> = (0..8).filter(|&s| table.values()[s] == 3.0).collect();
        assert_eq!(hits, vec![0b011, 0b111]);
        assert!((0..8).all(|s| table.values()[s] == 0.0 || hits.contains(&s)));
    }

    #[test]
    fn or_interaction_function() {
        let t = SubsetIndex::from_variables(&[1], 2).unwrap();
        let table = interaction_function_table(t, 2.0, Kind::Or).unwrap();
        assert_eq!(table.values().values(), &[0.0, 2.0, 0.0, 2.0]);
    }

    #[test]
    fn interaction_function_rejects_empty() {
        let t = SubsetIndex::empty(3).unwrap();
        assert!(matches!(
            interaction_function_table(t, 1.0, Kind::And),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn realize_matches_hand_sum() {
        let mut g = GroundTruthGame::new(2, 0.0).unwrap();
        g.insert(Kind::And, 0b01, 1.0).unwrap();
        g.insert(Kind::And, 0b10, 2.0).unwrap();
        g.insert(Kind::And, 0b11, 2.0).unwrap();
        assert_eq!(realize_table(&g).unwrap().values().values(), &[0.0, 1.0, 2.0, 5.0]);
    }

    #[test]
    fn realize_single_and_equals_interaction_function() {
        let mut g = GroundTruthGame::new(3, 0.0).unwrap();
        g.insert(Kind::And, 0b011, 3.0).unwrap();
        let t = SubsetIndex::new(0b011, 3).unwrap();
        assert_eq!(
            realize_table(&g).unwrap().values(),
            interaction_function_table(t, 3.0, Kind::And).unwrap().values()
        );
    }

    #[test]
    fn realize_bias_only() {
        let g = GroundTruthGame::new(4, 7.0).unwrap();
        assert!(realize_table(&g).unwrap().values().values().iter().all(|&x| x == 7.0));
    }

    #[test]
    fn insert_rejects_empty_mask() {
        let mut g = GroundTruthGame::new(3, 0.0).unwrap();
        assert!(g.insert(Kind::And, 0, 1.0).is_err());
        assert!(g.insert(Kind::Or, 0b1000, 1.0).is_err());
    }

    fn low_orders(n: usize) -> Vec<f64> {
        let mut w = vec![0.0; n];
        w[0] = 1.0 / 3.0;
        w[1] = 1.0 / 3.0;
        w[2] = 1.0 / 3.0;
        w
    }

    #[test]
    fn sparse_game_zero_effects_is_constant() {
        let g = sample_sparse_game(5, 0, &low_orders(5), EffectRange::new(1.0, 2.0).unwrap(), 3).unwrap();
        assert_eq!(g.effect_count(), 0);
        let t = realize_table(&g).unwrap();
        assert!(t.values().values().iter().all(|&x| x == g.bias));
    }

    #[test]
    fn sparse_game_is_deterministic() {
        let r = EffectRange::new(1.0, 2.0).unwrap();
        let a = sample_sparse_game(10, 15, &low_orders(10), r, 42).unwrap();
        let b = sample_sparse_game(10, 15, &low_orders(10), r, 42).unwrap();
        let c = sample_sparse_game(10, 15, &low_orders(10), r, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.effect_count(), 15);
        for (_, mask, value) in a.entries() {
            assert!((1..=3).contains(&mask.count_ones()));
            assert!((1.0..=2.0).contains(&value.abs()));
        }
        assert!(a.or_effects.keys().all(|m| m.count_ones() > 1));
    }

    #[test]
    fn sparse_game_rejects_infeasible_counts() {
        let mut w = vec![0.0; 3];
        w[0] = 1.0;
        // Only three order-1 slots exist.
        let r = EffectRange::new(1.0, 2.0).unwrap();
        assert!(sample_sparse_game(3, 4, &w, r, 0).is_err());
        let g = sample_sparse_game(3, 3, &w, r, 0).unwrap();
        assert_eq!(g.and_effects.len(), 3);
        assert!(sample_sparse_game(3, 1, &[0.5, 0.2, 0.2], r, 0).is_err());
    }

    #[test]
    fn sparse_game_fills_every_slot_when_asked() {
        let w = vec![0.25, 0.5, 0.25];
        // 3 + 6 + 2 slots.
        let g = sample_sparse_game(3, 11, &w, EffectRange::new(1.0, 1.0).unwrap(), 5).unwrap();
        assert_eq!(g.effect_count(), 11);
    }

    #[test]
    fn inject_zero_pairs_is_identity() {
        let g = sample_sparse_game(8, 5, &low_orders(8), EffectRange::new(1.0, 2.0).unwrap(), 1).unwrap();
        assert_eq!(inject_overfit(&g, 6, 0, 5.0, 9).unwrap(), g);
    }

    #[test]
    fn inject_adds_offsetting_high_order_pairs() {
        let g = sample_sparse_game(10, 10, &low_orders(10), EffectRange::new(1.0, 2.0).unwrap(), 1).unwrap();
        let h = inject_overfit(&g, 7, 10, 5.0, 9).unwrap();
        assert_eq!(h.effect_count(), g.effect_count() + 20);
        let added: Vec<(Kind, u32, f64)> = h.entries().filter(|&(k, m, _)| !g.contains(k, m)).collect();
        assert_eq!(added.len(), 20);
        assert!(added.iter().all(|&(_, m, v)| m.count_ones() >= 7 && v.abs() == 5.0));
        let net: f64 = added.iter().map(|e| e.2).sum();
        assert_eq!(net, 0.0);
        // Offsetting pairs leave the unmasked output untouched.
        let before = realize_table(&g).unwrap();
        let after = realize_table(&h).unwrap();
        assert!((before.full_value() - after.full_value()).abs() < 1e-9);
    }

    #[test]
    fn inject_rejects_exhausted_orders() {
        let g = GroundTruthGame::new(4, 0.0).unwrap();
        // Order 4 has one AND and one OR slot.
        assert!(inject_overfit(&g, 4, 1, 1.0, 0).is_ok());
        assert!(inject_overfit(&g, 4, 2, 1.0, 0).is_err());
        assert!(inject_overfit(&g, 5, 1, 1.0, 0).is_err());
    }

    #[test]
    fn masking_keeps_sample_on_s() {
        let m = MaskingScheme::new(vec![1.0, 2.0, 3.0], vec![0.0, -1.0, -2.0]).unwrap();
        assert_eq!(m.masked_input(0b101), vec![1.0, -1.0, 3.0]);
        assert_eq!(m.masked_input(0), vec![0.0, -1.0, -2.0]);
        assert!(MaskingScheme::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn mean_baseline_averages() {
        let b = mean_baseline(&[vec![1.0, 2.0], vec![3.0, 6.0]]).unwrap();
        assert_eq!(b, vec![2.0, 4.0]);
        assert!(mean_baseline(&[]).is_err());
    }

    #[test]
    fn net_table_is_constant_when_sample_equals_baseline() {
        let net = TinyNet::random(&[4, 6, 5], 11).unwrap();
        let x = vec![0.3, -0.2, 0.9, 1.1];
        let m = MaskingScheme::new(x.clone(), x).unwrap();
        let t = net_value_table(&net, &m, 1).unwrap();
        let first = t.values()[0];
        assert!(t.values().values().iter().all(|&v| v == first));
    }

    #[test]
    fn net_logit_is_zero_at_even_odds() {
        let layer = DenseLayer::new(2, 2, vec![0.0; 4], vec![0.4, 0.4]).unwrap();
        let net = TinyNet::new(vec![layer]).unwrap();
        let m = MaskingScheme::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let t = net_value_table(&net, &m, 0).unwrap();
        assert!(t.values().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn net_logit_is_clamped() {
        let layer = DenseLayer::new(1, 2, vec![1000.0, -1000.0], vec![0.0, 0.0]).unwrap();
        let net = TinyNet::new(vec![layer]).unwrap();
        let v = net.confidence(&[1.0], 0);
        let eps = TOLERANCES.logit_clamp;
        assert!((v - ((1.0 - eps) / eps).ln()).abs() < 1e-9);
        assert!(v.is_finite());
    }

    #[test]
    fn net_width_mismatch_is_an_error() {
        let net = TinyNet::random(&[3], 0).unwrap();
        let m = MaskingScheme::new(vec![0.0; 4], vec![0.0; 4]).unwrap();
        assert!(net_value_table(&net, &m, 0).is_err());
    }

    #[test]
    fn linear_net_has_only_first_order_and_effects() {
        // Identity-like head: score_0 = w·x, score_1 = 0, so the logit is w·x
        // (within the clamp).
        let w = vec![0.5, -1.0, 0.25, 2.0];
        let mut weights = w.clone();
        weights.extend(vec![0.0; 4]);
        let net = TinyNet::new(vec![DenseLayer::new(4, 2, weights, vec![0.1, 0.0]).unwrap()]).unwrap();
        let m = MaskingScheme::new(vec![1.0, 2.0, -1.0, 0.5], vec![0.0; 4]).unwrap();
        let t = net_value_table(&net, &m, 0).unwrap();
        let i = mobius_and(t.values()).unwrap();
        for mask in 0..16usize {
            if mask.count_ones() >= 2 {
                assert!(i[mask].abs() < 1e-12, "mask {mask:#b}: {}", i[mask]);
            }
        }
        assert!((i[0b0001] - 0.5).abs() < 1e-12);
        assert!((i[0b0010] + 2.0).abs() < 1e-12);
    }
}
