//! Seeded sample populations built from the sparse-game generators.
//! Every sample's seed is drawn from a stream of the master seed, so a
//! population is a pure function of its parameters.

use rand::Rng;

use crate::error::{Error, Result};
use crate::io::TruthSidecar;
use crate::models::{
    inject_overfit, mean_baseline, net_value_table, sample_sparse_game, EffectRange, GroundTruthGame, MaskingScheme,
    TinyNet, ValueTable,
};
use crate::rng::seeded;

const BASE_STREAM: u64 = 10;
const PICK_STREAM: u64 = 11;
const INJECT_STREAM: u64 = 12;
const TRAIN_STREAM: u64 = 13;
const TEST_STREAM: u64 = 14;
const INPUT_STREAM: u64 = 15;

pub fn sample_label(i: usize) -> String {
    format!("s{i:03}")
}

/// Uniform weights over orders `lo..=hi`, zero elsewhere.
pub fn uniform_orders(n: usize, lo: usize, hi: usize) -> Result<Vec<f64>> {
    if lo == 0 || lo > hi || hi > n {
        return Err(Error::Argument(format!("order band {lo}..={hi} invalid for n = {n}")));
    }
    let w = 1.0 / (hi - lo + 1) as f64;
    Ok((1..=n).map(|k| if (lo..=hi).contains(&k) { w } else { 0.0 }).collect())
}

/// `count` per-sample seeds derived from `seed` on `stream`.
fn child_seeds(seed: u64, stream: u64, count: usize) -> Vec<u64> {
    let mut rng = seeded(seed, stream);
    (0..count).map(|_| rng.gen()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameFamily {
    pub n: usize,
    pub effects: usize,
    pub min_order: usize,
    pub max_order: usize,
    pub range: EffectRange,
}

impl GameFamily {
    /// Ten variables, fifteen effects of orders 2 to 4, magnitudes in [10, 12].
    pub fn recovery() -> Self {
        GameFamily {
            n: 10,
            effects: 15,
            min_order: 2,
            max_order: 4,
            range: EffectRange {
                floor: 10.0,
                ceil: 12.0,
            },
        }
    }

    pub fn sample(&self, seed: u64) -> Result<GroundTruthGame> {
        let weights = uniform_orders(self.n, self.min_order, self.max_order)?;
        sample_sparse_game(self.n, self.effects, &weights, self.range, seed)
    }

    pub fn population(&self, seed: u64, samples: usize) -> Result<Vec<TruthSidecar>> {
        child_seeds(seed, BASE_STREAM, samples)
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(TruthSidecar {
                    label: sample_label(i),
                    injected: false,
                    game: self.sample(s)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverfitSpec {
    pub samples: usize,
    /// Number of injected samples is `round(fraction · samples)`.
    pub fraction: f64,
    pub min_order: usize,
    pub pairs: usize,
    pub magnitude: f64,
}

impl Default for OverfitSpec {
    fn default() -> Self {
        OverfitSpec {
            samples: 100,
            fraction: 0.2,
            min_order: 7,
            pairs: 10,
            magnitude: 20.0,
        }
    }
}

/// A base population with offsetting high-order pairs planted in a
/// uniformly chosen subset of samples.
pub fn overfit_population(family: &GameFamily, spec: &OverfitSpec, seed: u64) -> Result<Vec<TruthSidecar>> {
    if !(0.0..=1.0).contains(&spec.fraction) {
        return Err(Error::Argument(format!(
            "overfit fraction {} outside [0, 1]",
            spec.fraction
        )));
    }
    let mut pop = family.population(seed, spec.samples)?;
    let k = (spec.fraction * spec.samples as f64).round() as usize;
    let mut pick = seeded(seed, PICK_STREAM);
    let chosen = rand::seq::index::sample(&mut pick, spec.samples, k);
    let seeds = child_seeds(seed, INJECT_STREAM, spec.samples);
    for i in chosen {
        let s = &mut pop[i];
        s.game = inject_overfit(&s.game, spec.min_order, spec.pairs, spec.magnitude, seeds[i])?;
        s.injected = true;
    }
    Ok(pop)
}

fn merge(a: &GroundTruthGame, b: &GroundTruthGame) -> Result<GroundTruthGame> {
    let mut out = a.clone();
    for (kind, mask, value) in b.entries() {
        if out.contains(kind, mask) {
            return Err(Error::Invariant(format!("{kind} effect {mask:#b} drawn twice")));
        }
        out.insert(kind, mask, value)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub n: usize,
    pub samples: usize,
    /// Shared effects per sample, orders `1..=shared_max_order`.
    pub shared_effects: usize,
    pub shared_max_order: usize,
    /// Independently drawn effects per sample, orders `private_min_order..=private_max_order`.
    pub private_effects: usize,
    pub private_min_order: usize,
    pub private_max_order: usize,
    pub range: EffectRange,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            n: 10,
            samples: 30,
            shared_effects: 6,
            shared_max_order: 2,
            private_effects: 2,
            private_min_order: 5,
            private_max_order: 5,
            range: EffectRange {
                floor: 10.0,
                ceil: 12.0,
            },
        }
    }
}

/// Two populations with the same labels. Sample `i` carries the same
/// low-order effects in both; its high-order effects are drawn
/// independently for each side.
pub fn split_populations(spec: &SplitSpec, seed: u64) -> Result<(Vec<TruthSidecar>, Vec<TruthSidecar>)> {
    let shared_w = uniform_orders(spec.n, 1, spec.shared_max_order)?;
    let private_w = uniform_orders(spec.n, spec.private_min_order, spec.private_max_order)?;
    let base = child_seeds(seed, BASE_STREAM, spec.samples);
    let train = child_seeds(seed, TRAIN_STREAM, spec.samples);
    let test = child_seeds(seed, TEST_STREAM, spec.samples);
    let mut a = Vec::with_capacity(spec.samples);
    let mut b = Vec::with_capacity(spec.samples);
    for i in 0..spec.samples {
        let low = sample_sparse_game(spec.n, spec.shared_effects, &shared_w, spec.range, base[i])?;
        for (side, s) in [(&mut a, train[i]), (&mut b, test[i])] {
            let high = sample_sparse_game(spec.n, spec.private_effects, &private_w, spec.range, s)?;
            side.push(TruthSidecar {
                label: sample_label(i),
                injected: false,
                game: merge(&low, &high)?,
            });
        }
    }
    Ok((a, b))
}

/// Tables of a randomly initialized net on `samples` inputs drawn
/// uniformly from `[-1, 1]^n`, masked towards the mean input.
pub fn net_population(widths: &[usize], samples: usize, class_index: usize, seed: u64) -> Result<Vec<ValueTable>> {
    let net = TinyNet::random(widths, seed)?;
    let n = net.input_width();
    let mut rng = seeded(seed, INPUT_STREAM);
    let inputs: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect();
    let baseline = mean_baseline(&inputs)?;
    inputs
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            let scheme = MaskingScheme::new(x, baseline.clone())?;
            Ok(net_value_table(&net, &scheme, class_index)?
                .with_label(sample_label(i))
                .with_meta(format!("tiny-net widths={widths:?} seed={seed}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overfit_marks_exact_count() {
        let fam = GameFamily::recovery();
        let spec = OverfitSpec {
            samples: 30,
            ..Default::default()
        };
        let pop = overfit_population(&fam, &spec, 4).unwrap();
        assert_eq!(pop.iter().filter(|s| s.injected).count(), 6);
        for s in &pop {
            let high = s.game.entries().filter(|(_, m, _)| m.count_ones() >= 7).count();
            assert_eq!(high, if s.injected { 20 } else { 0 });
        }
        assert_eq!(pop, overfit_population(&fam, &spec, 4).unwrap());
    }

    #[test]
    fn split_shares_low_orders_only() {
        let spec = SplitSpec {
            samples: 5,
            ..Default::default()
        };
        let (a, b) = split_populations(&spec, 2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.label, y.label);
            let low = |g: &GroundTruthGame| -> Vec<_> { g.entries().filter(|(_, m, _)| m.count_ones() <= 2).collect() };
            assert_eq!(low(&x.game), low(&y.game));
            assert_eq!(x.game.effect_count(), 8);
        }
    }

    #[test]
    fn net_population_is_seeded() {
        let a = net_population(&[4, 6], 3, 0, 5).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a[0].n(), 4);
        assert_eq!(a, net_population(&[4, 6], 3, 0, 5).unwrap());
    }

    #[test]
    fn order_band_validation() {
        assert!(uniform_orders(5, 0, 2).is_err());
        assert!(uniform_orders(5, 3, 6).is_err());
        assert_eq!(uniform_orders(3, 2, 3).unwrap(), vec![0.0, 0.5, 0.5]);
    }
}
