//! Per-sample order profiles and cross-population Jaccard similarity.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::extraction::{filter_salient, EffectSource, InteractionSet, SalientSet};
use crate::models::Kind;

/// Positive and negative effect strength per interaction order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderProfile {
    pub n: usize,
    /// `j_pos[k - 1]` for orders `k = 1..=n`.
    pub j_pos: Vec<f64>,
    pub j_neg: Vec<f64>,
    pub salient_count: usize,
    pub source_salient: bool,
}

impl OrderProfile {
    /// Total strength `j_pos + j_neg` at order `k`.
    pub fn strength(&self, k: usize) -> f64 {
        self.j_pos[k - 1] + self.j_neg[k - 1]
    }

    /// `min(j_pos, j_neg)` at order `k`: strength that cancels within the order.
    pub fn offset_mass(&self, k: usize) -> f64 {
        self.j_pos[k - 1].min(self.j_neg[k - 1])
    }

    pub fn total(&self) -> f64 {
        self.j_pos.iter().chain(&self.j_neg).sum()
    }
}

/// Profile over every effect the source reports.
pub fn profile_of<E: EffectSource>(source: &E, source_salient: bool) -> OrderProfile {
    let n = source.n();
    let mut j_pos = vec![0.0; n];
    let mut j_neg = vec![0.0; n];
    let mut count = 0;
    for (_, mask, value) in source.effects() {
        let k = mask.count_ones() as usize;
        if k == 0 || value == 0.0 {
            continue;
        }
        if value > 0.0 {
            j_pos[k - 1] += value;
        } else {
            j_neg[k - 1] -= value;
        }
        count += 1;
    }
    OrderProfile {
        n,
        j_pos,
        j_neg,
        salient_count: count,
        source_salient,
    }
}

/// Profile over salient effects when `tau` is given, else over all effects.
pub fn order_profile(set: &InteractionSet, tau: Option<f64>) -> OrderProfile {
    match tau {
        Some(t) => profile_of(&filter_salient(set, t), true),
        None => profile_of(set, false),
    }
}

/// Strength-weighted mean order; `None` for an all-zero profile.
pub fn average_order(p: &OrderProfile) -> Option<f64> {
    let total = p.total();
    if total <= 0.0 {
        return None;
    }
    let weighted: f64 = (1..=p.n).map(|k| k as f64 * p.strength(k)).sum();
    Some(weighted / total)
}

/// Mean effect per `(kind, mask)` slot over a population, split into
/// non-negative positive and negative parts.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionDistribution {
    pub n: usize,
    pub pos: BTreeMap<(Kind, u32), f64>,
    pub neg: BTreeMap<(Kind, u32), f64>,
}

impl InteractionDistribution {
    pub fn is_zero(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn l1(&self) -> f64 {
        self.pos.values().chain(self.neg.values()).sum()
    }

    /// Keeps only slots whose mask satisfies `keep`.
    pub fn restricted(&self, keep: impl Fn(u32) -> bool) -> InteractionDistribution {
        let filter = |m: &BTreeMap<(Kind, u32), f64>| {
            m.iter()
                .filter(|((_, mask), _)| keep(*mask))
                .map(|(&k, &v)| (k, v))
                .collect()
        };
        InteractionDistribution {
            n: self.n,
            pos: filter(&self.pos),
            neg: filter(&self.neg),
        }
    }
}

pub fn mean_distribution<E: EffectSource>(sets: &[E]) -> Result<InteractionDistribution> {
    let first = sets
        .first()
        .ok_or_else(|| Error::Argument("mean distribution of an empty population".into()))?;
    let n = first.n();
    let mut sums: BTreeMap<(Kind, u32), f64> = BTreeMap::new();
    for (idx, set) in sets.iter().enumerate() {
        if set.n() != n {
            return Err(Error::Argument(format!(
                "sample {idx} has n = {}, expected {n}",
                set.n()
            )));
        }
        for (kind, mask, value) in set.effects() {
            *sums.entry((kind, mask)).or_insert(0.0) += value;
        }
    }
    let count = sets.len() as f64;
    let mut pos = BTreeMap::new();
    let mut neg = BTreeMap::new();
    for (slot, sum) in sums {
        let mean = sum / count;
        if mean > 0.0 {
            pos.insert(slot, mean);
        } else if mean < 0.0 {
            neg.insert(slot, -mean);
        }
    }
    Ok(InteractionDistribution { n, pos, neg })
}

fn min_max_sums(a: &BTreeMap<(Kind, u32), f64>, b: &BTreeMap<(Kind, u32), f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0, 0.0);
    for (slot, &x) in a {
        let y = b.get(slot).copied().unwrap_or(0.0);
        lo += x.min(y);
        hi += x.max(y);
    }
    for (slot, &y) in b {
        if !a.contains_key(slot) {
            hi += y;
        }
    }
    (lo, hi)
}

/// `‖min(d1, d2)‖₁ / ‖max(d1, d2)‖₁`; `None` when both are zero.
pub fn jaccard(d1: &InteractionDistribution, d2: &InteractionDistribution) -> Result<Option<f64>> {
    if d1.n != d2.n {
        return Err(Error::Argument(format!(
            "distributions over n = {} and n = {}",
            d1.n, d2.n
        )));
    }
    let (lo_p, hi_p) = min_max_sums(&d1.pos, &d2.pos);
    let (lo_n, hi_n) = min_max_sums(&d1.neg, &d2.neg);
    let hi = hi_p + hi_n;
    if hi == 0.0 {
        return Ok(None);
    }
    Ok(Some((lo_p + lo_n) / hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    pub sim_global: Option<f64>,
    /// `sim_per_order[k - 1]`; `None` where both populations are zero.
    pub sim_per_order: Vec<Option<f64>>,
}

/// Similarity of the salient mean distributions of two populations, overall
/// and restricted to each order.
pub fn per_order_jaccard(sets_a: &[InteractionSet], sets_b: &[InteractionSet], tau: f64) -> Result<SimilarityReport> {
    let salient =
        |sets: &[InteractionSet]| -> Vec<SalientSet> { sets.iter().map(|s| filter_salient(s, tau)).collect() };
    let da = mean_distribution(&salient(sets_a))?;
    let db = mean_distribution(&salient(sets_b))?;
    similarity_report(&da, &db)
}

pub fn similarity_report(da: &InteractionDistribution, db: &InteractionDistribution) -> Result<SimilarityReport> {
    let sim_global = jaccard(da, db)?;
    let sim_per_order = (1..=da.n)
        .map(|k| {
            let keep = |m: u32| m.count_ones() as usize == k;
            jaccard(&da.restricted(keep), &db.restricted(keep))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimilarityReport {
        sim_global,
        sim_per_order,
    })
}

/// Marker written for undefined values.
pub const UNDEFINED: &str = "NA";

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| UNDEFINED.to_string(), |v| v.to_string())
}

pub const PROFILE_HEADER: &str = "sample_label,k,j_pos,j_neg,offset_mass";

/// One row per order: `sample_label,k,j_pos,j_neg,offset_mass`.
pub fn write_profile_rows(out: &mut impl Write, label: &str, p: &OrderProfile) -> std::io::Result<()> {
    for k in 1..=p.n {
        writeln!(
            out,
            "{label},{k},{},{},{}",
            p.j_pos[k - 1],
            p.j_neg[k - 1],
            p.offset_mass(k)
        )?;
    }
    Ok(())
}

pub const SIMILARITY_HEADER: &str = "k,sim";

/// One row per order, then an `all` row for the global similarity.
pub fn write_similarity_rows(out: &mut impl Write, r: &SimilarityReport) -> std::io::Result<()> {
    for (k, sim) in r.sim_per_order.iter().enumerate() {
        writeln!(out, "{},{}", k + 1, fmt_opt(*sim))?;
    }
    writeln!(out, "all,{}", fmt_opt(r.sim_global))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, and: &[(u32, f64)], or: &[(u32, f64)]) -> InteractionSet {
        InteractionSet::from_sparse(n, 0.0, &and.iter().copied().collect(), &or.iter().copied().collect()).unwrap()
    }

    fn dist(n: usize, pos: &[(u32, f64)], neg: &[(u32, f64)]) -> InteractionDistribution {
        InteractionDistribution {
            n,
            pos: pos.iter().map(|&(m, v)| ((Kind::And, m), v)).collect(),
            neg: neg.iter().map(|&(m, v)| ((Kind::And, m), v)).collect(),
        }
    }

    #[test]
    fn single_effect_profile() {
        let p = order_profile(&set(4, &[(0b0111, 2.0)], &[]), None);
        assert_eq!(p.j_pos, vec![0.0, 0.0, 2.0, 0.0]);
        assert_eq!(p.j_neg, vec![0.0; 4]);
        assert_eq!(average_order(&p), Some(3.0));
    }

    #[test]
    fn mixed_signs_same_order() {
        let p = order_profile(&set(3, &[(0b011, 2.0)], &[(0b110, -5.0)]), None);
        assert_eq!(p.j_pos[1], 2.0);
        assert_eq!(p.j_neg[1], 5.0);
        assert_eq!(p.offset_mass(2), 2.0);
    }

    #[test]
    fn symmetric_mean_order() {
        let p = order_profile(&set(3, &[(0b001, 1.0), (0b111, 1.0)], &[]), None);
        assert_eq!(average_order(&p), Some(2.0));
    }

    #[test]
    fn empty_profile_has_no_average() {
        let p = order_profile(&set(3, &[], &[]), None);
        assert_eq!(average_order(&p), None);
    }

    #[test]
    fn salient_profile_commutes_with_filter() {
        let s = set(3, &[(0b011, 2.0), (0b001, 0.1)], &[(0b111, -0.5)]);
        let a = order_profile(&s, Some(0.2));
        let b = profile_of(&filter_salient(&s, 0.2), true);
        assert_eq!(a, b);
        assert_eq!(a.salient_count, 2);
    }

    #[test]
    fn jaccard_examples() {
        let d1 = dist(2, &[(1, 1.0), (3, 2.0)], &[]);
        let d2 = dist(2, &[(1, 0.5), (3, 2.0)], &[]);
        assert!((jaccard(&d1, &d2).unwrap().unwrap() - 2.5 / 3.0).abs() < 1e-15);
        assert_eq!(jaccard(&d1, &d1).unwrap(), Some(1.0));
        let d3 = dist(2, &[(2, 1.0)], &[]);
        assert_eq!(jaccard(&d1, &d3).unwrap(), Some(0.0));
        let z = dist(2, &[], &[]);
        assert_eq!(jaccard(&z, &z).unwrap(), None);
        assert!(jaccard(&d1, &dist(3, &[], &[])).is_err());
    }

    #[test]
    fn positive_and_negative_slots_never_match() {
        let d1 = dist(2, &[(1, 1.0)], &[]);
        let d2 = dist(2, &[], &[(1, 1.0)]);
        assert_eq!(jaccard(&d1, &d2).unwrap(), Some(0.0));
    }

    #[test]
    fn mean_distribution_examples() {
        let one = mean_distribution(&[set(2, &[(1, 2.0)], &[(3, -1.0)])]).unwrap();
        assert_eq!(one.pos, [((Kind::And, 1), 2.0)].into_iter().collect());
        assert_eq!(one.neg, [((Kind::Or, 3), 1.0)].into_iter().collect());

        let cancel = mean_distribution(&[set(2, &[(1, 2.0)], &[]), set(2, &[(1, -2.0)], &[])]).unwrap();
        assert!(cancel.is_zero());

        let three = mean_distribution(&[
            set(3, &[(1, 3.0)], &[]),
            set(3, &[(2, 6.0)], &[]),
            set(3, &[], &[(4, -9.0)]),
        ])
        .unwrap();
        assert_eq!(three.pos.get(&(Kind::And, 1)), Some(&1.0));
        assert_eq!(three.pos.get(&(Kind::And, 2)), Some(&2.0));
        assert_eq!(three.neg.get(&(Kind::Or, 4)), Some(&3.0));

        assert!(mean_distribution(&[set(2, &[], &[]), set(3, &[], &[])]).is_err());
        assert!(mean_distribution::<InteractionSet>(&[]).is_err());
    }

    #[test]
    fn per_order_shared_first_order_disjoint_third() {
        let a = vec![set(3, &[(0b001, 1.0), (0b010, 2.0), (0b111, 3.0)], &[])];
        let b = vec![set(3, &[(0b001, 1.0), (0b010, 2.0)], &[(0b111, 3.0)])];
        let r = per_order_jaccard(&a, &b, 0.0).unwrap();
        assert_eq!(r.sim_per_order, vec![Some(1.0), None, Some(0.0)]);
        // Shared mass 3 over union mass 9.
        assert_eq!(r.sim_global, Some(1.0 / 3.0));
        let same = per_order_jaccard(&a, &a, 0.0).unwrap();
        assert!(same.sim_per_order.iter().flatten().all(|&s| s == 1.0));
    }

    #[test]
    fn csv_rows() {
        let p = order_profile(&set(2, &[(0b01, 1.5)], &[(0b11, -0.25)]), None);
        let mut buf = Vec::new();
        write_profile_rows(&mut buf, "s0", &p).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "s0,1,1.5,0,0\ns0,2,0,0.25,0\n");
        let r = SimilarityReport {
            sim_global: Some(0.5),
            sim_per_order: vec![Some(1.0), None],
        };
        let mut buf = Vec::new();
        write_similarity_rows(&mut buf, &r).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1,1\n2,NA\nall,0.5\n");
    }
}
