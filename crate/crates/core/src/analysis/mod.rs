//! Sample-level reports, cross-model comparison, sparsity diagnostics and
//! the axiom verification suite.

mod axioms;
mod diagnostics;

use std::collections::{BTreeMap, BTreeSet};

pub use axioms::{axiom_suite, Axiom, AxiomOutcome, AxiomReport, Counterexample};
pub use diagnostics::{sparsity_diagnostics, SparsityDiagnostic, P_MAX, P_TOLERANCE};

use crate::error::{Error, Result};
use crate::extraction::InteractionSet;
use crate::metrics::{average_order, order_profile, OrderProfile};

/// Default confusing threshold: half the variable count.
pub fn default_theta(n: usize) -> f64 {
    n as f64 / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub label: String,
    pub eta_avg: Option<f64>,
    pub salient_count: usize,
    /// L1 norm of every effect, salient or not.
    pub total_l1: f64,
    pub profile: OrderProfile,
    pub confusing: bool,
}

/// Salient profile, its average order, and the flag `η^avg ≥ θ`.
pub fn sample_report(set: &InteractionSet, tau: f64, theta: f64) -> SampleReport {
    let profile = order_profile(set, Some(tau));
    let eta_avg = average_order(&profile);
    SampleReport {
        label: set.label.clone().unwrap_or_default(),
        eta_avg,
        salient_count: profile.salient_count,
        total_l1: set.l1_loss(),
        confusing: eta_avg.is_some_and(|e| e >= theta),
        profile,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairComparison {
    /// `(label, eta_a, eta_b)` for every label in both report sets, sorted by label.
    pub points: Vec<(String, Option<f64>, Option<f64>)>,
    /// Spearman correlation over points where both η are defined; `None`
    /// with fewer than two such points or a constant side.
    pub rank_correlation: Option<f64>,
    pub mean_abs_diagonal_gap: Option<f64>,
    /// Jaccard index of the two confusing-flag sets; 1 when both are empty.
    pub overlap: f64,
}

pub fn compare_models(reports_a: &[SampleReport], reports_b: &[SampleReport]) -> Result<PairComparison> {
    let by_label = |rs: &[SampleReport]| -> Result<BTreeMap<String, SampleReport>> {
        let mut map = BTreeMap::new();
        for r in rs {
            if map.insert(r.label.clone(), r.clone()).is_some() {
                return Err(Error::Argument(format!("duplicate sample label {:?}", r.label)));
            }
        }
        Ok(map)
    };
    let a = by_label(reports_a)?;
    let b = by_label(reports_b)?;
    let common: Vec<&String> = a.keys().filter(|l| b.contains_key(*l)).collect();
    if common.is_empty() {
        return Err(Error::Argument("the two report sets share no sample labels".into()));
    }
    let points: Vec<(String, Option<f64>, Option<f64>)> = common
        .iter()
        .map(|&l| (l.clone(), a[l].eta_avg, b[l].eta_avg))
        .collect();
    let defined: Vec<(f64, f64)> = points.iter().filter_map(|(_, x, y)| Some(((*x)?, (*y)?))).collect();
    let mean_abs_diagonal_gap =
        (!defined.is_empty()).then(|| defined.iter().map(|(x, y)| (x - y).abs()).sum::<f64>() / defined.len() as f64);
    let xs: Vec<f64> = defined.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = defined.iter().map(|p| p.1).collect();
    let rank_correlation = spearman(&xs, &ys);

    let flagged = |m: &BTreeMap<String, SampleReport>| -> BTreeSet<&String> {
        common.iter().copied().filter(|l| m[*l].confusing).collect()
    };
    let (fa, fb) = (flagged(&a), flagged(&b));
    let union = fa.union(&fb).count();
    let overlap = if union == 0 {
        1.0
    } else {
        fa.intersection(&fb).count() as f64 / union as f64
    };
    Ok(PairComparison {
        points,
        rank_correlation,
        mean_abs_diagonal_gap,
        overlap,
    })
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let mean = (xs.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(label: &str, eta: Option<f64>, confusing: bool) -> SampleReport {
        SampleReport {
            label: label.into(),
            eta_avg: eta,
            salient_count: 0,
            total_l1: 0.0,
            profile: OrderProfile {
                n: 1,
                j_pos: vec![0.0],
                j_neg: vec![0.0],
                salient_count: 0,
                source_salient: true,
            },
            confusing,
        }
    }

    #[test]
    fn single_order_two_effect_is_not_confusing() {
        let set =
            InteractionSet::from_sparse(6, 0.0, &[(0b11, 4.0)].into_iter().collect(), &Default::default()).unwrap();
        let r = sample_report(&set, 0.1, 5.0);
        assert_eq!(r.eta_avg, Some(2.0));
        assert!(!r.confusing);
    }

    #[test]
    fn empty_salient_set_is_not_confusing() {
        let set =
            InteractionSet::from_sparse(6, 1.0, &[(0b11, 0.01)].into_iter().collect(), &Default::default()).unwrap();
        let r = sample_report(&set, 0.1, 1.0);
        assert_eq!(r.eta_avg, None);
        assert!(!r.confusing);
        assert_eq!(r.salient_count, 0);
    }

    #[test]
    fn identity_comparison() {
        let rs: Vec<SampleReport> = (0..6)
            .map(|i| report(&format!("s{i}"), Some(1.0 + (i * 7 % 5) as f64), i % 2 == 0))
            .collect();
        let c = compare_models(&rs, &rs).unwrap();
        assert_eq!(c.rank_correlation, Some(1.0));
        assert_eq!(c.mean_abs_diagonal_gap, Some(0.0));
        assert_eq!(c.overlap, 1.0);
    }

    #[test]
    fn reversed_ranking() {
        let a: Vec<SampleReport> = (0..5)
            .map(|i| report(&format!("s{i}"), Some(i as f64), false))
            .collect();
        let b: Vec<SampleReport> = (0..5)
            .map(|i| report(&format!("s{i}"), Some(-(i as f64)), false))
            .collect();
        let c = compare_models(&a, &b).unwrap();
        assert_eq!(c.rank_correlation, Some(-1.0));
        assert_eq!(c.overlap, 1.0);
    }

    #[test]
    fn disjoint_labels_are_an_error() {
        let a = vec![report("x", Some(1.0), false)];
        let b = vec![report("y", Some(1.0), false)];
        assert!(compare_models(&a, &b).is_err());
    }

    #[test]
    fn overlap_of_flag_sets() {
        let a = vec![
            report("a", Some(6.0), true),
            report("b", Some(6.0), true),
            report("c", Some(1.0), false),
        ];
        let b = vec![
            report("a", Some(6.0), true),
            report("b", Some(1.0), false),
            report("c", Some(6.0), true),
        ];
        assert!((compare_models(&a, &b).unwrap().overlap - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), None);
    }
}
