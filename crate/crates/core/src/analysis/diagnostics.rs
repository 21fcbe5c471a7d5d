use crate::extraction::{filter_salient, InteractionSet};
use crate::models::ValueTable;

/// Upper end of the exponent search for the confidence lower bound.
pub const P_MAX: f64 = 64.0;
pub const P_TOLERANCE: f64 = 1e-6;
const P_GRID_STEP: f64 = 1.0 / 16.0;

/// Checks of the three sparsity conditions on one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityDiagnostic {
    pub n: usize,
    pub max_order_bound: usize,
    /// Highest order among salient effects, 0 if none.
    pub max_salient_order: usize,
    pub condition1_ok: bool,
    /// `u_bar[k - 1]` is the mean of `v(x_S) − v(x_∅)` over `|S| = k`.
    pub u_bar: Vec<f64>,
    pub condition2_ok: bool,
    /// First `k` with `ū(k) < ū(k − 1)`.
    pub condition2_violation: Option<usize>,
    /// Smallest `p` with `ū(k') ≥ (k'/k)^p · ū(k)` for all `k' ≤ k`;
    /// `None` when no `p` in `(0, P_MAX]` works.
    pub condition3_min_p: Option<f64>,
    pub salient_count: usize,
    /// `log(salient_count · τ) / log(n)`; undefined without salient effects.
    pub kappa_fit: Option<f64>,
}

impl SparsityDiagnostic {
    pub fn passes(&self) -> bool {
        self.condition1_ok && self.condition2_ok && self.condition3_min_p.is_some()
    }
}

fn order_means(v: &ValueTable) -> Vec<f64> {
    let n = v.n();
    let v0 = v.empty_value();
    let mut sums = vec![0.0; n + 1];
    let mut counts = vec![0usize; n + 1];
    for (s, &x) in v.values().values().iter().enumerate() {
        let k = s.count_ones() as usize;
        sums[k] += x - v0;
        counts[k] += 1;
    }
    (1..=n).map(|k| sums[k] / counts[k] as f64).collect()
}

fn bound_holds(u_bar: &[f64], p: f64) -> bool {
    for k in 2..=u_bar.len() {
        let uk = u_bar[k - 1];
        for kp in 1..k {
            let rhs = (kp as f64 / k as f64).powf(p) * uk;
            let lhs = u_bar[kp - 1];
            if lhs < rhs - 1e-12 * rhs.abs().max(lhs.abs()) {
                return false;
            }
        }
    }
    true
}

fn min_exponent(u_bar: &[f64]) -> Option<f64> {
    // A non-positive mean below a positive one can never be bounded.
    for k in 2..=u_bar.len() {
        if u_bar[k - 1] > 0.0 && u_bar[..k - 1].iter().any(|&u| u <= 0.0) {
            return None;
        }
    }
    let steps = (P_MAX / P_GRID_STEP).round() as usize;
    let mut lo = 0.0;
    for i in 1..=steps {
        let p = i as f64 * P_GRID_STEP;
        if bound_holds(u_bar, p) {
            let mut hi = p;
            while hi - lo > P_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                if bound_holds(u_bar, mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        lo = p;
    }
    None
}

pub fn sparsity_diagnostics(v: &ValueTable, set: &InteractionSet, tau: f64, max_order: usize) -> SparsityDiagnostic {
    let n = v.n();
    let salient = filter_salient(set, tau);
    let max_salient_order = salient.max_order();
    let u_bar = order_means(v);
    let condition2_violation = (2..=n).find(|&k| u_bar[k - 1] < u_bar[k - 2]);
    let count = salient.len();
    let kappa_fit = (count > 0 && tau > 0.0 && n > 1).then(|| (count as f64 * tau).ln() / (n as f64).ln());
    SparsityDiagnostic {
        n,
        max_order_bound: max_order,
        max_salient_order,
        condition1_ok: max_salient_order <= max_order,
        condition3_min_p: min_exponent(&u_bar),
        condition2_ok: condition2_violation.is_none(),
        condition2_violation,
        u_bar,
        salient_count: count,
        kappa_fit,
    }
}
