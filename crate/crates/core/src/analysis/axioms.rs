//! Randomized verification of the algebraic properties of AND effects.
//!
//! Each axiom draws tables that satisfy its premise, extracts all-AND
//! effects, and checks the conclusion within a relative tolerance.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::extraction::{extract, Decomposition, InteractionSet};
use crate::lattice::{SubsetIndex, TOLERANCES};
use crate::models::{interaction_function_table, Kind, ValueTable};
use crate::oracle::conditioned_and;
use crate::rng::seeded;

pub const MAX_AXIOM_VARIABLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    Efficiency,
    Linearity,
    Dummy,
    Symmetry,
    Anonymity,
    Recursive,
    InteractionDistribution,
}

impl Axiom {
    pub const ALL: [Axiom; 7] = [
        Axiom::Efficiency,
        Axiom::Linearity,
        Axiom::Dummy,
        Axiom::Symmetry,
        Axiom::Anonymity,
        Axiom::Recursive,
        Axiom::InteractionDistribution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Efficiency => "efficiency",
            Axiom::Linearity => "linearity",
            Axiom::Dummy => "dummy",
            Axiom::Symmetry => "symmetry",
            Axiom::Anonymity => "anonymity",
            Axiom::Recursive => "recursive",
            Axiom::InteractionDistribution => "interaction-distribution",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    pub table: ValueTable,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomOutcome {
    pub axiom: Axiom,
    pub trials: usize,
    pub failures: usize,
    /// First failing trial, if any.
    pub counterexample: Option<Counterexample>,
}

impl AxiomOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub outcomes: Vec<AxiomOutcome>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(AxiomOutcome::passed)
    }
}

/// Runs every axiom for `trials` independent trials. Trial `t` of axiom
/// `a` draws from its own stream, so results do not depend on order.
pub fn axiom_suite(n: usize, trials: usize, seed: u64) -> Result<AxiomReport> {
    if !(2..=MAX_AXIOM_VARIABLES).contains(&n) {
        return Err(Error::Argument(format!(
            "axiom suite needs 2 <= n <= {MAX_AXIOM_VARIABLES}, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::Argument("axiom suite needs at least one trial".into()));
    }
    let outcomes = Axiom::ALL
        .iter()
        .enumerate()
        .map(|(ai, &axiom)| {
            let mut failures = 0;
            let mut counterexample = None;
            for trial in 0..trials {
                let mut rng = seeded(seed, ((ai as u64) << 32) | trial as u64);
                if let Err((table, detail)) = run_trial(axiom, n, &mut rng) {
                    failures += 1;
                    counterexample.get_or_insert(Counterexample { trial, table, detail });
                }
            }
            AxiomOutcome {
                axiom,
                trials,
                failures,
                counterexample,
            }
        })
        .collect();
    Ok(AxiomReport {
        n,
        trials,
        seed,
        outcomes,
    })
}

type Trial = std::result::Result<(), (ValueTable, String)>;

fn random_table(n: usize, rng: &mut impl Rng) -> ValueTable {
    let values = (0..1usize << n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    ValueTable::from_values(n, values).expect("finite values")
}

fn all_and(v: &ValueTable) -> InteractionSet {
    extract(v, &Decomposition::all_and(v)).expect("validated table")
}

/// AND effect including the empty slot, which the set keeps as its bias.
fn effect(set: &InteractionSet, t: usize) -> f64 {
    if t == 0 {
        set.bias()
    } else {
        set.i_and()[t]
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= TOLERANCES.axiom_rel * scale.max(1.0)
}

fn check(v: &ValueTable, ok: bool, detail: impl FnOnce() -> String) -> Trial {
    if ok {
        Ok(())
    } else {
        Err((v.clone(), detail()))
    }
}

fn two_variables(n: usize, rng: &mut impl Rng) -> (usize, usize) {
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    (vars[0], vars[1])
}

fn run_trial(axiom: Axiom, n: usize, rng: &mut impl Rng) -> Trial {
    let size = 1usize << n;
    let full = size - 1;
    match axiom {
        Axiom::Efficiency => {
            let v = random_table(n, rng);
            let s = all_and(&v);
            let sum: f64 = s.bias() + s.i_and().values().iter().sum::<f64>();
            let target = v.full_value();
            check(&v, close(sum, target, v.values().max_abs()), || {
                format!("sum of effects {sum} != v(N) {target}")
            })
        }
        Axiom::Linearity => {
            let (u, w) = (random_table(n, rng), random_table(n, rng));
            let (alpha, beta): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let mix = ValueTable::new(u.values().scale(alpha).add(&w.values().scale(beta)).expect("same n"));
            let (su, sw, sm) = (all_and(&u), all_and(&w), all_and(&mix));
            let scale = mix.values().max_abs() + alpha.abs() * u.values().max_abs() + beta.abs() * w.values().max_abs();
            for t in 0..size {
                let want = alpha * effect(&su, t) + beta * effect(&sw, t);
                let got = effect(&sm, t);
                if !close(got, want, scale) {
                    return Err((
                        mix,
                        format!("alpha={alpha} beta={beta}: I[{t:#b}] = {got}, expected {want}"),
                    ));
                }
            }
            Ok(())
        }
        Axiom::Dummy => {
            let i = rng.gen_range(0..n);
            let bit = 1 << i;
            let base = random_table(n, rng);
            let mut vals = base.values().values().to_vec();
            let v0 = vals[0];
            let vi = vals[bit];
            for s in 0..size {
                if s & bit != 0 {
                    vals[s] = vals[s & !bit] + vi - v0;
                }
            }
            let v = ValueTable::from_values(n, vals).expect("finite");
            let s = all_and(&v);
            let scale = v.values().max_abs();
            for t in 1..size {
                if t & bit != 0 && t != bit && !close(s.i_and()[t], 0.0, scale) {
                    return Err((v, format!("dummy variable {}: I[{t:#b}] = {}", i + 1, s.i_and()[t])));
                }
            }
            let single = s.i_and()[bit];
            check(&v, close(single, vi - v0, scale), || {
                format!(
                    "dummy variable {}: singleton effect {single}, expected {}",
                    i + 1,
                    vi - v0
                )
            })
        }
        Axiom::Symmetry => {
            let (i, j) = two_variables(n, rng);
            let (bi, bj) = (1usize << i, 1usize << j);
            let mut vals = random_table(n, rng).values().values().to_vec();
            for s in 0..size {
                if s & (bi | bj) == 0 {
                    vals[s | bj] = vals[s | bi];
                }
            }
            let v = ValueTable::from_values(n, vals).expect("finite");
            let s = all_and(&v);
            let scale = v.values().max_abs();
            for t in 0..size {
                if t & (bi | bj) == 0 {
                    let (x, y) = (s.i_and()[t | bi], s.i_and()[t | bj]);
                    if !close(x, y, scale) {
                        return Err((v, format!("variables {} and {}: T = {t:#b}: {x} vs {y}", i + 1, j + 1)));
                    }
                }
            }
            Ok(())
        }
        Axiom::Anonymity => {
            let v = random_table(n, rng);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            let pv = ValueTable::new(v.values().permuted(&perm).expect("valid permutation"));
            let (s, ps) = (all_and(&v), all_and(&pv));
            let scale = v.values().max_abs();
            let image = |t: usize| {
                (0..n)
                    .filter(|&k| t >> k & 1 == 1)
                    .fold(0usize, |acc, k| acc | 1 << perm[k])
            };
            for t in 0..size {
                let (x, y) = (effect(&s, t), effect(&ps, image(t)));
                if !close(x, y, scale) {
                    return Err((v, format!("permutation {perm:?}: I[{t:#b}] = {x}, permuted {y}")));
                }
            }
            Ok(())
        }
        Axiom::Recursive => {
            let v = random_table(n, rng);
            let s = all_and(&v);
            let i = rng.gen_range(0..n);
            let bit = 1usize << i;
            let scale = v.values().max_abs() * size as f64;
            for t in 0..size {
                if t & bit != 0 {
                    continue;
                }
                let ts = SubsetIndex::new(t as u32, n).expect("in range");
                let present = conditioned_and(&v, ts, i + 1).expect("i not in T");
                let want = present - effect(&s, t);
                let got = s.i_and()[t | bit];
                if !close(got, want, scale) {
                    return Err((v, format!("i = {}, T = {t:#b}: {got} vs {want}", i + 1)));
                }
            }
            Ok(())
        }
        Axiom::InteractionDistribution => {
            let mask = rng.gen_range(1..=full) as u32;
            let c: f64 = rng.gen_range(-5.0..5.0);
            let t = SubsetIndex::new(mask, n).expect("in range");
            let v = interaction_function_table(t, c, Kind::And).expect("non-empty T");
            let s = all_and(&v);
            for u in 0..size {
                let want = if u == mask as usize { c } else { 0.0 };
                let got = effect(&s, u);
                if !close(got, want, c.abs()) {
                    return Err((v, format!("T = {mask:#b}, c = {c}: I[{u:#b}] = {got}")));
                }
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_small() {
        for n in [2, 4] {
            let r = axiom_suite(n, 20, 3).unwrap();
            for o in &r.outcomes {
                assert!(o.passed(), "{:?}: {:?}", o.axiom, o.counterexample);
            }
        }
    }

    #[test]
    fn suite_is_deterministic() {
        assert_eq!(axiom_suite(4, 5, 9).unwrap(), axiom_suite(4, 5, 9).unwrap());
    }

    #[test]
    fn suite_rejects_bad_arguments() {
        assert!(axiom_suite(9, 1, 0).is_err());
        assert!(axiom_suite(1, 1, 0).is_err());
        assert!(axiom_suite(4, 0, 0).is_err());
    }

    #[test]
    fn broken_conclusion_is_reported() {
        // A table that is not dummy in any variable fails the dummy check
        // when fed directly to it.
        let v = ValueTable::from_values(2, vec![0.0, 1.0, 1.0, 5.0]).unwrap();
        let s = all_and(&v);
        assert!(!close(s.i_and()[0b11], 0.0, 5.0));
    }
}
