use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use andor_core::analysis::{axiom_suite, compare_models, default_theta, sample_report, sparsity_diagnostics};
use andor_core::extraction::{
    extract_batch, filter_salient, salience_threshold, Decomposition, ExtractMode, Extraction, InteractionSet,
    SparsifyConfig,
};
use andor_core::io::{
    read_sets, read_tables, read_text, set_to_json, stem, table_from_json, table_to_json, truth_from_json,
    truth_to_json, write_text, TruthSidecar, SET_SUFFIX, TABLE_SUFFIX, TRUTH_SUFFIX,
};
use andor_core::lattice::SubsetIndex;
use andor_core::metrics::{
    fmt_opt, order_profile, per_order_jaccard, write_profile_rows, write_similarity_rows, PROFILE_HEADER,
    SIMILARITY_HEADER,
};
use andor_core::models::{interaction_function_table, EffectRange, GroundTruthGame, Kind, ValueTable};
use andor_core::oracle::{brute_and, brute_or, literal_zeta, verify_matching};
use andor_core::synth::{net_population, overfit_population, split_populations, GameFamily, OverfitSpec, SplitSpec};
use andor_core::{Error, Result};

use crate::{
    AxiomArgs, CompareArgs, DiagnoseArgs, ExtractArgs, KindArg, ModeArg, OracleAction, OracleArgs, ProfileArgs,
    SimilarityArgs, SynthArgs,
};

pub enum Outcome {
    Pass,
    Fail,
}

const MATCHING_TOLERANCE: f64 = 1e-8;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Writes to `out`, or to stdout when absent.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn nonempty<T>(items: Vec<T>, dir: &Path, suffix: &str) -> Result<Vec<T>> {
    if items.is_empty() {
        return Err(Error::Argument(format!("no *{suffix} files in {}", dir.display())));
    }
    Ok(items)
}

/// All items must share one variable count; the error names the first
/// disagreeing pair of files.
fn check_same_n<'a>(items: impl IntoIterator<Item = (&'a Path, usize)>) -> Result<usize> {
    let mut first: Option<(&Path, usize)> = None;
    for (path, n) in items {
        match first {
            None => first = Some((path, n)),
            Some((p0, n0)) if n0 != n => {
                return Err(Error::Argument(format!(
                    "{} has n = {n0} but {} has n = {n}",
                    p0.display(),
                    path.display()
                )))
            }
            _ => {}
        }
    }
    Ok(first.map_or(0, |f| f.1))
}

fn parse_mask(s: &str) -> Result<u32> {
    let parsed = match s.strip_prefix("0b") {
        Some(bits) => u32::from_str_radix(bits, 2),
        None => s.parse(),
    };
    parsed.map_err(|_| Error::Argument(format!("bad mask {s:?}")))
}

fn parse_family(pairs: &[String]) -> Result<GameFamily> {
    let mut f = GameFamily::recovery();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("expected KEY=VALUE, got {pair:?}")))?;
        let bad = || Error::Argument(format!("bad value in {pair:?}"));
        match k {
            "n" => f.n = v.parse().map_err(|_| bad())?,
            "m" => f.effects = v.parse().map_err(|_| bad())?,
            "min-order" => f.min_order = v.parse().map_err(|_| bad())?,
            "max-order" => f.max_order = v.parse().map_err(|_| bad())?,
            "floor" => f.range.floor = v.parse().map_err(|_| bad())?,
            "ceil" => f.range.ceil = v.parse().map_err(|_| bad())?,
            _ => return Err(Error::Argument(format!("unknown game key {k:?}"))),
        }
    }
    f.range = EffectRange::new(f.range.floor, f.range.ceil)?;
    f.max_order = f.max_order.min(f.n);
    f.min_order = f.min_order.min(f.max_order);
    Ok(f)
}

fn write_sample(dir: &Path, s: &TruthSidecar, meta: String) -> Result<()> {
    let v = andor_core::models::realize_table(&s.game)?
        .with_label(s.label.clone())
        .with_meta(meta);
    write_text(&dir.join(format!("{}{TABLE_SUFFIX}", s.label)), &table_to_json(&v))?;
    write_text(&dir.join(format!("{}{TRUTH_SUFFIX}", s.label)), &truth_to_json(s))
}

pub fn synth(a: SynthArgs) -> Result<Outcome> {
    let family = parse_family(&a.game)?;
    create_dir(&a.out)?;
    if let Some(kind) = a.interaction {
        let kind = match kind {
            KindArg::And => Kind::And,
            KindArg::Or => Kind::Or,
        };
        let mask = parse_mask(a.mask.as_deref().unwrap_or("1"))?;
        let t = SubsetIndex::new(mask, family.n)?;
        interaction_function_table(t, a.c, kind)?;
        let mut game = GroundTruthGame::new(family.n, 0.0)?;
        game.insert(kind, mask, a.c)?;
        let s = TruthSidecar {
            label: "interaction".into(),
            injected: false,
            game,
        };
        write_sample(&a.out, &s, format!("{kind} interaction mask={mask} c={}", a.c))?;
        return Ok(Outcome::Pass);
    }
    if !a.net.is_empty() {
        for v in net_population(&a.net, a.samples, 0, a.seed)? {
            let label = v.label.clone().unwrap_or_default();
            write_text(&a.out.join(format!("{label}{TABLE_SUFFIX}")), &table_to_json(&v))?;
        }
        return Ok(Outcome::Pass);
    }
    if a.split {
        let spec = SplitSpec {
            n: family.n,
            samples: a.samples,
            range: family.range,
            ..SplitSpec::default()
        };
        let (train, test) = split_populations(&spec, a.seed)?;
        for (name, pop) in [("train", train), ("test", test)] {
            let dir = a.out.join(name);
            create_dir(&dir)?;
            for s in &pop {
                write_sample(&dir, s, format!("split seed={} side={name}", a.seed))?;
            }
        }
        return Ok(Outcome::Pass);
    }
    let spec = OverfitSpec {
        samples: a.samples,
        fraction: a.overfit_fraction,
        min_order: a.overfit_min_order,
        pairs: a.overfit_pairs,
        magnitude: a.overfit_magnitude,
    };
    for s in overfit_population(&family, &spec, a.seed)? {
        let meta = format!("sparse game seed={} injected={}", a.seed, s.injected);
        write_sample(&a.out, &s, meta)?;
    }
    Ok(Outcome::Pass)
}

fn load_tables(dir: &Path) -> Result<Vec<(PathBuf, ValueTable)>> {
    let tables = nonempty(read_tables(dir)?, dir, TABLE_SUFFIX)?;
    check_same_n(tables.iter().map(|(p, v)| (p.as_path(), v.n())))?;
    Ok(tables
        .into_iter()
        .map(|(p, mut v)| {
            v.label.get_or_insert_with(|| stem(&p, TABLE_SUFFIX));
            (p, v)
        })
        .collect())
}

struct LoadedSet {
    path: PathBuf,
    label: String,
    set: InteractionSet,
    tau: Option<f64>,
}

fn load_sets(dir: &Path) -> Result<Vec<LoadedSet>> {
    let sets = nonempty(read_sets(dir)?, dir, SET_SUFFIX)?;
    check_same_n(sets.iter().map(|(p, (s, _))| (p.as_path(), s.n())))?;
    Ok(sets
        .into_iter()
        .map(|(path, (set, tau))| LoadedSet {
            label: set.label.clone().unwrap_or_else(|| stem(&path, SET_SUFFIX)),
            path,
            set,
            tau,
        })
        .collect())
}

pub fn extract(a: ExtractArgs) -> Result<Outcome> {
    let tables = load_tables(&a.input)?;
    let values: Vec<ValueTable> = tables.iter().map(|(_, v)| v.clone()).collect();
    let tau = match a.tau_absolute {
        Some(t) if t >= 0.0 && t.is_finite() => t,
        Some(t) => return Err(Error::Argument(format!("bad absolute threshold {t}"))),
        None => salience_threshold(&values, a.tau_fraction)?,
    };
    let cfg = SparsifyConfig {
        max_iters: a.max_iters,
        step_size: a.step,
        convergence_eps: a.eps,
        zeta_fraction: a.zeta_fraction,
        rng_seed: a.seed,
        denoise: !a.no_denoise,
    };
    let results = match a.mode {
        ModeArg::AllAnd => extract_batch(&values, ExtractMode::AllAnd, &cfg)?,
        ModeArg::AllOr => extract_batch(&values, ExtractMode::AllOr, &cfg)?,
        ModeArg::EvenSplit => extract_batch(&values, ExtractMode::EvenSplit, &cfg)?,
        ModeArg::Sparsify => extract_batch(&values, ExtractMode::Sparsify, &cfg)?,
        ModeArg::GroundTruth => tables
            .iter()
            .map(|(path, v)| {
                let label = v.label.clone().unwrap_or_default();
                let truth_path = a.input.join(format!("{label}{TRUTH_SUFFIX}"));
                let truth = truth_from_json(&read_text(&truth_path)?, &truth_path.display().to_string())?;
                check_same_n([(path.as_path(), v.n()), (truth_path.as_path(), truth.game.n)])?;
                let d = Decomposition::ground_truth(v, &truth.game)?;
                let set = andor_core::extraction::extract(v, &d)?;
                Ok(Extraction {
                    loss_history: vec![set.l1_loss()],
                    decomposition: d,
                    set,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };

    create_dir(&a.out)?;
    let mut history = String::from("sample_label,iteration,loss\n");
    let mut summary = String::from("sample_label,final_loss,salient_count\n");
    for (v, r) in values.iter().zip(&results) {
        let label = v.label.clone().unwrap_or_default();
        write_text(
            &a.out.join(format!("{label}{SET_SUFFIX}")),
            &set_to_json(&r.set, Some(tau), a.dense),
        )?;
        for (i, loss) in r.loss_history.iter().enumerate() {
            let _ = writeln!(history, "{label},{i},{loss}");
        }
        let _ = writeln!(
            summary,
            "{label},{},{}",
            r.set.l1_loss(),
            filter_salient(&r.set, tau).len()
        );
    }
    write_text(&a.out.join("loss_history.csv"), &history)?;
    write_text(&a.out.join("summary.csv"), &summary)?;
    write_text(&a.out.join("tau.txt"), &format!("{tau}\n"))?;
    Ok(Outcome::Pass)
}

pub fn profile(a: ProfileArgs) -> Result<Outcome> {
    let sets = load_sets(&a.input)?;
    let mut buf = Vec::new();
    let io = io_err(Path::new("<report>"));
    let mut write = || -> std::io::Result<()> {
        use std::io::Write;
        writeln!(buf, "{PROFILE_HEADER}")?;
        for s in &sets {
            let p = order_profile(&s.set, a.tau.or(s.tau));
            write_profile_rows(&mut buf, &s.label, &p)?;
        }
        Ok(())
    };
    write().map_err(io)?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("ascii report"))?;
    Ok(Outcome::Pass)
}

/// The single threshold recorded across a population, if any.
fn recorded_tau(sets: &[LoadedSet]) -> Result<Option<f64>> {
    let mut tau = None;
    for s in sets {
        match (tau, s.tau) {
            (None, t) => tau = t,
            (Some(t0), Some(t)) if t0 != t => {
                return Err(Error::Argument(format!(
                    "{} records tau = {t}, others record {t0}; pass --tau",
                    s.path.display()
                )))
            }
            _ => {}
        }
    }
    Ok(tau)
}

pub fn similarity(a: SimilarityArgs) -> Result<Outcome> {
    let train = load_sets(&a.train)?;
    let test = load_sets(&a.test)?;
    check_same_n([
        (train[0].path.as_path(), train[0].set.n()),
        (test[0].path.as_path(), test[0].set.n()),
    ])?;
    let tau = match a.tau {
        Some(t) => t,
        None => recorded_tau(&train)?.unwrap_or(0.0),
    };
    let sets = |v: &[LoadedSet]| v.iter().map(|s| s.set.clone()).collect::<Vec<_>>();
    let report = per_order_jaccard(&sets(&train), &sets(&test), tau)?;
    let mut buf = format!("{SIMILARITY_HEADER}\n").into_bytes();
    write_similarity_rows(&mut buf, &report).map_err(io_err(Path::new("<report>")))?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("ascii report"))?;
    Ok(Outcome::Pass)
}

pub fn compare(a: CompareArgs) -> Result<Outcome> {
    let sa = load_sets(&a.a)?;
    let sb = load_sets(&a.b)?;
    let n = check_same_n([
        (sa[0].path.as_path(), sa[0].set.n()),
        (sb[0].path.as_path(), sb[0].set.n()),
    ])?;
    let theta = a.theta.unwrap_or_else(|| default_theta(n));
    let reports = |sets: &[LoadedSet]| {
        sets.iter()
            .map(|s| {
                let set = s.set.clone().with_label(Some(s.label.clone()));
                sample_report(&set, a.tau.or(s.tau).unwrap_or(0.0), theta)
            })
            .collect::<Vec<_>>()
    };
    let (ra, rb) = (reports(&sa), reports(&sb));
    let c = compare_models(&ra, &rb)?;
    let flags = |rs: &[andor_core::analysis::SampleReport]| -> BTreeMap<String, bool> {
        rs.iter().map(|r| (r.label.clone(), r.confusing)).collect()
    };
    let (fa, fb) = (flags(&ra), flags(&rb));
    let mut out = String::new();
    let _ = writeln!(out, "samples_a {}", ra.len());
    let _ = writeln!(out, "samples_b {}", rb.len());
    let _ = writeln!(out, "common {}", c.points.len());
    let _ = writeln!(out, "theta {theta}");
    let _ = writeln!(out, "rank_correlation {}", fmt_opt(c.rank_correlation));
    let _ = writeln!(out, "mean_abs_diagonal_gap {}", fmt_opt(c.mean_abs_diagonal_gap));
    let _ = writeln!(out, "overlap {}", c.overlap);
    let _ = writeln!(out);
    let _ = writeln!(out, "label,eta_a,eta_b,confusing_a,confusing_b");
    for (label, ea, eb) in &c.points {
        let _ = writeln!(
            out,
            "{label},{},{},{},{}",
            fmt_opt(*ea),
            fmt_opt(*eb),
            fa[label],
            fb[label]
        );
    }
    emit(a.out.as_deref(), &out)?;
    Ok(Outcome::Pass)
}

pub fn diagnose(a: DiagnoseArgs) -> Result<Outcome> {
    let tables = load_tables(&a.tables)?;
    let sets = load_sets(&a.sets)?;
    let by_label: BTreeMap<&str, &LoadedSet> = sets.iter().map(|s| (s.label.as_str(), s)).collect();
    let mut out = String::from(
        "sample_label,max_salient_order,condition1,condition2,condition2_violation,condition3_min_p,salient_count,kappa_fit,pass\n",
    );
    let mut all_pass = true;
    for (path, v) in &tables {
        let label = v.label.clone().unwrap_or_default();
        let s = by_label
            .get(label.as_str())
            .ok_or_else(|| Error::Argument(format!("no interaction set for table {}", path.display())))?;
        check_same_n([(path.as_path(), v.n()), (s.path.as_path(), s.set.n())])?;
        if a.max_order > v.n() {
            return Err(Error::Argument(format!(
                "max order {} exceeds n = {}",
                a.max_order,
                v.n()
            )));
        }
        let tau = a.tau.or(s.tau).unwrap_or(0.0);
        let d = sparsity_diagnostics(v, &s.set, tau, a.max_order);
        all_pass &= d.passes();
        let _ = writeln!(
            out,
            "{label},{},{},{},{},{},{},{},{}",
            d.max_salient_order,
            d.condition1_ok,
            d.condition2_ok,
            d.condition2_violation.map_or_else(|| "NA".into(), |k| k.to_string()),
            fmt_opt(d.condition3_min_p),
            d.salient_count,
            fmt_opt(d.kappa_fit),
            d.passes()
        );
    }
    emit(a.out.as_deref(), &out)?;
    Ok(if all_pass { Outcome::Pass } else { Outcome::Fail })
}

pub fn axioms(a: AxiomArgs) -> Result<Outcome> {
    let report = axiom_suite(a.n, a.trials, a.seed)?;
    let mut out = String::new();
    let _ = writeln!(out, "n {}", report.n);
    let _ = writeln!(out, "trials {}", report.trials);
    let _ = writeln!(out, "seed {}", report.seed);
    for o in &report.outcomes {
        let verdict = if o.passed() { "pass" } else { "fail" };
        let _ = writeln!(out, "{} {verdict} failures {}/{}", o.axiom.name(), o.failures, o.trials);
        if let Some(cx) = &o.counterexample {
            let _ = writeln!(out, "  counterexample trial {}: {}", cx.trial, cx.detail);
            let _ = writeln!(out, "  table {:?}", cx.table.values().values());
        }
    }
    let _ = writeln!(out, "result {}", if report.passed() { "pass" } else { "fail" });
    emit(a.out.as_deref(), &out)?;
    Ok(if report.passed() { Outcome::Pass } else { Outcome::Fail })
}

pub fn oracle(a: OracleArgs) -> Result<Outcome> {
    match a.action {
        OracleAction::Verify { tables, sets } => {
            let tables = load_tables(&tables)?;
            let sets = load_sets(&sets)?;
            let by_label: BTreeMap<&str, &LoadedSet> = sets.iter().map(|s| (s.label.as_str(), s)).collect();
            let mut out = String::from("sample_label,max_abs_error,scale,ok\n");
            let mut all_ok = true;
            for (path, v) in &tables {
                let label = v.label.clone().unwrap_or_default();
                let s = by_label
                    .get(label.as_str())
                    .ok_or_else(|| Error::Argument(format!("no interaction set for table {}", path.display())))?;
                // Zero noise: the reconstruction must equal the table itself.
                let err = verify_matching(v, &Decomposition::all_and(v), &s.set)?;
                let scale = v.values().max_abs().max(1.0);
                let ok = err <= MATCHING_TOLERANCE * scale;
                all_ok &= ok;
                let _ = writeln!(out, "{label},{err},{scale},{ok}");
            }
            print!("{out}");
            Ok(if all_ok { Outcome::Pass } else { Outcome::Fail })
        }
        OracleAction::Transform { table, kind } => {
            let v = table_from_json(&read_text(&table)?, &table.display().to_string())?;
            let r = match kind.as_str() {
                "and" => brute_and(v.values())?,
                "or" => brute_or(v.values())?,
                _ => literal_zeta(v.values())?,
            };
            println!("{}", serde_json::to_string(r.values()).expect("finite values"));
            Ok(Outcome::Pass)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_parse_in_decimal_and_binary() {
        assert_eq!(parse_mask("6").unwrap(), 6);
        assert_eq!(parse_mask("0b0110").unwrap(), 6);
        assert!(parse_mask("0b12").is_err());
        assert!(parse_mask("-1").is_err());
    }

    #[test]
    fn family_keys_override_the_recovery_defaults() {
        let f = parse_family(&["n=6".into(), "m=4".into(), "max-order=9".into()]).unwrap();
        assert_eq!((f.n, f.effects, f.min_order, f.max_order), (6, 4, 2, 6));
        assert!(parse_family(&["q=1".into()]).is_err());
        assert!(parse_family(&["floor=5".into(), "ceil=1".into()]).is_err());
    }

    #[test]
    fn mixed_n_names_both_paths() {
        let (a, b) = (Path::new("a.json"), Path::new("b.json"));
        assert_eq!(check_same_n([(a, 3), (b, 3)]).unwrap(), 3);
        let msg = check_same_n([(a, 3), (b, 4)]).unwrap_err().to_string();
        assert!(msg.contains("a.json") && msg.contains("b.json"), "{msg}");
    }
}
