//! Helpers shared by the CLI integration tests and the acceptance harness.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn andor() -> Command {
    Command::new(env!("CARGO_BIN_EXE_andor"))
}

/// Runs the binary with `args` relative to `dir`.
pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    andor().current_dir(dir).args(args).output().expect("spawn andor")
}

/// Runs and panics unless the exit code is `code`.
pub fn run_expect(dir: &Path, args: &[&str], code: i32) -> Output {
    let out = run_in(dir, args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "andor {}\nstdout:\n{}\nstderr:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Every file below `root`, keyed by its relative path with `/` separators.
pub fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap();
                let key = rel
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/");
                out.insert(key, fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn copy_tree(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        let dest = to.join(p.file_name().unwrap());
        if p.is_dir() {
            copy_tree(&p, &dest);
        } else {
            fs::copy(&p, &dest).unwrap();
        }
    }
}

/// Runs one whitespace-separated command line and checks its exit code.
pub fn sh(dir: &Path, line: &str, code: i32) -> Output {
    run_expect(dir, &line.split_whitespace().collect::<Vec<_>>(), code)
}

/// Every report command on the hand-written fixture under `golden/input`.
/// Outputs land in `work/out`; stdout-only commands are captured there too.
pub fn golden_run(work: &Path) {
    copy_tree(&golden_dir().join("input"), work);
    let steps = [
        (
            "extract --input train --out out/train_sets --mode all-and --tau-absolute 0.5",
            0,
        ),
        (
            "extract --input test --out out/test_sets --mode all-and --tau-absolute 0.5",
            0,
        ),
        ("profile --input out/train_sets --out out/profile.csv", 0),
        (
            "similarity --train out/train_sets --test out/test_sets --out out/similarity.csv",
            0,
        ),
        ("compare out/train_sets out/test_sets --out out/compare.txt", 0),
        // Sample `a` has a salient pair above the order bound.
        (
            "diagnose --tables train --sets out/train_sets --max-order 1 --out out/diagnose.csv",
            1,
        ),
        ("axioms --n 3 --trials 5 --seed 7 --out out/axioms.txt", 0),
        (
            "synth --out out/synth --game n=4 m=3 min-order=1 max-order=2 --samples 2 --seed 3",
            0,
        ),
    ];
    for (line, code) in steps {
        sh(work, line, code);
    }
    let verify = sh(work, "oracle verify --tables train --sets out/train_sets", 0);
    fs::write(work.join("out/oracle_verify.csv"), verify.stdout).unwrap();
    let transform = sh(work, "oracle transform --table train/b.table.json --kind and", 0);
    fs::write(work.join("out/oracle_transform.json"), transform.stdout).unwrap();
}

/// Differences between a fresh golden run and the pinned files. With
/// `ANDOR_BLESS=1` the pinned files are rewritten instead.
pub fn golden_mismatches(work: &Path) -> Vec<String> {
    golden_run(work);
    let got = snapshot(&work.join("out"));
    let expected_dir = golden_dir().join("expected");
    if std::env::var_os("ANDOR_BLESS").is_some() {
        let _ = fs::remove_dir_all(&expected_dir);
        copy_tree(&work.join("out"), &expected_dir);
        return Vec::new();
    }
    let want = if expected_dir.exists() {
        snapshot(&expected_dir)
    } else {
        BTreeMap::new()
    };
    let mut diffs = Vec::new();
    for (k, v) in &want {
        match got.get(k) {
            None => diffs.push(format!("missing {k}")),
            Some(g) if g != v => diffs.push(format!("differs {k}")),
            _ => {}
        }
    }
    diffs.extend(
        got.keys()
            .filter(|k| !want.contains_key(*k))
            .map(|k| format!("unexpected {k}")),
    );
    diffs
}

/// A seeded end-to-end run of every subcommand, for determinism checks.
pub fn pipeline(work: &Path) -> BTreeMap<String, Vec<u8>> {
    let steps = [
        ("synth --out pop --samples 12 --overfit-fraction 0.25 --seed 5", 0),
        ("synth --out split --split --samples 6 --seed 5", 0),
        ("synth --out net --net 5,4 --samples 3 --seed 5", 0),
        ("synth --out single --interaction or --mask 0b0110 --c 2.5", 0),
        ("extract --input pop --out sets --max-iters 300 --dense", 0),
        ("extract --input split/train --out train_sets --mode ground-truth", 0),
        ("extract --input split/test --out test_sets --mode ground-truth", 0),
        ("extract --input net --out net_sets --mode even-split", 0),
        ("profile --input sets --out profile.csv", 0),
        ("similarity --train train_sets --test test_sets --out similarity.csv", 0),
        ("compare sets sets --out compare.txt", 0),
        ("diagnose --tables pop --sets sets --max-order 4 --out diagnose.csv", 1),
        ("axioms --n 4 --trials 10 --seed 5 --out axioms.txt", 0),
        ("oracle transform --table single/interaction.table.json --kind or", 0),
    ];
    let mut stdout = Vec::new();
    for (line, code) in steps {
        stdout.extend(sh(work, line, code).stdout);
    }
    fs::write(work.join("stdout.txt"), stdout).unwrap();
    snapshot(work)
}
