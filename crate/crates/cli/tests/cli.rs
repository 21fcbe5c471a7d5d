mod common;

use std::fs;
use std::path::Path;

use andor_core::io::{read_tables, read_truths, table_from_json};
use andor_core::lattice::SubsetIndex;
use andor_core::models::{interaction_function_table, Kind};
use common::{run_in, sh, snapshot};

fn stdout(dir: &Path, line: &str, code: i32) -> String {
    String::from_utf8(sh(dir, line, code).stdout).unwrap()
}

fn stderr(dir: &Path, line: &str, code: i32) -> String {
    String::from_utf8(sh(dir, line, code).stderr).unwrap()
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let line = "synth --out pop --samples 8 --overfit-fraction 0.25 --seed 9";
    sh(a.path(), line, 0);
    sh(b.path(), line, 0);
    assert_eq!(snapshot(a.path()), snapshot(b.path()));
}

#[test]
fn overfit_fraction_injects_exactly_that_many() {
    let dir = tempfile::tempdir().unwrap();
    sh(dir.path(), "synth --out pop --samples 100 --overfit-fraction 0.2", 0);
    let truths = read_truths(&dir.path().join("pop")).unwrap();
    assert_eq!(truths.len(), 100);
    assert_eq!(truths.iter().filter(|(_, t)| t.injected).count(), 20);
    assert_eq!(read_tables(&dir.path().join("pop")).unwrap().len(), 100);
}

#[test]
fn interaction_table_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    sh(
        dir.path(),
        "synth --out one --game n=10 --interaction and --mask 0b0000000011 --c 3",
        0,
    );
    let path = dir.path().join("one/interaction.table.json");
    let got = table_from_json(&fs::read_to_string(&path).unwrap(), "x").unwrap();
    let want = interaction_function_table(SubsetIndex::new(0b11, 10).unwrap(), 3.0, Kind::And).unwrap();
    assert_eq!(got.values(), want.values());
}

#[test]
fn empty_input_is_an_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("empty")).unwrap();
    let err = stderr(dir.path(), "extract --input empty --out sets", 2);
    assert!(err.contains("no *.table.json files"), "{err}");
    assert!(!dir.path().join("sets").exists());
    sh(dir.path(), "profile --input empty", 2);
}

#[test]
fn all_and_sets_verify_against_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    sh(dir.path(), "synth --out pop --samples 5 --seed 2", 0);
    sh(dir.path(), "extract --input pop --out sets --mode all-and", 0);
    let text = stdout(dir.path(), "oracle verify --tables pop --sets sets", 0);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")), "{text}");
}

#[test]
fn sparsified_sets_without_noise_verify() {
    let dir = tempfile::tempdir().unwrap();
    sh(dir.path(), "synth --out pop --samples 3 --seed 4", 0);
    sh(
        dir.path(),
        "extract --input pop --out sets --no-denoise --max-iters 200",
        0,
    );
    sh(dir.path(), "oracle verify --tables pop --sets sets", 0);
}

#[test]
fn comparing_a_model_with_itself_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    sh(dir.path(), "synth --out pop --samples 10 --overfit-fraction 0.3", 0);
    sh(dir.path(), "extract --input pop --out sets --no-denoise", 0);
    let text = stdout(dir.path(), "compare sets sets", 0);
    assert!(text.contains("\nrank_correlation 1\n"), "{text}");
    assert!(text.contains("\nmean_abs_diagonal_gap 0\n"), "{text}");
    assert!(text.contains("\noverlap 1\n"), "{text}");
}

#[test]
fn split_similarity_does_not_increase_with_order() {
    let dir = tempfile::tempdir().unwrap();
    sh(dir.path(), "synth --out sp --split --samples 30 --seed 1", 0);
    sh(
        dir.path(),
        "extract --input sp/train --out train_sets --mode ground-truth",
        0,
    );
    sh(
        dir.path(),
        "extract --input sp/test --out test_sets --mode ground-truth",
        0,
    );
    let text = stdout(dir.path(), "similarity --train train_sets --test test_sets", 0);
    let sims: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with("all"))
        .filter_map(|l| l.split_once(',').unwrap().1.parse().ok())
        .collect();
    assert!(sims.len() >= 2, "{text}");
    assert!(sims.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{text}");
    assert!(sims[0] >= 0.9 && *sims.last().unwrap() <= 0.2, "{text}");
}

#[test]
fn axioms_pass_and_report_each_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(dir.path(), "axioms --n 6 --trials 200 --seed 1", 0);
    assert_eq!(text.lines().filter(|l| l.contains(" pass failures 0/200")).count(), 7);
    assert!(text.ends_with("result pass\n"));
    sh(dir.path(), "axioms --n 9", 2);
}

#[test]
fn mixed_variable_counts_name_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let mix = dir.path().join("mix");
    fs::create_dir(&mix).unwrap();
    fs::write(mix.join("a.table.json"), r#"{"n": 1, "values": [0, 1]}"#).unwrap();
    fs::write(mix.join("b.table.json"), r#"{"n": 2, "values": [0, 1, 2, 3]}"#).unwrap();
    let err = stderr(dir.path(), "extract --input mix --out sets", 2);
    assert!(err.contains("a.table.json") && err.contains("b.table.json"), "{err}");
}

#[test]
fn parse_errors_report_file_and_offset() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad");
    fs::create_dir(&bad).unwrap();
    fs::write(bad.join("x.table.json"), "{\"n\": 1, \"values\": [0, oops]}").unwrap();
    let err = stderr(dir.path(), "extract --input bad --out sets", 2);
    assert!(err.contains("x.table.json"), "{err}");
    // Zero-based offset of the `o` in `oops`.
    assert!(err.contains("byte 23"), "{err}");
}

#[test]
fn unknown_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["extract", "--bogus"]).status.code(), Some(2));
    sh(dir.path(), "synth --out x --game n", 2);
}

#[test]
fn golden_outputs_are_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let diffs = common::golden_mismatches(dir.path());
    assert!(
        diffs.is_empty(),
        "{diffs:?}; rerun with ANDOR_BLESS=1 after an intended change"
    );
}
