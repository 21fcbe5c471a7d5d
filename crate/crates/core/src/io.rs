//! JSON documents for value tables, interaction sets and ground-truth
//! sidecars. Numbers round-trip exactly: serde_json writes the shortest
//! decimal that parses back to the same `f64`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::InteractionSet;
use crate::lattice::LatticeVector;
use crate::models::{sparse_entries, GroundTruthGame, ValueTable};

pub const TABLE_SUFFIX: &str = ".table.json";
pub const SET_SUFFIX: &str = ".set.json";
pub const TRUTH_SUFFIX: &str = ".truth.json";

#[derive(Serialize, Deserialize)]
struct TableDoc {
    n: usize,
    #[serde(default)]
    label: String,
    values: Vec<f64>,
    #[serde(default)]
    meta: String,
}

#[derive(Serialize, Deserialize)]
struct DenseDoc {
    and: Vec<f64>,
    or: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SetDoc {
    n: usize,
    #[serde(default)]
    label: String,
    bias: f64,
    /// Threshold the writer applied, if any. Informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(with = "sparse_entries")]
    and: BTreeMap<u32, f64>,
    #[serde(with = "sparse_entries")]
    or: BTreeMap<u32, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dense: Option<DenseDoc>,
}

/// Ground truth of one synthetic sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSidecar {
    pub label: String,
    /// True when offsetting high-order pairs were injected.
    pub injected: bool,
    pub game: GroundTruthGame,
}

fn label_of(s: String) -> Option<String> {
    (!s.is_empty()).then_some(s)
}

/// Byte offset of a 1-based (line, column) position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn parse<T: DeserializeOwned>(text: &str, file: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        file: file.to_string(),
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })
}

fn render<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents contain only finite numbers");
    s.push('\n');
    s
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn table_to_json(v: &ValueTable) -> String {
    render(&TableDoc {
        n: v.n(),
        label: v.label.clone().unwrap_or_default(),
        values: v.values().values().to_vec(),
        meta: v.meta.clone(),
    })
}

pub fn table_from_json(text: &str, file: &str) -> Result<ValueTable> {
    let doc: TableDoc = parse(text, file)?;
    let mut v = ValueTable::new(LatticeVector::new(doc.n, doc.values)?).with_meta(doc.meta);
    v.label = label_of(doc.label);
    Ok(v)
}

/// Nonzero effects as sparse lists; `dense` adds the full vectors.
pub fn set_to_json(set: &InteractionSet, tau: Option<f64>, dense: bool) -> String {
    let sparse = |v: &LatticeVector| -> BTreeMap<u32, f64> {
        v.values()
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &x)| x != 0.0)
            .map(|(m, &x)| (m as u32, x))
            .collect()
    };
    render(&SetDoc {
        n: set.n(),
        label: set.label.clone().unwrap_or_default(),
        bias: set.bias(),
        tau,
        and: sparse(set.i_and()),
        or: sparse(set.i_or()),
        dense: dense.then(|| DenseDoc {
            and: set.i_and().values().to_vec(),
            or: set.i_or().values().to_vec(),
        }),
    })
}

/// Reads a set; the sparse lists are authoritative, `dense` is ignored.
pub fn set_from_json(text: &str, file: &str) -> Result<InteractionSet> {
    Ok(set_and_tau_from_json(text, file)?.0)
}

/// A set together with the threshold recorded by its writer.
pub fn set_and_tau_from_json(text: &str, file: &str) -> Result<(InteractionSet, Option<f64>)> {
    let doc: SetDoc = parse(text, file)?;
    if doc.and.contains_key(&0) || doc.or.contains_key(&0) {
        return Err(Error::Invariant(format!("{file}: effects at mask 0 are held by bias")));
    }
    let set = InteractionSet::from_sparse(doc.n, doc.bias, &doc.and, &doc.or)?.with_label(label_of(doc.label));
    Ok((set, doc.tau))
}

pub fn truth_to_json(t: &TruthSidecar) -> String {
    render(t)
}

pub fn truth_from_json(text: &str, file: &str) -> Result<TruthSidecar> {
    let t: TruthSidecar = parse(text, file)?;
    t.game.validate()?;
    Ok(t)
}

/// Files in `dir` ending in `suffix`, sorted by name.
pub fn list_files(dir: &Path, suffix: &str) -> Result<Vec<PathBuf>> {
    let io = |source| Error::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if path.is_file() && name.ends_with(suffix) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn read_all<T>(dir: &Path, suffix: &str, f: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<(PathBuf, T)>> {
    list_files(dir, suffix)?
        .into_iter()
        .map(|p| {
            let item = f(&read_text(&p)?, &p.display().to_string())?;
            Ok((p, item))
        })
        .collect()
}

pub fn read_tables(dir: &Path) -> Result<Vec<(PathBuf, ValueTable)>> {
    read_all(dir, TABLE_SUFFIX, table_from_json)
}

pub fn read_sets(dir: &Path) -> Result<Vec<(PathBuf, (InteractionSet, Option<f64>))>> {
    read_all(dir, SET_SUFFIX, set_and_tau_from_json)
}

/// File name with `suffix` removed; the fallback label of a document.
pub fn stem(path: &Path, suffix: &str) -> String {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
    name.strip_suffix(suffix).unwrap_or(name).to_string()
}

pub fn read_truths(dir: &Path) -> Result<Vec<(PathBuf, TruthSidecar)>> {
    read_all(dir, TRUTH_SUFFIX, truth_from_json)
}
