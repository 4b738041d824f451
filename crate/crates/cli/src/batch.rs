use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Photo IDs from a list file (one per line, `#` starts a comment) or, when
/// no list is given, every file in `dir` ending in `suffix`. Sorted and
/// deduplicated either way.
pub fn photo_ids(list: Option<&Path>, dir: &Path, suffix: &str) -> Result<Vec<String>> {
    let mut ids: Vec<String> = match list {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("reading photo list {}", path.display()))?
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect(),
        None => fs::read_dir(dir)
            .with_context(|| format!("listing {}", dir.display()))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().to_str()?.strip_suffix(suffix).map(String::from))
            .filter(|id| !id.is_empty())
            .collect(),
    };
    ids.sort();
    ids.dedup();
    Ok(ids)
}

pub fn require_dir(path: &Path) -> Result<()> {
    if !path.is_dir() {
        bail!("{} is not a directory", path.display());
    }
    Ok(())
}

/// First existing `dir/<id><ext>` over `exts`.
pub fn find_file(dir: &Path, id: &str, exts: &[&str]) -> Result<PathBuf> {
    exts.iter()
        .map(|ext| dir.join(format!("{id}{ext}")))
        .find(|p| p.is_file())
        .with_context(|| format!("no {} file for {id} in {}", exts.join("/"), dir.display()))
}

#[derive(Debug, Serialize)]
pub struct Failure {
    pub id: String,
    pub error: String,
}

/// Runs `f` over every photo on `pool`. Results come back in `ids` order
/// regardless of scheduling.
pub fn run<T, F>(pool: &rayon::ThreadPool, ids: &[String], f: F) -> (BTreeMap<String, T>, Vec<Failure>)
where
    T: Send,
    F: Fn(&str) -> Result<T> + Sync,
{
    let results: Vec<(String, Result<T>)> =
        pool.install(|| ids.par_iter().map(|id| (id.clone(), f(id))).collect());
    let mut ok = BTreeMap::new();
    let mut failures = Vec::new();
    for (id, r) in results {
        match r {
            Ok(v) => {
                ok.insert(id, v);
            }
            Err(e) => {
                log::error!("{id}: {e:#}");
                failures.push(Failure {
                    id,
                    error: format!("{e:#}"),
                });
            }
        }
    }
    (ok, failures)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Turns per-photo failures into the process result.
pub fn finish(command: &str, photos: usize, failures: &[Failure]) -> Result<()> {
    log::info!("{command}: {} of {photos} photos succeeded", photos - failures.len());
    if !failures.is_empty() {
        bail!("{command}: {} of {photos} photos failed", failures.len());
    }
    Ok(())
}
