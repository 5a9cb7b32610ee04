//! Process-wide band cache with optional JSON persistence.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::band::{BandPoint, MontgomeryParams};
use crate::error::Result;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct Entry {
    tol: f64,
    point: BandPoint,
}

fn table() -> &'static Mutex<HashMap<String, Entry>> {
    static TABLE: OnceLock<Mutex<HashMap<String, Entry>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Parameters rounded to 12 significant digits.
fn key(params: &MontgomeryParams, tol: f64) -> String {
    format!(
        "{}|{:.11e}|{:.11e}|{:.11e}",
        params.k, params.alpha, params.beta, tol
    )
}

/// A hit requires the stored parameters to match bit for bit, so cached
/// and cold evaluations always return the same numbers.
pub(crate) fn lookup(params: &MontgomeryParams, tol: f64) -> Option<BandPoint> {
    let guard = table().lock().unwrap_or_else(|e| e.into_inner());
    guard
        .get(&key(params, tol))
        .filter(|e| e.tol == tol && e.point.params == *params)
        .map(|e| e.point)
}

pub(crate) fn store(point: BandPoint, tol: f64) {
    let mut guard = table().lock().unwrap_or_else(|e| e.into_inner());
    guard.insert(key(&point.params, tol), Entry { tol, point });
}

/// Number of cached band points.
pub fn cache_len() -> usize {
    table().lock().unwrap_or_else(|e| e.into_inner()).len()
}

pub fn clear_cache() {
    table().lock().unwrap_or_else(|e| e.into_inner()).clear();
}

/// Merges a cache file written by [`save_cache`]; a missing file is not
/// an error. Returns the number of entries read.
pub fn load_cache(path: &Path) -> Result<usize> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(e.into()),
    };
    let entries: Vec<Entry> = serde_json::from_str(&text)?;
    let n = entries.len();
    for e in entries {
        store(e.point, e.tol);
    }
    Ok(n)
}

/// Writes all cached entries, sorted by key for stable files.
pub fn save_cache(path: &Path) -> Result<()> {
    let mut entries: Vec<(String, Entry)> = table()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .iter()
        .map(|(k, e)| (k.clone(), *e))
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let list: Vec<Entry> = entries.into_iter().map(|(_, e)| e).collect();
    std::fs::write(path, serde_json::to_string_pretty(&list)?)?;
    Ok(())
}
