//! On-disk cache of computed band sets, keyed by `(λ, k, resolution)`.

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::spectrum::{band_pair, band_set, default_window, BandSet};

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "CANTOR_SPECTRA_CACHE";

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

fn key_lock(key: &str) -> Arc<Mutex<()>> {
    static LOCKS: OnceLock<Mutex<HashMap<String, Arc<Mutex<()>>>>> = OnceLock::new();
    let mut map = LOCKS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    map.entry(key.to_string()).or_default().clone()
}

/// File name for a band set: λ and resolution at 12 significant digits.
pub fn cache_key(lambda: f64, level: usize, resolution: f64) -> String {
    format!("bands_l{:.11e}_k{}_r{:.11e}.json", lambda, level, resolution)
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Cache { dir })
    }

    /// Cache in the directory named by [`CACHE_ENV`], if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) if !dir.is_empty() => Cache::new(PathBuf::from(dir)).map(Some),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(key)
    }

    pub fn load(&self, lambda: f64, level: usize, resolution: f64) -> Result<Option<BandSet>> {
        let path = self.path(&cache_key(lambda, level, resolution));
        match fs::read_to_string(&path) {
            Ok(text) => Ok(Some(serde_json::from_str(&text)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Writes through a temporary file and an atomic rename.
    pub fn store(&self, bands: &BandSet) -> Result<()> {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let key = cache_key(bands.lambda, bands.level, bands.resolution);
        let lock = key_lock(&key);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let tmp = self.path(&format!(
            ".{key}.{}.{}.tmp",
            std::process::id(),
            COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let text = serde_json::to_string(bands)?;
        let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(text.as_bytes())
            .and_then(|_| file.sync_all())
            .map_err(|e| Error::io(&tmp, e))?;
        let dest = self.path(&key);
        fs::rename(&tmp, &dest).map_err(|e| Error::io(dest, e))
    }

    /// Level-`k` bands over the default window, computed on a miss.
    pub fn band_set(&self, lambda: f64, level: usize, resolution: f64) -> Result<BandSet> {
        if let Some(hit) = self.load(lambda, level, resolution)? {
            return Ok(hit);
        }
        let bands = band_set(lambda, level, default_window(lambda), resolution)?;
        self.store(&bands)?;
        Ok(bands)
    }

    /// Levels `k` and `k + 1`, computed together on a miss.
    pub fn band_pair(&self, lambda: f64, level: usize, resolution: f64) -> Result<(BandSet, BandSet)> {
        if let (Some(a), Some(b)) = (
            self.load(lambda, level, resolution)?,
            self.load(lambda, level + 1, resolution)?,
        ) {
            return Ok((a, b));
        }
        let (a, b) = band_pair(lambda, level, resolution)?;
        self.store(&a)?;
        self.store(&b)?;
        Ok((a, b))
    }
}
