//! On-disk moment tables, one JSON file per `(family, n)`.
//!
//! Every file embeds its full key (format version, family, n, provenance with
//! quadrature settings). A file whose key differs from the request is a miss and
//! is overwritten; a file that fails to parse or validate is rebuilt with a warning.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{DistributionModel, Family, MomentEngine, MomentSet, Provenance};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const CACHE_FORMAT_VERSION: u32 = 1;

// Single writer per process; readers never block.
static WRITE_LOCK: Mutex<()> = Mutex::new(());

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    format_version: u32,
    family: Family,
    n: usize,
    provenance: Provenance,
    alpha: Vec<f64>,
    /// Row-major, `n * n` entries.
    sigma: Vec<f64>,
}

impl CacheFile {
    fn from_set(set: &MomentSet<f64>) -> Self {
        Self {
            format_version: CACHE_FORMAT_VERSION,
            family: set.family,
            n: set.n,
            provenance: set.provenance,
            alpha: set.alpha.clone(),
            sigma: set.sigma.as_slice().to_vec(),
        }
    }

    fn into_set(self) -> Result<MomentSet<f64>> {
        let sigma = Matrix::from_row_major(self.n, self.n, self.sigma)?;
        Ok(MomentSet {
            family: self.family,
            n: self.n,
            alpha: self.alpha,
            sigma,
            provenance: self.provenance,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CacheStatus {
    /// Served from disk.
    Hit,
    /// No usable file; computed and stored.
    Built,
    /// A file existed but was unusable; computed and stored in its place.
    Rebuilt { reason: String },
}

#[derive(Debug, Clone)]
pub struct MomentCache {
    dir: PathBuf,
    engine: MomentEngine,
}

impl MomentCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            engine: MomentEngine::default(),
        }
    }

    pub fn with_engine(mut self, engine: MomentEngine) -> Self {
        self.engine = engine;
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, family: Family, n: usize) -> PathBuf {
        self.dir.join(format!("{family}-n{n}.json"))
    }

    pub fn load_or_build(
        &self,
        dist: &DistributionModel,
        n: usize,
    ) -> Result<(MomentSet<f64>, CacheStatus)> {
        let path = self.path_for(dist.family, n);
        let expected = self.engine.provenance(dist);
        let status = match fs::read(&path) {
            Ok(bytes) => match decode(&bytes, dist.family, n, &expected) {
                Ok(set) => return Ok((set, CacheStatus::Hit)),
                Err(Stale::KeyMismatch(reason)) => {
                    log::debug!("moment cache miss for {}: {reason}", path.display());
                    CacheStatus::Rebuilt { reason }
                }
                Err(Stale::Corrupt(reason)) => {
                    log::warn!(
                        "moment cache file {} is unusable ({reason}); recomputing",
                        path.display()
                    );
                    CacheStatus::Rebuilt { reason }
                }
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => CacheStatus::Built,
            Err(e) => return Err(e.into()),
        };

        // `build` validates; an invalid table never reaches the disk.
        let set = self.engine.build(dist, n)?;
        self.store(&path, &set)?;
        Ok((set, status))
    }

    fn store(&self, path: &Path, set: &MomentSet<f64>) -> Result<()> {
        let _guard = WRITE_LOCK.lock().unwrap_or_else(|p| p.into_inner());
        fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer_pretty(&mut tmp, &CacheFile::from_set(set))?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }
}

enum Stale {
    KeyMismatch(String),
    Corrupt(String),
}

fn decode(
    bytes: &[u8],
    family: Family,
    n: usize,
    provenance: &Provenance,
) -> Result<MomentSet<f64>, Stale> {
    let file: CacheFile =
        serde_json::from_slice(bytes).map_err(|e| Stale::Corrupt(e.to_string()))?;
    if file.format_version != CACHE_FORMAT_VERSION {
        return Err(Stale::KeyMismatch(format!(
            "format version {} != {CACHE_FORMAT_VERSION}",
            file.format_version
        )));
    }
    if file.family != family || file.n != n || file.provenance != *provenance {
        return Err(Stale::KeyMismatch(format!(
            "key ({}, {}, {:?}) does not match request",
            file.family, file.n, file.provenance
        )));
    }
    let set = file.into_set().map_err(|e| Stale::Corrupt(e.to_string()))?;
    set.validate().map_err(|e| Stale::Corrupt(e.to_string()))?;
    Ok(set)
}

/// Loads the table for `(dist, n)` from `cache_dir`, computing and storing it on
/// a miss. Without a cache directory the table is computed directly.
pub fn load_or_build_moments(
    dist: &DistributionModel,
    n: usize,
    cache_dir: Option<&Path>,
) -> Result<MomentSet<f64>> {
    match cache_dir {
        Some(dir) => MomentCache::new(dir)
            .load_or_build(dist, n)
            .map(|(set, _)| set),
        None => MomentEngine::default().build(dist, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_miss_then_hit() {
        let dir = tempfile::tempdir().unwrap();
        let cache = MomentCache::new(dir.path());
        let dist = DistributionModel::exponential();
        let (first, status) = cache.load_or_build(&dist, 3).unwrap();
        assert_eq!(status, CacheStatus::Built);
        assert_eq!(first.provenance, Provenance::ClosedForm);
        let (second, status) = cache.load_or_build(&dist, 3).unwrap();
        assert_eq!(status, CacheStatus::Hit);
        assert_eq!(first, second);
    }

    #[test]
    fn warm_cache_reproduces_bits() {
        let dir = tempfile::tempdir().unwrap();
        let cache = MomentCache::new(dir.path());
        let dist = DistributionModel::normal();
        let (built, _) = cache.load_or_build(&dist, 10).unwrap();
        let bytes_first = fs::read(cache.path_for(Family::Normal, 10)).unwrap();
        let (loaded, status) = cache.load_or_build(&dist, 10).unwrap();
        assert_eq!(status, CacheStatus::Hit);
        for (a, b) in built.alpha.iter().zip(&loaded.alpha) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in built.sigma.as_slice().iter().zip(loaded.sigma.as_slice()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let rebuilt = MomentEngine::default().build(&dist, 10).unwrap();
        let bytes_again = serde_json::to_vec_pretty(&CacheFile::from_set(&rebuilt)).unwrap();
        assert_eq!(&bytes_first[..bytes_first.len() - 1], &bytes_again[..]);
    }

    #[test]
    fn corrupted_file_is_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let cache = MomentCache::new(dir.path());
        let dist = DistributionModel::normal();
        fs::write(cache.path_for(Family::Normal, 10), b"{ not json").unwrap();
        let (set, status) = cache.load_or_build(&dist, 10).unwrap();
        assert!(matches!(status, CacheStatus::Rebuilt { .. }));
        assert_eq!(set.n, 10);
        let (_, status) = cache.load_or_build(&dist, 10).unwrap();
        assert_eq!(status, CacheStatus::Hit);
    }

    #[test]
    fn settings_change_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let dist = DistributionModel::normal();
        MomentCache::new(dir.path())
            .load_or_build(&dist, 4)
            .unwrap();
        let mut settings = dist.default_quadrature();
        settings.panels += 2;
        let other = MomentCache::new(dir.path())
            .with_engine(MomentEngine::default().with_quadrature(settings));
        let (set, status) = other.load_or_build(&dist, 4).unwrap();
        assert!(matches!(status, CacheStatus::Rebuilt { .. }));
        assert_eq!(set.provenance, Provenance::Quadrature(settings));
    }

    #[test]
    fn tampered_values_fail_validation_and_rebuild() {
        let dir = tempfile::tempdir().unwrap();
        let cache = MomentCache::new(dir.path());
        let dist = DistributionModel::exponential();
        let (good, _) = cache.load_or_build(&dist, 5).unwrap();
        let mut file = CacheFile::from_set(&good);
        file.alpha.reverse();
        fs::write(
            cache.path_for(Family::Exponential, 5),
            serde_json::to_vec(&file).unwrap(),
        )
        .unwrap();
        let (set, status) = cache.load_or_build(&dist, 5).unwrap();
        assert!(matches!(status, CacheStatus::Rebuilt { .. }));
        assert_eq!(set, good);
    }
}
