use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use super::{sanitize, CatalogEntry, CatalogManifest, Fetcher, RegistryError};
use crate::scripts::Script;

/// Environment variable overriding the cache root.
pub const CACHE_ENV: &str = "TURKIC_CACHE";

const STAGING: &str = ".staging";
const LOCKS: &str = ".locks";

static STAGE_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Local model cache laid out as
/// `<root>/<license>/<lang>/<script>/<processor>/<backend>-<version>/<file>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cache {
    root: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DownloadStatus {
    Fetched,
    Cached,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DownloadOutcome {
    pub entry: CatalogEntry,
    pub path: PathBuf,
    pub status: DownloadStatus,
}

/// Result of re-hashing a cache.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CacheReport {
    pub ok: Vec<PathBuf>,
    pub corrupt: Vec<PathBuf>,
    pub orphaned: Vec<PathBuf>,
}

impl CacheReport {
    pub fn is_clean(&self) -> bool {
        self.corrupt.is_empty() && self.orphaned.is_empty()
    }
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    /// `$TURKIC_CACHE`, else `$XDG_CACHE_HOME/turkic`, else `~/.cache/turkic`.
    pub fn from_env() -> Self {
        if let Some(root) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            return Cache::new(root);
        }
        if let Some(xdg) = std::env::var_os("XDG_CACHE_HOME").filter(|v| !v.is_empty()) {
            return Cache::new(PathBuf::from(xdg).join("turkic"));
        }
        match std::env::var_os("HOME") {
            Some(home) => Cache::new(PathBuf::from(home).join(".cache").join("turkic")),
            None => Cache::new(".turkic-cache"),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entry_dir(&self, entry: &CatalogEntry) -> PathBuf {
        self.root
            .join(sanitize(&entry.license))
            .join(sanitize(&entry.lang))
            .join(entry.script.code())
            .join(sanitize(&entry.processor))
            .join(sanitize(&format!("{}-{}", entry.backend, entry.version)))
    }

    pub fn entry_path(&self, entry: &CatalogEntry) -> PathBuf {
        self.entry_dir(entry).join(entry.file_name())
    }

    /// Path of a committed cache file; never returns partially written files.
    pub fn lookup(&self, entry: &CatalogEntry) -> Option<PathBuf> {
        let p = self.entry_path(entry);
        p.is_file().then_some(p)
    }

    /// Fetch, verify and commit one entry unless it is already cached.
    pub fn fetch_entry(
        &self,
        manifest: &CatalogManifest,
        entry: &CatalogEntry,
        fetcher: &dyn Fetcher,
    ) -> Result<DownloadOutcome, RegistryError> {
        let path = self.entry_path(entry);
        let outcome = |status| DownloadOutcome {
            entry: entry.clone(),
            path: path.clone(),
            status,
        };
        if path.is_file() {
            return Ok(outcome(DownloadStatus::Cached));
        }
        let _lock = self.lock(&path)?;
        if path.is_file() {
            return Ok(outcome(DownloadStatus::Cached));
        }

        let staging = self.root.join(STAGING);
        create_dir(&staging)?;
        let stage_path = staging.join(format!(
            "{}-{}-{}.part",
            std::process::id(),
            STAGE_COUNTER.fetch_add(1, Ordering::SeqCst),
            entry.file_name()
        ));
        let result = self.stage(manifest, entry, fetcher, &stage_path);
        if let Err(e) = result {
            let _ = fs::remove_file(&stage_path);
            return Err(e);
        }
        create_dir(&self.entry_dir(entry))?;
        fs::rename(&stage_path, &path).map_err(|source| {
            let _ = fs::remove_file(&stage_path);
            io_err(&path, source)
        })?;
        Ok(outcome(DownloadStatus::Fetched))
    }

    fn stage(
        &self,
        manifest: &CatalogManifest,
        entry: &CatalogEntry,
        fetcher: &dyn Fetcher,
        stage_path: &Path,
    ) -> Result<(), RegistryError> {
        let url = manifest.resolve_url(entry);
        let file = File::create(stage_path).map_err(|e| io_err(stage_path, e))?;
        let mut sink = HashingWriter {
            inner: BufWriter::new(file),
            hasher: Sha256::new(),
        };
        fetcher.fetch(&url, &mut sink)?;
        let HashingWriter { inner, hasher } = sink;
        let file = inner
            .into_inner()
            .map_err(|e| io_err(stage_path, e.into_error()))?;
        file.sync_all().map_err(|e| io_err(stage_path, e))?;
        let actual = hex::encode(hasher.finalize());
        if actual != entry.checksum {
            return Err(RegistryError::ChecksumMismatch {
                url: entry.url.clone(),
                expected: entry.checksum.clone(),
                actual,
            });
        }
        Ok(())
    }

    /// Exclusive advisory lock for one cache path, released on drop.
    fn lock(&self, path: &Path) -> Result<File, RegistryError> {
        let locks = self.root.join(LOCKS);
        create_dir(&locks)?;
        let key = hex::encode(Sha256::digest(path.to_string_lossy().as_bytes()));
        let lock_path = locks.join(format!("{}.lock", &key[..32]));
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(|e| io_err(&lock_path, e))?;
        file.lock().map_err(|e| io_err(&lock_path, e))?;
        Ok(file)
    }
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn io_err(path: &Path, source: io::Error) -> RegistryError {
    RegistryError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn create_dir(path: &Path) -> Result<(), RegistryError> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

fn sha256_file(path: &Path) -> io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Download the entries needed for `processors` in `lang`. When `script` is
/// given only entries for that script are considered. The catalog default
/// backend wins when one is set. Every processor is checked before anything
/// is fetched.
pub fn download(
    manifest: &CatalogManifest,
    cache: &Cache,
    fetcher: &dyn Fetcher,
    lang: &str,
    processors: &[&str],
    script: Option<Script>,
) -> Result<Vec<DownloadOutcome>, RegistryError> {
    let mut wanted = Vec::new();
    for &processor in processors {
        let backend = manifest.default_backend(lang, processor);
        let found: Vec<&CatalogEntry> = manifest
            .candidates(lang, processor, backend)
            .filter(|e| script.is_none_or(|s| e.script == s))
            .collect();
        if found.is_empty() {
            return Err(RegistryError::NotInCatalog {
                lang: lang.to_string(),
                processor: processor.to_string(),
            });
        }
        wanted.extend(found);
    }
    wanted
        .into_iter()
        .map(|e| cache.fetch_entry(manifest, e, fetcher))
        .collect()
}

/// Re-hash every file in the cache against the manifest.
pub fn verify_cache(cache: &Cache, manifest: &CatalogManifest) -> CacheReport {
    let expected: HashMap<PathBuf, &CatalogEntry> = manifest
        .entries
        .iter()
        .map(|e| (cache.entry_path(e), e))
        .collect();
    let mut report = CacheReport::default();
    let walker = WalkDir::new(cache.root())
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|d| {
            d.depth() != 1 || !matches!(d.file_name().to_str(), Some(STAGING | LOCKS))
        });
    for item in walker.filter_map(Result::ok) {
        if !item.file_type().is_file() {
            continue;
        }
        let path = item.into_path();
        match expected.get(&path) {
            Some(entry) => match sha256_file(&path) {
                Ok(sum) if sum == entry.checksum => report.ok.push(path),
                _ => report.corrupt.push(path),
            },
            None => report.orphaned.push(path),
        }
    }
    report
}
