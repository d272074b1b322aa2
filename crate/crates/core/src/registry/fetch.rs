use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::RegistryError;

/// Source of model bytes.
pub trait Fetcher: Send + Sync {
    /// Stream the resource at `url` into `sink`, returning the byte count.
    fn fetch(&self, url: &str, sink: &mut dyn Write) -> Result<u64, RegistryError>;
}

/// Handles `file:` URLs, plus `http(s)://` when built with the `http` feature.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultFetcher;

pub(crate) fn file_url_to_path(url: &str, base: Option<&Path>) -> Result<PathBuf, RegistryError> {
    let rest = url
        .strip_prefix("file:")
        .ok_or_else(|| RegistryError::UnsupportedScheme(url.to_string()))?;
    if !rest.starts_with("//") {
        return Ok(base.unwrap_or(Path::new(".")).join(rest));
    }
    url::Url::parse(url)
        .ok()
        .and_then(|u| u.to_file_path().ok())
        .ok_or_else(|| RegistryError::Fetch {
            url: url.to_string(),
            message: "not a valid local file URL".into(),
        })
}

impl Fetcher for DefaultFetcher {
    fn fetch(&self, url: &str, sink: &mut dyn Write) -> Result<u64, RegistryError> {
        if url.starts_with("file:") {
            let path = file_url_to_path(url, None)?;
            let mut file = std::fs::File::open(&path).map_err(|source| RegistryError::Io {
                path: path.display().to_string(),
                source,
            })?;
            return std::io::copy(&mut file, sink).map_err(|e| RegistryError::Fetch {
                url: url.to_string(),
                message: e.to_string(),
            });
        }
        if url.starts_with("https://") || url.starts_with("http://") {
            return fetch_http(url, sink);
        }
        Err(RegistryError::UnsupportedScheme(url.to_string()))
    }
}

#[cfg(feature = "http")]
fn fetch_http(url: &str, sink: &mut dyn Write) -> Result<u64, RegistryError> {
    let fail = |message: String| RegistryError::Fetch {
        url: url.to_string(),
        message,
    };
    let mut response = ureq::get(url).call().map_err(|e| fail(e.to_string()))?;
    let mut reader = response.body_mut().as_reader();
    std::io::copy(&mut reader, sink).map_err(|e| fail(e.to_string()))
}

#[cfg(not(feature = "http"))]
fn fetch_http(url: &str, _sink: &mut dyn Write) -> Result<u64, RegistryError> {
    Err(RegistryError::UnsupportedScheme(url.to_string()))
}

/// Wraps a fetcher and records every transfer.
#[derive(Debug, Default)]
pub struct CountingFetcher<F> {
    inner: F,
    count: AtomicUsize,
    log: Mutex<Vec<String>>,
}

impl<F: Fetcher> CountingFetcher<F> {
    pub fn new(inner: F) -> Self {
        CountingFetcher {
            inner,
            count: AtomicUsize::new(0),
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn transfers(&self) -> usize {
        self.count.load(Ordering::SeqCst)
    }

    /// URLs fetched so far, in order.
    pub fn urls(&self) -> Vec<String> {
        self.log.lock().expect("fetch log poisoned").clone()
    }
}

impl<F: Fetcher> Fetcher for CountingFetcher<F> {
    fn fetch(&self, url: &str, sink: &mut dyn Write) -> Result<u64, RegistryError> {
        self.count.fetch_add(1, Ordering::SeqCst);
        self.log
            .lock()
            .expect("fetch log poisoned")
            .push(url.to_string());
        self.inner.fetch(url, sink)
    }
}
