//! Model catalog: manifest loading, discovery, checksum-verified downloads and
//! a license-segregated local cache.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::is_known_processor;
use crate::scripts::Script;

mod cache;
mod fetch;

pub use cache::{
    download, verify_cache, Cache, CacheReport, DownloadOutcome, DownloadStatus, CACHE_ENV,
};
pub use fetch::{CountingFetcher, DefaultFetcher, Fetcher};

pub const SUPPORTED_SCHEMA_VERSIONS: std::ops::RangeInclusive<u32> = 1..=1;

/// Backends implemented in this crate; they need no catalog entry.
pub const BUILTIN_BACKENDS: [(&str, &str); 3] =
    [("tokenize", "rule"), ("mwt", "rule"), ("translit", "table")];

const BUNDLED_CATALOG: &str = include_str!("../../../../data/catalog/catalog.json");

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("catalog schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported catalog schema_version {0} (supported: 1)")]
    UnsupportedSchemaVersion(u32),
    #[error("no catalog entry for lang={lang} processor={processor}")]
    NotInCatalog { lang: String, processor: String },
    #[error("checksum mismatch for {url}: expected {expected}, got {actual}")]
    ChecksumMismatch {
        url: String,
        expected: String,
        actual: String,
    },
    #[error("fetching {url} failed: {message}")]
    Fetch { url: String, message: String },
    #[error("unsupported URL scheme in `{0}`")]
    UnsupportedScheme(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    Production,
    Stable,
    Beta,
    Prototype,
}

impl Quality {
    pub fn as_str(self) -> &'static str {
        match self {
            Quality::Production => "production",
            Quality::Stable => "stable",
            Quality::Beta => "beta",
            Quality::Prototype => "prototype",
        }
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "production" => Ok(Quality::Production),
            "stable" => Ok(Quality::Stable),
            "beta" => Ok(Quality::Beta),
            "prototype" => Ok(Quality::Prototype),
            _ => Err(format!("unknown quality tier `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub lang: String,
    pub script: Script,
    pub processor: String,
    pub backend: String,
    /// `https://`, `file:///abs/path`, or `file:relative/path` (relative to the manifest).
    pub url: String,
    /// SHA-256, lowercase hex.
    pub checksum: String,
    pub license: String,
    pub quality: Quality,
    pub version: String,
}

impl CatalogEntry {
    /// File name used inside the cache directory.
    pub fn file_name(&self) -> String {
        let tail = self.url.rsplit(['/', ':']).next().unwrap_or_default();
        let clean = sanitize(tail);
        if clean.is_empty() || clean == "." || clean == ".." {
            "model.bin".to_string()
        } else {
            clean
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogManifest {
    pub schema_version: u32,
    /// `lang → processor → backend`
    #[serde(default)]
    pub defaults: BTreeMap<String, BTreeMap<String, String>>,
    pub entries: Vec<CatalogEntry>,
    /// Directory that relative `file:` URLs resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// Discovery filter; `None` fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CatalogFilter {
    pub lang: Option<String>,
    pub script: Option<Script>,
    pub processor: Option<String>,
    pub quality: Option<Quality>,
}

impl CatalogManifest {
    /// The catalog shipped with the crate (fixture models under `data/catalog`).
    pub fn bundled() -> Self {
        let mut m = parse_manifest(BUNDLED_CATALOG).expect("bundled catalog is valid");
        m.base_dir = Some(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/catalog"));
        m
    }

    pub fn empty() -> Self {
        CatalogManifest {
            schema_version: 1,
            defaults: BTreeMap::new(),
            entries: Vec::new(),
            base_dir: None,
        }
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn default_backend(&self, lang: &str, processor: &str) -> Option<&str> {
        self.defaults.get(lang)?.get(processor).map(String::as_str)
    }

    /// Entries for (lang, processor), optionally restricted to a backend.
    pub fn candidates<'a>(
        &'a self,
        lang: &'a str,
        processor: &'a str,
        backend: Option<&'a str>,
    ) -> impl Iterator<Item = &'a CatalogEntry> + 'a {
        self.entries.iter().filter(move |e| {
            e.lang == lang && e.processor == processor && backend.is_none_or(|b| e.backend == b)
        })
    }

    /// Absolute form of an entry URL (relative `file:` URLs resolved against `base_dir`).
    pub fn resolve_url(&self, entry: &CatalogEntry) -> String {
        match entry.url.strip_prefix("file:") {
            Some(rest) if !rest.starts_with("//") => {
                let base = self.base_dir.clone().unwrap_or_else(|| PathBuf::from("."));
                let path = base.join(rest);
                let abs = std::path::absolute(&path).unwrap_or(path);
                url::Url::from_file_path(&abs)
                    .map(String::from)
                    .unwrap_or_else(|_| format!("file://{}", abs.display()))
            }
            _ => entry.url.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), RegistryError> {
        let schema = |path: String, message: String| Err(RegistryError::Schema { path, message });
        if !SUPPORTED_SCHEMA_VERSIONS.contains(&self.schema_version) {
            return Err(RegistryError::UnsupportedSchemaVersion(self.schema_version));
        }
        let mut seen = HashSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            let path = |field: &str| format!("entries[{i}].{field}");
            if e.checksum.len() != 64
                || !e
                    .checksum
                    .bytes()
                    .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
            {
                return schema(
                    path("checksum"),
                    format!(
                        "expected 64 lowercase hex characters, got {} characters",
                        e.checksum.len()
                    ),
                );
            }
            if !is_known_processor(&e.processor) {
                return schema(
                    path("processor"),
                    format!("unknown processor `{}`", e.processor),
                );
            }
            for (field, value) in [
                ("lang", &e.lang),
                ("backend", &e.backend),
                ("license", &e.license),
                ("version", &e.version),
                ("url", &e.url),
            ] {
                if value.trim().is_empty() {
                    return schema(path(field), "must not be empty".into());
                }
            }
            if !(e.url.starts_with("file:")
                || e.url.starts_with("https://")
                || e.url.starts_with("http://"))
            {
                return schema(
                    path("url"),
                    format!("unsupported URL scheme in `{}`", e.url),
                );
            }
            if !seen.insert((&e.lang, e.script, &e.processor, &e.backend, &e.version)) {
                return schema(
                    format!("entries[{i}]"),
                    format!(
                        "duplicate entry {}/{}/{}/{}/{}",
                        e.lang, e.script, e.processor, e.backend, e.version
                    ),
                );
            }
        }
        for (lang, procs) in &self.defaults {
            for (processor, backend) in procs {
                let builtin = BUILTIN_BACKENDS.contains(&(processor.as_str(), backend.as_str()));
                if !builtin
                    && self
                        .candidates(lang, processor, Some(backend))
                        .next()
                        .is_none()
                {
                    return schema(
                        format!("defaults.{lang}.{processor}"),
                        format!("backend `{backend}` has no entry and is not built in"),
                    );
                }
            }
        }
        Ok(())
    }
}

/// Parse and validate a manifest from JSON text.
pub fn parse_manifest(input: &str) -> Result<CatalogManifest, RegistryError> {
    let value: serde_json::Value =
        serde_json::from_str(input).map_err(|e| RegistryError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let manifest: CatalogManifest = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        RegistryError::Schema {
            path: if path == "." || path.is_empty() {
                "$".to_string()
            } else {
                path
            },
            message: e.into_inner().to_string(),
        }
    })?;
    manifest.validate()?;
    Ok(manifest)
}

/// Load a manifest from a filesystem path, a `file://` URL or (with the `http`
/// feature) an `https://` URL.
pub fn load_manifest(path_or_url: &str) -> Result<CatalogManifest, RegistryError> {
    if path_or_url.starts_with("https://") || path_or_url.starts_with("http://") {
        let mut buf = Vec::new();
        DefaultFetcher.fetch(path_or_url, &mut buf)?;
        let text = String::from_utf8(buf).map_err(|e| RegistryError::Fetch {
            url: path_or_url.to_string(),
            message: e.to_string(),
        })?;
        return parse_manifest(&text);
    }
    let path = match path_or_url.strip_prefix("file:") {
        Some(_) => fetch::file_url_to_path(path_or_url, None)?,
        None => PathBuf::from(path_or_url),
    };
    let text = std::fs::read_to_string(&path).map_err(|source| RegistryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut manifest = parse_manifest(&text)?;
    manifest.base_dir = path.parent().map(Path::to_path_buf);
    Ok(manifest)
}

pub fn discover<'a>(
    manifest: &'a CatalogManifest,
    filter: &CatalogFilter,
) -> Vec<&'a CatalogEntry> {
    manifest
        .entries
        .iter()
        .filter(|e| {
            filter.lang.as_deref().is_none_or(|l| e.lang == l)
                && filter.script.is_none_or(|s| e.script == s)
                && filter.processor.as_deref().is_none_or(|p| e.processor == p)
                && filter.quality.is_none_or(|q| e.quality == q)
        })
        .collect()
}

/// Make a string safe to use as a single path component.
fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_alphanumeric() || matches!(c, '.' | '-' | '_' | '+') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZERO: &str = "0000000000000000000000000000000000000000000000000000000000000000";

    fn entry_json(checksum: &str) -> String {
        format!(
            r#"{{"lang":"tur","script":"Latn","processor":"morph","backend":"apertium","url":"file:m.bin","checksum":"{checksum}","license":"GPL-3.0-or-later","quality":"production","version":"1"}}"#
        )
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(
            parse_manifest("{}"),
            Err(RegistryError::Schema { .. })
        ));
        assert!(matches!(
            parse_manifest("{"),
            Err(RegistryError::Syntax { .. })
        ));
        let short = format!(
            r#"{{"schema_version":1,"entries":[{}]}}"#,
            entry_json(&ZERO[1..])
        );
        match parse_manifest(&short) {
            Err(RegistryError::Schema { path, .. }) => assert_eq!(path, "entries[0].checksum"),
            other => panic!("{other:?}"),
        }
        let upper = format!(
            r#"{{"schema_version":1,"entries":[{}]}}"#,
            entry_json(&ZERO.replace('0', "A"))
        );
        assert!(parse_manifest(&upper).is_err());
        let v2 = format!(r#"{{"schema_version":2,"entries":[{}]}}"#, entry_json(ZERO));
        assert!(matches!(
            parse_manifest(&v2),
            Err(RegistryError::UnsupportedSchemaVersion(2))
        ));
        let bad_quality = format!(
            r#"{{"schema_version":1,"entries":[{}]}}"#,
            entry_json(ZERO).replace("production", "gold")
        );
        match parse_manifest(&bad_quality) {
            Err(RegistryError::Schema { path, .. }) => assert_eq!(path, "entries[0].quality"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_and_dangling_defaults() {
        let dup = format!(
            r#"{{"schema_version":1,"entries":[{e},{e}]}}"#,
            e = entry_json(ZERO)
        );
        assert!(matches!(
            parse_manifest(&dup),
            Err(RegistryError::Schema { .. })
        ));
        let dangling = r#"{"schema_version":1,"defaults":{"tur":{"pos":"stanza"}},"entries":[]}"#;
        match parse_manifest(dangling) {
            Err(RegistryError::Schema { path, .. }) => assert_eq!(path, "defaults.tur.pos"),
            other => panic!("{other:?}"),
        }
        let builtin = r#"{"schema_version":1,"defaults":{"tur":{"tokenize":"rule"}},"entries":[]}"#;
        assert!(parse_manifest(builtin).is_ok());
    }

    #[test]
    fn bundled_catalog_mirrors_quality_tiers() {
        let m = CatalogManifest::bundled();
        let prod: Vec<_> = discover(
            &m,
            &CatalogFilter {
                quality: Some(Quality::Production),
                ..Default::default()
            },
        )
        .into_iter()
        .map(|e| (e.lang.as_str(), e.processor.as_str()))
        .collect();
        assert_eq!(prod, [("tur", "morph"), ("kaz", "morph"), ("tat", "morph")]);
        assert_eq!(
            discover(&m, &CatalogFilter::default()).len(),
            m.entries().len()
        );
        assert!(discover(
            &m,
            &CatalogFilter {
                lang: Some("gag".into()),
                processor: Some("ner".into()),
                ..Default::default()
            }
        )
        .is_empty());
    }

    #[test]
    fn file_names_are_sanitized() {
        let mut e: CatalogEntry = serde_json::from_str(&entry_json(ZERO)).unwrap();
        assert_eq!(e.file_name(), "m.bin");
        e.url = "https://example.org/models/".into();
        assert_eq!(e.file_name(), "model.bin");
        e.url = "file:../..".into();
        assert_eq!(e.file_name(), "model.bin");
    }
}
