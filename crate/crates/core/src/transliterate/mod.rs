//! Table-driven transliteration with greedy longest match.
//!
//! At each input position the engine tries source sequences of decreasing
//! length (up to four characters) and emits the target of the first hit, so
//! digraphs and trigraphs win over single letters. Matching is done on the
//! Turkic-lowercased input; the case of the source is re-applied to the target.

pub mod casing;
mod table;

use std::collections::HashMap;
use std::sync::{Arc, LazyLock};

use thiserror::Error;

use crate::scripts::{normalize, Script};
use casing::{is_cased, is_upper, lower_char, upper, upper_first};
pub use table::{
    load_table, parse_table, TableError, TranslitTable, MAX_SOURCE_LEN, MAX_TARGET_LEN,
};

#[derive(Debug, Error)]
pub enum TranslitError {
    #[error("unsupported transliteration pair {lang} {from}->{to}; supported: {supported}")]
    UnsupportedPair {
        lang: String,
        from: Script,
        to: Script,
        supported: String,
    },
    #[error("no mapping for {ch:?} (U+{:04X}) at character offset {offset}", *ch as u32)]
    UnmappableCharacter { ch: char, offset: usize },
    #[error(transparent)]
    Table(#[from] TableError),
}

/// One supported (language, source script, target script) direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TranslitPair {
    pub lang: &'static str,
    pub source: Script,
    pub target: Script,
    pub standard: &'static str,
}

enum TableSource {
    Bundled(&'static str),
    /// Inverse of the bundled table for the opposite direction.
    Inverse,
}

use Script::{Arabic as Arab, Cyrillic as Cyrl, Latin as Latn, OldTurkic as Orkh};

macro_rules! bundled {
    ($name:literal) => {
        TableSource::Bundled(include_str!(concat!(
            "../../../../data/translit/",
            $name,
            ".tsv"
        )))
    };
}

static PAIRS: LazyLock<Vec<(TranslitPair, TableSource)>> = LazyLock::new(|| {
    let p = |lang, source, target, standard| TranslitPair {
        lang,
        source,
        target,
        standard,
    };
    vec![
        (
            p("kaz", Cyrl, Latn, "Official 2021"),
            bundled!("kaz_Cyrl_Latn"),
        ),
        (
            p("kaz", Latn, Cyrl, "Official 2021"),
            bundled!("kaz_Latn_Cyrl"),
        ),
        (
            p("uzb", Cyrl, Latn, "Official 1995"),
            bundled!("uzb_Cyrl_Latn"),
        ),
        (
            p("uzb", Latn, Cyrl, "Official 1995"),
            bundled!("uzb_Latn_Cyrl"),
        ),
        (
            p("aze", Cyrl, Latn, "Official 1991"),
            bundled!("aze_Cyrl_Latn"),
        ),
        (p("aze", Latn, Cyrl, "Official 1991"), TableSource::Inverse),
        (p("tat", Cyrl, Latn, "Zamanälif"), bundled!("tat_Cyrl_Latn")),
        (p("tat", Latn, Cyrl, "Zamanälif"), bundled!("tat_Latn_Cyrl")),
        (
            p("tuk", Cyrl, Latn, "Official 1993"),
            bundled!("tuk_Cyrl_Latn"),
        ),
        (
            p("tuk", Latn, Cyrl, "Official 1993"),
            bundled!("tuk_Latn_Cyrl"),
        ),
        (
            p("kaa", Cyrl, Latn, "Official 2016"),
            bundled!("kaa_Cyrl_Latn"),
        ),
        (
            p("kaa", Latn, Cyrl, "Official 2016"),
            bundled!("kaa_Latn_Cyrl"),
        ),
        (
            p("crh", Cyrl, Latn, "Latin std."),
            bundled!("crh_Cyrl_Latn"),
        ),
        (
            p("crh", Latn, Cyrl, "Latin std."),
            bundled!("crh_Latn_Cyrl"),
        ),
        (p("uig", Arab, Latn, "ULY"), bundled!("uig_Arab_Latn")),
        (p("uig", Latn, Arab, "ULY"), bundled!("uig_Latn_Arab")),
        (p("ota", Latn, Arab, "Academic"), bundled!("ota_Latn_Arab")),
        (
            p("otk", Orkh, Latn, "Turkological"),
            bundled!("otk_Orkh_Latn"),
        ),
    ]
});

static TABLES: LazyLock<HashMap<(String, Script, Script), Arc<TranslitTable>>> =
    LazyLock::new(|| {
        let mut tables = HashMap::new();
        for (pair, src) in PAIRS.iter() {
            if let TableSource::Bundled(text) = src {
                let name = format!("{}_{}_{}", pair.lang, pair.source, pair.target);
                let table = parse_table(text, Some(&name))
                    .unwrap_or_else(|e| panic!("bundled table {name}: {e}"));
                tables.insert(
                    (pair.lang.to_string(), pair.source, pair.target),
                    Arc::new(table),
                );
            }
        }
        for (pair, src) in PAIRS.iter() {
            if let TableSource::Inverse = src {
                let forward = &tables[&(pair.lang.to_string(), pair.target, pair.source)];
                let inverse = forward
                    .inverted()
                    .expect("bundled forward table is injective");
                tables.insert(
                    (pair.lang.to_string(), pair.source, pair.target),
                    Arc::new(inverse),
                );
            }
        }
        tables
    });

/// Every supported direction: both directions of the eight reversible pairs
/// plus the two one-way conversions.
pub fn supported_pairs() -> Vec<TranslitPair> {
    PAIRS.iter().map(|(p, _)| *p).collect()
}

pub fn find_pair(lang: &str, source: Script, target: Script) -> Option<TranslitPair> {
    PAIRS
        .iter()
        .map(|(p, _)| *p)
        .find(|p| p.lang == lang && p.source == source && p.target == target)
}

/// True when both directions of the pair are supported.
pub fn is_reversible(lang: &str, a: Script, b: Script) -> bool {
    find_pair(lang, a, b).is_some() && find_pair(lang, b, a).is_some()
}

/// The bundled table for a supported direction.
pub fn bundled_table(lang: &str, source: Script, target: Script) -> Option<Arc<TranslitTable>> {
    TABLES.get(&(lang.to_string(), source, target)).cloned()
}

fn pair_hint() -> String {
    supported_pairs()
        .iter()
        .map(|p| format!("{} {}->{}", p.lang, p.source, p.target))
        .collect::<Vec<_>>()
        .join(", ")
}

/// A ready-to-use converter for one direction.
#[derive(Debug, Clone)]
pub struct Transliterator {
    table: Arc<TranslitTable>,
    preserve_unknown: bool,
}

impl Transliterator {
    /// Transliterator for a supported pair using its bundled table.
    pub fn new(lang: &str, source: Script, target: Script) -> Result<Self, TranslitError> {
        let table =
            bundled_table(lang, source, target).ok_or_else(|| TranslitError::UnsupportedPair {
                lang: lang.to_string(),
                from: source,
                to: target,
                supported: pair_hint(),
            })?;
        Ok(Transliterator {
            table,
            preserve_unknown: true,
        })
    }

    /// Transliterator over a caller-supplied table, e.g. one read with [`load_table`].
    pub fn from_table(table: TranslitTable) -> Self {
        Transliterator {
            table: Arc::new(table),
            preserve_unknown: true,
        }
    }

    /// Fail on characters with no mapping instead of passing them through.
    pub fn strict(mut self) -> Self {
        self.preserve_unknown = false;
        self
    }

    pub fn preserve_unknown(&self) -> bool {
        self.preserve_unknown
    }

    pub fn table(&self) -> &TranslitTable {
        &self.table
    }

    pub fn source(&self) -> Script {
        self.table.source
    }

    pub fn target(&self) -> Script {
        self.table.target
    }

    /// Transliterate `text` (NFC-normalized first). Offsets in errors are
    /// character indices into the normalized text.
    pub fn transliterate(&self, text: &str) -> Result<String, TranslitError> {
        let chars: Vec<char> = normalize(text).chars().collect();
        let folded: Vec<char> = chars.iter().map(|&c| lower_char(c)).collect();
        let max_len = self.table.max_source_len();
        let mut out = String::with_capacity(text.len());
        let mut key = String::new();
        let mut i = 0;

        while i < chars.len() {
            let longest = max_len.min(chars.len() - i);
            let hit = (1..=longest).rev().find_map(|len| {
                key.clear();
                key.extend(&folded[i..i + len]);
                self.table.get(&key).map(|t| (len, t))
            });
            match hit {
                Some((len, target)) => {
                    out.push_str(&recase(&chars, i, len, target));
                    i += len;
                }
                None if self.preserve_unknown => {
                    out.push(chars[i]);
                    i += 1;
                }
                None => {
                    return Err(TranslitError::UnmappableCharacter {
                        ch: chars[i],
                        offset: i,
                    })
                }
            }
        }
        Ok(out)
    }
}

/// Apply the case of `chars[start..start+len]` to `target`.
///
/// Lowercase source: target unchanged. Uppercase first letter: target gets an
/// uppercase first letter, or is fully uppercased when the match is an
/// all-caps multigraph or a single capital inside an all-caps run.
fn recase(chars: &[char], start: usize, len: usize, target: &str) -> String {
    let src = &chars[start..start + len];
    if !is_upper(src[0]) {
        return target.to_string();
    }
    let all_caps = if len > 1 {
        src.iter().filter(|c| is_cased(**c)).all(|c| is_upper(*c))
    } else {
        // a lone capital is all-caps when its word neighbours are capitals too
        let next = chars[start + 1..]
            .iter()
            .take_while(|c| !c.is_whitespace())
            .find(|c| is_cased(**c));
        let prev = chars[..start]
            .iter()
            .rev()
            .take_while(|c| !c.is_whitespace())
            .find(|c| is_cased(**c));
        match (next, prev) {
            (Some(n), _) => is_upper(*n),
            (None, Some(p)) => is_upper(*p),
            (None, None) => false,
        }
    };
    if all_caps {
        upper(target)
    } else {
        upper_first(target)
    }
}
