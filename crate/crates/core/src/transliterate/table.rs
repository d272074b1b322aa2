use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::casing::fold_lower;
use crate::scripts::Script;

/// Longest source sequence the engine will try to match.
pub const MAX_SOURCE_LEN: usize = 4;
/// Longest target sequence a table may emit for one match.
pub const MAX_TARGET_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: duplicate source sequence `{key}` (first defined on line {first})")]
    DuplicateKey {
        line: usize,
        first: usize,
        key: String,
    },
    #[error("table {0} is not injective and has no hand-authored reverse")]
    NotInvertible(String),
}

fn format_err(line: usize, message: impl Into<String>) -> TableError {
    TableError::Format {
        line,
        message: message.into(),
    }
}

/// An ordered mapping table for one language and direction.
///
/// Source sequences are stored lowercase and matched after case folding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslitTable {
    pub lang: String,
    pub source: Script,
    pub target: Script,
    pub standard: String,
    entries: Vec<(String, String)>,
    index: HashMap<String, usize>,
    max_source_len: usize,
}

impl TranslitTable {
    pub fn new(
        lang: impl Into<String>,
        source: Script,
        target: Script,
        standard: impl Into<String>,
        entries: Vec<(String, String)>,
    ) -> Result<Self, TableError> {
        let mut index = HashMap::with_capacity(entries.len());
        let mut max_source_len = 0;
        for (i, (src, tgt)) in entries.iter().enumerate() {
            validate_entry(i + 1, src, tgt)?;
            if let Some(first) = index.insert(src.clone(), i) {
                return Err(TableError::DuplicateKey {
                    line: i + 1,
                    first: first + 1,
                    key: src.clone(),
                });
            }
            max_source_len = max_source_len.max(src.chars().count());
        }
        Ok(TranslitTable {
            lang: lang.into(),
            source,
            target,
            standard: standard.into(),
            entries,
            index,
            max_source_len,
        })
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_source_len(&self) -> usize {
        self.max_source_len
    }

    pub fn max_target_len(&self) -> usize {
        self.entries
            .iter()
            .map(|(_, t)| t.chars().count())
            .max()
            .unwrap_or(0)
    }

    pub fn get(&self, folded_source: &str) -> Option<&str> {
        self.index
            .get(folded_source)
            .map(|&i| self.entries[i].1.as_str())
    }

    /// True when every target is non-empty and distinct.
    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.entries
            .iter()
            .all(|(_, t)| !t.is_empty() && seen.insert(t.as_str()))
    }

    /// Swap sources and targets. Only defined for injective tables.
    pub fn inverted(&self) -> Result<TranslitTable, TableError> {
        if !self.is_injective() {
            return Err(TableError::NotInvertible(format!(
                "{}_{}_{}",
                self.lang, self.source, self.target
            )));
        }
        let entries = self
            .entries
            .iter()
            .map(|(s, t)| (fold_lower(t), s.clone()))
            .collect();
        TranslitTable::new(
            self.lang.clone(),
            self.target,
            self.source,
            self.standard.clone(),
            entries,
        )
    }

    /// Render in the on-disk TSV format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#! lang = {}", self.lang);
        let _ = writeln!(out, "#! source = {}", self.source);
        let _ = writeln!(out, "#! target = {}", self.target);
        let _ = writeln!(out, "#! standard = {}", self.standard);
        for (s, t) in &self.entries {
            let _ = writeln!(out, "{}\t{}", escape(s), escape(t));
        }
        out
    }
}

fn validate_entry(line: usize, src: &str, tgt: &str) -> Result<(), TableError> {
    let len = src.chars().count();
    if len == 0 || len > MAX_SOURCE_LEN {
        return Err(format_err(
            line,
            format!("source `{src}` must be 1-{MAX_SOURCE_LEN} characters"),
        ));
    }
    if tgt.chars().count() > MAX_TARGET_LEN {
        return Err(format_err(
            line,
            format!("target `{tgt}` exceeds {MAX_TARGET_LEN} characters"),
        ));
    }
    if fold_lower(src) != src {
        return Err(format_err(
            line,
            format!("source `{src}` must be stored lowercase"),
        ));
    }
    Ok(())
}

fn is_harakat(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{065F}' | '\u{0670}')
}

fn unescape(field: &str, line: usize) -> Result<String, TableError> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('u') => {
                if chars.next() != Some('{') {
                    return Err(format_err(line, "expected `{` after \\u"));
                }
                let hex: String = chars.by_ref().take_while(|&c| c != '}').collect();
                let cp = u32::from_str_radix(&hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| format_err(line, format!("bad escape \\u{{{hex}}}")))?;
                out.push(cp);
            }
            other => {
                return Err(format_err(
                    line,
                    format!("unknown escape \\{}", other.unwrap_or(' ')),
                ))
            }
        }
    }
    Ok(out)
}

fn escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() || matches!(c, '\u{200B}'..='\u{200F}') => {
                let _ = write!(out, "\\u{{{:04X}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// Parse a table in TSV form.
///
/// `#!` lines carry `key = value` directives (`lang`, `source`, `target`,
/// `standard`, `strip`); other `#` lines are comments. `fallback_name` is a
/// `<lang>_<src>_<tgt>` stem used when directives are missing.
pub fn parse_table(src: &str, fallback_name: Option<&str>) -> Result<TranslitTable, TableError> {
    let mut lang = None;
    let mut source = None;
    let mut target = None;
    let mut standard = String::new();
    let mut strip_harakat = false;
    let mut entries: Vec<(String, String)> = Vec::new();
    let mut lines_of: Vec<usize> = Vec::new();

    for (n, raw) in src.lines().enumerate() {
        let line = n + 1;
        if let Some(directive) = raw.strip_prefix("#!") {
            let (key, value) = directive
                .split_once('=')
                .ok_or_else(|| format_err(line, "directive must be `key = value`"))?;
            let value = value.trim();
            match key.trim() {
                "lang" => lang = Some(value.to_string()),
                "source" => source = Some(parse_script(value, line)?),
                "target" => target = Some(parse_script(value, line)?),
                "standard" => standard = value.to_string(),
                "strip" if value == "harakat" => strip_harakat = true,
                other => return Err(format_err(line, format!("unknown directive `{other}`"))),
            }
            continue;
        }
        if raw.starts_with('#') || raw.trim().is_empty() {
            continue;
        }
        let mut cols = raw.split('\t');
        let s = cols.next().unwrap_or_default();
        let t = cols
            .next()
            .ok_or_else(|| format_err(line, "expected `source<TAB>target`"))?;
        let s = unescape(s, line)?;
        let mut t = unescape(t, line)?;
        if strip_harakat {
            t.retain(|c| !is_harakat(c));
        }
        if let Some(pos) = entries.iter().position(|(k, _)| *k == s) {
            return Err(TableError::DuplicateKey {
                line,
                first: lines_of[pos],
                key: s,
            });
        }
        validate_entry(line, &s, &t)?;
        entries.push((s, t));
        lines_of.push(line);
    }

    if entries.is_empty() {
        return Err(format_err(
            src.lines().count().max(1),
            "table has no entries",
        ));
    }

    if let Some(stem) = fallback_name {
        let parts: Vec<&str> = stem.split('_').collect();
        if let [l, s, t] = parts[..] {
            lang.get_or_insert_with(|| l.to_string());
            if source.is_none() {
                source = Script::from_code(s);
            }
            if target.is_none() {
                target = Script::from_code(t);
            }
        }
    }
    let (Some(lang), Some(source), Some(target)) = (lang, source, target) else {
        return Err(format_err(1, "missing lang/source/target directives"));
    };
    TranslitTable::new(lang, source, target, standard, entries)
}

fn parse_script(value: &str, line: usize) -> Result<Script, TableError> {
    Script::from_code(value).ok_or_else(|| format_err(line, format!("unknown script `{value}`")))
}

/// Load a table file. The file stem (`kaz_Cyrl_Latn`) supplies defaults for
/// missing directives.
pub fn load_table(path: impl AsRef<Path>) -> Result<TranslitTable, TableError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str());
    parse_table(&text, stem)
}
