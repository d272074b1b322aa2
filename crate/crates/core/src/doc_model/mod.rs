//! Hierarchical annotation container: Document → Sentence → Token → Word, plus
//! entity Spans. Serializes losslessly to JSON and to CoNLL-U.
//!
//! All offsets are Unicode scalar indices into [`Document::text`].

mod conllu;
mod json;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scripts::Script;

pub use conllu::{from_conllu, to_conllu, ConlluError};
pub use json::{from_json, to_json, JsonError};

/// UD morphological features, kept sorted case-insensitively by key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Feats(Vec<(String, String)>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatsError {
    #[error("feature `{0}` is not Key=Value")]
    Malformed(String),
    #[error("duplicate feature key `{0}`")]
    DuplicateKey(String),
}

fn feat_order(a: &str, b: &str) -> std::cmp::Ordering {
    a.to_lowercase()
        .cmp(&b.to_lowercase())
        .then_with(|| a.cmp(b))
}

impl Feats {
    pub fn new() -> Self {
        Feats::default()
    }

    /// Insert or replace a feature.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.0.binary_search_by(|(k, _)| feat_order(k, &key)) {
            Ok(i) => self.0[i].1 = value,
            Err(i) => self.0.insert(i, (key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Feats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for Feats {
    type Err = FeatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut feats = Feats::new();
        for item in s.split('|') {
            let (k, v) = item
                .split_once('=')
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .ok_or_else(|| FeatsError::Malformed(item.to_string()))?;
            if feats.get(k).is_some() {
                return Err(FeatsError::DuplicateKey(k.to_string()));
            }
            feats.insert(k, v);
        }
        Ok(feats)
    }
}

impl Serialize for Feats {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Feats {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A syntactic word.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Word {
    pub id: usize,
    pub text: String,
    #[serde(default)]
    pub lemma: Option<String>,
    #[serde(default)]
    pub upos: Option<String>,
    #[serde(default)]
    pub xpos: Option<String>,
    #[serde(default)]
    pub feats: Option<Feats>,
    #[serde(default)]
    pub head: Option<usize>,
    #[serde(default)]
    pub deprel: Option<String>,
    #[serde(default)]
    pub deps: Option<String>,
    #[serde(default)]
    pub start_char: Option<usize>,
    #[serde(default)]
    pub end_char: Option<usize>,
    #[serde(default)]
    pub ner: Option<String>,
    /// Unrecognised MISC items, re-emitted verbatim.
    #[serde(default)]
    pub misc: Option<String>,
}

impl Word {
    pub fn new(id: usize, text: impl Into<String>) -> Self {
        Word {
            id,
            text: text.into(),
            ..Word::default()
        }
    }
}

/// A surface token covering one or more words (`id` is the inclusive range).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub id: (usize, usize),
    pub text: String,
    pub words: Vec<Word>,
    #[serde(default)]
    pub start_char: Option<usize>,
    #[serde(default)]
    pub end_char: Option<usize>,
    #[serde(default)]
    pub misc: Option<String>,
}

impl Token {
    /// A single-word token whose word mirrors the token text and offsets.
    pub fn single(
        id: usize,
        text: impl Into<String>,
        start_char: Option<usize>,
        end_char: Option<usize>,
    ) -> Self {
        let text = text.into();
        let mut word = Word::new(id, text.clone());
        word.start_char = start_char;
        word.end_char = end_char;
        Token {
            id: (id, id),
            text,
            words: vec![word],
            start_char,
            end_char,
            misc: None,
        }
    }

    pub fn is_multiword(&self) -> bool {
        self.id.0 != self.id.1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    #[serde(default)]
    pub text: String,
    /// Comment lines other than `# text =`, verbatim including the `#`.
    #[serde(default)]
    pub comments: Vec<String>,
}

impl Sentence {
    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.tokens.iter().flat_map(|t| t.words.iter())
    }

    pub fn words_mut(&mut self) -> impl Iterator<Item = &mut Word> {
        self.tokens.iter_mut().flat_map(|t| t.words.iter_mut())
    }

    pub fn num_words(&self) -> usize {
        self.tokens.iter().map(|t| t.words.len()).sum()
    }
}

/// A labelled character range, e.g. a named entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub label: String,
    pub start_char: usize,
    pub end_char: usize,
    pub text: String,
}

/// One executed pipeline step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessorLogEntry {
    pub processor: String,
    pub backend: String,
    pub language: String,
    pub script: Option<Script>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Document {
    /// Original input text; never rewritten by processors.
    pub text: String,
    pub sentences: Vec<Sentence>,
    pub entities: Vec<Span>,
    #[serde(default)]
    pub script: Option<Script>,
    /// Set when `script` was supplied by the caller rather than detected.
    #[serde(default)]
    pub script_declared: bool,
    #[serde(default)]
    pub embedding: Option<Vec<f32>>,
    #[serde(default)]
    pub translation: Option<String>,
    #[serde(default)]
    pub processor_log: Vec<ProcessorLogEntry>,
    /// Document-level string annotations from plug-ins (e.g. `sentiment`).
    #[serde(default)]
    pub annotations: BTreeMap<String, String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{path}: {message}")]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

impl Document {
    pub fn new(text: impl Into<String>) -> Self {
        Document {
            text: text.into(),
            ..Document::default()
        }
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.sentences.iter().flat_map(|s| s.words())
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    pub fn num_words(&self) -> usize {
        self.sentences.iter().map(|s| s.num_words()).sum()
    }

    pub fn to_conllu(&self) -> String {
        to_conllu(self)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    /// Characters `start..end` of the document text.
    pub fn slice_chars(&self, start: usize, end: usize) -> Option<String> {
        if start > end {
            return None;
        }
        let s: String = self.text.chars().skip(start).take(end - start).collect();
        (s.chars().count() == end - start).then_some(s)
    }

    /// Check structural invariants; the error carries a JSON-style path.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let err = |path: String, message: String| Err(ValidationError { path, message });
        for (si, sent) in self.sentences.iter().enumerate() {
            let n = sent.num_words();
            let mut expected = 1;
            for (ti, tok) in sent.tokens.iter().enumerate() {
                let tpath = format!("sentences[{si}].tokens[{ti}]");
                let (a, b) = tok.id;
                if a != expected || b < a {
                    return err(
                        format!("{tpath}.id"),
                        format!("expected range starting at {expected}, got {a}-{b}"),
                    );
                }
                if tok.words.len() != b - a + 1 {
                    return err(
                        format!("{tpath}.words"),
                        format!("range {a}-{b} needs {} words", b - a + 1),
                    );
                }
                if !tok.is_multiword() && tok.words[0].text != tok.text {
                    return err(
                        format!("{tpath}.words[0].text"),
                        "single-word token text differs from its word".into(),
                    );
                }
                check_offsets(&tpath, tok.start_char, tok.end_char)?;
                for (wi, w) in tok.words.iter().enumerate() {
                    let wpath = format!("{tpath}.words[{wi}]");
                    if w.id != a + wi {
                        return err(
                            format!("{wpath}.id"),
                            format!("expected {}, got {}", a + wi, w.id),
                        );
                    }
                    if let Some(h) = w.head {
                        if h > n || h == w.id {
                            return err(
                                format!("{wpath}.head"),
                                format!("head {h} invalid for word {} of {n}", w.id),
                            );
                        }
                    }
                    check_offsets(&wpath, w.start_char, w.end_char)?;
                }
                expected = b + 1;
            }
        }
        for (ei, span) in self.entities.iter().enumerate() {
            let path = format!("entities[{ei}]");
            if span.start_char >= span.end_char {
                return err(path, "start_char must be < end_char".into());
            }
            if self.slice_chars(span.start_char, span.end_char).as_deref()
                != Some(span.text.as_str())
            {
                return err(
                    format!("{path}.text"),
                    "span text differs from document slice".into(),
                );
            }
        }
        Ok(())
    }
}

fn check_offsets(
    path: &str,
    start: Option<usize>,
    end: Option<usize>,
) -> Result<(), ValidationError> {
    if let (Some(s), Some(e)) = (start, end) {
        if s >= e {
            return Err(ValidationError {
                path: format!("{path}.start_char"),
                message: format!("start_char {s} must be < end_char {e}"),
            });
        }
    }
    Ok(())
}
