//! Table-driven multi-word token expansion.
//!
//! Table format, one rule per line:
//! `pattern<TAB>mode<TAB>piece<TAB>piece...` where `mode` is `concat` (the
//! substituted pieces must rebuild the surface exactly, otherwise the rule is
//! skipped) or `free`, and each piece is `template[|key=value...]` with keys
//! `lemma`, `upos`, `xpos`, `feats`. Templates refer to capture groups as `$N`.
//! Patterns must match the whole token.

use std::collections::HashMap;
use std::path::Path;

use regex::{Captures, Regex};
use thiserror::Error;

use crate::doc_model::{Feats, Sentence, Token, Word};

const MWT_TUR: &str = include_str!("../../../../data/mwt/tur.tsv");
const MWT_AZE: &str = include_str!("../../../../data/mwt/aze.tsv");
const MWT_KAZ: &str = include_str!("../../../../data/mwt/kaz.tsv");

#[derive(Debug, Error)]
pub enum MwtError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: invalid pattern: {source}")]
    Pattern {
        line: usize,
        #[source]
        source: regex::Error,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwtMode {
    Concat,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MwtPiece {
    pub template: String,
    pub lemma: Option<String>,
    pub upos: Option<String>,
    pub xpos: Option<String>,
    pub feats: Option<Feats>,
}

#[derive(Debug, Clone)]
pub struct MwtRule {
    pub pattern: String,
    pub mode: MwtMode,
    pub pieces: Vec<MwtPiece>,
    regex: Regex,
}

#[derive(Debug, Clone, Default)]
pub struct MwtRuleTable {
    pub lang: String,
    pub rules: Vec<MwtRule>,
}

impl MwtRuleTable {
    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn load(path: &Path, lang: &str) -> Result<Self, MwtError> {
        let src = std::fs::read_to_string(path).map_err(|source| MwtError::Io {
            path: path.display().to_string(),
            source,
        })?;
        parse_mwt_table(&src, lang)
    }

    /// Word pieces for `surface`, from the first rule that applies.
    pub fn split(&self, surface: &str) -> Option<Vec<Word>> {
        self.rules.iter().find_map(|rule| rule.apply(surface))
    }
}

impl MwtRule {
    fn apply(&self, surface: &str) -> Option<Vec<Word>> {
        let caps = self.regex.captures(surface)?;
        let words: Vec<Word> = self
            .pieces
            .iter()
            .map(|p| {
                let mut w = Word::new(0, substitute(&p.template, &caps));
                w.lemma = p.lemma.as_ref().map(|l| substitute(l, &caps));
                w.upos = p.upos.clone();
                w.xpos = p.xpos.clone();
                w.feats = p.feats.clone();
                w
            })
            .collect();
        if words.iter().any(|w| w.text.is_empty()) {
            return None;
        }
        if self.mode == MwtMode::Concat
            && words.iter().map(|w| w.text.as_str()).collect::<String>() != surface
        {
            return None;
        }
        Some(words)
    }
}

fn substitute(template: &str, caps: &Captures<'_>) -> String {
    let mut out = String::new();
    let mut chars = template.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '$' {
            out.push(c);
            continue;
        }
        let mut digits = String::new();
        while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
            digits.push(*d);
            chars.next();
        }
        match digits.parse::<usize>() {
            Ok(n) => out.push_str(caps.get(n).map_or("", |m| m.as_str())),
            Err(_) => out.push('$'),
        }
    }
    out
}

fn max_group_ref(template: &str) -> usize {
    let mut max = 0;
    let mut rest = template;
    while let Some(pos) = rest.find('$') {
        rest = &rest[pos + 1..];
        let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
        if let Ok(n) = digits.parse::<usize>() {
            max = max.max(n);
        }
    }
    max
}

pub fn parse_mwt_table(src: &str, lang: &str) -> Result<MwtRuleTable, MwtError> {
    let mut rules = Vec::new();
    for (n, raw) in src.lines().enumerate() {
        let line = n + 1;
        let text = raw.trim_end_matches('\r');
        if text.trim().is_empty() || text.starts_with('#') {
            continue;
        }
        let format = |message: String| MwtError::Format { line, message };
        let cols: Vec<&str> = text.split('\t').collect();
        if cols.len() < 4 {
            return Err(format(format!(
                "expected pattern, mode and at least two pieces, found {} columns",
                cols.len()
            )));
        }
        if cols[0].contains("(?=") || cols[0].contains("(?!") || cols[0].contains("(?<") {
            return Err(format(
                "lookaround and named groups are not part of the rule syntax".into(),
            ));
        }
        let regex = Regex::new(&format!("^(?:{})$", cols[0]))
            .map_err(|source| MwtError::Pattern { line, source })?;
        let mode = match cols[1] {
            "concat" => MwtMode::Concat,
            "free" => MwtMode::Free,
            other => return Err(format(format!("unknown mode `{other}`"))),
        };
        let groups = regex.captures_len() - 1;
        let mut pieces = Vec::new();
        for col in &cols[2..] {
            let mut parts = col.split('|');
            let template = parts.next().unwrap_or_default().to_string();
            if template.is_empty() {
                return Err(format("empty piece template".into()));
            }
            let mut piece = MwtPiece {
                template,
                lemma: None,
                upos: None,
                xpos: None,
                feats: None,
            };
            for kv in parts {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| format(format!("expected key=value, got `{kv}`")))?;
                match k {
                    "lemma" => piece.lemma = Some(v.to_string()),
                    "upos" => piece.upos = Some(v.to_string()),
                    "xpos" => piece.xpos = Some(v.to_string()),
                    "feats" => {
                        // feats use `,` between pairs here since `|` separates hints
                        let feats = v
                            .replace(',', "|")
                            .parse::<Feats>()
                            .map_err(|e| format(e.to_string()))?;
                        piece.feats = Some(feats);
                    }
                    other => return Err(format(format!("unknown piece key `{other}`"))),
                }
            }
            let refs =
                max_group_ref(&piece.template).max(piece.lemma.as_deref().map_or(0, max_group_ref));
            if refs > groups {
                return Err(format(format!(
                    "template refers to ${refs} but the pattern has {groups} groups"
                )));
            }
            pieces.push(piece);
        }
        rules.push(MwtRule {
            pattern: cols[0].to_string(),
            mode,
            pieces,
            regex,
        });
    }
    Ok(MwtRuleTable {
        lang: lang.to_string(),
        rules,
    })
}

/// The bundled seed table for `lang`, or an empty table.
pub fn bundled_mwt_table(lang: &str) -> MwtRuleTable {
    let src = match lang {
        "tur" => MWT_TUR,
        "aze" => MWT_AZE,
        "kaz" => MWT_KAZ,
        _ => "",
    };
    parse_mwt_table(src, lang).expect("bundled MWT table is valid")
}

/// Expand matching single-word tokens and renumber word ids 1..N.
pub fn expand_mwt(sentence: &Sentence, table: &MwtRuleTable) -> Sentence {
    let mut tokens = Vec::with_capacity(sentence.tokens.len());
    let mut id_map: HashMap<usize, usize> = HashMap::new();
    let mut next = 1;
    for tok in &sentence.tokens {
        let expanded = if tok.is_multiword() {
            None
        } else {
            table.split(&tok.text)
        };
        match expanded {
            Some(mut words) => {
                let first = next;
                let mut offset = tok.start_char;
                let exact = tok.end_char.is_some()
                    && words.iter().map(|w| w.text.as_str()).collect::<String>() == tok.text;
                id_map.insert(tok.words[0].id, first);
                for w in &mut words {
                    w.id = next;
                    next += 1;
                    if exact {
                        let len = w.text.chars().count();
                        w.start_char = offset;
                        w.end_char = offset.map(|o| o + len);
                        offset = w.end_char;
                    }
                }
                let orig = &tok.words[0];
                if let Some(first_word) = words.first_mut() {
                    first_word.head = orig.head;
                    first_word.deprel = orig.deprel.clone();
                }
                tokens.push(Token {
                    id: (first, next - 1),
                    text: tok.text.clone(),
                    words,
                    start_char: tok.start_char,
                    end_char: tok.end_char,
                    misc: tok.misc.clone(),
                });
            }
            None => {
                let mut t = tok.clone();
                let first = next;
                for w in &mut t.words {
                    id_map.insert(w.id, next);
                    w.id = next;
                    next += 1;
                }
                t.id = (first, next - 1);
                tokens.push(t);
            }
        }
    }
    for tok in &mut tokens {
        for w in &mut tok.words {
            if let Some(h) = w.head.filter(|h| *h > 0) {
                w.head = id_map.get(&h).copied();
            }
        }
    }
    Sentence {
        tokens,
        text: sentence.text.clone(),
        comments: sentence.comments.clone(),
    }
}
