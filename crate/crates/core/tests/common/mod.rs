//! Shared helpers for integration tests. Nothing here calls back into the
//! code under test to decide what the right answer is.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use turkic_core::doc_model::Document;
use turkic_core::pipeline::{ProcessContext, Processor, ProcessorError};
use turkic_core::scripts::Script;
use turkic_core::transliterate::bundled_table;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn test_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

/// Rows of the 20-language parallel set: (iso, script, sentence).
pub fn parallel_set() -> Vec<(String, Script, String)> {
    let text = std::fs::read_to_string(data_dir().join("parallel_sentences.tsv")).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            let script = match cols[1] {
                "Latn" => Script::Latin,
                "Cyrl" => Script::Cyrillic,
                "Arab" => Script::Arabic,
                other => panic!("unexpected script {other}"),
            };
            (cols[0].to_string(), script, cols[2].to_string())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// CoNLL-U validator, written from the UD format description only.

pub fn validate_conllu(text: &str) -> Result<(), String> {
    if text.is_empty() {
        return Ok(());
    }
    if !text.ends_with("\n\n") {
        return Err("file must end with a blank line".into());
    }
    if text.contains('\r') {
        return Err("CR characters are not allowed".into());
    }
    let body = &text[..text.len() - 1];
    for (si, block) in body.split("\n\n").enumerate() {
        let block = block.strip_suffix('\n').unwrap_or(block);
        if block.is_empty() {
            return Err(format!(
                "sentence {}: empty block (double blank line)",
                si + 1
            ));
        }
        validate_sentence(block).map_err(|e| format!("sentence {}: {e}", si + 1))?;
    }
    Ok(())
}

fn validate_sentence(block: &str) -> Result<(), String> {
    let mut seen_token = false;
    let mut text_comments = 0;
    let mut expected = 1usize;
    let mut range_end = 0usize;
    let mut heads: Vec<(usize, Option<usize>)> = Vec::new();
    for line in block.split('\n') {
        if let Some(c) = line.strip_prefix('#') {
            if seen_token {
                return Err("comment after token lines".into());
            }
            if c.trim_start().starts_with("text =") {
                text_comments += 1;
            }
            continue;
        }
        seen_token = true;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(format!("{} columns in `{line}`", cols.len()));
        }
        for (i, c) in cols.iter().enumerate() {
            if c.is_empty() {
                return Err(format!("column {} empty in `{line}`", i + 1));
            }
            if i != 1 && i != 2 && c.contains(' ') {
                return Err(format!("space in column {} of `{line}`", i + 1));
            }
        }
        if let Some((a, b)) = cols[0].split_once('-') {
            let (a, b): (usize, usize) = (
                a.parse().map_err(|_| "bad range")?,
                b.parse().map_err(|_| "bad range")?,
            );
            if a != expected || b <= a {
                return Err(format!("range {a}-{b} where word {expected} expected"));
            }
            if cols[2..9].iter().any(|c| *c != "_") {
                return Err(format!("range line carries annotation: `{line}`"));
            }
            range_end = b;
            continue;
        }
        if cols[0].contains('.') {
            return Err("empty nodes are not expected here".into());
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| format!("bad id `{}`", cols[0]))?;
        if id != expected {
            return Err(format!("id {id} where {expected} expected"));
        }
        expected += 1;
        let head = match cols[6] {
            "_" => None,
            h => Some(h.parse::<usize>().map_err(|_| format!("bad head `{h}`"))?),
        };
        if (head == Some(0)) != (cols[7] == "root") && head.is_some() {
            return Err(format!("head 0 must pair with deprel root: `{line}`"));
        }
        heads.push((id, head));
        check_feats(cols[5])?;
        if cols[9] != "_" && cols[9].split('|').any(str::is_empty) {
            return Err(format!("empty MISC item in `{line}`"));
        }
    }
    if !seen_token {
        return Err("no token lines".into());
    }
    if range_end >= expected {
        return Err(format!("range ends at {range_end} past the last word"));
    }
    if text_comments > 1 {
        return Err("more than one text comment".into());
    }
    let n = heads.len();
    let mut roots = 0;
    for (id, head) in &heads {
        if let Some(h) = head {
            if *h > n || h == id {
                return Err(format!("word {id} has head {h}"));
            }
            roots += usize::from(*h == 0);
        }
    }
    if heads.iter().all(|(_, h)| h.is_some()) && roots != 1 {
        return Err(format!("{roots} roots"));
    }
    Ok(())
}

fn check_feats(feats: &str) -> Result<(), String> {
    if feats == "_" {
        return Ok(());
    }
    let mut prev: Option<String> = None;
    for item in feats.split('|') {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("feature `{item}` lacks '='"))?;
        if k.is_empty()
            || v.is_empty()
            || !k
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '[' || c == ']')
        {
            return Err(format!("malformed feature `{item}`"));
        }
        let key = k.to_ascii_lowercase();
        if prev.as_ref().is_some_and(|p| *p >= key) {
            return Err(format!("features not sorted/unique at `{k}`"));
        }
        prev = Some(key);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Transliteration round-trip fixtures.

/// (lang, source, target, sequence) rows of the exception list.
pub fn translit_exceptions() -> Vec<(String, Script, Script, String)> {
    let text = std::fs::read_to_string(data_dir().join("translit/exceptions.tsv")).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            (
                c[0].to_string(),
                c[1].parse().unwrap(),
                c[2].parse().unwrap(),
                c[3].to_string(),
            )
        })
        .collect()
}

/// Reversible directions: both (lang, a→b) and (lang, b→a) are bundled.
pub const REVERSIBLE: [(&str, Script, Script); 16] = {
    use Script::{Arabic as A, Cyrillic as C, Latin as L};
    [
        ("kaz", C, L),
        ("kaz", L, C),
        ("uzb", C, L),
        ("uzb", L, C),
        ("aze", C, L),
        ("aze", L, C),
        ("tat", C, L),
        ("tat", L, C),
        ("tuk", C, L),
        ("tuk", L, C),
        ("kaa", C, L),
        ("kaa", L, C),
        ("crh", C, L),
        ("crh", L, C),
        ("uig", A, L),
        ("uig", L, A),
    ]
};

/// Source units whose image maps straight back to them, with the key sets
/// needed to keep concatenations unambiguous.
pub struct Alphabet {
    pub units: Vec<(String, String)>,
    forward_keys: BTreeSet<String>,
    reverse_keys: BTreeSet<String>,
}

impl Alphabet {
    pub fn new(lang: &str, source: Script, target: Script) -> Self {
        let fwd = bundled_table(lang, source, target).expect("forward table");
        let rev = bundled_table(lang, target, source).expect("reverse table");
        let excluded: BTreeSet<String> = translit_exceptions()
            .into_iter()
            .filter(|(l, s, t, _)| l == lang && *s == source && *t == target)
            .map(|(_, _, _, seq)| seq)
            .collect();
        let units = fwd
            .entries()
            .iter()
            .filter(|(s, t)| {
                !excluded.contains(s)
                    && !t.is_empty()
                    && rev.get(&t.to_lowercase()) == Some(s.as_str())
            })
            .cloned()
            .collect();
        Alphabet {
            units,
            forward_keys: fwd.entries().iter().map(|(s, _)| s.clone()).collect(),
            reverse_keys: rev.entries().iter().map(|(s, _)| s.clone()).collect(),
        }
    }

    /// Build a string from unit choices (`None` = word break), dropping any
    /// unit that would let a longer table key straddle a unit boundary on
    /// either side of the mapping.
    pub fn build(&self, picks: &[Option<usize>]) -> String {
        self.build_pieces(picks)
            .into_iter()
            .map(|(s, _)| s)
            .collect::<String>()
            .trim_end()
            .to_string()
    }

    /// `build`, keeping the (source, image) unit pairs.
    pub fn build_pieces(&self, picks: &[Option<usize>]) -> Vec<(String, String)> {
        let mut src: Vec<String> = Vec::new();
        let mut tgt: Vec<String> = Vec::new();
        for pick in picks {
            let (s, t) = match pick {
                Some(i) => self.units[i % self.units.len()].clone(),
                None => (" ".to_string(), " ".to_string()),
            };
            if s == " " && src.last().is_none_or(|l| l == " ") {
                continue;
            }
            src.push(s);
            tgt.push(t);
            if straddles(&src, &self.forward_keys) || straddles(&tgt, &self.reverse_keys) {
                src.pop();
                tgt.pop();
            }
        }
        src.into_iter().zip(tgt).collect()
    }
}

/// True when, at the start of some piece, a key longer than that piece matches.
fn straddles(pieces: &[String], keys: &BTreeSet<String>) -> bool {
    let text: Vec<char> = pieces.concat().to_lowercase().chars().collect();
    let mut pos = 0;
    for p in pieces {
        let len = p.chars().count();
        for l in len + 1..=4.min(text.len() - pos) {
            let cand: String = text[pos..pos + l].iter().collect();
            if keys.contains(&cand) {
                return true;
            }
        }
        pos += len;
    }
    false
}

// ---------------------------------------------------------------------------
// Stub plug-ins that only accept Latin-script words.

fn latin_only(text: &str) -> Result<(), ProcessorError> {
    match text
        .chars()
        .find(|c| c.is_alphabetic() && !c.is_ascii_alphabetic() && !"äöüğışçñİÄÖÜĞŞÇÑ".contains(*c))
    {
        Some(c) => Err(format!("stub model only reads Latin script, got {c:?}").into()),
        None => Ok(()),
    }
}

pub struct StubPos;

impl Processor for StubPos {
    fn process(&self, doc: &mut Document, _: &ProcessContext<'_>) -> Result<(), ProcessorError> {
        for sent in &mut doc.sentences {
            for w in sent.words_mut() {
                latin_only(&w.text)?;
                let upos = if w.text.chars().any(char::is_alphabetic) {
                    "NOUN"
                } else {
                    "PUNCT"
                };
                w.upos = Some(upos.to_string());
            }
        }
        Ok(())
    }
}

/// Lowercases and strips a locative `-da`/`-de`/`-ta`/`-te`.
pub struct StubLemma;

impl Processor for StubLemma {
    fn process(&self, doc: &mut Document, _: &ProcessContext<'_>) -> Result<(), ProcessorError> {
        for sent in &mut doc.sentences {
            for w in sent.words_mut() {
                latin_only(&w.text)?;
                let lower = w.text.to_lowercase();
                let lemma = ["da", "de", "ta", "te"]
                    .iter()
                    .find_map(|s| lower.strip_suffix(s).filter(|r| r.chars().count() > 2))
                    .unwrap_or(&lower);
                w.lemma = Some(lemma.to_string());
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Registry fixtures. Checksums were computed with `sha256sum`.

pub const FIXTURE_MODELS: [(&str, &str, &str); 3] = [
    (
        "tur-tok.bin",
        "tur tokenizer fixture\n",
        "9c8874d1d8a0c59b7d32c6f0a9c3a920e31c1c4cc05d873adf55200f1119f0e7",
    ),
    (
        "kaz-morph.bin",
        "kaz morph fixture\n",
        "0101df9d8047c56d2932c057b6243755125514663a650598afe2a58fd3a06df4",
    ),
    (
        "uzb-pos.bin",
        "uzb pos fixture\n",
        "1eaa5afe6c8fce117e4314ea698eee9a5b9d8cda83948b5762cc8c7e69861f8a",
    ),
];

/// Write a three-entry catalog plus its model files into `dir`; returns the
/// manifest path.
pub fn write_fixture_catalog(dir: &Path) -> PathBuf {
    let models = dir.join("models");
    std::fs::create_dir_all(&models).unwrap();
    for (name, body, _) in FIXTURE_MODELS {
        std::fs::write(models.join(name), body).unwrap();
    }
    let manifest = serde_json::json!({
        "schema_version": 1,
        "defaults": {"tur": {"tokenize": "rule"}},
        "entries": [
            {"lang": "tur", "script": "Latn", "processor": "tokenize", "backend": "rule",
             "url": "file:models/tur-tok.bin", "checksum": FIXTURE_MODELS[0].2,
             "license": "Apache-2.0", "quality": "stable", "version": "1.0"},
            {"lang": "kaz", "script": "Cyrl", "processor": "morph", "backend": "apertium",
             "url": "file:models/kaz-morph.bin", "checksum": FIXTURE_MODELS[1].2,
             "license": "GPL-3.0-or-later", "quality": "production", "version": "2"},
            {"lang": "uzb", "script": "Latn", "processor": "pos", "backend": "stub",
             "url": "file:models/uzb-pos.bin", "checksum": FIXTURE_MODELS[2].2,
             "license": "CC-BY-SA-4.0", "quality": "beta", "version": "0.3"}
        ]
    });
    let path = dir.join("catalog.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
    path
}
