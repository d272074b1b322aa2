//! Byte-pair-encoding adapter: trainable toy models and merges/vocab files.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::{MetricsError, SubwordTokenizerAdapter};

const TOY_CORPUS: &str = include_str!("../../../../data/metrics/latin_corpus.txt");
const TOY_MERGES: usize = 400;

#[derive(Debug, Clone)]
pub struct BpeAdapter {
    name: String,
    ranks: HashMap<(String, String), usize>,
    byte_level: bool,
}

/// GPT-2 style byte → printable character table.
fn byte_alphabet() -> [char; 256] {
    let mut table = ['\0'; 256];
    let mut extra = 0u32;
    for b in 0..=255u8 {
        let printable = matches!(b, b'!'..=b'~' | 0xA1..=0xAC | 0xAE..=0xFF);
        table[b as usize] = if printable {
            char::from(b)
        } else {
            extra += 1;
            char::from_u32(255 + extra).expect("valid code point")
        };
    }
    table
}

impl BpeAdapter {
    /// Adapter from an ordered merge list (highest priority first).
    pub fn from_merges(name: &str, merges: Vec<(String, String)>, byte_level: bool) -> Self {
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, pair) in merges.into_iter().enumerate() {
            ranks.entry(pair).or_insert(rank);
        }
        BpeAdapter {
            name: name.to_string(),
            ranks,
            byte_level,
        }
    }

    /// Learn `num_merges` merges from word frequencies.
    pub fn train<'a, I>(name: &str, words: I, num_merges: usize) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
        for w in words {
            *freq.entry(w).or_default() += 1;
        }
        let mut vocab: Vec<(Vec<String>, usize)> = freq
            .into_iter()
            .map(|(w, n)| (w.chars().map(String::from).collect(), n))
            .collect();
        let mut merges = Vec::new();
        for _ in 0..num_merges {
            let mut pairs: HashMap<(&str, &str), usize> = HashMap::new();
            for (syms, n) in &vocab {
                for win in syms.windows(2) {
                    *pairs.entry((win[0].as_str(), win[1].as_str())).or_default() += n;
                }
            }
            // most frequent pair; ties broken lexicographically for determinism
            let Some(((a, b), _)) = pairs
                .into_iter()
                .max_by(|x, y| x.1.cmp(&y.1).then_with(|| y.0.cmp(&x.0)))
            else {
                break;
            };
            let pair = (a.to_string(), b.to_string());
            for (syms, _) in &mut vocab {
                *syms = merge_pair(std::mem::take(syms), &pair);
            }
            merges.push(pair);
        }
        Self::from_merges(name, merges, false)
    }

    /// Toy model trained on the bundled Latin-script corpus.
    pub fn toy_latin() -> Self {
        let words: Vec<String> = TOY_CORPUS
            .lines()
            .filter(|l| !l.starts_with('#'))
            .flat_map(|l| super::extract_words(l, "tur"))
            .collect();
        Self::train(
            "toy-bpe-latin",
            words.iter().map(String::as_str),
            TOY_MERGES,
        )
    }

    /// Load a `merges.txt` file (one `left right` pair per line, optional
    /// `#version` header) and, optionally, the matching `vocab.json`, which is
    /// used to check that every merge result is a known token.
    pub fn from_files(
        merges: &Path,
        vocab: Option<&Path>,
        byte_level: bool,
    ) -> Result<Self, MetricsError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|e| MetricsError::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })
        };
        let text = read(merges)?;
        let mpath = merges.display().to_string();
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() || (i == 0 && line.starts_with("#version")) {
                continue;
            }
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
                    pairs.push((a.to_string(), b.to_string()))
                }
                _ => {
                    return Err(MetricsError::Format {
                        path: mpath,
                        line: i + 1,
                        message: format!("expected `left right`, got `{line}`"),
                    })
                }
            }
        }
        if let Some(vpath) = vocab {
            let vtext = read(vpath)?;
            let vocab: HashMap<String, u64> =
                serde_json::from_str(&vtext).map_err(|e| MetricsError::Format {
                    path: vpath.display().to_string(),
                    line: e.line(),
                    message: e.to_string(),
                })?;
            for (i, (a, b)) in pairs.iter().enumerate() {
                if !vocab.contains_key(&format!("{a}{b}")) {
                    return Err(MetricsError::Format {
                        path: mpath,
                        line: i + 1,
                        message: format!("merge result `{a}{b}` is not in the vocabulary"),
                    });
                }
            }
        }
        let name = merges
            .parent()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "bpe".to_string());
        Ok(Self::from_merges(&name, pairs, byte_level))
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn num_merges(&self) -> usize {
        self.ranks.len()
    }

    /// Subword pieces for `word`.
    pub fn encode(&self, word: &str) -> Vec<String> {
        let mut syms: Vec<String> = if self.byte_level {
            let table = byte_alphabet();
            word.bytes()
                .map(|b| table[b as usize].to_string())
                .collect()
        } else {
            word.chars().map(String::from).collect()
        };
        loop {
            let best = syms
                .windows(2)
                .filter_map(|w| {
                    self.ranks
                        .get(&(w[0].clone(), w[1].clone()))
                        .map(|r| (*r, w[0].clone(), w[1].clone()))
                })
                .min();
            match best {
                Some((_, a, b)) => syms = merge_pair(syms, &(a, b)),
                None => return syms,
            }
        }
    }
}

fn merge_pair(syms: Vec<String>, pair: &(String, String)) -> Vec<String> {
    let mut out = Vec::with_capacity(syms.len());
    let mut i = 0;
    while i < syms.len() {
        if i + 1 < syms.len() && syms[i] == pair.0 && syms[i + 1] == pair.1 {
            out.push(format!("{}{}", pair.0, pair.1));
            i += 2;
        } else {
            out.push(syms[i].clone());
            i += 1;
        }
    }
    out
}

impl SubwordTokenizerAdapter for BpeAdapter {
    fn name(&self) -> &str {
        &self.name
    }

    fn count(&self, word: &str) -> Result<usize, MetricsError> {
        Ok(self.encode(word).len().max(1))
    }
}
