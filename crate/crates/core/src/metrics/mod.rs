//! Tokenizer fertility statistics: subword tokens per word.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::scripts::{classify_char, detect_script, lookup_language, CharClass, Script};
use crate::tokenize::{tokenize, TokenizerRules};

mod bpe;

pub use bpe::BpeAdapter;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no words to measure")]
    EmptyInput,
    #[error("word {index} is empty")]
    EmptyWord { index: usize },
    #[error("tokenizer `{name}` failed: {message}")]
    Adapter { name: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path} line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
}

/// Maps a word to the number of subword tokens a tokenizer produces for it.
pub trait SubwordTokenizerAdapter: Send + Sync {
    fn name(&self) -> &str;
    fn count(&self, word: &str) -> Result<usize, MetricsError>;
}

/// One token per word.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityAdapter;

impl SubwordTokenizerAdapter for IdentityAdapter {
    fn name(&self) -> &str {
        "identity"
    }

    fn count(&self, _word: &str) -> Result<usize, MetricsError> {
        Ok(1)
    }
}

/// One token per character.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharAdapter;

impl SubwordTokenizerAdapter for CharAdapter {
    fn name(&self) -> &str {
        "char"
    }

    fn count(&self, word: &str) -> Result<usize, MetricsError> {
        Ok(word.chars().count())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FertilityReport {
    pub lang: String,
    pub tokenizer_name: String,
    pub n_words: usize,
    pub mean_fertility: f64,
    pub p95_tokens_per_word: f64,
    pub max_tokens_per_word: usize,
}

impl FertilityReport {
    /// Statistics over per-word token counts.
    pub fn from_counts(
        lang: &str,
        tokenizer_name: &str,
        counts: &[usize],
    ) -> Result<Self, MetricsError> {
        if counts.is_empty() {
            return Err(MetricsError::EmptyInput);
        }
        let total: usize = counts.iter().sum();
        Ok(FertilityReport {
            lang: lang.to_string(),
            tokenizer_name: tokenizer_name.to_string(),
            n_words: counts.len(),
            mean_fertility: total as f64 / counts.len() as f64,
            p95_tokens_per_word: nearest_rank(counts, 95) as f64,
            max_tokens_per_word: counts.iter().copied().max().unwrap_or(0),
        })
    }
}

/// Nearest-rank percentile: the value at rank ⌈p/100 · N⌉ of the sorted data.
pub fn nearest_rank(values: &[usize], percentile: usize) -> usize {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let rank = (percentile * n).div_ceil(100).clamp(1, n);
    sorted[rank - 1]
}

pub fn fertility(
    words: &[&str],
    adapter: &dyn SubwordTokenizerAdapter,
) -> Result<FertilityReport, MetricsError> {
    fertility_for("", words, adapter)
}

fn fertility_for(
    lang: &str,
    words: &[&str],
    adapter: &dyn SubwordTokenizerAdapter,
) -> Result<FertilityReport, MetricsError> {
    if words.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut counts = Vec::with_capacity(words.len());
    for (index, w) in words.iter().enumerate() {
        if w.is_empty() {
            return Err(MetricsError::EmptyWord { index });
        }
        counts.push(adapter.count(w)?);
    }
    FertilityReport::from_counts(lang, adapter.name(), &counts)
}

/// Words of `text`: tokenizer tokens holding at least one letter.
pub fn extract_words(text: &str, lang: &str) -> Vec<String> {
    let script = detect_script(text)
        .ok()
        .or_else(|| lookup_language(lang).ok().map(|l| l.default_script))
        .unwrap_or(Script::Latin);
    let rules = TokenizerRules::for_language(lang, script);
    tokenize(text, &rules)
        .into_iter()
        .map(|t| t.text)
        .filter(|t| {
            t.chars().any(|c| {
                matches!(
                    classify_char(c),
                    CharClass::Letter(_) | CharClass::UnclassifiedLetter
                )
            })
        })
        .collect()
}

/// One (language, tokenizer) cell of a comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct FertilityCell {
    pub lang: String,
    pub tokenizer: String,
    pub result: Result<FertilityReport, MetricsError>,
}

/// Fertility of every adapter on every language's sentences. Cell failures do
/// not abort the table.
pub fn compare(
    corpus: &BTreeMap<String, Vec<String>>,
    adapters: &[&dyn SubwordTokenizerAdapter],
) -> Result<Vec<FertilityCell>, MetricsError> {
    if corpus.is_empty() || adapters.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let words: Vec<(&String, Vec<String>)> = corpus
        .iter()
        .map(|(lang, sents)| {
            (
                lang,
                sents.iter().flat_map(|s| extract_words(s, lang)).collect(),
            )
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..words.len())
        .flat_map(|l| (0..adapters.len()).map(move |a| (l, a)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(l, a)| {
            let (lang, ws) = &words[l];
            let refs: Vec<&str> = ws.iter().map(String::as_str).collect();
            FertilityCell {
                lang: lang.to_string(),
                tokenizer: adapters[a].name().to_string(),
                result: fertility_for(lang, &refs, adapters[a]),
            }
        })
        .collect())
}

pub const TSV_HEADER: &str = "lang\ttokenizer\tn_words\tmean_fertility\tp95\tmax";

/// Successful cells as TSV (header included); failed cells are skipped.
pub fn to_tsv(cells: &[FertilityCell]) -> String {
    let mut out = format!("{TSV_HEADER}\n");
    for cell in cells {
        if let Ok(r) = &cell.result {
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.4}\t{}\t{}\n",
                r.lang,
                r.tokenizer_name,
                r.n_words,
                r.mean_fertility,
                r.p95_tokens_per_word,
                r.max_tokens_per_word
            ));
        }
    }
    out
}

pub fn to_json(cells: &[FertilityCell]) -> String {
    let rows: Vec<serde_json::Value> = cells
        .iter()
        .map(|c| match &c.result {
            Ok(r) => serde_json::to_value(r).expect("report serializes"),
            Err(e) => serde_json::json!({"lang": c.lang, "tokenizer_name": c.tokenizer, "error": e.to_string()}),
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(Vec<usize>);
    impl SubwordTokenizerAdapter for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn count(&self, word: &str) -> Result<usize, MetricsError> {
            Ok(self.0[word.parse::<usize>().unwrap()])
        }
    }

    #[test]
    fn identity_is_one() {
        let r = fertility(&["a", "b", "c"], &IdentityAdapter).unwrap();
        assert_eq!(
            (
                r.n_words,
                r.mean_fertility,
                r.p95_tokens_per_word,
                r.max_tokens_per_word
            ),
            (3, 1.0, 1.0, 1)
        );
    }

    #[test]
    fn nearest_rank_on_skewed_counts() {
        let counts = vec![1, 1, 1, 1, 1, 1, 1, 1, 1, 11];
        let words: Vec<String> = (0..10).map(|i| i.to_string()).collect();
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        let r = fertility(&refs, &Fixed(counts)).unwrap();
        assert_eq!(r.mean_fertility, 2.0);
        assert_eq!(r.p95_tokens_per_word, 11.0);
        assert_eq!(nearest_rank(&[5, 1, 3], 50), 3);
        assert_eq!(nearest_rank(&[7], 95), 7);
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(
            fertility(&[], &IdentityAdapter),
            Err(MetricsError::EmptyInput)
        );
        assert_eq!(
            fertility(&["a", ""], &IdentityAdapter),
            Err(MetricsError::EmptyWord { index: 1 })
        );
        assert_eq!(
            compare(&BTreeMap::new(), &[&IdentityAdapter]),
            Err(MetricsError::EmptyInput)
        );
    }

    #[test]
    fn words_skip_punctuation() {
        assert_eq!(
            extract_words("Ali kitabı gördü.", "tur"),
            ["Ali", "kitabı", "gördü"]
        );
        assert_eq!(extract_words("ئەلى كىتابنى كۆردى.", "uig").len(), 3);
    }

    #[test]
    fn table_rows() {
        let corpus = BTreeMap::from([("tur".to_string(), vec!["Ali kitabı gördü.".to_string()])]);
        let cells = compare(&corpus, &[&IdentityAdapter, &CharAdapter]).unwrap();
        assert_eq!(cells.len(), 2);
        let tsv = to_tsv(&cells);
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines[0], TSV_HEADER);
        assert_eq!(lines[1], "tur\tidentity\t3\t1.0000\t1\t1");
        assert!(to_json(&cells).contains("\"mean_fertility\": 1.0"));
    }
}
