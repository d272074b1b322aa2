//! Rule-based sentence splitting and tokenization.
//!
//! All offsets are character (scalar value) indices. Text is processed in
//! logical order for every script; nothing is visually reordered.

use std::collections::BTreeSet;

use regex::Regex;
use thiserror::Error;

use crate::doc_model::{Sentence, Token};
use crate::scripts::{classify_char, CharClass, Script};
use crate::transliterate::casing;

mod mwt;

pub use mwt::{
    bundled_mwt_table, expand_mwt, parse_mwt_table, MwtError, MwtMode, MwtPiece, MwtRule,
    MwtRuleTable,
};

const ZWNJ: char = '\u{200C}';

const ABBREV_DEFAULT: &str = include_str!("../../../../data/abbrev/default.txt");
const ABBREV_TUR: &str = include_str!("../../../../data/abbrev/tur.txt");
const ABBREV_KAZ: &str = include_str!("../../../../data/abbrev/kaz.txt");
const ABBREV_UZB: &str = include_str!("../../../../data/abbrev/uzb.txt");

/// Punctuation detached from word edges in every script.
const COMMON_PUNCT: &str = ".,;:!?\"()[]{}<>«»‹›“”„‟‘’‚'`…–—-/\\|*&#@%+=~^_•·";
/// Additional Arabic-script punctuation.
const ARABIC_PUNCT: &str = "،؟؛۔٪٫٬﴾﴿";
const MAX_ABBREV_LEN: usize = 16;
const SENTENCE_FINAL: &str = ".!?…؟۔";
const CLOSING: &str = "\"')]}»›”’";
const OPENING: &str = "\"'([{«‹“„‘";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScriptFamily {
    LatinCyrillic,
    Arabic,
}

impl From<Script> for ScriptFamily {
    fn from(script: Script) -> Self {
        match script {
            Script::Arabic => ScriptFamily::Arabic,
            _ => ScriptFamily::LatinCyrillic,
        }
    }
}

#[derive(Debug, Error)]
pub enum RulesError {
    #[error("invalid clitic pattern `{pattern}`: {source}")]
    Clitic {
        pattern: String,
        #[source]
        source: regex::Error,
    },
}

/// Tokenizer configuration for one script family (and optionally one language).
#[derive(Debug, Clone)]
pub struct TokenizerRules {
    pub script_family: ScriptFamily,
    /// Characters detached from word edges.
    pub punctuation_attach: BTreeSet<char>,
    /// Suffix patterns split off as separate tokens; empty by default.
    pub clitic_patterns: Vec<Regex>,
    /// Apostrophes kept when they sit between two letters.
    pub apostrophe_chars: BTreeSet<char>,
    /// ZWNJ acts as a token boundary (Arabic family only).
    pub split_on_zwnj: bool,
    /// Lowercased abbreviations, each ending in a period.
    pub abbreviations: BTreeSet<String>,
}

impl TokenizerRules {
    pub fn new(script_family: ScriptFamily) -> Self {
        let mut punctuation_attach: BTreeSet<char> = COMMON_PUNCT.chars().collect();
        if script_family == ScriptFamily::Arabic {
            punctuation_attach.extend(ARABIC_PUNCT.chars());
        }
        TokenizerRules {
            script_family,
            punctuation_attach,
            clitic_patterns: Vec::new(),
            apostrophe_chars: ['\'', '’', 'ʼ', 'ʻ', '`'].into_iter().collect(),
            split_on_zwnj: script_family == ScriptFamily::Arabic,
            abbreviations: parse_abbreviations(ABBREV_DEFAULT),
        }
    }

    pub fn for_script(script: Script) -> Self {
        Self::new(script.into())
    }

    /// Script-family rules plus the bundled abbreviation list for `lang`.
    pub fn for_language(lang: &str, script: Script) -> Self {
        let mut rules = Self::for_script(script);
        if let Some(extra) = bundled_abbreviations(lang) {
            rules.abbreviations.extend(parse_abbreviations(extra));
        }
        rules
    }

    pub fn with_clitics<I, S>(mut self, patterns: I) -> Result<Self, RulesError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for p in patterns {
            let p = p.as_ref();
            let anchored = format!("(?:{p})$");
            let re = Regex::new(&anchored).map_err(|source| RulesError::Clitic {
                pattern: p.to_string(),
                source,
            })?;
            self.clitic_patterns.push(re);
        }
        Ok(self)
    }

    pub fn with_abbreviations<I, S>(mut self, abbrevs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.abbreviations.extend(
            abbrevs
                .into_iter()
                .map(|a| casing::fold_lower(a.as_ref().trim())),
        );
        self
    }

    fn is_punct(&self, c: char) -> bool {
        self.punctuation_attach.contains(&c)
    }

    fn is_boundary(&self, c: char) -> bool {
        c.is_whitespace() || (self.split_on_zwnj && c == ZWNJ)
    }
}

fn bundled_abbreviations(lang: &str) -> Option<&'static str> {
    match lang {
        "tur" => Some(ABBREV_TUR),
        "kaz" => Some(ABBREV_KAZ),
        "uzb" => Some(ABBREV_UZB),
        _ => None,
    }
}

/// One abbreviation per line; `#` starts a comment line.
pub fn parse_abbreviations(src: &str) -> BTreeSet<String> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(casing::fold_lower)
        .collect()
}

fn is_letter(c: char) -> bool {
    matches!(
        classify_char(c),
        CharClass::Letter(_) | CharClass::UnclassifiedLetter
    )
}

fn is_wordish(c: char) -> bool {
    c.is_alphanumeric() || matches!(classify_char(c), CharClass::Mark)
}

/// Tokenize `text`; token ids run 1..N over the whole input.
pub fn tokenize(text: &str, rules: &TokenizerRules) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    tokenize_range(&chars, 0, chars.len(), rules, &mut spans);
    spans_to_tokens(&chars, &spans, 1)
}

/// Split into sentences and tokenize each; word ids restart at 1 per sentence.
pub fn tokenize_sentences(text: &str, rules: &TokenizerRules) -> Vec<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    let mut all = Vec::new();
    tokenize_range(&chars, 0, chars.len(), rules, &mut all);
    group_sentences(&chars, &all, rules)
        .into_iter()
        .map(|(from, to)| {
            let spans = &all[from..to];
            let start = spans[0].0;
            let end = spans[spans.len() - 1].1;
            Sentence {
                tokens: spans_to_tokens(&chars, spans, 1),
                text: chars[start..end].iter().collect(),
                comments: Vec::new(),
            }
        })
        .collect()
}

/// Sentence spans as `(start_char, end_char)`.
pub fn split_sentences(text: &str, rules: &TokenizerRules) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    tokenize_range(&chars, 0, chars.len(), rules, &mut spans);
    group_sentences(&chars, &spans, rules)
        .into_iter()
        .map(|(from, to)| (spans[from].0, spans[to - 1].1))
        .collect()
}

fn spans_to_tokens(chars: &[char], spans: &[(usize, usize)], first_id: usize) -> Vec<Token> {
    spans
        .iter()
        .enumerate()
        .map(|(i, &(s, e))| {
            Token::single(
                first_id + i,
                chars[s..e].iter().collect::<String>(),
                Some(s),
                Some(e),
            )
        })
        .collect()
}

/// Token-index ranges `[from, to)` forming sentences.
fn group_sentences(
    chars: &[char],
    spans: &[(usize, usize)],
    rules: &TokenizerRules,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut from = 0;
    let mut i = 0;
    while i < spans.len() {
        let (s, e) = spans[i];
        let is_final = chars[s..e].iter().all(|c| SENTENCE_FINAL.contains(*c));
        if !is_final {
            i += 1;
            continue;
        }
        // closing quotes and brackets stay with the sentence they close
        let mut last = i;
        while last + 1 < spans.len() {
            let (ns, ne) = spans[last + 1];
            let adjacent = ns == spans[last].1;
            if adjacent && chars[ns..ne].iter().all(|c| CLOSING.contains(*c)) {
                last += 1;
            } else {
                break;
            }
        }
        if last + 1 < spans.len() {
            let (ns, _) = spans[last + 1];
            let gap = &chars[spans[last].1..ns];
            let first = chars[ns];
            let starts_sentence = casing::is_upper(first)
                || (is_letter(first) && !casing::is_cased(first))
                || first.is_numeric()
                || OPENING.contains(first);
            if !gap.is_empty() && gap.iter().all(|c| rules.is_boundary(*c)) && starts_sentence {
                out.push((from, last + 1));
                from = last + 1;
            }
        }
        i = last + 1;
    }
    if from < spans.len() {
        out.push((from, spans.len()));
    }
    out
}

fn tokenize_range(
    chars: &[char],
    start: usize,
    end: usize,
    rules: &TokenizerRules,
    out: &mut Vec<(usize, usize)>,
) {
    let mut i = start;
    while i < end {
        if rules.is_boundary(chars[i]) {
            i += 1;
            continue;
        }
        let chunk_start = i;
        while i < end && !rules.is_boundary(chars[i]) {
            i += 1;
        }
        split_chunk(chars, chunk_start, i, rules, out);
    }
}

/// Split one whitespace-free chunk into word and punctuation tokens.
fn split_chunk(
    chars: &[char],
    start: usize,
    end: usize,
    rules: &TokenizerRules,
    out: &mut Vec<(usize, usize)>,
) {
    let mut i = start;
    while i < end {
        let c = chars[i];
        if rules.is_punct(c) && !joins_word(chars, i, start, end, rules) {
            let mut j = i + 1;
            while j < end && chars[j] == c {
                j += 1;
            }
            out.push((i, j));
            i = j;
            continue;
        }
        if let Some(len) = abbreviation_at(chars, i, end, rules) {
            out.push((i, i + len));
            i += len;
            continue;
        }
        let mut j = i + 1;
        while j < end && (!rules.is_punct(chars[j]) || joins_word(chars, j, start, end, rules)) {
            j += 1;
        }
        push_word(chars, i, j, rules, out);
        i = j;
    }
}

/// Whether the punctuation character at `i` stays inside a word.
fn joins_word(chars: &[char], i: usize, start: usize, end: usize, rules: &TokenizerRules) -> bool {
    if i == start || i + 1 >= end {
        return false;
    }
    let (prev, c, next) = (chars[i - 1], chars[i], chars[i + 1]);
    if rules.apostrophe_chars.contains(&c) || c == '-' {
        return is_wordish(prev) && is_letter(next) || is_letter(prev) && is_wordish(next);
    }
    if matches!(c, '.' | ',') {
        return prev.is_numeric() && next.is_numeric();
    }
    false
}

/// Length of the longest abbreviation starting at `i`, if it ends the word there.
fn abbreviation_at(chars: &[char], i: usize, end: usize, rules: &TokenizerRules) -> Option<usize> {
    if rules.abbreviations.is_empty()
        || !is_wordish(chars[i])
        || (i > 0 && is_wordish(chars[i - 1]))
    {
        return None;
    }
    let mut best = None;
    let mut folded = String::new();
    for j in i..end.min(i + MAX_ABBREV_LEN) {
        folded.push(casing::lower_char(chars[j]));
        if chars[j] == '.' && rules.abbreviations.contains(&folded) {
            let next_is_word = j + 1 < end && is_wordish(chars[j + 1]);
            if !next_is_word {
                best = Some(j + 1 - i);
            }
        }
    }
    best
}

fn push_word(
    chars: &[char],
    start: usize,
    end: usize,
    rules: &TokenizerRules,
    out: &mut Vec<(usize, usize)>,
) {
    if !rules.clitic_patterns.is_empty() {
        let word: String = chars[start..end].iter().collect();
        for re in &rules.clitic_patterns {
            if let Some(m) = re.find(&word) {
                if m.start() > 0 && m.start() < word.len() {
                    let split = start + word[..m.start()].chars().count();
                    out.push((start, split));
                    out.push((split, end));
                    return;
                }
            }
        }
    }
    out.push((start, end));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    fn latin() -> TokenizerRules {
        TokenizerRules::for_language("tur", Script::Latin)
    }

    #[test]
    fn listing_sentence_keeps_apostrophe_form() {
        let toks = tokenize("Halil dün Ankara'ya gitti", &latin());
        assert_eq!(texts(&toks), ["Halil", "dün", "Ankara'ya", "gitti"]);
        let offsets: Vec<_> = toks
            .iter()
            .map(|t| (t.start_char.unwrap(), t.end_char.unwrap()))
            .collect();
        assert_eq!(offsets, [(0, 5), (6, 9), (10, 19), (20, 25)]);
    }

    #[test]
    fn final_and_leading_punctuation_detach() {
        assert_eq!(
            texts(&tokenize("Ali kitabı gördü.", &latin())),
            ["Ali", "kitabı", "gördü", "."]
        );
        assert_eq!(
            texts(&tokenize("«Ali», dedi...", &latin())),
            ["«", "Ali", "»", ",", "dedi", "..."]
        );
        assert_eq!(texts(&tokenize("'Ali'", &latin())), ["'", "Ali", "'"]);
        assert!(tokenize("", &latin()).is_empty());
        assert!(tokenize(" \n\t", &latin()).is_empty());
    }

    #[test]
    fn hyphens_numbers_and_abbreviations() {
        let kaz = TokenizerRules::for_language("kaz", Script::Cyrillic);
        assert_eq!(
            texts(&tokenize("ара-тұра келді", &kaz)),
            ["ара-тұра", "келді"]
        );
        assert_eq!(
            texts(&tokenize("кітап, дәптер т.б. алды.", &kaz)),
            ["кітап", ",", "дәптер", "т.б.", "алды", "."]
        );
        assert_eq!(
            texts(&tokenize("3,5 kg - Dr. Ali", &latin())),
            ["3,5", "kg", "-", "Dr.", "Ali"]
        );
    }

    #[test]
    fn arabic_family_splits_zwnj_and_arabic_punctuation() {
        let rules = TokenizerRules::for_script(Script::Arabic);
        let toks = tokenize("كىتاب\u{200C}نى، بار؟", &rules);
        assert_eq!(texts(&toks), ["كىتاب", "نى", "،", "بار", "؟"]);
        assert!(toks.iter().all(|t| !t.text.contains(ZWNJ)));
        // the Latin family does not treat ZWNJ as a boundary
        assert_eq!(tokenize("ab\u{200C}cd", &latin()).len(), 1);
    }

    #[test]
    fn clitics_are_opt_in() {
        let rules = latin().with_clitics(["mi", "mı"]).unwrap();
        assert_eq!(texts(&tokenize("geldimi", &rules)), ["geldi", "mi"]);
        assert_eq!(texts(&tokenize("mi", &rules)), ["mi"]);
        assert!(latin().with_clitics(["("]).is_err());
    }

    #[test]
    fn sentence_splitting() {
        let r = latin();
        assert_eq!(
            split_sentences("Ali geldi. Ali gitti.", &r),
            [(0, 10), (11, 21)]
        );
        assert_eq!(split_sentences("Ali geldi", &r), [(0, 9)]);
        assert!(split_sentences("", &r).is_empty());
        assert_eq!(split_sentences("Dr. Ali geldi.", &r).len(), 1);
        assert_eq!(split_sentences("Ali geldi. ali gitti.", &r).len(), 1);
        assert_eq!(
            split_sentences("“Geldi.” Ali gitti!", &r),
            [(0, 8), (9, 19)]
        );
        let ar = TokenizerRules::for_script(Script::Arabic);
        assert_eq!(split_sentences("كەلدى. باردى.", &ar).len(), 2);
    }

    #[test]
    fn sentences_carry_text_and_local_ids() {
        let sents = tokenize_sentences("Ali geldi. Ali gitti.", &latin());
        assert_eq!(sents.len(), 2);
        assert_eq!(sents[1].text, "Ali gitti.");
        assert_eq!(sents[1].tokens[0].id, (1, 1));
        assert_eq!(sents[1].tokens[0].start_char, Some(11));
    }
}
