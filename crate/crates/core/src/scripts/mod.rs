//! Script identification for Turkic text.
//!
//! Classification is driven by the codepoint table in `data/script_ranges.tsv`.
//! Only alphabetic characters vote; combining marks inherit the script of the
//! character they follow, and format controls such as ZWNJ/ZWJ are ignored.

mod languages;
mod ranges;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

pub use languages::{
    coverage, languages, lookup_language, Availability, CoverageRow, LanguageCode,
};
pub use ranges::{range_table, ScriptRange};

/// The four script families handled by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Script {
    #[serde(rename = "Latn")]
    Latin,
    #[serde(rename = "Cyrl")]
    Cyrillic,
    #[serde(rename = "Arab")]
    Arabic,
    #[serde(rename = "Orkh")]
    OldTurkic,
}

impl Script {
    /// All variants in tie-break priority order.
    pub const ALL: [Script; 4] = [
        Script::Latin,
        Script::Cyrillic,
        Script::Arabic,
        Script::OldTurkic,
    ];

    /// ISO 15924 code.
    pub fn code(self) -> &'static str {
        match self {
            Script::Latin => "Latn",
            Script::Cyrillic => "Cyrl",
            Script::Arabic => "Arab",
            Script::OldTurkic => "Orkh",
        }
    }

    pub fn from_code(code: &str) -> Option<Script> {
        Script::ALL
            .into_iter()
            .find(|s| s.code().eq_ignore_ascii_case(code))
    }

    fn priority(self) -> usize {
        self as usize
    }

    /// Right-to-left scripts. Processing is always in logical order; this is informational.
    pub fn is_rtl(self) -> bool {
        matches!(self, Script::Arabic | Script::OldTurkic)
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Script {
    type Err = ScriptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Script::from_code(s).ok_or_else(|| ScriptError::UnknownScript(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("text contains no classifiable alphabetic character")]
    NoAlphabeticContent,
    #[error("unknown language code `{0}`")]
    UnknownLanguage(String),
    #[error("unknown script code `{0}`")]
    UnknownScript(String),
}

/// NFC-normalize `text`.
pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

/// How a single character takes part in script analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharClass {
    /// An alphabetic character inside one of the script ranges.
    Letter(Script),
    /// An alphabetic character outside every range (Greek, CJK, modifier letters...).
    UnclassifiedLetter,
    /// A combining mark: belongs to whatever preceded it.
    Mark,
    /// Digits, punctuation, whitespace, format controls.
    Other,
}

pub fn classify_char(c: char) -> CharClass {
    if is_combining_mark(c) {
        return CharClass::Mark;
    }
    if !c.is_alphabetic() {
        return CharClass::Other;
    }
    match ranges::script_of(c) {
        Some(s) => CharClass::Letter(s),
        None => CharClass::UnclassifiedLetter,
    }
}

/// Per-script letter counts and the resulting dominant script.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub script: Script,
    /// Share of classified letters that belong to `script`, in (0, 1].
    pub confidence: f64,
    /// Letter counts indexed like [`Script::ALL`].
    pub counts: [usize; 4],
}

impl Detection {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn count(&self, script: Script) -> usize {
        self.counts[script as usize]
    }

    /// True when another script has the same count as the winner.
    pub fn is_tie(&self) -> bool {
        let best = self.count(self.script);
        Script::ALL
            .iter()
            .filter(|s| self.count(**s) == best)
            .count()
            > 1
    }
}

/// Dominant script with counts and confidence.
///
/// Ties are broken by the fixed priority Latin > Cyrillic > Arabic > Old Turkic.
pub fn detect(text: &str) -> Result<Detection, ScriptError> {
    let mut counts = [0usize; 4];
    for c in text.chars() {
        if let CharClass::Letter(s) = classify_char(c) {
            counts[s as usize] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(ScriptError::NoAlphabeticContent);
    }
    // max_by_key keeps the last maximum, so iterate in reverse priority
    let script = Script::ALL
        .into_iter()
        .rev()
        .max_by_key(|s| (counts[*s as usize], std::cmp::Reverse(s.priority())))
        .expect("non-empty");
    Ok(Detection {
        script,
        confidence: counts[script as usize] as f64 / total as f64,
        counts,
    })
}

/// Dominant script of `text`.
pub fn detect_script(text: &str) -> Result<Script, ScriptError> {
    detect(text).map(|d| d.script)
}

/// A maximal single-script run. Offsets are character indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptSegment {
    pub script: Script,
    pub start_char: usize,
    pub end_char: usize,
    pub text: String,
}

/// Split `text` into contiguous single-script runs.
///
/// Characters that are not classified letters join the run that is open when
/// they occur; anything before the first letter joins the first run. Text with
/// no classified letter yields no segments.
pub fn detect_segments(text: &str) -> Vec<ScriptSegment> {
    let mut segments: Vec<ScriptSegment> = Vec::new();
    let mut pending = String::new();
    let mut pending_start = 0usize;

    for (idx, c) in text.chars().enumerate() {
        let class = classify_char(c);
        match (class, segments.last_mut()) {
            (CharClass::Letter(s), Some(last)) if last.script == s => {
                last.text.push(c);
                last.end_char = idx + 1;
            }
            (CharClass::Letter(s), _) => {
                let (start, mut buf) = if segments.is_empty() {
                    (pending_start, std::mem::take(&mut pending))
                } else {
                    (idx, String::new())
                };
                buf.push(c);
                segments.push(ScriptSegment {
                    script: s,
                    start_char: start,
                    end_char: idx + 1,
                    text: buf,
                });
            }
            (_, Some(last)) => {
                last.text.push(c);
                last.end_char = idx + 1;
            }
            (_, None) => {
                if pending.is_empty() {
                    pending_start = idx;
                }
                pending.push(c);
            }
        }
    }
    segments
}

/// Outcome of checking a script against a language's allowed scripts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptValidation {
    Ok,
    Mismatch {
        lang: String,
        script: Script,
        allowed: Vec<Script>,
    },
}

impl ScriptValidation {
    pub fn is_ok(&self) -> bool {
        matches!(self, ScriptValidation::Ok)
    }
}

pub fn validate_language_script(
    lang: &str,
    script: Script,
) -> Result<ScriptValidation, ScriptError> {
    let language = lookup_language(lang)?;
    if language.allowed_scripts.contains(&script) {
        Ok(ScriptValidation::Ok)
    } else {
        Ok(ScriptValidation::Mismatch {
            lang: language.iso.clone(),
            script,
            allowed: language.allowed_scripts.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_a_bijection() {
        for s in Script::ALL {
            assert_eq!(Script::from_code(s.code()), Some(s));
        }
        let codes: std::collections::HashSet<_> = Script::ALL.iter().map(|s| s.code()).collect();
        assert_eq!(codes.len(), 4);
        assert!("Grek".parse::<Script>().is_err());
    }

    #[test]
    fn normalize_composes_breve() {
        assert_eq!(normalize(""), "");
        // U+011F is the precomposed form of g + U+0306
        assert_eq!(normalize("g\u{0306}"), "\u{011F}");
        assert_eq!(normalize("Мен"), "Мен");
        let once = normalize("A\u{0308}bc\u{0306}");
        assert_eq!(normalize(&once), once);
    }

    #[test]
    fn detects_listing_and_table_sentences() {
        assert_eq!(
            detect_script("Мен Алматыда турамын.").unwrap(),
            Script::Cyrillic
        );
        assert_eq!(detect_script("Ali kitabı gördü.").unwrap(), Script::Latin);
        assert_eq!(
            detect_script("ئەلى كىتابنى كۆردى.").unwrap(),
            Script::Arabic
        );
        assert_eq!(detect_script("𐱅𐰇𐰼𐰜").unwrap(), Script::OldTurkic);
        assert_eq!(
            detect_script("1234 …!"),
            Err(ScriptError::NoAlphabeticContent)
        );
        assert_eq!(detect_script(""), Err(ScriptError::NoAlphabeticContent));
    }

    #[test]
    fn homoglyphs_classified_by_codepoint() {
        // Cyrillic а, е, о look Latin
        let d = detect("\u{0430}\u{0435}\u{043E}").unwrap();
        assert_eq!(d.script, Script::Cyrillic);
        assert_eq!(d.confidence, 1.0);
    }

    #[test]
    fn ties_follow_priority_and_report_confidence() {
        let d = detect("ab аб").unwrap();
        assert_eq!(d.script, Script::Latin);
        assert!(d.is_tie());
        assert_eq!(d.confidence, 0.5);
        let d = detect("аб ئە").unwrap();
        assert_eq!(d.script, Script::Cyrillic);
    }

    #[test]
    fn zwnj_and_marks_do_not_vote() {
        let d = detect("ك\u{200C}\u{064E}").unwrap();
        assert_eq!(d.total(), 1);
        assert_eq!(classify_char('\u{200D}'), CharClass::Other);
        assert_eq!(classify_char('\u{0306}'), CharClass::Mark);
    }

    #[test]
    fn segments_examples() {
        let segs = detect_segments("Ali Алматы");
        assert_eq!(segs.len(), 2);
        assert_eq!(
            (segs[0].script, segs[0].text.as_str()),
            (Script::Latin, "Ali ")
        );
        assert_eq!(
            (segs[1].script, segs[1].text.as_str()),
            (Script::Cyrillic, "Алматы")
        );
        assert_eq!((segs[1].start_char, segs[1].end_char), (4, 10));

        let segs = detect_segments("Мен");
        assert_eq!(segs.len(), 1);
        assert_eq!((segs[0].start_char, segs[0].end_char), (0, 3));

        assert!(detect_segments("").is_empty());
        assert!(detect_segments("12, 34!").is_empty());
    }

    #[test]
    fn leading_punctuation_joins_first_run() {
        let segs = detect_segments("«Мен» Ali");
        assert_eq!(segs[0].text, "«Мен» ");
        assert_eq!(segs[0].start_char, 0);
        assert_eq!(segs[1].text, "Ali");
    }

    #[test]
    fn combining_mark_stays_with_base_run() {
        let segs = detect_segments("ab\u{0306}вг");
        assert_eq!(segs[0].text, "ab\u{0306}");
        assert_eq!(segs[1].text, "вг");
    }

    #[test]
    fn language_script_validation() {
        assert_eq!(
            validate_language_script("kaz", Script::Cyrillic).unwrap(),
            ScriptValidation::Ok
        );
        assert!(!validate_language_script("kir", Script::Latin)
            .unwrap()
            .is_ok());
        assert_eq!(
            validate_language_script("xxx", Script::Latin),
            Err(ScriptError::UnknownLanguage("xxx".into()))
        );
    }
}
