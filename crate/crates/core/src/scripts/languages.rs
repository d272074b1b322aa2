use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::{Script, ScriptError};

const LANGUAGES_TSV: &str = include_str!("../../../../data/languages.tsv");
const COVERAGE_TSV: &str = include_str!("../../../../data/coverage.tsv");

/// A supported language and the scripts it is written in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageCode {
    pub iso: String,
    pub name: String,
    pub branch: String,
    pub default_script: Script,
    pub allowed_scripts: Vec<Script>,
}

/// Processor availability for one language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Availability {
    /// production or stable
    Yes,
    /// beta or prototype
    Partial,
    No,
    /// not applicable (e.g. transliteration for a single-script language)
    Na,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageRow {
    pub iso: String,
    pub cells: Vec<(String, Availability)>,
}

impl CoverageRow {
    pub fn get(&self, processor: &str) -> Option<Availability> {
        self.cells
            .iter()
            .find(|(p, _)| p == processor)
            .map(|(_, a)| *a)
    }
}

fn data_lines(src: &str) -> impl Iterator<Item = Vec<&str>> {
    src.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').collect())
}

static LANGUAGES: LazyLock<Vec<LanguageCode>> = LazyLock::new(|| {
    data_lines(LANGUAGES_TSV)
        .map(|cols| {
            let scripts =
                |s: &str| Script::from_code(s).unwrap_or_else(|| panic!("bad script {s}"));
            LanguageCode {
                iso: cols[0].to_string(),
                name: cols[1].to_string(),
                branch: cols[2].to_string(),
                default_script: scripts(cols[3]),
                allowed_scripts: cols[4].split(',').map(scripts).collect(),
            }
        })
        .collect()
});

static COVERAGE: LazyLock<Vec<CoverageRow>> = LazyLock::new(|| {
    let mut lines = data_lines(COVERAGE_TSV);
    let header: Vec<String> = lines
        .next()
        .expect("header")
        .iter()
        .map(|s| s.to_string())
        .collect();
    lines
        .map(|cols| CoverageRow {
            iso: cols[0].to_string(),
            cells: header[1..]
                .iter()
                .zip(&cols[1..])
                .map(|(p, v)| {
                    let a = match *v {
                        "yes" => Availability::Yes,
                        "partial" => Availability::Partial,
                        "no" => Availability::No,
                        "na" => Availability::Na,
                        other => panic!("bad availability {other}"),
                    };
                    (p.clone(), a)
                })
                .collect(),
        })
        .collect()
});

/// All supported languages in table order.
pub fn languages() -> &'static [LanguageCode] {
    &LANGUAGES
}

pub fn lookup_language(iso: &str) -> Result<&'static LanguageCode, ScriptError> {
    languages()
        .iter()
        .find(|l| l.iso == iso)
        .ok_or_else(|| ScriptError::UnknownLanguage(iso.to_string()))
}

/// Capability matrix, one row per language.
pub fn coverage() -> &'static [CoverageRow] {
    &COVERAGE
}
