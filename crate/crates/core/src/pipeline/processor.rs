use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, LazyLock};

use thiserror::Error;

use crate::doc_model::Document;
use crate::scripts::Script;
use crate::tokenize::{
    bundled_mwt_table, expand_mwt, tokenize_sentences, MwtRuleTable, TokenizerRules,
};

/// Processing order; a plan is always a subsequence of this.
pub const CANONICAL_ORDER: [&str; 10] = [
    "tokenize",
    "mwt",
    "morph",
    "pos",
    "lemma",
    "depparse",
    "ner",
    "embeddings",
    "sentiment",
    "translate",
];

/// Routing step, never part of `ordered_processors`.
pub const TRANSLIT: &str = "translit";

pub fn is_known_processor(name: &str) -> bool {
    name == TRANSLIT || CANONICAL_ORDER.contains(&name)
}

pub fn canonical_rank(name: &str) -> Option<usize> {
    CANONICAL_ORDER.iter().position(|p| *p == name)
}

/// Default requirements of each processor; a registered backend may declare its own.
pub fn builtin_requires(name: &str) -> &'static [&'static str] {
    match name {
        "mwt" | "morph" | "pos" | "ner" | "sentiment" => &["tokenize"],
        "lemma" | "depparse" => &["tokenize", "pos"],
        _ => &[],
    }
}

fn builtin_provides(name: &str) -> &'static [&'static str] {
    match name {
        "tokenize" => &["sentences", "tokens"],
        "mwt" => &["words"],
        "morph" => &["feats", "lemma"],
        "pos" => &["upos", "xpos"],
        "lemma" => &["lemma"],
        "depparse" => &["head", "deprel"],
        "ner" => &["ner", "entities"],
        "embeddings" => &["embedding"],
        "sentiment" => &["sentiment"],
        "translate" => &["translation"],
        _ => &[],
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessorSpec {
    pub name: String,
    pub requires: BTreeSet<String>,
    pub provides: BTreeSet<String>,
    pub backend: String,
}

impl ProcessorSpec {
    /// Spec with the default requires/provides sets for `name`.
    pub fn new(name: &str, backend: &str) -> Self {
        ProcessorSpec {
            name: name.to_string(),
            requires: builtin_requires(name)
                .iter()
                .map(|s| s.to_string())
                .collect(),
            provides: builtin_provides(name)
                .iter()
                .map(|s| s.to_string())
                .collect(),
            backend: backend.to_string(),
        }
    }

    pub fn with_requires<I: IntoIterator<Item = S>, S: Into<String>>(
        mut self,
        requires: I,
    ) -> Self {
        self.requires = requires.into_iter().map(Into::into).collect();
        self
    }
}

pub type ProcessorError = Box<dyn std::error::Error + Send + Sync>;

/// What a processor sees besides the document.
#[derive(Debug, Clone)]
pub struct ProcessContext<'a> {
    pub lang: &'a str,
    /// Script of `text`, the variant being processed.
    pub script: Option<Script>,
    /// Text to analyse; differs from `Document::text` after transliteration routing.
    pub text: &'a str,
    pub backend: &'a str,
    /// Cached model file for this processor, when the catalog has one.
    pub model_path: Option<PathBuf>,
}

pub trait Processor: Send + Sync {
    fn process(&self, doc: &mut Document, ctx: &ProcessContext<'_>) -> Result<(), ProcessorError>;
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegisterError {
    #[error("unknown processor `{0}`")]
    UnknownProcessor(String),
    #[error("processor `{name}` requires itself (cycle)")]
    Cycle { name: String },
    #[error("processor `{name}` requires `{required}`, which does not run before it")]
    InvalidRequires { name: String, required: String },
    #[error("processor `{name}` with backend `{backend}` is already registered")]
    Duplicate { name: String, backend: String },
    #[error("processor spec `{0}` provides no annotation layer")]
    NothingProvided(String),
}

#[derive(Clone)]
pub(crate) struct Registered {
    pub spec: ProcessorSpec,
    pub imp: Arc<dyn Processor>,
    pub builtin: bool,
}

/// Processor implementations keyed by (name, backend).
#[derive(Clone)]
pub struct ProcessorRegistry {
    entries: BTreeMap<(String, String), Registered>,
}

impl std::fmt::Debug for ProcessorRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

impl Default for ProcessorRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl ProcessorRegistry {
    /// Registry holding the built-in `tokenize` and `mwt` implementations.
    pub fn new() -> Self {
        let mut entries = BTreeMap::new();
        for (spec, imp) in [
            (
                ProcessorSpec::new("tokenize", "rule"),
                Arc::new(RuleTokenizer) as Arc<dyn Processor>,
            ),
            (
                ProcessorSpec::new("mwt", "rule"),
                Arc::new(RuleMwt) as Arc<dyn Processor>,
            ),
        ] {
            entries.insert(
                (spec.name.clone(), spec.backend.clone()),
                Registered {
                    spec,
                    imp,
                    builtin: true,
                },
            );
        }
        ProcessorRegistry { entries }
    }

    /// Add a processor implementation. Replacing an existing (name, backend)
    /// pair, built-in or not, needs `allow_override`.
    pub fn register(
        &mut self,
        spec: ProcessorSpec,
        imp: Arc<dyn Processor>,
        allow_override: bool,
    ) -> Result<(), RegisterError> {
        let rank = canonical_rank(&spec.name)
            .ok_or_else(|| RegisterError::UnknownProcessor(spec.name.clone()))?;
        if spec.provides.is_empty() {
            return Err(RegisterError::NothingProvided(spec.name));
        }
        for req in &spec.requires {
            if *req == spec.name {
                return Err(RegisterError::Cycle { name: spec.name });
            }
            match canonical_rank(req) {
                None => return Err(RegisterError::UnknownProcessor(req.clone())),
                Some(r) if r > rank => {
                    return Err(RegisterError::InvalidRequires {
                        name: spec.name,
                        required: req.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        let key = (spec.name.clone(), spec.backend.clone());
        if self.entries.contains_key(&key) && !allow_override {
            return Err(RegisterError::Duplicate {
                name: key.0,
                backend: key.1,
            });
        }
        self.entries.insert(
            key,
            Registered {
                spec,
                imp,
                builtin: false,
            },
        );
        Ok(())
    }

    pub(crate) fn get(&self, name: &str, backend: &str) -> Option<&Registered> {
        self.entries.get(&(name.to_string(), backend.to_string()))
    }

    /// Backends available for `name`, built-ins first.
    pub fn backends(&self, name: &str) -> Vec<&str> {
        let mut found: Vec<(&str, bool)> = self
            .entries
            .iter()
            .filter(|((n, _), _)| n == name)
            .map(|((_, b), r)| (b.as_str(), r.builtin))
            .collect();
        found.sort_by_key(|(_, builtin)| !builtin);
        found.into_iter().map(|(b, _)| b).collect()
    }

    pub fn is_builtin(&self, name: &str, backend: &str) -> bool {
        self.get(name, backend).is_some_and(|r| r.builtin)
    }
}

struct RuleTokenizer;

impl Processor for RuleTokenizer {
    fn process(&self, doc: &mut Document, ctx: &ProcessContext<'_>) -> Result<(), ProcessorError> {
        let script = ctx.script.unwrap_or(Script::Latin);
        let rules = TokenizerRules::for_language(ctx.lang, script);
        doc.sentences = tokenize_sentences(ctx.text, &rules);
        Ok(())
    }
}

static MWT_TABLES: LazyLock<HashMap<&'static str, MwtRuleTable>> = LazyLock::new(|| {
    ["tur", "aze", "kaz"]
        .into_iter()
        .map(|l| (l, bundled_mwt_table(l)))
        .collect()
});

struct RuleMwt;

impl Processor for RuleMwt {
    fn process(&self, doc: &mut Document, ctx: &ProcessContext<'_>) -> Result<(), ProcessorError> {
        if let Some(table) = MWT_TABLES.get(ctx.lang) {
            for s in &mut doc.sentences {
                *s = expand_mwt(s, table);
            }
        }
        Ok(())
    }
}
