//! Pipeline construction, dependency resolution, script routing and execution.
//!
//! Token offsets in a routed document refer to the transliterated text the
//! processors actually saw; `Document::text` always keeps the original input.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::doc_model::{Document, ProcessorLogEntry};
use crate::registry::{Cache, CatalogManifest};
use crate::scripts::{detect_script, lookup_language, normalize, Script, ScriptError};
use crate::transliterate::{find_pair, TranslitError, Transliterator};

mod file;
mod processor;

pub use file::{FileSummary, ItemError, OutputFormat};
pub use processor::{
    builtin_requires, canonical_rank, is_known_processor, ProcessContext, Processor,
    ProcessorError, ProcessorRegistry, ProcessorSpec, RegisterError, CANONICAL_ORDER, TRANSLIT,
};

/// Log name of the back-transliteration step.
pub const TRANSLIT_BACK: &str = "translit-back";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("unknown processor `{0}`")]
    UnknownProcessor(String),
    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(String),
    #[error("{}", missing_message(processor, backend.as_deref()))]
    MissingBackend {
        processor: String,
        backend: Option<String>,
    },
    #[error("no transliteration route for {lang} from {from} to {to}")]
    NoTranslitRoute {
        lang: String,
        from: Script,
        to: Script,
    },
    #[error("processors need models in different scripts: {0:?}")]
    ConflictingModelScripts(Vec<Script>),
}

fn missing_message(processor: &str, backend: Option<&str>) -> String {
    match backend {
        Some(b) => format!(
            "missing backend: `{b}` for processor `{processor}` is neither built in nor registered"
        ),
        None => format!("missing backend: no backend available for processor `{processor}`"),
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("input contains no alphabetic characters")]
    NoAlphabeticContent,
    #[error("no transliteration route for {lang} from {from} to {to}")]
    NoTranslitRoute {
        lang: String,
        from: Script,
        to: Script,
    },
    #[error(transparent)]
    Translit(#[from] TranslitError),
    #[error("processor `{processor}` (backend `{backend}`) failed: {source}")]
    ProcessorFailure {
        processor: String,
        backend: String,
        #[source]
        source: ProcessorError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("input is not valid UTF-8 (byte offset {offset})")]
    Encoding { offset: usize },
    #[error("unsupported format `{0}` (expected conllu or json)")]
    InvalidFormat(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineConfig {
    pub lang: String,
    pub processors: Vec<String>,
    /// Declared input script; detected per input when absent.
    pub script: Option<Script>,
    /// Per-processor backend overrides, e.g. `morph → apertium`.
    pub backends: BTreeMap<String, String>,
}

impl PipelineConfig {
    pub fn new<S: AsRef<str>>(lang: &str, processors: &[S]) -> Self {
        PipelineConfig {
            lang: lang.to_string(),
            processors: processors.iter().map(|p| p.as_ref().to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn with_script(mut self, script: Script) -> Self {
        self.script = Some(script);
        self
    }

    pub fn with_backend(mut self, processor: &str, backend: &str) -> Self {
        self.backends
            .insert(processor.to_string(), backend.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelinePlan {
    pub lang: String,
    pub declared_script: Option<Script>,
    pub ordered_processors: Vec<ProcessorSpec>,
    /// Scripts the plan's catalog models accept; empty means any script.
    pub model_scripts: Vec<Script>,
    /// Known at plan time only when the script is declared.
    pub pre_translit: Option<(Script, Script)>,
    pub post_translit: bool,
}

impl PipelinePlan {
    pub fn processor_names(&self) -> Vec<&str> {
        self.ordered_processors
            .iter()
            .map(|p| p.name.as_str())
            .collect()
    }

    /// The transliteration route for an input in `script`, if one is needed.
    fn route_for(&self, script: Script) -> Result<Option<(Script, Script)>, PlanError> {
        if self.model_scripts.is_empty() || self.model_scripts.contains(&script) {
            return Ok(None);
        }
        self.model_scripts
            .iter()
            .find(|to| find_pair(&self.lang, script, **to).is_some())
            .map(|to| Some((script, *to)))
            .ok_or_else(|| PlanError::NoTranslitRoute {
                lang: self.lang.clone(),
                from: script,
                to: self.model_scripts[0],
            })
    }
}

/// Resolve requested processors into an ordered, dependency-closed plan.
pub fn resolve_plan(
    config: &PipelineConfig,
    catalog: &CatalogManifest,
    registry: &ProcessorRegistry,
) -> Result<PipelinePlan, PlanError> {
    let lang = lookup_language(&config.lang)
        .map_err(|_| PlanError::UnsupportedLanguage(config.lang.clone()))?;
    for p in &config.processors {
        if !is_known_processor(p) {
            return Err(PlanError::UnknownProcessor(p.clone()));
        }
    }

    let choose_backend = |p: &str| -> Option<String> {
        config
            .backends
            .get(p)
            .cloned()
            .or_else(|| catalog.default_backend(&lang.iso, p).map(str::to_string))
            .or_else(|| registry.backends(p).first().map(|b| b.to_string()))
            .or_else(|| {
                catalog
                    .candidates(&lang.iso, p, None)
                    .next()
                    .map(|e| e.backend.clone())
            })
    };

    let mut selected: BTreeMap<usize, (String, Option<String>)> = BTreeMap::new();
    let mut work: Vec<String> = config
        .processors
        .iter()
        .filter(|p| *p != TRANSLIT)
        .cloned()
        .collect();
    while let Some(p) = work.pop() {
        let rank = canonical_rank(&p).expect("validated above");
        if selected.contains_key(&rank) {
            continue;
        }
        let backend = choose_backend(&p);
        let requires: Vec<String> = match backend.as_deref().and_then(|b| registry.get(&p, b)) {
            Some(r) => r.spec.requires.iter().cloned().collect(),
            None => builtin_requires(&p).iter().map(|s| s.to_string()).collect(),
        };
        work.extend(requires);
        selected.insert(rank, (p, backend));
    }

    let mwt_rank = canonical_rank("mwt").expect("mwt is canonical");
    let word_level = selected.keys().any(|r| *r > mwt_rank);
    if word_level
        && catalog.default_backend(&lang.iso, "mwt").is_some()
        && !selected.contains_key(&mwt_rank)
    {
        selected.insert(mwt_rank, ("mwt".to_string(), choose_backend("mwt")));
        let tok_rank = canonical_rank("tokenize").expect("tokenize is canonical");
        selected
            .entry(tok_rank)
            .or_insert_with(|| ("tokenize".to_string(), choose_backend("tokenize")));
    }

    let mut ordered = Vec::with_capacity(selected.len());
    let mut model_scripts: Option<BTreeSet<Script>> = None;
    for (name, backend) in selected.into_values() {
        let Some(backend) = backend else {
            return Err(PlanError::MissingBackend {
                processor: name,
                backend: None,
            });
        };
        let Some(registered) = registry.get(&name, &backend) else {
            return Err(PlanError::MissingBackend {
                processor: name,
                backend: Some(backend),
            });
        };
        if !registered.builtin {
            let scripts: BTreeSet<Script> = catalog
                .candidates(&lang.iso, &name, Some(&backend))
                .map(|e| e.script)
                .collect();
            if !scripts.is_empty() {
                model_scripts = Some(match model_scripts {
                    None => scripts,
                    Some(prev) => {
                        let both: BTreeSet<Script> = prev.intersection(&scripts).copied().collect();
                        if both.is_empty() {
                            return Err(PlanError::ConflictingModelScripts(
                                prev.union(&scripts).copied().collect(),
                            ));
                        }
                        both
                    }
                });
            }
        }
        ordered.push(registered.spec.clone());
    }

    // keep the language's default script first so routing prefers it
    let mut model_scripts: Vec<Script> = model_scripts
        .map(|s| s.into_iter().collect())
        .unwrap_or_default();
    model_scripts.sort_by_key(|s| *s != lang.default_script);

    let mut plan = PipelinePlan {
        lang: lang.iso.to_string(),
        declared_script: config.script,
        ordered_processors: ordered,
        model_scripts,
        pre_translit: None,
        post_translit: false,
    };
    if let Some(declared) = config.script {
        plan.pre_translit = plan.route_for(declared)?;
        plan.post_translit = plan
            .pre_translit
            .is_some_and(|(from, to)| find_pair(&plan.lang, to, from).is_some());
    }
    Ok(plan)
}

/// A resolved, immutable pipeline; `run` may be called from many threads.
#[derive(Debug, Clone)]
pub struct Pipeline {
    plan: PipelinePlan,
    registry: Arc<ProcessorRegistry>,
    catalog: Arc<CatalogManifest>,
    cache: Option<Cache>,
    default_script: Script,
    jobs: usize,
}

impl Pipeline {
    pub fn new(
        config: &PipelineConfig,
        catalog: Arc<CatalogManifest>,
        registry: Arc<ProcessorRegistry>,
    ) -> Result<Self, PlanError> {
        let plan = resolve_plan(config, &catalog, &registry)?;
        let default_script = lookup_language(&plan.lang)
            .expect("resolved language")
            .default_script;
        Ok(Pipeline {
            plan,
            registry,
            catalog,
            cache: None,
            default_script,
            jobs: 0,
        })
    }

    /// Pipeline over the bundled catalog and the built-in processors.
    pub fn with_defaults<S: AsRef<str>>(lang: &str, processors: &[S]) -> Result<Self, PlanError> {
        Self::new(
            &PipelineConfig::new(lang, processors),
            Arc::new(CatalogManifest::bundled()),
            Arc::new(ProcessorRegistry::new()),
        )
    }

    /// Cache used to hand model paths to processors.
    pub fn with_cache(mut self, cache: Cache) -> Self {
        self.cache = Some(cache);
        self
    }

    /// Worker threads for `batch`; 0 uses the global pool, 1 runs sequentially.
    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn plan(&self) -> &PipelinePlan {
        &self.plan
    }

    pub fn run(&self, text: &str) -> Result<Document, PipelineError> {
        let plan = &self.plan;
        let mut doc = Document::new(text);
        let normalized = normalize(text);

        let input_script = match plan.declared_script {
            Some(s) => {
                doc.script_declared = true;
                Some(s)
            }
            None => match detect_script(&normalized) {
                Ok(s) => Some(s),
                Err(ScriptError::NoAlphabeticContent) => None,
                Err(_) => None,
            },
        };
        doc.script = input_script;

        let route = match (plan.declared_script, input_script) {
            (Some(_), _) => plan.pre_translit,
            (None, Some(s)) => plan.route_for(s).map_err(|e| match e {
                PlanError::NoTranslitRoute { lang, from, to } => {
                    PipelineError::NoTranslitRoute { lang, from, to }
                }
                other => PipelineError::Plan(other),
            })?,
            (None, None) if !plan.model_scripts.is_empty() && !normalized.trim().is_empty() => {
                return Err(PipelineError::NoAlphabeticContent)
            }
            (None, None) => None,
        };

        let working_text = match route {
            Some((from, to)) => {
                let t = Transliterator::new(&plan.lang, from, to)?;
                let out = t.transliterate(&normalized)?;
                doc.processor_log.push(ProcessorLogEntry {
                    processor: TRANSLIT.to_string(),
                    backend: "table".to_string(),
                    language: plan.lang.clone(),
                    script: Some(to),
                });
                out
            }
            None => normalized,
        };
        let working_script = route
            .map(|(_, to)| to)
            .or(input_script)
            .unwrap_or(self.default_script);

        for spec in &plan.ordered_processors {
            let registered = self
                .registry
                .get(&spec.name, &spec.backend)
                .expect("plan only holds registered processors");
            let ctx = ProcessContext {
                lang: &plan.lang,
                script: Some(working_script),
                text: &working_text,
                backend: &spec.backend,
                model_path: self.model_path(&spec.name, &spec.backend, working_script),
            };
            registered.imp.process(&mut doc, &ctx).map_err(|source| {
                PipelineError::ProcessorFailure {
                    processor: spec.name.clone(),
                    backend: spec.backend.clone(),
                    source,
                }
            })?;
            doc.processor_log.push(ProcessorLogEntry {
                processor: spec.name.clone(),
                backend: spec.backend.clone(),
                language: plan.lang.clone(),
                script: Some(working_script),
            });
        }

        if let Some((from, to)) = route {
            if find_pair(&plan.lang, to, from).is_some() {
                let back = Transliterator::new(&plan.lang, to, from)?;
                for sent in &mut doc.sentences {
                    for w in sent.words_mut() {
                        if let Some(lemma) = &w.lemma {
                            w.lemma = Some(back.transliterate(lemma)?);
                        }
                    }
                }
                doc.processor_log.push(ProcessorLogEntry {
                    processor: TRANSLIT_BACK.to_string(),
                    backend: "table".to_string(),
                    language: plan.lang.clone(),
                    script: Some(from),
                });
            }
        }
        Ok(doc)
    }

    fn model_path(
        &self,
        processor: &str,
        backend: &str,
        script: Script,
    ) -> Option<std::path::PathBuf> {
        let cache = self.cache.as_ref()?;
        let mut entries: Vec<_> = self
            .catalog
            .candidates(&self.plan.lang, processor, Some(backend))
            .collect();
        entries.sort_by_key(|e| e.script != script);
        entries.into_iter().find_map(|e| cache.lookup(e))
    }

    /// Run every text; failures stay in their own slot and order is preserved.
    pub fn batch<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<Result<Document, PipelineError>> {
        match self.jobs {
            1 => texts.iter().map(|t| self.run(t.as_ref())).collect(),
            0 => texts.par_iter().map(|t| self.run(t.as_ref())).collect(),
            n => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => {
                    pool.install(|| texts.par_iter().map(|t| self.run(t.as_ref())).collect())
                }
                Err(_) => texts.iter().map(|t| self.run(t.as_ref())).collect(),
            },
        }
    }
}
