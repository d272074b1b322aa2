//! Script-aware text processing for Turkic languages.

pub mod doc_model;
pub mod metrics;
pub mod pipeline;
pub mod registry;
pub mod scripts;
pub mod tokenize;
pub mod transliterate;
