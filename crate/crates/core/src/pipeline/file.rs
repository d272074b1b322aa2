use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::{Pipeline, PipelineError};
use crate::doc_model::Document;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Conllu,
    Json,
}

impl FromStr for OutputFormat {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "conllu" | "conll-u" => Ok(OutputFormat::Conllu),
            "json" => Ok(OutputFormat::Json),
            _ => Err(PipelineError::InvalidFormat(s.to_string())),
        }
    }
}

impl OutputFormat {
    pub fn serialize(self, doc: &Document) -> String {
        match self {
            OutputFormat::Conllu => doc.to_conllu(),
            OutputFormat::Json => {
                let mut s = doc.to_json();
                s.push('\n');
                s
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemError {
    /// 1-based input line in per-line mode, 0 otherwise.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FileSummary {
    pub documents: usize,
    pub sentences: usize,
    pub tokens: usize,
    pub words: usize,
    pub failures: usize,
    pub errors: Vec<ItemError>,
}

impl FileSummary {
    fn add(&mut self, doc: &Document) {
        self.documents += 1;
        self.sentences += doc.sentences.len();
        self.tokens += doc.num_tokens();
        self.words += doc.num_words();
    }
}

/// Decode UTF-8, reporting the byte offset of the first invalid sequence.
pub fn decode_utf8(bytes: Vec<u8>) -> Result<String, PipelineError> {
    String::from_utf8(bytes).map_err(|e| PipelineError::Encoding {
        offset: e.utf8_error().valid_up_to(),
    })
}

impl Pipeline {
    /// Process `input` into `output`. The whole file is one document unless
    /// `per_line` is set; in per-line mode failing lines are counted in the
    /// summary and skipped. JSON output holds one document per line.
    /// The output is written to a temporary file and renamed into place.
    pub fn process_file(
        &self,
        input: &Path,
        output: &Path,
        format: OutputFormat,
        per_line: bool,
    ) -> Result<FileSummary, PipelineError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| PipelineError::Io { path, source }
        };
        let bytes = std::fs::read(input).map_err(io(input))?;
        let text = decode_utf8(bytes)?;
        let (rendered, summary) = self.process_text(&text, format, per_line)?;

        let dir = match output.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(output))?;
        tmp.write_all(rendered.as_bytes()).map_err(io(output))?;
        tmp.as_file().sync_all().map_err(io(output))?;
        tmp.persist(output).map_err(|e| io(output)(e.error))?;
        Ok(summary)
    }

    /// In-memory counterpart of `process_file`.
    pub fn process_text(
        &self,
        text: &str,
        format: OutputFormat,
        per_line: bool,
    ) -> Result<(String, FileSummary), PipelineError> {
        let mut summary = FileSummary::default();
        let mut out = String::new();
        if !per_line {
            if !text.trim().is_empty() {
                let doc = self.run(text)?;
                summary.add(&doc);
                out.push_str(&format.serialize(&doc));
            }
            return Ok((out, summary));
        }
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l))
            .collect();
        let texts: Vec<&str> = lines.iter().map(|(_, l)| *l).collect();
        for ((line, _), result) in lines.iter().zip(self.batch(&texts)) {
            match result {
                Ok(doc) => {
                    summary.add(&doc);
                    out.push_str(&format.serialize(&doc));
                }
                Err(e) => {
                    summary.failures += 1;
                    summary.errors.push(ItemError {
                        line: *line,
                        message: e.to_string(),
                    });
                }
            }
        }
        Ok((out, summary))
    }
}
