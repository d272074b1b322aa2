use std::fmt::Write as _;

use thiserror::Error;

use super::{Document, Feats, Sentence, Token, Word};

const MISC_START: &str = "start_char";
const MISC_END: &str = "end_char";
const MISC_NER: &str = "ner";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ConlluError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConlluError> {
    Err(ConlluError {
        line,
        message: message.into(),
    })
}

fn field(value: Option<&str>) -> &str {
    match value {
        Some(v) if !v.is_empty() => v,
        _ => "_",
    }
}

fn misc_column(
    start: Option<usize>,
    end: Option<usize>,
    ner: Option<&str>,
    misc: Option<&str>,
) -> String {
    let mut items = Vec::new();
    if let Some(s) = start {
        items.push(format!("{MISC_START}={s}"));
    }
    if let Some(e) = end {
        items.push(format!("{MISC_END}={e}"));
    }
    if let Some(n) = ner.filter(|n| !n.is_empty()) {
        items.push(format!("{MISC_NER}={n}"));
    }
    if let Some(m) = misc.filter(|m| !m.is_empty()) {
        items.push(m.to_string());
    }
    if items.is_empty() {
        "_".to_string()
    } else {
        items.join("|")
    }
}

/// Serialize to CoNLL-U. Offsets and NER labels travel in the MISC column as
/// `start_char=`, `end_char=` and `ner=` items.
pub fn to_conllu(doc: &Document) -> String {
    let mut out = String::new();
    for sent in &doc.sentences {
        for c in &sent.comments {
            out.push_str(c);
            out.push('\n');
        }
        if !sent.text.is_empty() {
            let _ = writeln!(out, "# text = {}", sent.text);
        }
        for tok in &sent.tokens {
            if tok.is_multiword() {
                let _ = writeln!(
                    out,
                    "{}-{}\t{}\t_\t_\t_\t_\t_\t_\t_\t{}",
                    tok.id.0,
                    tok.id.1,
                    tok.text,
                    misc_column(tok.start_char, tok.end_char, None, tok.misc.as_deref())
                );
            }
            for w in &tok.words {
                let feats = w
                    .feats
                    .as_ref()
                    .filter(|f| !f.is_empty())
                    .map(|f| f.to_string());
                let head = w.head.map(|h| h.to_string());
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    w.id,
                    field(Some(&w.text)),
                    field(w.lemma.as_deref()),
                    field(w.upos.as_deref()),
                    field(w.xpos.as_deref()),
                    field(feats.as_deref()),
                    field(head.as_deref()),
                    field(w.deprel.as_deref()),
                    field(w.deps.as_deref()),
                    misc_column(
                        w.start_char,
                        w.end_char,
                        w.ner.as_deref(),
                        w.misc.as_deref()
                    )
                );
            }
        }
        out.push('\n');
    }
    out
}

fn opt(value: &str) -> Option<String> {
    (value != "_").then(|| value.to_string())
}

struct Misc {
    start: Option<usize>,
    end: Option<usize>,
    ner: Option<String>,
    rest: Option<String>,
}

fn parse_misc(value: &str, line: usize) -> Result<Misc, ConlluError> {
    let mut misc = Misc {
        start: None,
        end: None,
        ner: None,
        rest: None,
    };
    if value == "_" {
        return Ok(misc);
    }
    let mut rest = Vec::new();
    for item in value.split('|') {
        match item.split_once('=') {
            Some((MISC_START, v)) if misc.start.is_none() => {
                misc.start = Some(
                    v.parse()
                        .or_else(|_| err(line, format!("bad start_char `{v}`")))?,
                );
            }
            Some((MISC_END, v)) if misc.end.is_none() => {
                misc.end = Some(
                    v.parse()
                        .or_else(|_| err(line, format!("bad end_char `{v}`")))?,
                );
            }
            Some((MISC_NER, v)) if misc.ner.is_none() => misc.ner = Some(v.to_string()),
            _ => rest.push(item),
        }
    }
    if !rest.is_empty() {
        misc.rest = Some(rest.join("|"));
    }
    Ok(misc)
}

fn parse_id(value: &str, line: usize) -> Result<usize, ConlluError> {
    match value.parse::<usize>() {
        Ok(0) => err(line, "word id must be >= 1"),
        Ok(v) => Ok(v),
        Err(_) => err(line, format!("non-integer id `{value}`")),
    }
}

/// Accumulates one sentence while parsing.
#[derive(Default)]
struct SentenceBuilder {
    sentence: Sentence,
    has_text: bool,
    /// open multiword token: (token index, end id)
    open_range: Option<(usize, usize)>,
    last_range_end: usize,
    next_word: usize,
    first_line: usize,
    head_lines: Vec<(usize, usize, usize)>,
}

impl SentenceBuilder {
    fn new(first_line: usize) -> Self {
        SentenceBuilder {
            next_word: 1,
            first_line,
            ..Default::default()
        }
    }

    fn is_empty(&self) -> bool {
        self.sentence.tokens.is_empty() && self.sentence.comments.is_empty() && !self.has_text
    }

    fn comment(&mut self, line: &str, lineno: usize) -> Result<(), ConlluError> {
        if !self.sentence.tokens.is_empty() {
            return err(lineno, "comment after token lines");
        }
        let body = line[1..].trim_start();
        match body.strip_prefix("text =") {
            Some(text) if !self.has_text => {
                self.sentence.text = text.strip_prefix(' ').unwrap_or(text).to_string();
                self.has_text = true;
            }
            _ => self.sentence.comments.push(line.to_string()),
        }
        Ok(())
    }

    fn row(&mut self, line: &str, lineno: usize) -> Result<(), ConlluError> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return err(lineno, format!("expected 10 columns, found {}", cols.len()));
        }
        let id = cols[0];
        if id.contains('.') {
            return err(lineno, format!("empty node `{id}` is not supported"));
        }
        let misc = parse_misc(cols[9], lineno)?;

        if let Some((a, b)) = id.split_once('-') {
            let (a, b) = (parse_id(a, lineno)?, parse_id(b, lineno)?);
            if b <= a {
                return err(lineno, format!("invalid range {a}-{b}"));
            }
            if self.open_range.is_some() || a <= self.last_range_end {
                return err(lineno, format!("overlapping multiword range {a}-{b}"));
            }
            if a != self.next_word {
                return err(
                    lineno,
                    format!("range {a}-{b} does not start at word {}", self.next_word),
                );
            }
            self.sentence.tokens.push(Token {
                id: (a, b),
                text: cols[1].to_string(),
                words: Vec::new(),
                start_char: misc.start,
                end_char: misc.end,
                misc: misc.rest,
            });
            self.open_range = Some((self.sentence.tokens.len() - 1, b));
            self.last_range_end = b;
            return Ok(());
        }

        let wid = parse_id(id, lineno)?;
        if wid != self.next_word {
            return err(
                lineno,
                format!("expected word id {}, found {wid}", self.next_word),
            );
        }
        let head = match cols[6] {
            "_" => None,
            h => Some(
                h.parse::<usize>()
                    .or_else(|_| err(lineno, format!("non-integer head `{h}`")))?,
            ),
        };
        if let Some(h) = head {
            self.head_lines.push((lineno, wid, h));
        }
        let feats = match cols[5] {
            "_" => None,
            f => Some(f.parse::<Feats>().or_else(|e| err(lineno, e.to_string()))?),
        };
        let word = Word {
            id: wid,
            text: cols[1].to_string(),
            lemma: opt(cols[2]),
            upos: opt(cols[3]),
            xpos: opt(cols[4]),
            feats,
            head,
            deprel: opt(cols[7]),
            deps: opt(cols[8]),
            start_char: misc.start,
            end_char: misc.end,
            ner: misc.ner,
            misc: misc.rest,
        };
        self.next_word += 1;

        match self.open_range {
            Some((ti, end)) => {
                self.sentence.tokens[ti].words.push(word);
                if wid == end {
                    self.open_range = None;
                }
            }
            None => self.sentence.tokens.push(Token {
                id: (wid, wid),
                text: word.text.clone(),
                start_char: word.start_char,
                end_char: word.end_char,
                misc: None,
                words: vec![word],
            }),
        }
        Ok(())
    }

    fn finish(self, lineno: usize) -> Result<Sentence, ConlluError> {
        if let Some((ti, end)) = self.open_range {
            let (a, _) = self.sentence.tokens[ti].id;
            return err(
                lineno,
                format!("multiword range {a}-{end} is missing words"),
            );
        }
        if self.sentence.tokens.is_empty() {
            return err(self.first_line, "sentence has no word lines");
        }
        let n = self.next_word - 1;
        for (line, wid, h) in self.head_lines {
            if h > n {
                return err(
                    line,
                    format!("head {h} out of range (sentence has {n} words)"),
                );
            }
            if h == wid {
                return err(line, format!("word {wid} is its own head"));
            }
        }
        Ok(self.sentence)
    }
}

/// Parse CoNLL-U text. Errors name the 1-based line.
pub fn from_conllu(input: &str) -> Result<Document, ConlluError> {
    let mut doc = Document::default();
    let mut current: Option<SentenceBuilder> = None;
    let mut last_line = 0;

    for (n, raw) in input.lines().enumerate() {
        let lineno = n + 1;
        last_line = lineno;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if let Some(b) = current.take() {
                if !b.is_empty() {
                    doc.sentences.push(b.finish(lineno)?);
                }
            }
            continue;
        }
        let builder = current.get_or_insert_with(|| SentenceBuilder::new(lineno));
        if line.starts_with('#') {
            builder.comment(line, lineno)?;
        } else {
            builder.row(line, lineno)?;
        }
    }
    if let Some(b) = current.take() {
        if !b.is_empty() {
            doc.sentences.push(b.finish(last_line)?);
        }
    }
    doc.text = doc
        .sentences
        .iter()
        .map(|s| s.text.as_str())
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(doc)
}
