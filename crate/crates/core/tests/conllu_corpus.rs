mod common;

use std::fmt::Write as _;
use std::path::PathBuf;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use common::{test_data, validate_conllu};
use turkic_core::doc_model::{from_conllu, from_json, to_conllu};

const GENERATED: usize = 12;

const FORMS: [&str; 12] = [
    "Ali",
    "kitabı",
    "gördü",
    "Мен",
    "Алматыда",
    "турамын",
    "ئەلى",
    "كۆردى",
    "ko'rdi",
    "evdeki",
    "ler",
    ".",
];
const FEATS: [&str; 6] = ["Case", "Number", "Person", "Tense", "Mood", "Poss"];
const UPOS: [&str; 6] = ["NOUN", "VERB", "PROPN", "ADJ", "PRON", "PUNCT"];

#[derive(Debug, Clone)]
struct GenWord {
    form: usize,
    upos: Option<usize>,
    feats: Vec<(usize, u8)>,
    misc: bool,
}

#[derive(Debug, Clone)]
struct GenSentence {
    words: Vec<GenWord>,
    /// word index of the root plus, for the rest, a raw head choice
    root: usize,
    heads: Vec<usize>,
    /// start word index of an optional two-word range
    mwt: Option<usize>,
    annotated: bool,
}

fn word() -> impl Strategy<Value = GenWord> {
    (
        0..FORMS.len(),
        proptest::option::of(0..UPOS.len()),
        proptest::collection::vec((0..FEATS.len(), 1u8..4), 0..3),
        any::<bool>(),
    )
        .prop_map(|(form, upos, feats, misc)| GenWord {
            form,
            upos,
            feats,
            misc,
        })
}

fn sentence() -> impl Strategy<Value = GenSentence> {
    (
        proptest::collection::vec(word(), 1..8),
        any::<usize>(),
        proptest::collection::vec(any::<usize>(), 8),
        proptest::option::of(any::<usize>()),
        any::<bool>(),
    )
        .prop_map(|(words, root, heads, mwt, annotated)| {
            let n = words.len();
            GenSentence {
                root: root % n,
                mwt: mwt.filter(|_| n >= 2).map(|m| m % (n - 1)),
                words,
                heads,
                annotated,
            }
        })
}

/// Render a generated sentence as CoNLL-U with sorted, de-duplicated feats
/// and a proper tree (every non-root word points at an earlier-visited word).
fn render(sents: &[GenSentence]) -> String {
    let mut out = String::new();
    for (si, s) in sents.iter().enumerate() {
        let _ = writeln!(out, "# sent_id = g{si}");
        let forms: Vec<&str> = s.words.iter().map(|w| FORMS[w.form]).collect();
        let _ = writeln!(out, "# text = {}", forms.join(" "));
        let n = s.words.len();
        // attach words in order root, then the others to anything already attached
        let mut order: Vec<usize> = (0..n).filter(|i| *i != s.root).collect();
        order.insert(0, s.root);
        let mut head = vec![0usize; n];
        for (k, &w) in order.iter().enumerate().skip(1) {
            head[w] = order[s.heads[k % s.heads.len()] % k] + 1;
        }
        for (i, w) in s.words.iter().enumerate() {
            if s.mwt == Some(i) {
                let _ = writeln!(
                    out,
                    "{}-{}\t{}{}\t_\t_\t_\t_\t_\t_\t_\t_",
                    i + 1,
                    i + 2,
                    forms[i],
                    forms[i + 1]
                );
            }
            let mut feats: Vec<(&str, u8)> = w.feats.iter().map(|(k, v)| (FEATS[*k], *v)).collect();
            feats.sort_by_key(|(k, _)| k.to_ascii_lowercase());
            feats.dedup_by_key(|(k, _)| *k);
            let feats = if feats.is_empty() {
                "_".to_string()
            } else {
                feats
                    .iter()
                    .map(|(k, v)| format!("{k}=V{v}"))
                    .collect::<Vec<_>>()
                    .join("|")
            };
            let (h, rel) = if s.annotated {
                let rel = if head[i] == 0 { "root" } else { "dep" };
                (head[i].to_string(), rel)
            } else {
                ("_".to_string(), "_")
            };
            let upos = w.upos.map_or("_", |u| UPOS[u]);
            let lemma = FORMS[w.form].to_lowercase();
            let misc = if w.misc { "SpaceAfter=No" } else { "_" };
            let _ = writeln!(
                out,
                "{}\t{}\t{lemma}\t{upos}\t_\t{feats}\t{h}\t{rel}\t_\t{misc}",
                i + 1,
                forms[i]
            );
        }
        out.push('\n');
    }
    out
}

fn corpus() -> Vec<(String, String)> {
    let dir = test_data().join("conllu");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    let mut out: Vec<(String, String)> = files
        .iter()
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(p).unwrap(),
            )
        })
        .collect();

    // generated files are written to disk and read back like the hand-written ones
    let tmp = tempfile::tempdir().unwrap();
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let strategy = proptest::collection::vec(sentence(), 1..5);
    for i in 0..GENERATED {
        let sents = strategy.new_tree(&mut runner).unwrap().current();
        let path = tmp.path().join(format!("gen_{i:02}.conllu"));
        std::fs::write(&path, render(&sents)).unwrap();
        out.push((
            format!("gen_{i:02}"),
            std::fs::read_to_string(&path).unwrap(),
        ));
    }
    out
}

#[test]
fn corpus_is_large_enough_and_valid() {
    let corpus = corpus();
    assert!(corpus.len() >= 20, "{} files", corpus.len());
    assert!(corpus.iter().any(|(_, t)| t.lines().any(|l| l
        .split('\t')
        .next()
        .unwrap()
        .contains('-'))));
    for (name, text) in &corpus {
        validate_conllu(text).unwrap_or_else(|e| panic!("fixture {name} invalid: {e}"));
    }
}

#[test]
fn parse_serialize_parse_is_a_fixed_point() {
    for (name, text) in corpus() {
        let doc = from_conllu(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let once = to_conllu(&doc);
        validate_conllu(&once)
            .unwrap_or_else(|e| panic!("{name}: serializer output invalid: {e}\n{once}"));
        let again = from_conllu(&once).unwrap();
        assert_eq!(again, doc, "{name}");
        assert_eq!(to_conllu(&again), once, "{name}");
    }
}

#[test]
fn json_round_trip_over_corpus() {
    for (name, text) in corpus() {
        let doc = from_conllu(&text).unwrap();
        let back = from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc, "{name}");
    }
}

#[test]
fn hand_written_content_survives() {
    let text = std::fs::read_to_string(test_data().join("conllu/02_tur_mwt.conllu")).unwrap();
    let doc = from_conllu(&text).unwrap();
    let s = &doc.sentences[0];
    assert_eq!(s.text, "Evdekiler geldi.");
    assert_eq!(s.tokens[0].id, (1, 2));
    assert_eq!(s.tokens[0].words.len(), 2);
    assert_eq!(s.num_words(), 4);
    assert!(s.comments.iter().any(|c| c.contains("sent_id = tur-2")));
    let out = to_conllu(&doc);
    assert!(out.contains("1-2\tEvdekiler\t"));
    assert!(out.contains("Number=Sing|Person=3|Tense=Past") || out.contains("Tense=Past"));
}

#[test]
fn validator_rejects_broken_input() {
    assert!(validate_conllu("1\tx\t_\t_\t_\t_\t_\t_\t_\n\n").is_err());
    assert!(validate_conllu("2\tx\t_\t_\t_\t_\t_\t_\t_\t_\n\n").is_err());
    assert!(validate_conllu("1\tx\t_\t_\t_\tB=1|A=2\t_\t_\t_\t_\n\n").is_err());
    assert!(validate_conllu("1\tx\t_\t_\t_\t_\t1\tdep\t_\t_\n\n").is_err());
    assert!(validate_conllu("1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n").is_err());
}
