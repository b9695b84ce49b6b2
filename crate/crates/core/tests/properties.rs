use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use discocirc::ansatz::{compile, AnsatzConfig, AnsatzKind};
use discocirc::compose::{compose_document, sentence_text};
use discocirc::diagram::{DiagramElement, TextDiagram};
use discocirc::ingest::{lexicon_parse, load_document, save_document, Document, Lexicon};
use discocirc::pipeline::{prepare, sentence_diagrams, text_diagram, PipelineConfig};
use discocirc::pregroup::{reduce, validate_diagram, PregroupDiagram, PregroupType};
use discocirc::rewrite::{builtin_rules, determiner_rule, noun_modification, rewrite_tree, RewriteRule, WordMerger};
use discocirc::sandwich::{expand_frames, SandwichConfig};
use discocirc::synthetic::{long_document, random_diagram, topic_paragraphs};
use discocirc::tree::{build_trees, compound_type, find_heads};

fn corpus() -> Vec<Document> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus");
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths.iter().map(|p| load_document(p).unwrap()).collect()
}

fn long(seed: u64, n: usize) -> Document {
    long_document(&mut ChaCha8Rng::seed_from_u64(seed), n, &Lexicon::builtin()).unwrap()
}

/// True when the token link graph has no cycle and each component holds at
/// most one token with free wires.
fn is_plain_forest(d: &PregroupDiagram) -> bool {
    let owners = d.wire_owners();
    let n = d.tokens.len();
    let mut root: Vec<usize> = (0..n).collect();
    fn find(root: &mut Vec<usize>, x: usize) -> usize {
        if root[x] != x {
            let r = find(root, root[x]);
            root[x] = r;
        }
        root[x]
    }
    let pairs: BTreeSet<(usize, usize)> = d
        .cups
        .iter()
        .map(|c| (owners[c.0], owners[c.1]))
        .filter(|(a, b)| a != b)
        .collect();
    if d.cups.iter().any(|c| owners[c.0] == owners[c.1]) {
        return false;
    }
    for (a, b) in pairs {
        let (ra, rb) = (find(&mut root, a), find(&mut root, b));
        if ra == rb {
            return false;
        }
        root[ra] = rb;
    }
    let mut heads_per = BTreeMap::new();
    for h in find_heads(d) {
        *heads_per.entry(find(&mut root, h)).or_insert(0) += 1;
    }
    heads_per.values().all(|&k| k <= 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trees_partition_tokens_and_recover_types(seed in any::<u64>()) {
        let d = random_diagram(&mut ChaCha8Rng::seed_from_u64(seed), 10);
        let r = build_trees(&d).unwrap();
        prop_assert_eq!(&build_trees(&d).unwrap(), &r);
        let mut seen: Vec<usize> = r.nodes().map(|n| n.token_index).collect();
        seen.sort();
        prop_assert_eq!(seen, (0..d.tokens.len()).collect::<Vec<_>>());
        let dropped: BTreeSet<usize> = r.removed_cups.iter().flat_map(|c| [c.0, c.1]).collect();
        let wires = d.wires();
        for (t, range) in d.token_ranges().into_iter().enumerate() {
            let node = r.forest.iter().find_map(|root| root.find(t)).unwrap();
            let want = PregroupType(range.filter(|o| !dropped.contains(o)).map(|o| wires[o]).collect());
            prop_assert_eq!(compound_type(node), want);
        }
        if is_plain_forest(&d) {
            prop_assert!(r.removed_cups.is_empty());
        }
    }

    #[test]
    fn reduce_ignores_words(seed in any::<u64>()) {
        let d = random_diagram(&mut ChaCha8Rng::seed_from_u64(seed), 8);
        let mut renamed = d.clone();
        for (i, t) in renamed.tokens.iter_mut().enumerate() {
            t.word = format!("x{}", i * 7);
        }
        prop_assert_eq!(reduce(&d).ok(), reduce(&renamed).ok());
    }

    #[test]
    fn parsed_paragraphs_are_valid_and_complete(seed in any::<u64>()) {
        let lex = Lexicon::builtin();
        let texts = topic_paragraphs(&mut ChaCha8Rng::seed_from_u64(seed), 2, &lex).unwrap();
        for t in &texts {
            for s in &t.document.sentences {
                prop_assert!(validate_diagram(s).is_valid());
                prop_assert_eq!(reduce(s).unwrap(), PregroupType::s());
                prop_assert_eq!(&lexicon_parse(&s.words(), &lex).unwrap(), s);
            }
            let mut all: Vec<_> = t.document.corefs.chains.iter().flatten().copied().collect();
            let n = all.len();
            all.sort();
            all.dedup();
            prop_assert_eq!(all.len(), n);
        }
    }

    #[test]
    fn documents_round_trip_through_files(seed in any::<u64>()) {
        let doc = long(seed, 5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc.json");
        save_document(&doc, &path).unwrap();
        prop_assert_eq!(load_document(&path).unwrap(), doc);
    }

    #[test]
    fn composition_is_associative_on_chains(seed in any::<u64>()) {
        let doc = prepare(&long(seed, 6), None, &PipelineConfig::default());
        let s = sentence_diagrams(&doc, &PipelineConfig::default()).unwrap();
        let t: Vec<TextDiagram> = s.iter().map(sentence_text).collect();
        let left = t[0].then(&t[1]).then(&t[2]);
        let right = t[0].then(&t[1].then(&t[2]));
        prop_assert_eq!(left.chain_order(), right.chain_order());
        prop_assert_eq!(left.box_sequences(), right.box_sequences());
    }

    #[test]
    fn composition_conserves_wires(seed in any::<u64>()) {
        let doc = prepare(&long(seed, 8), None, &PipelineConfig::default());
        let s = sentence_diagrams(&doc, &PipelineConfig::default()).unwrap();
        let mut text = TextDiagram::default();
        let mut chains = BTreeSet::new();
        for sd in &s {
            text = text.then(&sentence_text(sd));
            chains.extend(sd.nouns.iter().map(|n| n.chain_id));
            prop_assert_eq!(text.output_wires().len(), chains.len());
            text.wire_trace().unwrap();
        }
        prop_assert_eq!(text, compose_document(&s, &doc.corefs).unwrap());
    }

    #[test]
    fn sandwich_removes_frames_and_keeps_wires(seed in any::<u64>()) {
        let doc = long(seed, 6);
        let d = text_diagram(&doc, None, &PipelineConfig::default()).unwrap();
        let frames = frame_components(&d);
        let before = names(&d);
        for (cfg, per_frame) in [
            (SandwichConfig::default(), frames.values().map(|_| 2).sum::<usize>()),
            (SandwichConfig::foliated(), frames.values().map(|m| 2 * m).sum::<usize>()),
        ] {
            let e = expand_frames(&d, &cfg).unwrap();
            prop_assert_eq!(e.frame_count(), 0);
            prop_assert_eq!(e.input_wires(), d.input_wires());
            prop_assert_eq!(e.output_wires(), d.output_wires());
            prop_assert_eq!(e.chain_order(), d.chain_order());
            prop_assert_eq!(names(&e).difference(&before).count(), per_frame);
            prop_assert_eq!(shape(&e), shape(&expand_frames(&relabel(&d), &cfg).unwrap()));
        }
    }

    #[test]
    fn compile_is_deterministic_and_shares_symbols(seed in any::<u64>()) {
        let doc = long(seed, 4);
        let d = expand_frames(&text_diagram(&doc, None, &PipelineConfig::default()).unwrap(), &SandwichConfig::default()).unwrap();
        let cfg = AnsatzConfig { kind: AnsatzKind::Iqp, seed, max_qubits: 64, ..Default::default() };
        let a = compile(&d, &cfg);
        let b = compile(&d, &cfg);
        prop_assert_eq!(&a.as_ref().ok(), &b.as_ref().ok());
        if let Ok(c) = a {
            let prefixes: BTreeSet<String> = c
                .symbols
                .keys()
                .map(|k| k.rsplit_once("__").unwrap().0.to_string())
                .collect();
            let mut distinct: BTreeSet<String> = d.states.iter().map(|s| format!("{}__0", s.word)).collect();
            d.layers.iter().for_each(|l| boxes_with_arity(l, &mut distinct));
            prop_assert_eq!(prefixes, distinct);
        }
    }
}

fn boxes_with_arity(e: &DiagramElement, out: &mut BTreeSet<String>) {
    match e {
        DiagramElement::Box { name, wires } | DiagramElement::Merge { name, wires } => {
            out.insert(format!("{name}__{}", wires.len()));
        }
        DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
            elements.iter().for_each(|x| boxes_with_arity(x, out));
        }
        _ => {}
    }
}

fn walk(e: &DiagramElement, f: &mut impl FnMut(&DiagramElement)) {
    f(e);
    match e {
        DiagramElement::Frame { components, .. } => components.iter().for_each(|c| walk(c, f)),
        DiagramElement::Seq { elements } | DiagramElement::Par { elements } => elements.iter().for_each(|c| walk(c, f)),
        _ => {}
    }
}

fn names(d: &TextDiagram) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for l in &d.layers {
        walk(l, &mut |e| match e {
            DiagramElement::Box { name, .. } | DiagramElement::Frame { name, .. } | DiagramElement::Merge { name, .. } => {
                out.insert(name.clone());
            }
            _ => {}
        });
    }
    out
}

/// Frame name to its largest component count.
fn frame_components(d: &TextDiagram) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for l in &d.layers {
        walk(l, &mut |e| {
            if let DiagramElement::Frame { name, components, .. } = e {
                let m = out.entry(name.clone()).or_insert(0);
                *m = (*m).max(components.len());
            }
        });
    }
    out
}

fn rename(e: &DiagramElement) -> DiagramElement {
    match e {
        DiagramElement::Box { name, wires } => DiagramElement::Box { name: format!("{name}'"), wires: wires.clone() },
        DiagramElement::Frame { name, wires, components } => DiagramElement::Frame {
            name: format!("{name}'"),
            wires: wires.clone(),
            components: components.iter().map(rename).collect(),
        },
        DiagramElement::Seq { elements } => DiagramElement::Seq { elements: elements.iter().map(rename).collect() },
        DiagramElement::Par { elements } => DiagramElement::Par { elements: elements.iter().map(rename).collect() },
        other => other.clone(),
    }
}

fn relabel(d: &TextDiagram) -> TextDiagram {
    TextDiagram {
        layers: d.layers.iter().map(rename).collect(),
        ..d.clone()
    }
}

/// The diagram with every name blanked.
fn shape(d: &TextDiagram) -> String {
    let mut v = serde_json::to_value(d).unwrap();
    fn blank(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                m.remove("name");
                m.values_mut().for_each(blank);
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(blank),
            _ => {}
        }
    }
    blank(&mut v);
    v.to_string()
}

#[test]
fn rewrites_shrink_trees_and_settle() {
    let rules: Vec<RewriteRule> = builtin_rules()
        .into_iter()
        .chain([determiner_rule(), noun_modification(1)])
        .collect();
    for doc in corpus().iter().chain([long(9, 30)].iter()) {
        for s in &doc.sentences {
            for root in build_trees(s).unwrap().forest {
                for rule in &rules {
                    let once = rewrite_tree(&root, rule);
                    let (before, after) = (root.size(), once.tree.size());
                    assert!(after <= before);
                    assert_eq!(after == before, once.merges == 0, "{}", rule.name);
                    if rule.word_merger != WordMerger::Merge {
                        assert_eq!(rewrite_tree(&once.tree, rule).merges, 0, "{} not idempotent", rule.name);
                    }
                    assert_eq!(compound_type(&once.tree), compound_type(&root));
                }
            }
        }
    }
}

#[test]
fn rewrites_keep_noun_chains() {
    for doc in corpus().iter().chain([long(4, 30)].iter()) {
        let plain = text_diagram(doc, None, &PipelineConfig::default()).unwrap();
        for rule in builtin_rules() {
            let cfg = PipelineConfig {
                rules: vec![rule],
                ..Default::default()
            };
            let t = text_diagram(doc, None, &cfg).unwrap();
            let chains = |d: &TextDiagram| d.states.iter().map(|s| s.chain_id).collect::<Vec<_>>();
            assert_eq!(chains(&t), chains(&plain));
        }
    }
}

#[test]
fn sentence_diagrams_count_nouns_and_cover_wires() {
    for doc in corpus() {
        let cfg = PipelineConfig {
            remove_nouns: vec!["books".into(), "kitchen".into()],
            ..Default::default()
        };
        let prepared = prepare(&doc, Some(&Lexicon::builtin()), &cfg);
        let Ok(sentences) = sentence_diagrams(&prepared, &cfg) else { continue };
        for s in sentences {
            let mentions = prepared
                .corefs
                .chains
                .iter()
                .flatten()
                .filter(|m| m.sentence == s.nouns[0].sentence_index)
                .filter(|m| !cfg.remove_nouns.contains(&prepared.token(**m).unwrap().word.to_lowercase()))
                .count();
            assert_eq!(s.nouns.len(), mentions);
            let noun_chains: BTreeSet<usize> = s.nouns.iter().map(|n| n.chain_id).collect();
            assert!(s.body.wires().iter().all(|w| noun_chains.contains(&w.chain)));
        }
    }
}

#[test]
fn single_sentence_document_is_its_sentence() {
    for doc in corpus() {
        let prepared = prepare(&doc, None, &PipelineConfig::default());
        let s = sentence_diagrams(&prepared, &PipelineConfig::default()).unwrap();
        if s.len() == 1 {
            assert_eq!(compose_document(&s, &prepared.corefs).unwrap(), sentence_text(&s[0]));
        }
    }
}
