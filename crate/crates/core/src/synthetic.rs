//! Seeded generators for random diagrams, labelled paragraphs and long
//! documents.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::ingest::{CorefMap, Document, Lexicon, Mention};
use crate::pipeline::parse_sentences;
use crate::pregroup::{Base, Cup, PregroupDiagram, PregroupType, SimpleType, Token};

/// A random valid diagram with at most `max_tokens` tokens. Free wires only
/// sit at the top level, every cup joins two different tokens.
pub fn random_diagram<R: Rng>(rng: &mut R, max_tokens: usize) -> PregroupDiagram {
    loop {
        let target = rng.gen_range(1..=max_tokens.max(1) + 2);
        let mut wires: Vec<SimpleType> = Vec::new();
        let mut cups = Vec::new();
        let mut free = 0;
        while wires.len() < target {
            if rng.gen_bool(0.3) || free == 0 {
                let base = *[Base::N, Base::S].choose(rng).expect("bases");
                wires.push(SimpleType::new(base, rng.gen_range(-1..=1)));
                free += 1;
            } else {
                let span = rng.gen_range(1..=3);
                nest(rng, span, &mut wires, &mut cups);
            }
        }
        let n = wires.len();
        // cut[i]: a token boundary follows wire i.
        let mut cut: Vec<bool> = (1..n).map(|_| rng.gen_bool(0.5)).collect();
        cut.push(true);
        for &Cup(a, b) in &cups {
            if !(a..b).any(|i| cut[i]) {
                cut[rng.gen_range(a..b)] = true;
            }
        }
        let mut tokens = Vec::new();
        let mut start = 0;
        for i in 0..n {
            if cut[i] {
                tokens.push(Token::new(
                    format!("w{}", tokens.len()),
                    PregroupType(wires[start..=i].to_vec()),
                ));
                start = i + 1;
            }
        }
        if tokens.len() <= max_tokens {
            cups.sort();
            return PregroupDiagram::new(tokens, cups);
        }
    }
}

/// Appends `pairs` cups, each possibly enclosing more cups.
fn nest<R: Rng>(rng: &mut R, pairs: usize, wires: &mut Vec<SimpleType>, cups: &mut Vec<Cup>) {
    let mut left = pairs;
    while left > 0 {
        let inner = rng.gen_range(0..left);
        let base = *[Base::N, Base::S].choose(rng).expect("bases");
        let z = rng.gen_range(-1..=0);
        let a = wires.len();
        wires.push(SimpleType::new(base, z));
        nest(rng, inner, wires, cups);
        cups.push(Cup(a, wires.len()));
        wires.push(SimpleType::new(base, z + 1));
        left -= inner + 1;
    }
}

const FOOD_VERBS: &[&str] = &["prepares", "cooks", "bakes", "serves"];
const FOOD_ADJS: &[&str] = &["tasty", "delicious", "fresh"];
const FOOD_NOUNS: &[&str] = &["lunch", "dinner", "soup", "bread", "meal"];
const IT_VERBS: &[&str] = &["writes", "debugs", "builds", "tests"];
const IT_ADJS: &[&str] = &["efficient", "complex", "useful"];
const IT_NOUNS: &[&str] = &["program", "code", "software", "application", "algorithm"];
const SHARED_VERBS: &[&str] = &["likes", "needs"];
const SHARED_ADJS: &[&str] = &["good", "new"];

#[derive(Debug, Clone, PartialEq)]
pub struct LabelledText {
    pub text_id: String,
    /// 0 for food, 1 for software.
    pub label: u8,
    pub text: String,
    pub document: Document,
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("non-empty vocabulary")
}

/// Three-sentence paragraphs about cooking (label 0) or programming
/// (label 1), e.g. "Man prepares tasty lunch. He cooks fresh soup. He likes
/// good bread.". Subjects and the shared verbs and adjectives carry no
/// topic signal.
pub fn topic_paragraphs<R: Rng>(rng: &mut R, count: usize, lex: &Lexicon) -> Result<Vec<LabelledText>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let label = (i % 2) as u8;
        let (verbs, adjs, nouns) = if label == 0 {
            (FOOD_VERBS, FOOD_ADJS, FOOD_NOUNS)
        } else {
            (IT_VERBS, IT_ADJS, IT_NOUNS)
        };
        let (subject, pronoun) = *[("Man", "He"), ("Woman", "She")].choose(rng).expect("subjects");
        let mut sentences: Vec<Vec<String>> = Vec::new();
        for k in 0..3 {
            let who = if k == 0 { subject } else { pronoun };
            let verb = if rng.gen_bool(0.2) { pick(rng, SHARED_VERBS) } else { pick(rng, verbs) };
            let adj = if rng.gen_bool(0.7) { pick(rng, adjs) } else { pick(rng, SHARED_ADJS) };
            let noun = pick(rng, nouns);
            if k == 1 {
                sentences.push([who, verb, "it"].map(str::to_string).to_vec());
            } else {
                sentences.push([who, verb, adj, noun].map(str::to_string).to_vec());
            }
        }
        let text = sentences
            .iter()
            .map(|s| format!("{}.", s.join(" ")))
            .collect::<Vec<_>>()
            .join(" ");
        let document = parse_sentences(&sentences, lex)?;
        out.push(LabelledText {
            text_id: format!("t{i:03}"),
            label,
            text,
            document,
        });
    }
    Ok(out)
}

const PEOPLE: &[&str] = &["Alice", "Bob", "Claire", "man", "woman", "chef", "programmer", "friend"];
const THINGS: &[&str] = &["bike", "book", "map", "piano", "soup", "code", "basket", "computer"];
const ACTIONS: &[&str] = &["likes", "loves", "sees", "needs", "wants", "uses", "reads", "plays"];
const MODS: &[&str] = &["blue", "old", "new", "fast", "good", "large"];

/// A long single document built sentence by sentence with the lexicon parser.
/// Chains are by entity, so the same word always shares one wire; this keeps
/// the diagram width bounded by the vocabulary.
pub fn long_document<R: Rng>(rng: &mut R, sentences: usize, lex: &Lexicon) -> Result<Document> {
    let mut tokens: Vec<Vec<String>> = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let mut s = vec![pick(rng, PEOPLE).to_string(), pick(rng, ACTIONS).to_string()];
        match rng.gen_range(0..3) {
            0 => {}
            1 => s.push(pick(rng, MODS).to_string()),
            _ => s.push("the".to_string()),
        }
        s.push(pick(rng, THINGS).to_string());
        tokens.push(s);
    }
    let parsed = parse_sentences(&tokens, lex)?;
    let mut by_word: Vec<(String, Vec<Mention>)> = Vec::new();
    for (si, d) in parsed.sentences.iter().enumerate() {
        for (ti, t) in d.tokens.iter().enumerate() {
            if t.ctype != PregroupType::n() {
                continue;
            }
            let m = Mention::new(si, ti);
            match by_word.iter_mut().find(|(w, _)| *w == t.word) {
                Some((_, ms)) => ms.push(m),
                None => by_word.push((t.word.clone(), vec![m])),
            }
        }
    }
    let mut corefs = CorefMap::new(by_word.into_iter().map(|(_, ms)| ms).collect());
    corefs.normalize();
    let mut doc = Document::new(parsed.sentences, corefs);
    doc.source_text = Some(
        tokens
            .iter()
            .map(|s| format!("{}.", s.join(" ")))
            .collect::<Vec<_>>()
            .join(" "),
    );
    Ok(doc)
}
