//! Nearest-antecedent pronoun resolution.

use log::warn;

use super::{CorefMap, Lexicon, Mention};
use crate::pregroup::{PregroupDiagram, PregroupType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnresolvedPronoun {
    pub mention: Mention,
    pub word: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Resolution {
    pub corefs: CorefMap,
    pub warnings: Vec<UnresolvedPronoun>,
}

/// Every noun-typed, noun-tagged token starts its own chain; each pronoun
/// joins the chain of the closest earlier noun whose features agree.
/// Possessive uses (a pronoun whose chosen type is not `n`) are not mentions.
pub fn resolve_pronouns(sentences: &[PregroupDiagram], lex: &Lexicon) -> Resolution {
    let n = PregroupType::n();
    let mut res = Resolution::default();
    // (mention, chain id, word)
    let mut nouns: Vec<(Mention, usize, &str)> = Vec::new();
    for (si, d) in sentences.iter().enumerate() {
        for (ti, tok) in d.tokens.iter().enumerate() {
            if tok.ctype != n {
                continue;
            }
            let m = Mention::new(si, ti);
            if lex.is_pronoun(&tok.word) {
                let feats = lex.features(&tok.word);
                let antecedent = nouns
                    .iter()
                    .rev()
                    .find(|(_, _, w)| lex.features(w).agrees(&feats));
                match antecedent {
                    Some(&(_, chain, _)) => res.corefs.chains[chain].push(m),
                    None => {
                        warn!("no antecedent for {:?} at ({si}, {ti})", tok.word);
                        res.warnings.push(UnresolvedPronoun {
                            mention: m,
                            word: tok.word.clone(),
                        });
                        res.corefs.chains.push(vec![m]);
                    }
                }
            } else if lex.noun_tag(&tok.word) == Some(true) {
                nouns.push((m, res.corefs.chains.len(), &tok.word));
                res.corefs.chains.push(vec![m]);
            }
        }
    }
    res.corefs.normalize();
    res
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::lexicon_parse;

    fn parse(lex: &Lexicon, text: &str) -> Vec<PregroupDiagram> {
        text.split('.')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| lexicon_parse(&s.split_whitespace().collect::<Vec<_>>(), lex).unwrap())
            .collect()
    }

    #[test]
    fn she_joins_alice() {
        let lex = Lexicon::builtin();
        let doc = parse(&lex, "Alice found a map. She followed the clues.");
        let res = resolve_pronouns(&doc, &lex);
        assert!(res.warnings.is_empty());
        let alice = res.corefs.chain_of(Mention::new(0, 0)).unwrap();
        assert_eq!(res.corefs.chain_of(Mention::new(1, 0)), Some(alice));
    }

    #[test]
    fn no_pronouns_means_singletons() {
        let lex = Lexicon::builtin();
        let doc = parse(&lex, "Alice reads books. Bob loves music.");
        let res = resolve_pronouns(&doc, &lex);
        assert_eq!(res.corefs.len(), 4);
        assert!(res.corefs.chains.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn it_takes_the_nearest_neuter_noun() {
        let lex = Lexicon::builtin();
        let doc = parse(&lex, "Alice found a map. She followed the clues. It led to treasure.");
        let res = resolve_pronouns(&doc, &lex);
        let clues = res.corefs.chain_of(Mention::new(1, 3)).unwrap();
        assert_eq!(res.corefs.chain_of(Mention::new(2, 0)), Some(clues));
    }

    #[test]
    fn unresolved_pronoun_is_reported() {
        let lex = Lexicon::builtin();
        let doc = parse(&lex, "She reads books.");
        let res = resolve_pronouns(&doc, &lex);
        assert_eq!(res.warnings.len(), 1);
        assert_eq!(res.warnings[0].word, "She");
        assert_eq!(res.corefs.len(), 2);
    }

    #[test]
    fn chains_partition_nouns_and_pronouns() {
        let lex = Lexicon::builtin();
        let doc = parse(
            &lex,
            "Alice bought a blue bike. It has a large basket. She puts her groceries in it.",
        );
        let res = resolve_pronouns(&doc, &lex);
        let mut all: Vec<Mention> = res.corefs.chains.iter().flatten().copied().collect();
        let count = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), count);
        // Alice, bike, It, basket, She, groceries, it; possessive her excluded.
        assert_eq!(count, 7);
    }
}
