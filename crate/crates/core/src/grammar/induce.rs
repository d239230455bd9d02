use std::collections::BTreeSet;

use crate::logic::Constant;

use super::lexicon::{Lexeme, Lexicon};
use super::model::{Feature, ParseModel};

/// Words of `sentences` unknown to `lexicon`, in first-seen order.
pub fn unknown_words(sentences: &[Vec<String>], lexicon: &Lexicon) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for w in sentences.iter().flatten() {
        if !lexicon.is_known(w) && seen.insert(w.clone()) {
            out.push(w.clone());
        }
    }
    out
}

/// Adds, for every unknown word, one lexeme per new constant, one per
/// constant list already used in the lexicon, and a null entry. Every
/// feature fired by the additions is registered in `model` with weight 0.
/// Returns the extended lexicon and the words that were added.
pub fn induce_new_lexemes(
    sentences: &[Vec<String>],
    lexicon: &Lexicon,
    new_constants: &[Constant],
    model: &mut ParseModel,
) -> (Lexicon, Vec<String>) {
    let words = unknown_words(sentences, lexicon);
    let mut out = lexicon.clone();
    if words.is_empty() {
        return (out, words);
    }
    let existing = lexicon.constant_lists();
    for w in &words {
        let span = [w.clone()];
        let lists = new_constants.iter().map(|c| vec![c.clone()]).chain(existing.iter().cloned());
        for cs in lists {
            let lexeme = Lexeme::from_tokens(&span, cs);
            let key = lexeme.key();
            if out.add_lexeme(lexeme) {
                model.set_weight(Feature::Lexeme(key), 0.0);
            }
        }
        out.add_null_word(w);
        model.set_weight(Feature::Null(w.clone()), 0.0);
    }
    for t in out.templates() {
        model.register(Feature::Template(t.id.clone()));
    }
    model.register(Feature::Skip);
    for c in new_constants {
        model.set_weight(Feature::Conj(c.name.to_string()), 0.0);
    }
    (out, words)
}
