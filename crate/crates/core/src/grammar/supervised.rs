//! Supervised estimation of the parse model from (sentence, logical form)
//! pairs with hidden derivations.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::logic::{self, Constant, Expr};

use super::chart::parse;
use super::lexicon::{Lexeme, Lexicon, MAX_LEXEME_TOKENS};
use super::model::{Feature, ParseModel, SparseVec};
use super::template::Template;

/// Skip weight used while aligning candidate lexemes; derivations with more
/// skipped tokens than necessary carry negligible mass.
const GENLEX_SKIP_PENALTY: f64 = -25.0;
const RETAIN_EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupervisedConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Beam width during training and decoding.
    pub beam: usize,
    /// Beam width while enumerating candidate lexemes.
    pub genlex_beam: usize,
    pub seed: u64,
}

impl Default for SupervisedConfig {
    fn default() -> Self {
        SupervisedConfig { epochs: 10, learning_rate: 0.1, beam: 40, genlex_beam: 400, seed: 0 }
    }
}

/// A sentence paired with its gold logical form.
#[derive(Clone, Debug)]
pub struct Labeled {
    pub tokens: Vec<String>,
    pub form: Expr,
}

impl Labeled {
    pub fn new(tokens: Vec<String>, form: &Expr) -> Self {
        Labeled { tokens, form: logic::canonicalize(form) }
    }
}

/// Candidate lexemes for one example: every span of at most three tokens
/// paired with the empty list and with each constant of the gold form.
pub fn candidate_lexemes(tokens: &[String], constants: &[Constant]) -> Vec<Lexeme> {
    let mut out = BTreeSet::new();
    for i in 0..tokens.len() {
        for len in 1..=MAX_LEXEME_TOKENS.min(tokens.len() - i) {
            let span = &tokens[i..i + len];
            out.insert(Lexeme::from_tokens(span, vec![]));
            for c in constants {
                out.insert(Lexeme::from_tokens(span, vec![c.clone()]));
            }
        }
    }
    out.into_iter().collect()
}

/// Lexemes and null words taking part in some minimum-skip derivation of the
/// example's gold form. `None` when the gold form cannot be derived.
fn align(ex: &Labeled, templates: &[Template], beam: usize) -> Option<(Vec<Lexeme>, Vec<String>)> {
    let constants: Vec<Constant> = logic::attribute_set(&ex.form).ok()?.into_iter().collect();
    let mut lex = Lexicon::new(templates.to_vec());
    let mut model = ParseModel::new();
    for l in candidate_lexemes(&ex.tokens, &constants) {
        model.register(Feature::Lexeme(l.key()));
        lex.add_lexeme(l);
    }
    model.set_weight(Feature::Skip, GENLEX_SKIP_PENALTY);
    for w in &ex.tokens {
        model.register(Feature::Null(w.clone()));
    }
    let beam_out = parse(&ex.tokens, &lex, &model, beam);
    let gold = beam_out.position(&ex.form.to_string())?;
    let feats = &beam_out.parses[gold].features;
    let mut lexemes = Vec::new();
    let mut nulls = Vec::new();
    for &(id, v) in feats.entries() {
        if v <= RETAIN_EPS {
            continue;
        }
        match model.feature(id) {
            Feature::Lexeme(key) => lexemes.push(key.clone()),
            Feature::Null(w) => nulls.push(w.clone()),
            _ => {}
        }
    }
    let lexemes = lex.lexemes().iter().filter(|l| lexemes.contains(&l.key())).map(|l| (**l).clone()).collect();
    Some((lexemes, nulls))
}

/// Builds the lexicon from all examples and registers every feature the
/// parse model can fire on them, with weight 0.
pub fn genlex(data: &[Labeled], templates: &[Template], beam: usize) -> (Lexicon, ParseModel) {
    let mut lex = Lexicon::new(templates.to_vec());
    let mut nulls = BTreeSet::new();
    let mut failed = 0;
    for ex in data {
        match align(ex, templates, beam) {
            Some((lexemes, ns)) => {
                for l in lexemes {
                    lex.add_lexeme(l);
                }
                nulls.extend(ns);
            }
            None => {
                failed += 1;
                log::warn!("no derivation of {} for `{}`", ex.form, ex.tokens.join(" "));
            }
        }
    }
    for w in &nulls {
        lex.add_null_word(w);
    }
    if failed > 0 {
        log::info!("{failed} of {} examples could not be aligned", data.len());
    }
    let mut model = ParseModel::new();
    register_features(&lex, data.iter().map(|e| &e.tokens), &mut model);
    for ex in data {
        if let Ok(cs) = logic::attribute_set(&ex.form) {
            for c in cs {
                model.register(Feature::Conj(c.name.to_string()));
            }
        }
    }
    (lex, model)
}

/// Registers lexeme, template, skip and per-token null features.
pub fn register_features<'a>(
    lex: &Lexicon,
    sentences: impl IntoIterator<Item = &'a Vec<String>>,
    model: &mut ParseModel,
) {
    if lex.is_empty() {
        return;
    }
    for l in lex.lexemes() {
        model.register(Feature::Lexeme(l.key()));
    }
    for t in lex.templates() {
        model.register(Feature::Template(t.id.clone()));
    }
    model.register(Feature::Skip);
    for s in sentences {
        for w in s {
            model.register(Feature::Null(w.clone()));
        }
    }
}

/// log P(z | x) and its gradient for one example. `None` when the gold form
/// is not in the beam.
pub fn example_gradient(ex: &Labeled, lex: &Lexicon, model: &ParseModel, beam: usize) -> Option<(f64, SparseVec)> {
    let out = parse(&ex.tokens, lex, model, beam);
    let gold = out.position(&ex.form.to_string())?;
    let ll = out.parses[gold].score - out.log_normalizer();
    let grad = out.parses[gold].features.combine(1.0, &out.expected_features(), -1.0);
    Some((ll, grad))
}

/// Σ_i log Σ_{y yielding z_i} P(y, z_i | x_i) over examples whose gold form
/// is in the beam, together with its gradient and the number skipped.
pub fn log_likelihood(data: &[Labeled], lex: &Lexicon, model: &ParseModel, beam: usize) -> (f64, SparseVec, usize) {
    let mut ll = 0.0;
    let mut grad = SparseVec::new();
    let mut skipped = 0;
    for ex in data {
        match example_gradient(ex, lex, model, beam) {
            Some((l, g)) => {
                ll += l;
                grad = grad.add(&g);
            }
            None => skipped += 1,
        }
    }
    (ll, grad, skipped)
}

/// Learns a lexicon and parse weights from labeled sentences.
pub fn train_supervised(data: &[Labeled], templates: &[Template], config: &SupervisedConfig) -> (Lexicon, ParseModel) {
    if data.is_empty() {
        return (Lexicon::new(templates.to_vec()), ParseModel::new());
    }
    let (lex, mut model) = genlex(data, templates, config.genlex_beam);
    log::info!("genlex: {} lexemes, {} null words", lex.len(), lex.null_words().len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let (mut ll, mut skipped) = (0.0, 0);
        for &i in &order {
            match example_gradient(&data[i], &lex, &model, config.beam) {
                Some((l, g)) => {
                    ll += l;
                    model.apply(&g, config.learning_rate);
                }
                None => {
                    skipped += 1;
                    log::debug!("gold form outside beam for `{}`", data[i].tokens.join(" "));
                }
            }
        }
        log::info!("supervised epoch {epoch}: log-likelihood {ll:.3}, {skipped} skipped");
    }
    (lex, model)
}

/// Fraction of examples whose top-1 parse is the gold form.
pub fn parse_accuracy(data: &[Labeled], lex: &Lexicon, model: &ParseModel, beam: usize) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let hits =
        data.iter().filter(|ex| parse(&ex.tokens, lex, model, beam).top().is_some_and(|p| *p.form == ex.form)).count();
    hits as f64 / data.len() as f64
}
