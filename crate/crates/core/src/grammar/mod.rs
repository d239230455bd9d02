//! Factored CCG lexicon, log-linear parse model and chart parser.

mod category;
mod chart;
mod induce;
mod lexicon;
mod model;
mod supervised;
mod template;

pub use category::Category;
pub use chart::{parse, Derivation, Leaf, Node, Parse, ParseBeam, Rule, MAX_SENTENCE_TOKENS};
pub use induce::{induce_new_lexemes, unknown_words};
pub use lexicon::{normalize_token, tokenize, Lexeme, LexicalItem, Lexicon, MAX_LEXEME_TOKENS};
pub use model::{Feature, FeatureId, ParseModel, SparseVec};
pub use supervised::{
    candidate_lexemes, example_gradient, genlex, log_likelihood, parse_accuracy, register_features, train_supervised,
    Labeled, SupervisedConfig,
};
pub use template::{default_templates, instantiate, Template};

pub(crate) use chart::log_add_exp;


#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrammarError {
    #[error("malformed category `{0}`")]
    BadCategory(String),
    #[error("lexicon line {line}: {message}")]
    BadLexicon { line: usize, message: String },
    #[error("malformed feature name `{0}`")]
    BadFeature(String),
}
