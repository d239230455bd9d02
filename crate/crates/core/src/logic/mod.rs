//! Typed lambda-calculus logical forms: construction, beta reduction,
//! canonical forms and the textual syntax used by dataset and model files.

mod expr;
mod reduce;
mod syntax;

pub use expr::{AttributeConstant, Channel, Constant, Expr, LogicalForm, Origin, SemanticType};
pub use reduce::{attribute_set, beta_reduce, canonicalize, channels_consistent, form_of_attributes, type_of};
pub use syntax::parse_form;

pub(crate) use reduce::{fill_holes, normalize_unchecked};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogicError {
    #[error("type error in `{subterm}`: {message}")]
    Type { subterm: String, message: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("not a sentence-level form: `{0}`")]
    NotSentenceLevel(String),
    #[error("cannot parse logical form `{input}`: {message}")]
    Syntax { input: String, message: String },
}

impl LogicError {
    pub(crate) fn type_mismatch(subterm: &Expr, message: String) -> Self {
        LogicError::Type { subterm: subterm.to_string(), message }
    }
}
