use std::collections::HashMap;
use std::sync::Arc;

use crate::logic::{self, Channel, Expr, SemanticType};

use super::category::Category;
use super::lexicon::{Lexeme, LexicalItem};
use super::model::Feature;

/// A lexical template: a category plus a logical-form skeleton whose free
/// variables `v1..vm` are filled by a lexeme's constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Template {
    pub id: String,
    pub category: Category,
    pub skeleton: Expr,
    /// Optional channel restriction for each hole, in order.
    pub holes: Vec<Option<Channel>>,
}

impl Template {
    pub fn new(id: &str, category: &str, skeleton: Expr, holes: Vec<Option<Channel>>) -> Self {
        Template { id: id.to_string(), category: category.parse().expect("template category"), skeleton, holes }
    }

    pub fn arity(&self) -> usize {
        self.holes.len()
    }

    pub fn accepts(&self, lexeme: &Lexeme) -> bool {
        lexeme.constants.len() == self.holes.len()
            && lexeme.constants.iter().zip(&self.holes).all(|(c, hole)| hole.is_none_or(|ch| ch == c.channel))
    }
}

fn hole(i: usize) -> String {
    format!("v{}", i + 1)
}

/// Pairs a lexeme with a template. Returns `None` when the arity or a hole's
/// channel restriction does not match.
pub fn instantiate(lexeme: &Arc<Lexeme>, template: &Arc<Template>) -> Option<LexicalItem> {
    if !template.accepts(lexeme) {
        return None;
    }
    let names: Vec<String> = (0..template.arity()).map(hole).collect();
    let fills: HashMap<&str, Expr> =
        names.iter().zip(&lexeme.constants).map(|(n, c)| (n.as_str(), Expr::Const(c.clone()))).collect();
    let filled = logic::fill_holes(&template.skeleton, &fills);
    let form = logic::beta_reduce(&filled).ok()?;
    if logic::type_of(&form).ok()? != template.category.semantic_type() {
        return None;
    }
    let form = logic::canonicalize(&form);
    Some(LexicalItem {
        words: lexeme.words.clone(),
        category: template.category.clone(),
        text: Arc::from(form.to_string()),
        form: Arc::new(form),
        lexeme: lexeme.clone(),
        template: template.clone(),
        features: [Feature::Lexeme(lexeme.key()), Feature::Template(template.id.clone())],
    })
}

fn set() -> SemanticType {
    SemanticType::set()
}

fn e() -> SemanticType {
    SemanticType::E
}

fn open_pred(entity: Expr, attr: Expr) -> Expr {
    Expr::pred(None, entity, attr)
}

/// The fixed template inventory: the lexical item shapes of a standard
/// attribute-description derivation plus an attributive-adjective modifier.
pub fn default_templates() -> Vec<Template> {
    let f_of_x = || Expr::app(Expr::var("f"), Expr::var("x"));
    vec![
        // this ⊢ N/N : λf.f
        Template::new("mod_id", "N/N", Expr::lam("f", set(), Expr::var("f")), vec![]),
        // red ⊢ N : λx.color(x, red)
        Template::new("attr_n", "N", Expr::lam("x", e(), open_pred(Expr::var("x"), Expr::var("v1"))), vec![None]),
        // block ⊢ N\N : λf.f
        Template::new("postmod_id", "N\\N", Expr::lam("f", set(), Expr::var("f")), vec![]),
        // is ⊢ S\N/N : λf.λg.λx.f(x) ∧ g(x)
        Template::new(
            "copula",
            "S\\N/N",
            Expr::lam(
                "f",
                set(),
                Expr::lam(
                    "g",
                    set(),
                    Expr::lam("x", e(), Expr::And(vec![f_of_x(), Expr::app(Expr::var("g"), Expr::var("x"))])),
                ),
            ),
            vec![],
        ),
        // shape ⊢ N/NP : λy.λx.P(x, y)
        Template::new(
            "attr_of",
            "N/NP",
            Expr::lam("y", e(), Expr::lam("x", e(), open_pred(Expr::var("x"), Expr::var("y")))),
            vec![],
        ),
        // of a ⊢ NP/NP : λx.x
        Template::new("np_id", "NP/NP", Expr::lam("x", e(), Expr::var("x")), vec![]),
        // half-pipe ⊢ NP : arch
        Template::new("np_const", "NP", Expr::var("v1"), vec![None]),
        // red ⊢ N/N : λf.λx.f(x) ∧ color(x, red)
        Template::new(
            "attr_adj",
            "N/N",
            Expr::lam(
                "f",
                set(),
                Expr::lam("x", e(), Expr::And(vec![f_of_x(), open_pred(Expr::var("x"), Expr::var("v1"))])),
            ),
            vec![None],
        ),
    ]
}
