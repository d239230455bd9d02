use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Perceptual feature block an attribute belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Color,
    Shape,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Channel::Color, Channel::Shape];

    /// Predicate symbol used for this channel in logical forms.
    pub fn predicate(self) -> &'static str {
        match self {
            Channel::Color => "color",
            Channel::Shape => "shape",
        }
    }

    pub fn from_predicate(name: &str) -> Option<Channel> {
        match name {
            "color" => Some(Channel::Color),
            "shape" => Some(Channel::Shape),
            _ => None,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.predicate())
    }
}

/// Whether a constant came from supervised initialization or was created
/// during joint learning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Bootstrap,
    Induced,
}

/// A logical constant naming an attribute, as it appears inside terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constant {
    pub name: Arc<str>,
    pub channel: Channel,
}

impl Constant {
    pub fn new(name: &str, channel: Channel) -> Self {
        Constant { name: Arc::from(name), channel }
    }

    pub fn color(name: &str) -> Self {
        Constant::new(name, Channel::Color)
    }

    pub fn shape(name: &str) -> Self {
        Constant::new(name, Channel::Shape)
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Registry record for a constant known to a model.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttributeConstant {
    pub name: String,
    pub channel: Channel,
    pub origin: Origin,
}

impl AttributeConstant {
    pub fn constant(&self) -> Constant {
        Constant::new(&self.name, self.channel)
    }
}

/// Simple types over entities and truth values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SemanticType {
    E,
    T,
    Function(Arc<SemanticType>, Arc<SemanticType>),
}

impl SemanticType {
    pub fn func(from: SemanticType, to: SemanticType) -> Self {
        SemanticType::Function(Arc::new(from), Arc::new(to))
    }

    /// `<e,t>`, the type of sets of entities.
    pub fn set() -> Self {
        SemanticType::func(SemanticType::E, SemanticType::T)
    }
}

impl fmt::Display for SemanticType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticType::E => f.write_str("e"),
            SemanticType::T => f.write_str("t"),
            SemanticType::Function(a, b) => write!(f, "<{a},{b}>"),
        }
    }
}

/// Lambda-calculus terms restricted to conjunctions of unary attribute
/// predicates.
///
/// `Pred` holds an optional channel: `None` marks a predicate whose symbol is
/// decided by the constant that eventually fills its attribute slot. Beta
/// reduction resolves it as soon as that slot holds a constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Arc<str>),
    Const(Constant),
    Lam(Arc<str>, SemanticType, Arc<Expr>),
    App(Arc<Expr>, Arc<Expr>),
    /// Conjunction; the empty conjunction is truth.
    And(Vec<Expr>),
    Pred(Option<Channel>, Arc<Expr>, Arc<Expr>),
}

/// Sentence meanings and intermediate parse semantics share one term type.
pub type LogicalForm = Expr;

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Arc::from(name))
    }

    pub fn lam(var: &str, ty: SemanticType, body: Expr) -> Expr {
        Expr::Lam(Arc::from(var), ty, Arc::new(body))
    }

    pub fn app(f: Expr, arg: Expr) -> Expr {
        Expr::App(Arc::new(f), Arc::new(arg))
    }

    pub fn pred(channel: Option<Channel>, entity: Expr, attr: Expr) -> Expr {
        Expr::Pred(channel, Arc::new(entity), Arc::new(attr))
    }

    pub fn truth() -> Expr {
        Expr::And(Vec::new())
    }

    /// `λx. ⋀ pred(x, c)` over the given constants; empty input gives `λx.⊤`.
    pub fn conjunction_of(constants: &[Constant]) -> Expr {
        let mut preds: Vec<Expr> =
            constants.iter().map(|c| Expr::pred(Some(c.channel), Expr::var("x"), Expr::Const(c.clone()))).collect();
        let body = if preds.len() == 1 { preds.pop().unwrap() } else { Expr::And(preds) };
        Expr::lam("x", SemanticType::E, body)
    }

    /// `λx.⊤`, the form denoting every object.
    pub fn universal() -> Expr {
        Expr::lam("x", SemanticType::E, Expr::truth())
    }

    pub fn is_truth(&self) -> bool {
        matches!(self, Expr::And(xs) if xs.is_empty())
    }

    pub(crate) fn occurs_free(&self, name: &str) -> bool {
        match self {
            Expr::Var(v) => &**v == name,
            Expr::Const(_) => false,
            Expr::Lam(v, _, body) => &**v != name && body.occurs_free(name),
            Expr::App(f, a) => f.occurs_free(name) || a.occurs_free(name),
            Expr::And(xs) => xs.iter().any(|x| x.occurs_free(name)),
            Expr::Pred(_, a, b) => a.occurs_free(name) || b.occurs_free(name),
        }
    }
}

impl fmt::Display for Expr {
    /// S-expression syntax. Sentence-level forms print as
    /// `(lam x (and (color x red) (shape x arch)))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => f.write_str(v),
            Expr::Const(c) => f.write_str(&c.name),
            Expr::Lam(v, _, body) => write!(f, "(lam {v} {body})"),
            Expr::App(g, a) => write!(f, "({g} {a})"),
            Expr::And(xs) if xs.is_empty() => f.write_str("true"),
            Expr::And(xs) => {
                f.write_str("(and")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                f.write_str(")")
            }
            Expr::Pred(ch, a, b) => {
                let name = ch.map(Channel::predicate).unwrap_or("attr");
                write!(f, "({name} {a} {b})")
            }
        }
    }
}
