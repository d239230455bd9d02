use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::logic::SemanticType;

use super::GrammarError;

/// CCG syntactic category. Slash categories are printed left-associatively,
/// so `S\N/N` is `(S\N)/N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    N,
    NP,
    S,
    /// `result/arg`: takes its argument on the right.
    Forward(Arc<Category>, Arc<Category>),
    /// `result\arg`: takes its argument on the left.
    Backward(Arc<Category>, Arc<Category>),
}

impl Category {
    pub fn forward(result: Category, arg: Category) -> Self {
        Category::Forward(Arc::new(result), Arc::new(arg))
    }

    pub fn backward(result: Category, arg: Category) -> Self {
        Category::Backward(Arc::new(result), Arc::new(arg))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Category::N | Category::NP | Category::S)
    }

    /// Categories a complete sentence analysis may have.
    pub fn is_root(&self) -> bool {
        matches!(self, Category::N | Category::S)
    }

    /// N and S denote sets of entities, NP denotes an entity.
    pub fn semantic_type(&self) -> SemanticType {
        match self {
            Category::N | Category::S => SemanticType::set(),
            Category::NP => SemanticType::E,
            Category::Forward(res, arg) | Category::Backward(res, arg) => {
                SemanticType::func(arg.semantic_type(), res.semantic_type())
            }
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::N => f.write_str("N"),
            Category::NP => f.write_str("NP"),
            Category::S => f.write_str("S"),
            Category::Forward(res, arg) | Category::Backward(res, arg) => {
                let slash = if matches!(self, Category::Forward(..)) { '/' } else { '\\' };
                write!(f, "{res}{slash}")?;
                if arg.is_atomic() {
                    write!(f, "{arg}")
                } else {
                    write!(f, "({arg})")
                }
            }
        }
    }
}

impl FromStr for Category {
    type Err = GrammarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let cat = parse_seq(&chars, &mut pos).ok_or_else(|| GrammarError::BadCategory(s.to_string()))?;
        if pos != chars.len() {
            return Err(GrammarError::BadCategory(s.to_string()));
        }
        Ok(cat)
    }
}

fn parse_seq(chars: &[char], pos: &mut usize) -> Option<Category> {
    let mut left = parse_atom(chars, pos)?;
    while let Some(&c) = chars.get(*pos) {
        match c {
            '/' | '\\' => {
                *pos += 1;
                let arg = parse_atom(chars, pos)?;
                left = if c == '/' { Category::forward(left, arg) } else { Category::backward(left, arg) };
            }
            _ => break,
        }
    }
    Some(left)
}

fn parse_atom(chars: &[char], pos: &mut usize) -> Option<Category> {
    match chars.get(*pos)? {
        '(' => {
            *pos += 1;
            let inner = parse_seq(chars, pos)?;
            if chars.get(*pos) != Some(&')') {
                return None;
            }
            *pos += 1;
            Some(inner)
        }
        'N' if chars.get(*pos + 1) == Some(&'P') => {
            *pos += 2;
            Some(Category::NP)
        }
        'N' => {
            *pos += 1;
            Some(Category::N)
        }
        'S' => {
            *pos += 1;
            Some(Category::S)
        }
        _ => None,
    }
}
