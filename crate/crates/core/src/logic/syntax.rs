use std::sync::Arc;

use super::expr::{Channel, Constant, Expr, SemanticType};
use super::LogicError;

/// Parses the textual sentence-level syntax:
///
/// ```text
/// form := "(lam " var " " body ")"
/// body := "(and" {" " pred}+ ")" | pred | "true"
/// pred := "(" ("color"|"shape") " " var " " constant ")"
/// ```
pub fn parse_form(text: &str) -> Result<Expr, LogicError> {
    let tokens = tokenize(text);
    let mut p = Parser { tokens: &tokens, pos: 0, text };
    let form = p.form()?;
    if p.pos != tokens.len() {
        return Err(p.err("trailing input"));
    }
    Ok(form)
}

fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' | ')' => {
                if let Some(s) = start.take() {
                    out.push(&text[s..i]);
                }
                out.push(&text[i..i + 1]);
            }
            c if c.is_whitespace() => {
                if let Some(s) = start.take() {
                    out.push(&text[s..i]);
                }
            }
            _ => {
                if start.is_none() {
                    start = Some(i);
                }
            }
        }
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

struct Parser<'a> {
    tokens: &'a [&'a str],
    pos: usize,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> LogicError {
        LogicError::Syntax { input: self.text.to_string(), message: format!("{msg} at token {}", self.pos) }
    }

    fn next(&mut self) -> Option<&'a str> {
        let t = self.tokens.get(self.pos).copied();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &str) -> Result<(), LogicError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => Err(self.err(&format!("expected `{want}`"))),
        }
    }

    fn ident(&mut self) -> Result<&'a str, LogicError> {
        match self.next() {
            Some(t) if t != "(" && t != ")" && t.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') => Ok(t),
            _ => Err(self.err("expected identifier")),
        }
    }

    fn form(&mut self) -> Result<Expr, LogicError> {
        self.expect("(")?;
        self.expect("lam")?;
        let var = self.ident()?;
        let body = self.body(var)?;
        self.expect(")")?;
        Ok(Expr::Lam(Arc::from(var), SemanticType::E, Arc::new(body)))
    }

    fn body(&mut self, var: &str) -> Result<Expr, LogicError> {
        match self.tokens.get(self.pos).copied() {
            Some("true") => {
                self.pos += 1;
                Ok(Expr::truth())
            }
            Some("(") if self.tokens.get(self.pos + 1) == Some(&"and") => {
                self.pos += 2;
                let mut preds = Vec::new();
                while self.tokens.get(self.pos) == Some(&"(") {
                    preds.push(self.pred(var)?);
                }
                if preds.is_empty() {
                    return Err(self.err("empty conjunction"));
                }
                self.expect(")")?;
                Ok(Expr::And(preds))
            }
            Some("(") => self.pred(var),
            _ => Err(self.err("expected body")),
        }
    }

    fn pred(&mut self, var: &str) -> Result<Expr, LogicError> {
        self.expect("(")?;
        let name = self.ident()?;
        let channel = Channel::from_predicate(name).ok_or_else(|| self.err("unknown predicate"))?;
        let v = self.ident()?;
        if v != var {
            return Err(self.err("predicate over an unbound variable"));
        }
        let c = self.ident()?;
        self.expect(")")?;
        Ok(Expr::pred(Some(channel), Expr::var(v), Expr::Const(Constant::new(c, channel))))
    }
}
