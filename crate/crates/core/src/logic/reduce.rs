use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::expr::{Constant, Expr, SemanticType};
use super::LogicError;

type Env = Vec<(Arc<str>, SemanticType)>;

/// Infers the type of `e`, failing on the first ill-typed subterm.
pub fn type_of(e: &Expr) -> Result<SemanticType, LogicError> {
    let mut env = Env::new();
    infer(e, &mut env)
}

fn infer(e: &Expr, env: &mut Env) -> Result<SemanticType, LogicError> {
    match e {
        Expr::Var(v) => env
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| LogicError::UnboundVariable(v.to_string())),
        Expr::Const(_) => Ok(SemanticType::E),
        Expr::Lam(v, ty, body) => {
            env.push((v.clone(), ty.clone()));
            let out = infer(body, env);
            env.pop();
            Ok(SemanticType::func(ty.clone(), out?))
        }
        Expr::App(f, a) => {
            let ft = infer(f, env)?;
            let at = infer(a, env)?;
            match ft {
                SemanticType::Function(from, to) if *from == at => Ok((*to).clone()),
                SemanticType::Function(from, _) => {
                    Err(LogicError::type_mismatch(e, format!("argument of type {at} where {from} expected")))
                }
                other => Err(LogicError::type_mismatch(e, format!("applying a non-function of type {other}"))),
            }
        }
        Expr::And(xs) => {
            for x in xs {
                let t = infer(x, env)?;
                if t != SemanticType::T {
                    return Err(LogicError::type_mismatch(x, format!("conjunct of type {t}")));
                }
            }
            Ok(SemanticType::T)
        }
        Expr::Pred(ch, a, b) => {
            for arg in [a, b] {
                let t = infer(arg, env)?;
                if t != SemanticType::E {
                    return Err(LogicError::type_mismatch(arg, format!("predicate argument of type {t}")));
                }
            }
            if let (Some(ch), Expr::Const(c)) = (ch, &**b) {
                if c.channel != *ch {
                    return Err(LogicError::type_mismatch(
                        e,
                        format!("{} predicate applied to {} constant {}", ch, c.channel, c.name),
                    ));
                }
            }
            Ok(SemanticType::T)
        }
    }
}

/// Type-checks `e` and returns its beta-normal form with conjunctions
/// flattened and predicate channels resolved.
pub fn beta_reduce(e: &Expr) -> Result<Expr, LogicError> {
    type_of(e)?;
    let mut fresh = Fresh::default();
    Ok(normalize(e, &mut fresh))
}

/// Beta-normalizes an expression already known to be well typed.
pub(crate) fn normalize_unchecked(e: &Expr) -> Expr {
    let mut fresh = Fresh::default();
    normalize(e, &mut fresh)
}

#[derive(Default)]
pub(crate) struct Fresh(usize);

impl Fresh {
    fn next(&mut self, avoid: &[&Expr]) -> Arc<str> {
        loop {
            self.0 += 1;
            let name = format!("_{}", self.0);
            if avoid.iter().all(|e| !e.occurs_free(&name)) {
                return Arc::from(name);
            }
        }
    }
}

fn normalize(e: &Expr, fresh: &mut Fresh) -> Expr {
    match e {
        Expr::Var(_) | Expr::Const(_) => e.clone(),
        Expr::Lam(v, t, body) => Expr::Lam(v.clone(), t.clone(), Arc::new(normalize(body, fresh))),
        Expr::App(f, a) => {
            let f = normalize(f, fresh);
            let a = normalize(a, fresh);
            match f {
                Expr::Lam(v, _, body) => {
                    let substituted = substitute(&body, &v, &a, fresh);
                    normalize(&substituted, fresh)
                }
                f => Expr::App(Arc::new(f), Arc::new(a)),
            }
        }
        Expr::And(xs) => {
            let mut flat = Vec::with_capacity(xs.len());
            for x in xs {
                match normalize(x, fresh) {
                    Expr::And(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            if flat.len() == 1 {
                flat.pop().unwrap()
            } else {
                Expr::And(flat)
            }
        }
        Expr::Pred(ch, a, b) => {
            let a = normalize(a, fresh);
            let b = normalize(b, fresh);
            let ch = match (&b, ch) {
                (Expr::Const(c), None) => Some(c.channel),
                (_, ch) => *ch,
            };
            Expr::Pred(ch, Arc::new(a), Arc::new(b))
        }
    }
}

/// Capture-avoiding substitution of `value` for free occurrences of `var`.
pub(crate) fn substitute(e: &Expr, var: &str, value: &Expr, fresh: &mut Fresh) -> Expr {
    match e {
        Expr::Var(v) if &**v == var => value.clone(),
        Expr::Var(_) | Expr::Const(_) => e.clone(),
        Expr::Lam(v, _, _) if &**v == var => e.clone(),
        Expr::Lam(v, t, body) => {
            if value.occurs_free(v) && body.occurs_free(var) {
                let renamed = fresh.next(&[body, value]);
                let body = substitute(body, v, &Expr::Var(renamed.clone()), fresh);
                Expr::Lam(renamed, t.clone(), Arc::new(substitute(&body, var, value, fresh)))
            } else {
                Expr::Lam(v.clone(), t.clone(), Arc::new(substitute(body, var, value, fresh)))
            }
        }
        Expr::App(f, a) => {
            Expr::App(Arc::new(substitute(f, var, value, fresh)), Arc::new(substitute(a, var, value, fresh)))
        }
        Expr::And(xs) => Expr::And(xs.iter().map(|x| substitute(x, var, value, fresh)).collect()),
        Expr::Pred(ch, a, b) => {
            Expr::Pred(*ch, Arc::new(substitute(a, var, value, fresh)), Arc::new(substitute(b, var, value, fresh)))
        }
    }
}

/// Substitutes constants for free variables (template holes) without
/// renormalizing.
pub(crate) fn fill_holes(e: &Expr, holes: &HashMap<&str, Expr>) -> Expr {
    let mut fresh = Fresh::default();
    let mut out = e.clone();
    for (name, value) in holes {
        out = substitute(&out, name, value, &mut fresh);
    }
    out
}

const BOUND_NAMES: [&str; 5] = ["x", "y", "z", "w", "u"];

fn bound_name(depth: usize) -> Arc<str> {
    match BOUND_NAMES.get(depth) {
        Some(n) => Arc::from(*n),
        None => Arc::from(format!("x{depth}")),
    }
}

/// Canonical representative of a beta-normal form: bound variables renamed by
/// binding depth (`x`, `y`, `z`, ...), conjuncts sorted by their printed text
/// and deduplicated, singleton conjunctions unwrapped.
pub fn canonicalize(e: &Expr) -> Expr {
    let mut scope: Vec<(Arc<str>, Arc<str>)> = Vec::new();
    canon(e, &mut scope)
}

fn canon(e: &Expr, scope: &mut Vec<(Arc<str>, Arc<str>)>) -> Expr {
    match e {
        Expr::Var(v) => match scope.iter().rev().find(|(old, _)| old == v) {
            Some((_, new)) => Expr::Var(new.clone()),
            None => e.clone(),
        },
        Expr::Const(_) => e.clone(),
        Expr::Lam(v, t, body) => {
            let name = bound_name(scope.len());
            scope.push((v.clone(), name.clone()));
            let body = canon(body, scope);
            scope.pop();
            Expr::Lam(name, t.clone(), Arc::new(body))
        }
        Expr::App(f, a) => Expr::App(Arc::new(canon(f, scope)), Arc::new(canon(a, scope))),
        Expr::And(xs) => {
            let mut keyed: Vec<(String, Expr)> = Vec::with_capacity(xs.len());
            for x in xs {
                match canon(x, scope) {
                    Expr::And(inner) => keyed.extend(inner.into_iter().map(|i| (i.to_string(), i))),
                    other => keyed.push((other.to_string(), other)),
                }
            }
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            keyed.dedup_by(|a, b| a.0 == b.0);
            if keyed.len() == 1 {
                keyed.pop().unwrap().1
            } else {
                Expr::And(keyed.into_iter().map(|(_, x)| x).collect())
            }
        }
        Expr::Pred(ch, a, b) => Expr::Pred(*ch, Arc::new(canon(a, scope)), Arc::new(canon(b, scope))),
    }
}

/// The set of attribute constants a sentence-level form conjoins. The
/// universal form `λx.⊤` yields the empty set.
pub fn attribute_set(z: &Expr) -> Result<BTreeSet<Constant>, LogicError> {
    let shape_err = || LogicError::NotSentenceLevel(z.to_string());
    let Expr::Lam(v, SemanticType::E, body) = z else {
        return Err(shape_err());
    };
    let conjuncts: &[Expr] = match &**body {
        Expr::And(xs) => xs,
        single => std::slice::from_ref(single),
    };
    let mut out = BTreeSet::new();
    for c in conjuncts {
        match c {
            Expr::Pred(Some(ch), entity, attr) => match (&**entity, &**attr) {
                (Expr::Var(x), Expr::Const(k)) if x == v && k.channel == *ch => {
                    out.insert(k.clone());
                }
                _ => return Err(shape_err()),
            },
            _ => return Err(shape_err()),
        }
    }
    Ok(out)
}

/// Builds the canonical sentence-level form for a set of constants.
pub fn form_of_attributes<'a>(constants: impl IntoIterator<Item = &'a Constant>) -> Expr {
    let cs: Vec<Constant> = constants.into_iter().cloned().collect();
    canonicalize(&Expr::conjunction_of(&cs))
}

/// True when the channel of every resolved predicate agrees with its constant.
pub fn channels_consistent(e: &Expr) -> bool {
    match e {
        Expr::Pred(Some(ch), a, b) => {
            let ok = match &**b {
                Expr::Const(c) => c.channel == *ch,
                _ => true,
            };
            ok && channels_consistent(a) && channels_consistent(b)
        }
        Expr::Pred(None, a, b) => channels_consistent(a) && channels_consistent(b),
        Expr::Lam(_, _, body) => channels_consistent(body),
        Expr::App(f, a) => channels_consistent(f) && channels_consistent(a),
        Expr::And(xs) => xs.iter().all(channels_consistent),
        Expr::Var(_) | Expr::Const(_) => true,
    }
}
