//! CKY chart parsing with per-cell beams over packed derivations.
//!
//! A cell `[i, j)` holds constituents whose first token `i` is covered by a
//! lexical item; tokens skipped after the last item of a constituent are
//! attached to the leaf they follow. Every derivation (choice of skipped
//! tokens plus a binary tree over the remaining items) therefore has exactly
//! one decomposition in the chart.
//!
//! Entries are keyed by `(category, canonical form)`. Derivations sharing a
//! key are packed: an entry keeps the log-sum-exp of their scores, their
//! expected feature counts, their number and the single best derivation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::logic::{self, Constant, Expr};

use super::category::Category;
use super::lexicon::{LexicalItem, MAX_LEXEME_TOKENS};
use super::model::{Feature, ParseModel, SparseVec};
use super::Lexicon;

/// Sentences longer than this are reported as parse failures.
pub const MAX_SENTENCE_TOKENS: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Forward,
    Backward,
}

/// A node of a derivation tree.
#[derive(Debug)]
pub enum Node {
    /// A lexical item starting at `start`, followed by `trailing_skips`
    /// skipped tokens.
    Leaf {
        start: usize,
        item: Arc<LexicalItem>,
        trailing_skips: usize,
    },
    Apply {
        rule: Rule,
        category: Category,
        form: Arc<Expr>,
        left: Arc<Node>,
        right: Arc<Node>,
    },
}

impl Node {
    pub fn category(&self) -> &Category {
        match self {
            Node::Leaf { item, .. } => &item.category,
            Node::Apply { category, .. } => category,
        }
    }

    pub fn form(&self) -> &Arc<Expr> {
        match self {
            Node::Leaf { item, .. } => &item.form,
            Node::Apply { form, .. } => form,
        }
    }

    fn collect_leaves(&self, out: &mut Vec<Leaf>) {
        match self {
            Node::Leaf { start, item, trailing_skips } => {
                let end = start + item.words.len();
                out.push(Leaf { start: *start, end, item: Some(item.clone()) });
                for t in end..end + trailing_skips {
                    out.push(Leaf { start: t, end: t + 1, item: None });
                }
            }
            Node::Apply { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    fn verify(&self) -> Result<(), String> {
        if let Node::Apply { rule, category, form, left, right } = self {
            left.verify()?;
            right.verify()?;
            let (functor, arg) = match rule {
                Rule::Forward => (left, right),
                Rule::Backward => (right, left),
            };
            let (res, want_arg) = match (rule, functor.category()) {
                (Rule::Forward, Category::Forward(r, a)) | (Rule::Backward, Category::Backward(r, a)) => (r, a),
                _ => return Err(format!("{rule:?} application with functor {}", functor.category())),
            };
            if **want_arg != *arg.category() || **res != *category {
                return Err(format!("category mismatch at {category}"));
            }
            let applied = Expr::app((**functor.form()).clone(), (**arg.form()).clone());
            let reduced = logic::beta_reduce(&applied).map_err(|e| e.to_string())?;
            if logic::canonicalize(&reduced) != **form {
                return Err(format!("stored form {form} differs from recomputed {reduced}"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Leaf { item, trailing_skips, .. } => {
                write!(f, "[{} {}:{}]", item.words.join("_"), item.category, item.template.id)?;
                if *trailing_skips > 0 {
                    write!(f, "+{trailing_skips}")?;
                }
                Ok(())
            }
            Node::Apply { rule, left, right, .. } => {
                let r = if *rule == Rule::Forward { '>' } else { '<' };
                write!(f, "({r} {left} {right})")
            }
        }
    }
}

/// One token span of a derivation: a lexical item, or a skipped token when
/// `item` is `None`.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub start: usize,
    pub end: usize,
    pub item: Option<Arc<LexicalItem>>,
}

/// A complete analysis of a sentence. `root` is `None` when every token is
/// skipped, which yields the universal form.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub tokens: usize,
    pub leading_skips: usize,
    pub root: Option<Arc<Node>>,
}

impl Derivation {
    pub fn all_skipped(tokens: usize) -> Self {
        Derivation { tokens, leading_skips: tokens, root: None }
    }

    /// Leaves in sentence order; their spans partition the tokens.
    pub fn leaves(&self) -> Vec<Leaf> {
        let mut out: Vec<Leaf> = (0..self.leading_skips).map(|t| Leaf { start: t, end: t + 1, item: None }).collect();
        if let Some(root) = &self.root {
            root.collect_leaves(&mut out);
        }
        out
    }

    pub fn category(&self) -> Category {
        self.root.as_ref().map(|r| r.category().clone()).unwrap_or(Category::N)
    }

    /// Root logical form.
    pub fn form(&self) -> Expr {
        match &self.root {
            Some(r) => (**r.form()).clone(),
            None => Expr::universal(),
        }
    }

    /// Feature vector φ(x, y, z) of this derivation.
    pub fn features(&self, tokens: &[String]) -> Vec<(Feature, f64)> {
        let mut out = Vec::new();
        for leaf in self.leaves() {
            match &leaf.item {
                Some(item) => {
                    out.extend(item.features.iter().map(|f| (f.clone(), 1.0)));
                }
                None => {
                    out.push((Feature::Skip, 1.0));
                    out.push((Feature::Null(tokens[leaf.start].clone()), 1.0));
                }
            }
        }
        if let Ok(attrs) = logic::attribute_set(&self.form()) {
            out.extend(attrs.iter().map(|c| (Feature::Conj(c.name.to_string()), 1.0)));
        }
        out
    }

    /// Θ·φ(x, y, z).
    pub fn score(&self, tokens: &[String], model: &ParseModel) -> f64 {
        self.features(tokens).iter().map(|(f, v)| model.weight(f) * v).sum()
    }

    /// Recomputes every internal node's form by beta reduction and checks it
    /// against the stored one.
    pub fn verify(&self) -> Result<(), String> {
        let leaves = self.leaves();
        let mut next = 0;
        for l in &leaves {
            if l.start != next {
                return Err(format!("leaf at {} does not follow {}", l.start, next));
            }
            next = l.end;
        }
        if next != self.tokens {
            return Err("leaves do not cover the sentence".into());
        }
        match &self.root {
            Some(r) if !r.category().is_root() => Err(format!("root category {}", r.category())),
            Some(r) => r.verify(),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.leading_skips > 0 {
            write!(f, "{}+", self.leading_skips)?;
        }
        match &self.root {
            Some(r) => write!(f, "{r}"),
            None => f.write_str("[]"),
        }
    }
}

/// All derivations yielding one logical form, packed.
#[derive(Clone, Debug)]
pub struct Parse {
    pub form: Arc<Expr>,
    pub text: Arc<str>,
    /// Attribute set of `form`, sorted.
    pub constants: Vec<Constant>,
    /// log Σ_y exp(Θ·φ(x, y, z)) over the packed derivations.
    pub score: f64,
    /// E_{P(y | x, z)}[φ].
    pub features: SparseVec,
    pub derivations: f64,
    pub best: Derivation,
    pub best_score: f64,
}

/// Beam of parses for a sentence, sorted by score, one per logical form.
#[derive(Clone, Debug, Default)]
pub struct ParseBeam {
    pub parses: Vec<Parse>,
    log_z: f64,
    /// Whether some chart cell or the root list was truncated.
    pub pruned: bool,
}

impl ParseBeam {
    pub fn is_empty(&self) -> bool {
        self.parses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parses.len()
    }

    /// log of the beam-restricted normalizer.
    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    /// P̂(z | x) for each parse, in order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.parses.iter().map(|p| (p.score - self.log_z).exp()).collect()
    }

    pub fn prob(&self, i: usize) -> f64 {
        (self.parses[i].score - self.log_z).exp()
    }

    /// Probability of a single derivation with score Θ·φ under the beam
    /// normalizer. `None` for an empty beam.
    pub fn derivation_prob(&self, score: f64) -> Option<f64> {
        (!self.is_empty()).then(|| (score - self.log_z).exp())
    }

    pub fn position(&self, text: &str) -> Option<usize> {
        self.parses.iter().position(|p| &*p.text == text)
    }

    pub fn top(&self) -> Option<&Parse> {
        self.parses.first()
    }

    /// E_{P(y, z | x)}[φ].
    pub fn expected_features(&self) -> SparseVec {
        let mut acc = SparseVec::new();
        for (p, prob) in self.parses.iter().zip(self.probabilities()) {
            acc = acc.combine(1.0, &p.features, prob);
        }
        acc
    }
}

pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

struct Entry {
    category: Category,
    form: Arc<Expr>,
    key: Arc<str>,
    inside: f64,
    feats: SparseVec,
    count: f64,
    best: Arc<Node>,
    best_score: f64,
}

impl Entry {
    fn absorb(&mut self, other: Entry) {
        let total = log_add_exp(self.inside, other.inside);
        let (wa, wb) = ((self.inside - total).exp(), (other.inside - total).exp());
        self.feats = self.feats.combine(wa, &other.feats, wb);
        self.inside = total;
        self.count += other.count;
        if other.best_score > self.best_score {
            self.best = other.best;
            self.best_score = other.best_score;
        }
    }
}

fn rank(a: &Entry, b: &Entry) -> Ordering {
    b.inside
        .partial_cmp(&a.inside)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.key.cmp(&b.key))
        .then_with(|| a.category.cmp(&b.category))
}

#[derive(Default)]
struct Cell {
    index: HashMap<(Category, Arc<str>), usize>,
    entries: Vec<Entry>,
}

impl Cell {
    fn add(&mut self, e: Entry) {
        match self.index.get(&(e.category.clone(), e.key.clone())) {
            Some(&i) => self.entries[i].absorb(e),
            None => {
                self.index.insert((e.category.clone(), e.key.clone()), self.entries.len());
                self.entries.push(e);
            }
        }
    }

    fn prune(mut self, beam: usize, pruned: &mut bool) -> Vec<Entry> {
        self.entries.sort_by(rank);
        *pruned |= self.entries.len() > beam;
        self.entries.truncate(beam);
        self.entries
    }
}

type Reduction = Option<(Arc<Expr>, Arc<str>)>;

struct Chart<'a> {
    tokens: &'a [String],
    lexicon: &'a Lexicon,
    model: &'a ParseModel,
    beam: usize,
    skip: Vec<(SparseVec, f64)>,
    memo: HashMap<(Arc<str>, Arc<str>), Reduction>,
}

impl<'a> Chart<'a> {
    fn skip_span(&self, from: usize, to: usize) -> (SparseVec, f64) {
        let mut v = SparseVec::new();
        let mut s = 0.0;
        for (sv, ss) in &self.skip[from..to] {
            v = v.add(sv);
            s += ss;
        }
        (v, s)
    }

    /// Beta-reduces `functor(arg)` into canonical form, memoized on form text.
    fn reduce(&mut self, functor: &Entry, arg: &Entry) -> Reduction {
        let key = (functor.key.clone(), arg.key.clone());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let applied = Expr::app((*functor.form).clone(), (*arg.form).clone());
        let normal = logic::normalize_unchecked(&applied);
        let canon = logic::canonicalize(&normal);
        let text: Arc<str> = Arc::from(canon.to_string());
        let out = Some((Arc::new(canon), text));
        self.memo.insert(key, out.clone());
        out
    }

    fn leaves(&self, i: usize, j: usize, cell: &mut Cell) {
        let n = self.tokens.len();
        for len in 1..=MAX_LEXEME_TOKENS.min(j - i) {
            let trailing = j - i - len;
            if i + len > n {
                break;
            }
            let items = self.lexicon.items_for(&self.tokens[i..i + len]);
            if items.is_empty() {
                continue;
            }
            let (skip_feats, skip_score) = self.skip_span(i + len, j);
            for item in items {
                let feats = self.model.vectorize(item.features.iter().map(|f| (f, 1.0)));
                let score = self.model.score(&feats) + skip_score;
                let node = Arc::new(Node::Leaf { start: i, item: item.clone(), trailing_skips: trailing });
                cell.add(Entry {
                    category: item.category.clone(),
                    form: item.form.clone(),
                    key: item.text.clone(),
                    inside: score,
                    feats: feats.add(&skip_feats),
                    count: 1.0,
                    best: node,
                    best_score: score,
                });
            }
        }
    }

    fn combine(&mut self, left: &Entry, right: &Entry, cell: &mut Cell) {
        if let Category::Forward(res, arg) = &left.category {
            if **arg == right.category {
                if let Some((form, key)) = self.reduce(left, right) {
                    cell.add(self.joined(Rule::Forward, (**res).clone(), form, key, left, right));
                }
            }
        }
        if let Category::Backward(res, arg) = &right.category {
            if **arg == left.category {
                if let Some((form, key)) = self.reduce(right, left) {
                    cell.add(self.joined(Rule::Backward, (**res).clone(), form, key, left, right));
                }
            }
        }
    }

    fn joined(&self, rule: Rule, category: Category, form: Arc<Expr>, key: Arc<str>, l: &Entry, r: &Entry) -> Entry {
        let best = Arc::new(Node::Apply {
            rule,
            category: category.clone(),
            form: form.clone(),
            left: l.best.clone(),
            right: r.best.clone(),
        });
        Entry {
            category,
            form,
            key,
            inside: l.inside + r.inside,
            feats: l.feats.add(&r.feats),
            count: l.count * r.count,
            best,
            best_score: l.best_score + r.best_score,
        }
    }
}

/// Parses `tokens` and returns up to `beam` logical forms with their packed
/// derivations, sorted by score (ties by form text). An empty beam signals
/// parse failure: no root N or S constituent, and some token is not a null
/// word.
pub fn parse(tokens: &[String], lexicon: &Lexicon, model: &ParseModel, beam: usize) -> ParseBeam {
    let beam = beam.max(1);
    let n = tokens.len();
    if n > MAX_SENTENCE_TOKENS {
        log::warn!("sentence of {n} tokens exceeds the {MAX_SENTENCE_TOKENS}-token limit");
        return ParseBeam::default();
    }
    let skip = tokens
        .iter()
        .map(|t| {
            let v = model.vectorize([(&Feature::Skip, 1.0), (&Feature::Null(t.clone()), 1.0)]);
            let s = model.weight(&Feature::Skip) + model.weight(&Feature::Null(t.clone()));
            (v, s)
        })
        .collect();
    let mut chart = Chart { tokens, lexicon, model, beam, skip, memo: HashMap::new() };

    // cells[i][len] for span [i, i + len)
    let mut pruned = false;
    let mut cells: Vec<Vec<Vec<Entry>>> = (0..n).map(|i| (0..=n - i).map(|_| Vec::new()).collect()).collect();
    for len in 1..=n {
        for i in 0..=n - len {
            let j = i + len;
            let mut cell = Cell::default();
            chart.leaves(i, j, &mut cell);
            for k in i + 1..j {
                let (left, right) = (&cells[i][k - i], &cells[k][j - k]);
                if left.is_empty() || right.is_empty() {
                    continue;
                }
                for l in left {
                    for r in right {
                        chart.combine(l, r, &mut cell);
                    }
                }
            }
            cells[i][len] = cell.prune(chart.beam, &mut pruned);
        }
    }

    // Root: leading skipped tokens followed by a complete N or S constituent.
    let mut index: HashMap<Arc<str>, usize> = HashMap::new();
    let mut roots: Vec<Parse> = Vec::new();
    let mut add_root = |p: Parse| match index.get(&p.text) {
        Some(&i) => {
            let r = &mut roots[i];
            let total = log_add_exp(r.score, p.score);
            let (wa, wb) = ((r.score - total).exp(), (p.score - total).exp());
            r.features = r.features.combine(wa, &p.features, wb);
            r.score = total;
            r.derivations += p.derivations;
            if p.best_score > r.best_score {
                r.best = p.best;
                r.best_score = p.best_score;
            }
        }
        None => {
            index.insert(p.text.clone(), roots.len());
            roots.push(p);
        }
    };

    for (i, row) in cells.iter().enumerate() {
        let (lead_feats, lead_score) = chart.skip_span(0, i);
        for e in &row[n - i] {
            if !e.category.is_root() {
                continue;
            }
            let Ok(attrs) = logic::attribute_set(&e.form) else { continue };
            let conj: Vec<Feature> = attrs.iter().map(|c| Feature::Conj(c.name.to_string())).collect();
            let lf = model.vectorize(conj.iter().map(|f| (f, 1.0)));
            let extra = lead_score + model.score(&lf);
            add_root(Parse {
                form: e.form.clone(),
                text: e.key.clone(),
                constants: attrs.into_iter().collect(),
                score: e.inside + extra,
                features: e.feats.add(&lead_feats).add(&lf),
                derivations: e.count,
                best: Derivation { tokens: n, leading_skips: i, root: Some(e.best.clone()) },
                best_score: e.best_score + extra,
            });
        }
    }
    // Skipping every token yields the universal form, but only when every
    // token is a known null word.
    if tokens.iter().all(|t| lexicon.null_words().contains(t)) {
        let (all_feats, all_score) = chart.skip_span(0, n);
        let universal = Expr::universal();
        add_root(Parse {
            text: Arc::from(universal.to_string()),
            form: Arc::new(universal),
            constants: Vec::new(),
            score: all_score,
            features: all_feats,
            derivations: 1.0,
            best: Derivation::all_skipped(n),
            best_score: all_score,
        });
    }

    roots.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal).then_with(|| a.text.cmp(&b.text)));
    pruned |= roots.len() > beam;
    roots.truncate(beam);
    let log_z = roots.iter().fold(f64::NEG_INFINITY, |acc, p| log_add_exp(acc, p.score));
    ParseBeam { parses: roots, log_z, pruned }
}
