use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::GrammarError;

/// Indicator features of the log-linear parse model.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    /// Use of a lexeme, keyed by [`Lexeme::key`](super::Lexeme::key).
    Lexeme(String),
    /// Use of a template.
    Template(String),
    /// A specific word parsed as semantically empty.
    Null(String),
    /// Count of skipped tokens.
    Skip,
    /// A constant appearing as a conjunct of the final logical form.
    Conj(String),
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Lexeme(k) => write!(f, "lex:{k}"),
            Feature::Template(t) => write!(f, "tmpl:{t}"),
            Feature::Null(w) => write!(f, "null:{w}"),
            Feature::Skip => f.write_str("skip"),
            Feature::Conj(c) => write!(f, "conj:{c}"),
        }
    }
}

impl FromStr for Feature {
    type Err = GrammarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "skip" {
            return Ok(Feature::Skip);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| GrammarError::BadFeature(s.to_string()))?;
        let rest = rest.to_string();
        match kind {
            "lex" => Ok(Feature::Lexeme(rest)),
            "tmpl" => Ok(Feature::Template(rest)),
            "null" => Ok(Feature::Null(rest)),
            "conj" => Ok(Feature::Conj(rest)),
            _ => Err(GrammarError::BadFeature(s.to_string())),
        }
    }
}

pub type FeatureId = u32;

/// Sparse vector over feature ids, sorted by id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVec(Vec<(FeatureId, f64)>);

impl SparseVec {
    pub fn new() -> Self {
        SparseVec(Vec::new())
    }

    pub fn from_unsorted(mut pairs: Vec<(FeatureId, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut out: Vec<(FeatureId, f64)> = Vec::with_capacity(pairs.len());
        for (id, v) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == id => last.1 += v,
                _ => out.push((id, v)),
            }
        }
        SparseVec(out)
    }

    pub fn entries(&self) -> &[(FeatureId, f64)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: FeatureId) -> f64 {
        self.0.binary_search_by_key(&id, |p| p.0).map(|i| self.0[i].1).unwrap_or(0.0)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SparseVec, b: f64) -> SparseVec {
        let (x, y) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(x.len() + y.len());
        let (mut i, mut j) = (0, 0);
        while i < x.len() || j < y.len() {
            if j == y.len() || (i < x.len() && x[i].0 < y[j].0) {
                out.push((x[i].0, a * x[i].1));
                i += 1;
            } else if i == x.len() || y[j].0 < x[i].0 {
                out.push((y[j].0, b * y[j].1));
                j += 1;
            } else {
                out.push((x[i].0, a * x[i].1 + b * y[j].1));
                i += 1;
                j += 1;
            }
        }
        SparseVec(out)
    }

    pub fn add(&self, other: &SparseVec) -> SparseVec {
        self.combine(1.0, other, 1.0)
    }

    pub fn scale(&self, a: f64) -> SparseVec {
        SparseVec(self.0.iter().map(|&(id, v)| (id, a * v)).collect())
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.0.iter().map(|&(id, v)| weights.get(id as usize).copied().unwrap_or(0.0) * v).sum()
    }

    /// Drops entries whose magnitude is at most `eps`.
    pub fn prune(mut self, eps: f64) -> SparseVec {
        self.0.retain(|p| p.1.abs() > eps);
        self
    }
}

/// Weights Θ^L of the parse model. Features are interned to dense ids;
/// features never registered have weight zero.
#[derive(Clone, Debug, Default)]
pub struct ParseModel {
    ids: HashMap<Feature, FeatureId>,
    features: Vec<Feature>,
    weights: Vec<f64>,
}

impl ParseModel {
    pub fn new() -> Self {
        ParseModel::default()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn id(&self, f: &Feature) -> Option<FeatureId> {
        self.ids.get(f).copied()
    }

    /// Registers `f` with weight 0 unless already present.
    pub fn register(&mut self, f: Feature) -> FeatureId {
        if let Some(&id) = self.ids.get(&f) {
            return id;
        }
        let id = self.features.len() as FeatureId;
        self.ids.insert(f.clone(), id);
        self.features.push(f);
        self.weights.push(0.0);
        id
    }

    pub fn feature(&self, id: FeatureId) -> &Feature {
        &self.features[id as usize]
    }

    pub fn weight(&self, f: &Feature) -> f64 {
        self.id(f).map(|id| self.weights[id as usize]).unwrap_or(0.0)
    }

    pub fn weight_of(&self, id: FeatureId) -> f64 {
        self.weights[id as usize]
    }

    pub fn set_weight(&mut self, f: Feature, w: f64) {
        let id = self.register(f);
        self.weights[id as usize] = w;
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// `Θ += scale · delta`.
    pub fn apply(&mut self, delta: &SparseVec, scale: f64) {
        for &(id, v) in delta.entries() {
            self.weights[id as usize] += scale * v;
        }
    }

    pub fn score(&self, phi: &SparseVec) -> f64 {
        phi.dot(&self.weights)
    }

    /// Sparse vector over registered features; unregistered ones are dropped.
    pub fn vectorize<'a>(&self, feats: impl IntoIterator<Item = (&'a Feature, f64)>) -> SparseVec {
        SparseVec::from_unsorted(feats.into_iter().filter_map(|(f, v)| self.id(f).map(|id| (id, v))).collect())
    }

    /// `(feature, weight)` pairs sorted by feature name.
    pub fn to_entries(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> =
            self.features.iter().zip(&self.weights).map(|(f, &w)| (f.to_string(), w)).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn from_entries(entries: &[(String, f64)]) -> Result<Self, GrammarError> {
        let mut m = ParseModel::new();
        for (name, w) in entries {
            let f: Feature = name.parse()?;
            m.set_weight(f, *w);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_print_and_parse() {
        for f in [
            Feature::Lexeme("half-pipe|[arch]".into()),
            Feature::Template("attr_n".into()),
            Feature::Null("thing".into()),
            Feature::Skip,
            Feature::Conj("NEW0".into()),
        ] {
            assert_eq!(f.to_string().parse::<Feature>().unwrap(), f);
        }
        assert!("bogus".parse::<Feature>().is_err());
    }

    #[test]
    fn absent_features_weigh_zero() {
        let mut m = ParseModel::new();
        assert_eq!(m.weight(&Feature::Skip), 0.0);
        m.set_weight(Feature::Skip, -1.5);
        assert_eq!(m.weight(&Feature::Skip), -1.5);
        assert_eq!(m.register(Feature::Skip), 0);
        assert_eq!(m.weight(&Feature::Null("a".into())), 0.0);
    }

    #[test]
    fn sparse_combination() {
        let a = SparseVec::from_unsorted(vec![(3, 1.0), (1, 2.0), (3, 1.0)]);
        assert_eq!(a.entries(), &[(1, 2.0), (3, 2.0)]);
        let b = SparseVec::from_unsorted(vec![(2, 1.0), (3, -1.0)]);
        let c = a.combine(0.5, &b, 2.0);
        assert_eq!(c.entries(), &[(1, 1.0), (2, 2.0), (3, -1.0)]);
        assert_eq!(c.dot(&[0.0, 1.0, 1.0, 1.0]), 2.0);
    }
}
