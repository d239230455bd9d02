//! Object feature vectors and per-attribute logistic-regression classifiers.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::logic::{Channel, Constant};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerceptionError {
    #[error("dimension mismatch: classifier expects {expected} features, object `{object}` has {found}")]
    DimensionMismatch { object: String, expected: usize, found: usize },
    #[error("cannot train a classifier without {0} examples")]
    EmptyClass(&'static str),
    #[error("classifier bank size must be even, got {0}")]
    OddBankSize(usize),
}

/// A segmented object: color and shape feature blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectFeatures {
    pub id: String,
    pub color: Vec<f64>,
    pub shape: Vec<f64>,
}

impl ObjectFeatures {
    pub fn new(id: impl Into<String>, color: Vec<f64>, shape: Vec<f64>) -> Self {
        ObjectFeatures { id: id.into(), color, shape }
    }

    /// φ(o): color block, shape block, then a bias component of 1.0.
    pub fn phi(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&self.color);
        v.extend_from_slice(&self.shape);
        v.push(1.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.color.len() + self.shape.len() + 1
    }
}

/// Boolean classifier outputs keyed by (object id, constant name).
pub type WorldAssignment = BTreeMap<(String, String), bool>;

/// Largest double below one; probabilities are kept inside the open unit
/// interval so that log(p) and log(1 - p) stay finite.
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

pub fn sigmoid(t: f64) -> f64 {
    let p = if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, ONE_BELOW)
}

/// log σ(t) without overflow.
pub fn log_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Index range of a channel's block inside φ(o).
pub fn channel_block(channel: Channel, color_dims: usize, shape_dims: usize) -> Range<usize> {
    match channel {
        Channel::Color => 0..color_dims,
        Channel::Shape => color_dims..color_dims + shape_dims,
    }
}

/// Which components of φ(o) a weight vector may use. The bias is always
/// free.
pub fn channel_mask(channel: Option<Channel>, color_dims: usize, shape_dims: usize) -> Vec<bool> {
    let n = color_dims + shape_dims + 1;
    match channel {
        None => vec![true; n],
        Some(ch) => {
            let block = channel_block(ch, color_dims, shape_dims);
            (0..n).map(|i| block.contains(&i) || i == n - 1).collect()
        }
    }
}

/// A logistic-regression classifier bound to an attribute constant and
/// restricted to that constant's channel.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributeClassifier {
    pub constant: Constant,
    pub color_dims: usize,
    pub shape_dims: usize,
    pub weights: Vec<f64>,
}

impl AttributeClassifier {
    pub fn zeros(constant: Constant, color_dims: usize, shape_dims: usize) -> Self {
        AttributeClassifier { constant, color_dims, shape_dims, weights: vec![0.0; color_dims + shape_dims + 1] }
    }

    pub fn channel(&self) -> Channel {
        self.constant.channel
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn mask(&self) -> Vec<bool> {
        channel_mask(Some(self.channel()), self.color_dims, self.shape_dims)
    }

    fn check(&self, o: &ObjectFeatures) -> Result<(), PerceptionError> {
        if o.color.len() != self.color_dims || o.shape.len() != self.shape_dims {
            return Err(PerceptionError::DimensionMismatch {
                object: o.id.clone(),
                expected: self.dim(),
                found: o.dim(),
            });
        }
        Ok(())
    }

    /// Θ_c · φ(o) over the channel block and bias only.
    pub fn logit(&self, o: &ObjectFeatures) -> Result<f64, PerceptionError> {
        self.check(o)?;
        let block = match self.channel() {
            Channel::Color => &o.color,
            Channel::Shape => &o.shape,
        };
        let range = channel_block(self.channel(), self.color_dims, self.shape_dims);
        Ok(dot(&self.weights[range], block) + self.weights[self.dim() - 1])
    }

    /// Θ_c += scale · delta, keeping out-of-channel components at zero.
    pub fn apply(&mut self, delta: &[f64], scale: f64) {
        let mask = self.mask();
        for ((w, d), keep) in self.weights.iter_mut().zip(delta).zip(mask) {
            if keep {
                *w += scale * d;
            }
        }
    }
}

/// σ(Θ_c · φ(o)).
pub fn classifier_prob(c: &AttributeClassifier, o: &ObjectFeatures) -> Result<f64, PerceptionError> {
    Ok(sigmoid(c.logit(o)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { iterations: 300, learning_rate: 1.0, l2: 1e-4 }
    }
}

/// Mean logistic log-likelihood minus (l2/2)·|w|² (bias excluded), and its
/// gradient, for a dense weight vector over φ(o).
pub fn logistic_objective(weights: &[f64], positives: &[Vec<f64>], negatives: &[Vec<f64>], l2: f64) -> (f64, Vec<f64>) {
    let n = (positives.len() + negatives.len()).max(1) as f64;
    let mut ll = 0.0;
    let mut grad = vec![0.0; weights.len()];
    for (xs, label) in [(positives, 1.0), (negatives, 0.0)] {
        for x in xs {
            let t = dot(weights, x);
            ll += if label == 1.0 { log_sigmoid(t) } else { log_sigmoid(-t) };
            let r = (label - sigmoid(t)) / n;
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += r * xi;
            }
        }
    }
    ll /= n;
    let last = weights.len().saturating_sub(1);
    for (i, (g, w)) in grad.iter_mut().zip(weights).enumerate() {
        if i != last {
            ll -= 0.5 * l2 * w * w;
            *g -= l2 * w;
        }
    }
    (ll, grad)
}

/// Full-batch gradient ascent on [`logistic_objective`] with components
/// outside `mask` held at zero.
pub fn train_logistic(
    positives: &[Vec<f64>],
    negatives: &[Vec<f64>],
    mask: &[bool],
    config: &ClassifierConfig,
) -> Vec<f64> {
    let mut w = vec![0.0; mask.len()];
    for _ in 0..config.iterations {
        let (_, g) = logistic_objective(&w, positives, negatives, config.l2);
        for ((wi, gi), &keep) in w.iter_mut().zip(&g).zip(mask) {
            if keep {
                *wi += config.learning_rate * gi;
            }
        }
    }
    w
}

/// Trains the classifier for `constant` on labeled objects.
pub fn train_classifier(
    positives: &[&ObjectFeatures],
    negatives: &[&ObjectFeatures],
    constant: Constant,
    config: &ClassifierConfig,
) -> Result<AttributeClassifier, PerceptionError> {
    let first = positives.first().ok_or(PerceptionError::EmptyClass("positive"))?;
    if negatives.is_empty() {
        return Err(PerceptionError::EmptyClass("negative"));
    }
    let mut c = AttributeClassifier::zeros(constant, first.color.len(), first.shape.len());
    for o in positives.iter().chain(negatives) {
        c.check(o)?;
    }
    let pos: Vec<Vec<f64>> = positives.iter().map(|o| o.phi()).collect();
    let neg: Vec<Vec<f64>> = negatives.iter().map(|o| o.phi()).collect();
    c.weights = train_logistic(&pos, &neg, &c.mask(), config);
    Ok(c)
}

/// `k` zero-weight classifiers bound to fresh constants NEW0..NEW(k-1), the
/// first half color and the second half shape.
pub fn new_classifier_bank(
    k: usize,
    color_dims: usize,
    shape_dims: usize,
) -> Result<Vec<AttributeClassifier>, PerceptionError> {
    if !k.is_multiple_of(2) {
        return Err(PerceptionError::OddBankSize(k));
    }
    Ok((0..k)
        .map(|i| {
            let name = format!("NEW{i}");
            let constant = if i < k / 2 { Constant::color(&name) } else { Constant::shape(&name) };
            AttributeClassifier::zeros(constant, color_dims, shape_dims)
        })
        .collect())
}
