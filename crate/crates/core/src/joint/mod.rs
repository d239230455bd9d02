//! Joint model over parses, possible worlds and selected object sets.
//!
//! Worlds are never enumerated: given a logical form, an object is selected
//! iff every conjunct's classifier fires on it, and classifier outputs are
//! independent across objects, so P(G | z, O) factorizes per object.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::grammar::{self, Lexicon, ParseBeam, ParseModel, SparseVec};
use crate::logic::{self, Constant, Expr, LogicError};
use crate::perception::{self, log_sigmoid, AttributeClassifier, ObjectFeatures, PerceptionError, WorldAssignment};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JointError {
    #[error("constant `{0}` has no bound classifier")]
    UnboundConstant(String),
    #[error("world assignment lacks ({object}, {constant})")]
    MissingAssignment { object: String, constant: String },
    #[error("no parse for `{0}`")]
    ParseFailure(String),
    #[error("no parse in the beam explains the selected objects of `{0}`")]
    Unexplainable(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub decay: f64,
    pub beam: usize,
    pub new_classifiers: usize,
    pub threshold: f64,
    pub seed: u64,
    /// Standard deviation of the random in-channel weights given to new
    /// classifiers; zero keeps them exactly uniform.
    pub init_jitter: f64,
    /// Multiplier on the step size for classifier updates; the language
    /// parameters use the plain rate.
    pub perception_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            learning_rate: 0.1,
            decay: 0.00001,
            beam: 50,
            new_classifiers: 6,
            threshold: 0.5,
            seed: 0,
            init_jitter: 0.5,
            perception_scale: 10.0,
        }
    }
}

impl TrainConfig {
    /// η_t = max(η − t·decay, 0).
    pub fn rate(&self, t: usize) -> f64 {
        (self.learning_rate - t as f64 * self.decay).max(0.0)
    }
}

/// A sentence with its scene and the selected objects.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundedExample {
    pub tokens: Vec<String>,
    pub objects: Vec<ObjectFeatures>,
    pub gold: Vec<bool>,
}

/// Lexicon, parse weights and classifier bank.
#[derive(Clone, Debug)]
pub struct JointModel {
    pub lexicon: Lexicon,
    pub parse: ParseModel,
    pub classifiers: BTreeMap<String, AttributeClassifier>,
    pub color_dims: usize,
    pub shape_dims: usize,
}

impl JointModel {
    pub fn new(
        lexicon: Lexicon,
        parse: ParseModel,
        classifiers: Vec<AttributeClassifier>,
        color_dims: usize,
        shape_dims: usize,
    ) -> Self {
        let classifiers = classifiers.into_iter().map(|c| (c.constant.name.to_string(), c)).collect();
        JointModel { lexicon, parse, classifiers, color_dims, shape_dims }
    }

    pub fn classifier(&self, name: &str) -> Result<&AttributeClassifier, JointError> {
        self.classifiers.get(name).ok_or_else(|| JointError::UnboundConstant(name.to_string()))
    }

    pub fn constants(&self) -> Vec<Constant> {
        self.classifiers.values().map(|c| c.constant.clone()).collect()
    }

    pub fn parse_sentence(&self, tokens: &[String], beam: usize) -> ParseBeam {
        grammar::parse(tokens, &self.lexicon, &self.parse, beam)
    }
}

/// Objects selected by `z` under the world `w`.
pub fn execute(z: &Expr, w: &WorldAssignment, objects: &[ObjectFeatures]) -> Result<BTreeSet<String>, JointError> {
    let attrs = logic::attribute_set(z)?;
    let mut out = BTreeSet::new();
    for o in objects {
        let mut all = true;
        for c in &attrs {
            let key = (o.id.clone(), c.name.to_string());
            match w.get(&key) {
                Some(v) => all &= *v,
                None => return Err(JointError::MissingAssignment { object: key.0, constant: key.1 }),
            }
        }
        if all {
            out.insert(o.id.clone());
        }
    }
    Ok(out)
}

/// P(o ∈ z(w) | O) = Π_c P(w_{o,c} = T).
pub fn membership_prob(z: &Expr, o: &ObjectFeatures, model: &JointModel) -> Result<f64, JointError> {
    let mut p = 1.0;
    for c in logic::attribute_set(z)? {
        p *= perception::classifier_prob(model.classifier(&c.name)?, o)?;
    }
    Ok(p)
}

/// P(G | z, O) summed over worlds in closed form.
pub fn set_likelihood(
    gold: &[bool],
    z: &Expr,
    objects: &[ObjectFeatures],
    model: &JointModel,
) -> Result<f64, JointError> {
    let mut p = 1.0;
    for (o, &g) in objects.iter().zip(gold) {
        let m = membership_prob(z, o, model)?;
        p *= if g { m } else { 1.0 - m };
    }
    Ok(p)
}

/// log(1 − e^a) for a ≤ 0.
fn log1m_exp(a: f64) -> f64 {
    if a > -std::f64::consts::LN_2 {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

/// Per-example quantities shared by the posterior, both gradients and
/// prediction.
pub struct Analysis {
    pub beam: ParseBeam,
    /// Constants of each beam parse, by name.
    constants: Vec<Vec<String>>,
    /// Per constant: (log p, log(1 − p)) for every object.
    log_probs: HashMap<String, Vec<(f64, f64)>>,
}

impl Analysis {
    pub fn new(
        tokens: &[String],
        objects: &[ObjectFeatures],
        model: &JointModel,
        beam: usize,
    ) -> Result<Self, JointError> {
        let beam = model.parse_sentence(tokens, beam);
        if beam.is_empty() {
            return Err(JointError::ParseFailure(tokens.join(" ")));
        }
        let mut log_probs = HashMap::new();
        let mut constants = Vec::with_capacity(beam.len());
        for p in &beam.parses {
            let names: Vec<String> = p.constants.iter().map(|c| c.name.to_string()).collect();
            for n in &names {
                if !log_probs.contains_key(n) {
                    let c = model.classifier(n)?;
                    let mut v = Vec::with_capacity(objects.len());
                    for o in objects {
                        let t = c.logit(o)?;
                        v.push((log_sigmoid(t), log_sigmoid(-t)));
                    }
                    log_probs.insert(n.clone(), v);
                }
            }
            constants.push(names);
        }
        Ok(Analysis { beam, constants, log_probs })
    }

    fn log_membership(&self, parse: usize, object: usize) -> f64 {
        self.constants[parse].iter().map(|n| self.log_probs[n][object].0).sum()
    }

    /// log(1 − membership); exact for single-attribute forms.
    fn log_exclusion(&self, parse: usize, object: usize) -> f64 {
        match self.constants[parse].as_slice() {
            [] => f64::NEG_INFINITY,
            [n] => self.log_probs[n][object].1,
            _ => log1m_exp(self.log_membership(parse, object)),
        }
    }

    /// log P(G | z, O) for beam parse `parse`.
    pub fn log_set_likelihood(&self, parse: usize, gold: &[bool]) -> f64 {
        gold.iter()
            .enumerate()
            .map(|(o, &g)| if g { self.log_membership(parse, o) } else { self.log_exclusion(parse, o) })
            .sum()
    }

    /// q(o) = Σ_z P̂(z | x)·P(o ∈ z(w)).
    pub fn marginals(&self, objects: usize) -> Vec<f64> {
        let probs = self.beam.probabilities();
        (0..objects).map(|o| probs.iter().enumerate().map(|(z, p)| p * self.log_membership(z, o).exp()).sum()).collect()
    }

    pub fn posterior(&self, gold: &[bool]) -> Option<Posterior> {
        let log_w: Vec<f64> = (0..self.beam.len())
            .map(|z| self.beam.parses[z].score - self.beam.log_normalizer() + self.log_set_likelihood(z, gold))
            .collect();
        let total = log_w.iter().fold(f64::NEG_INFINITY, |a, &b| grammar::log_add_exp(a, b));
        if total == f64::NEG_INFINITY || total.is_nan() {
            return None;
        }
        let weights = log_w.iter().map(|w| (w - total).exp()).collect();
        Some(Posterior { weights, log_marginal: total })
    }

    /// Σ_z posterior(z)·(E[φ | x, z] − E[φ | x]).
    pub fn language_gradient(&self, post: &Posterior) -> SparseVec {
        let mut acc = SparseVec::new();
        for (p, &w) in self.beam.parses.iter().zip(&post.weights) {
            if w > 0.0 {
                acc = acc.combine(1.0, &p.features, w);
            }
        }
        acc.combine(1.0, &self.beam.expected_features(), -1.0)
    }

    /// Per-classifier Σ_z posterior(z) Σ_o (E[w_{o,c} | z, G] − p_c(o))·φ(o).
    pub fn perception_gradient(
        &self,
        post: &Posterior,
        objects: &[ObjectFeatures],
        gold: &[bool],
    ) -> BTreeMap<String, Vec<f64>> {
        let phis: Vec<Vec<f64>> = objects.iter().map(|o| o.phi()).collect();
        let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (z, &weight) in post.weights.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            for name in &self.constants[z] {
                let lp = &self.log_probs[name];
                let delta = out.entry(name.clone()).or_insert_with(|| vec![0.0; phis[0].len()]);
                for (o, phi) in phis.iter().enumerate() {
                    let r = if gold[o] {
                        lp[o].1.exp()
                    } else {
                        // E[w] − p = −Q(1 − p)/(1 − Q), Q the membership
                        -(self.log_membership(z, o) + lp[o].1 - self.log_exclusion(z, o)).exp()
                    };
                    for (d, x) in delta.iter_mut().zip(phi) {
                        *d += weight * r * x;
                    }
                }
            }
        }
        out
    }
}

/// Normalized weights over the beam's logical forms.
#[derive(Clone, Debug)]
pub struct Posterior {
    pub weights: Vec<f64>,
    /// log Σ_z P̂(z | x)·P(G | z, O).
    pub log_marginal: f64,
}

/// Posterior over the beam's logical forms given the selected objects.
pub fn posterior(ex: &GroundedExample, model: &JointModel, beam: usize) -> Result<(Analysis, Posterior), JointError> {
    let a = Analysis::new(&ex.tokens, &ex.objects, model, beam)?;
    let post = a.posterior(&ex.gold).ok_or_else(|| JointError::Unexplainable(ex.tokens.join(" ")))?;
    Ok((a, post))
}

pub fn language_gradient(ex: &GroundedExample, model: &JointModel, beam: usize) -> Result<SparseVec, JointError> {
    let (a, post) = posterior(ex, model, beam)?;
    Ok(a.language_gradient(&post))
}

pub fn perception_gradient(
    ex: &GroundedExample,
    model: &JointModel,
    beam: usize,
) -> Result<BTreeMap<String, Vec<f64>>, JointError> {
    let (a, post) = posterior(ex, model, beam)?;
    Ok(a.perception_gradient(&post, &ex.objects, &ex.gold))
}

/// Σ_i log P(G_i | x_i, O_i) over explainable examples, with the number of
/// examples left out.
pub fn marginal_log_likelihood(data: &[GroundedExample], model: &JointModel, beam: usize) -> (f64, usize) {
    let mut ll = 0.0;
    let mut skipped = 0;
    for ex in data {
        match posterior(ex, model, beam) {
            Ok((_, p)) => ll += p.log_marginal,
            Err(_) => skipped += 1,
        }
    }
    (ll, skipped)
}

/// Objects whose marginal selection probability exceeds `threshold`.
pub fn predict(
    tokens: &[String],
    objects: &[ObjectFeatures],
    model: &JointModel,
    beam: usize,
    threshold: f64,
) -> Vec<bool> {
    match Analysis::new(tokens, objects, model, beam) {
        Ok(a) => a.marginals(objects.len()).into_iter().map(|q| q > threshold).collect(),
        Err(e) => {
            log::debug!("{e}");
            vec![false; objects.len()]
        }
    }
}

/// Adds the new classifier bank (once) and induces lexemes for the unknown
/// words of `data`.
pub fn extend_model(
    model: &JointModel,
    data: &[GroundedExample],
    config: &TrainConfig,
) -> Result<JointModel, JointError> {
    let mut out = model.clone();
    let bank = perception::new_classifier_bank(config.new_classifiers, model.color_dims, model.shape_dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6a09_e667_f3bc_c908);
    let noise = (config.init_jitter > 0.0).then(|| Normal::new(0.0, config.init_jitter).expect("finite jitter"));
    let mut new_constants = Vec::new();
    for mut c in bank {
        new_constants.push(c.constant.clone());
        if out.classifiers.contains_key(&*c.constant.name) {
            continue;
        }
        if let Some(n) = &noise {
            let mask = c.mask();
            let bias = c.dim() - 1;
            for (i, w) in c.weights.iter_mut().enumerate() {
                if mask[i] && i != bias {
                    *w = n.sample(&mut rng);
                }
            }
        }
        out.classifiers.insert(c.constant.name.to_string(), c);
    }
    let sentences: Vec<Vec<String>> = data.iter().map(|e| e.tokens.clone()).collect();
    let (lexicon, added) = grammar::induce_new_lexemes(&sentences, &out.lexicon, &new_constants, &mut out.parse);
    log::info!("extended model: {} new words", added.len());
    out.lexicon = lexicon;
    grammar::register_features(&out.lexicon, &sentences, &mut out.parse);
    Ok(out)
}

/// Object-level confusion counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl Counts {
    pub fn add(&mut self, predicted: &[bool], gold: &[bool]) {
        for (&p, &g) in predicted.iter().zip(gold) {
            match (p, g) {
                (true, true) => self.true_pos += 1,
                (true, false) => self.false_pos += 1,
                (false, true) => self.false_neg += 1,
                (false, false) => self.true_neg += 1,
            }
        }
    }

    /// Precision, treating no predicted objects as perfect precision.
    pub fn precision(&self) -> f64 {
        let d = self.true_pos + self.false_pos;
        if d == 0 {
            1.0
        } else {
            self.true_pos as f64 / d as f64
        }
    }

    /// Recall, treating no gold objects as perfect recall.
    pub fn recall(&self) -> f64 {
        let d = self.true_pos + self.false_neg;
        if d == 0 {
            1.0
        } else {
            self.true_pos as f64 / d as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub examples: usize,
    pub skipped: usize,
    /// Object-level counts of the predictions made on each example just
    /// before its update.
    pub counts: Counts,
}

impl EpochReport {
    pub fn csv_header() -> &'static str {
        "epoch,examples,skipped,train_p,train_r,train_f1"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.4},{:.4},{:.4}",
            self.epoch,
            self.examples,
            self.skipped,
            self.counts.precision(),
            self.counts.recall(),
            self.counts.f1()
        )
    }
}

/// Online updates over `data` for `config.epochs` passes. `on_epoch` sees
/// the model after every pass.
pub fn train_online(
    model: &JointModel,
    data: &[GroundedExample],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(usize, &JointModel),
) -> (JointModel, Vec<EpochReport>) {
    let mut model = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut reports = Vec::with_capacity(config.epochs);
    let mut t = 0;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut report = EpochReport { epoch, examples: data.len(), ..EpochReport::default() };
        for &i in &order {
            let ex = &data[i];
            let a = match Analysis::new(&ex.tokens, &ex.objects, &model, config.beam) {
                Ok(a) => a,
                Err(e) => {
                    log::debug!("{e}");
                    report.skipped += 1;
                    report.counts.add(&vec![false; ex.gold.len()], &ex.gold);
                    continue;
                }
            };
            let predicted: Vec<bool> =
                a.marginals(ex.objects.len()).into_iter().map(|q| q > config.threshold).collect();
            report.counts.add(&predicted, &ex.gold);
            let Some(post) = a.posterior(&ex.gold) else {
                report.skipped += 1;
                continue;
            };
            let eta = config.rate(t);
            t += 1;
            let dl = a.language_gradient(&post);
            let dp = a.perception_gradient(&post, &ex.objects, &ex.gold);
            model.parse.apply(&dl, eta);
            for (name, delta) in dp {
                if let Some(c) = model.classifiers.get_mut(&name) {
                    c.apply(&delta, eta * config.perception_scale);
                }
            }
        }
        log::info!("{}", report.csv_row());
        on_epoch(epoch, &model);
        reports.push(report);
    }
    (model, reports)
}

/// Counts over a labeled set.
pub fn evaluate(data: &[GroundedExample], model: &JointModel, beam: usize, threshold: f64) -> Counts {
    let mut counts = Counts::default();
    for ex in data {
        counts.add(&predict(&ex.tokens, &ex.objects, model, beam, threshold), &ex.gold);
    }
    counts
}

#[cfg(test)]
mod tests;
