//! Experiment pipelines: bootstrapping, joint runs, the vision-only and
//! language-only baselines, lexeme inspection, the initialization-size curve
//! and the synonym experiment.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::grammar::{self, default_templates, Labeled, SupervisedConfig};
use crate::joint::{self, Counts, EpochReport, GroundedExample, JointError, JointModel, TrainConfig};
use crate::logic::Constant;
use crate::perception::{self, classifier_prob, ClassifierConfig, ObjectFeatures, PerceptionError};
use crate::scenes::{AttributeInventory, Scene};

mod baselines;
mod inspect;
mod studies;

pub use baselines::{language_ablation, vision_baseline, VisionBaseline};
pub use inspect::{alignment, inspect, WeightMatrix, WeightRow};
pub use studies::{bindings_csv, curve, curve_csv, joint_runs, subsample, synonym_bindings, Binding, CurvePoint};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("scene `{0}` has no gold logical form")]
    MissingForm(String),
    #[error("scene `{0}` has no world labels")]
    MissingWorld(String),
    #[error("attribute `{0}` is not in the inventory")]
    UnknownAttribute(String),
    #[error(transparent)]
    Joint(#[from] JointError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error(transparent)]
    Logic(#[from] crate::logic::LogicError),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub parser: SupervisedConfig,
    pub classifier: ClassifierConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub sentences: usize,
    /// Fraction of D_sup sentences whose top parse is the gold form.
    pub parse_accuracy: f64,
    /// Per-classifier accuracy against the D_sup world labels.
    pub classifier_accuracy: Vec<(String, f64)>,
}

/// Distinct objects of a scene list; sentences about the same visual scene
/// share their objects.
fn distinct_objects(scenes: &[Scene]) -> Vec<(&Scene, &ObjectFeatures)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in scenes {
        for o in &s.objects {
            if seen.insert((s.scene, o.features.id.as_str())) {
                out.push((s, &o.features));
            }
        }
    }
    out
}

/// Trains the parser on (x, z) pairs and one classifier per world constant.
/// Empty D_sup gives an empty model.
pub fn bootstrap(
    dsup: &[Scene],
    inv: &AttributeInventory,
    config: &BootstrapConfig,
) -> Result<(JointModel, BootstrapReport), ExperimentError> {
    let mut labeled = Vec::with_capacity(dsup.len());
    for s in dsup {
        let z = s.lf.as_ref().ok_or_else(|| ExperimentError::MissingForm(s.id.clone()))?;
        if s.world.is_none() {
            return Err(ExperimentError::MissingWorld(s.id.clone()));
        }
        labeled.push(Labeled::new(s.tokens(), z));
    }
    let (lexicon, parse) = grammar::train_supervised(&labeled, &default_templates(), &config.parser);
    let mut names = BTreeSet::new();
    for s in dsup {
        for (_, c) in s.world.as_ref().unwrap().keys() {
            names.insert(c.clone());
        }
    }
    let objects = distinct_objects(dsup);
    let mut classifiers = Vec::new();
    let mut accuracy = Vec::new();
    for name in &names {
        let attr = inv.get(name).ok_or_else(|| ExperimentError::UnknownAttribute(name.clone()))?;
        let label =
            |s: &Scene, o: &ObjectFeatures| s.world.as_ref().unwrap().get(&(o.id.clone(), name.clone())).copied();
        let pos: Vec<&ObjectFeatures> =
            objects.iter().filter(|(s, o)| label(s, o) == Some(true)).map(|(_, o)| *o).collect();
        let neg: Vec<&ObjectFeatures> =
            objects.iter().filter(|(s, o)| label(s, o) == Some(false)).map(|(_, o)| *o).collect();
        let c = perception::train_classifier(&pos, &neg, Constant::new(name, attr.channel), &config.classifier)?;
        let mut hits = 0;
        for o in &pos {
            hits += (classifier_prob(&c, o)? > 0.5) as usize;
        }
        for o in &neg {
            hits += (classifier_prob(&c, o)? <= 0.5) as usize;
        }
        accuracy.push((name.clone(), hits as f64 / (pos.len() + neg.len()) as f64));
        classifiers.push(c);
    }
    let report = BootstrapReport {
        sentences: dsup.len(),
        parse_accuracy: grammar::parse_accuracy(&labeled, &lexicon, &parse, config.parser.beam),
        classifier_accuracy: accuracy,
    };
    Ok((JointModel::new(lexicon, parse, classifiers, inv.color_dims, inv.shape_dims), report))
}

pub fn examples(scenes: &[Scene]) -> Vec<GroundedExample> {
    scenes.iter().map(Scene::example).collect()
}

/// One joint-learning run: extend the bootstrap model, train online, and
/// evaluate on the test set after every epoch.
#[derive(Clone, Debug)]
pub struct JointRun {
    pub model: JointModel,
    pub epochs: Vec<EpochReport>,
    /// Test counts after each epoch.
    pub test_by_epoch: Vec<Counts>,
    pub test: Counts,
}

pub fn run_joint(
    base: &JointModel,
    train: &[Scene],
    test: &[Scene],
    config: &TrainConfig,
) -> Result<JointRun, ExperimentError> {
    let train_ex = examples(train);
    let test_ex = examples(test);
    let extended = joint::extend_model(base, &train_ex, config)?;
    let mut test_by_epoch = Vec::with_capacity(config.epochs);
    let (model, epochs) = joint::train_online(&extended, &train_ex, config, |_, m| {
        test_by_epoch.push(joint::evaluate(&test_ex, m, config.beam, config.threshold));
    });
    let test = joint::evaluate(&test_ex, &model, config.beam, config.threshold);
    Ok(JointRun { model, epochs, test_by_epoch, test })
}

/// Counts for each scene paired with its predicted mask.
pub fn predict_scenes(scenes: &[Scene], model: &JointModel, beam: usize, threshold: f64) -> Vec<(Vec<bool>, Counts)> {
    scenes
        .iter()
        .map(|s| {
            let p = joint::predict(&s.tokens(), &s.features(), model, beam, threshold);
            let mut c = Counts::default();
            c.add(&p, &s.gold_mask());
            (p, c)
        })
        .collect()
}

/// Sum of counts.
pub fn total(counts: impl IntoIterator<Item = Counts>) -> Counts {
    let mut out = Counts::default();
    for c in counts {
        out.true_pos += c.true_pos;
        out.false_pos += c.false_pos;
        out.false_neg += c.false_neg;
        out.true_neg += c.true_neg;
    }
    out
}

/// Precision, recall and F1 of one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<Counts> for Metrics {
    fn from(c: Counts) -> Self {
        Metrics { precision: c.precision(), recall: c.recall(), f1: c.f1() }
    }
}

impl Metrics {
    pub fn mean(runs: &[Metrics]) -> Metrics {
        let n = runs.len().max(1) as f64;
        Metrics {
            precision: runs.iter().map(|m| m.precision).sum::<f64>() / n,
            recall: runs.iter().map(|m| m.recall).sum::<f64>() / n,
            f1: runs.iter().map(|m| m.f1).sum::<f64>() / n,
        }
    }
}
