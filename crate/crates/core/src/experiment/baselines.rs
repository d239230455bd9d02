//! The vision-only thesaurus baseline and the language-only ablation.

use std::collections::{BTreeMap, BTreeSet};

use crate::joint::{self, Counts, JointModel};
use crate::perception::{channel_mask, sigmoid, train_logistic, ClassifierConfig, ObjectFeatures};
use crate::scenes::{Scene, Thesaurus};

/// A synonym set with a classifier over the full feature vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SynonymClassifier {
    pub attribute: String,
    pub terms: BTreeSet<String>,
    pub weights: Vec<f64>,
}

impl SynonymClassifier {
    pub fn accepts(&self, o: &ObjectFeatures) -> bool {
        let t: f64 = self.weights.iter().zip(o.phi()).map(|(w, x)| w * x).sum();
        sigmoid(t) > 0.5
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VisionBaseline {
    pub classifiers: Vec<SynonymClassifier>,
    /// Synonym sets seen in fewer than two visual scenes.
    pub discarded: Vec<String>,
}

impl VisionBaseline {
    /// Objects accepted by every classifier whose synonym set occurs in the
    /// sentence; nothing when no set occurs.
    pub fn predict(&self, tokens: &[String], objects: &[ObjectFeatures]) -> Vec<bool> {
        let present: Vec<&SynonymClassifier> =
            self.classifiers.iter().filter(|c| tokens.iter().any(|t| c.terms.contains(t))).collect();
        if present.is_empty() {
            return vec![false; objects.len()];
        }
        objects.iter().map(|o| present.iter().all(|c| c.accepts(o))).collect()
    }

    pub fn evaluate(&self, test: &[Scene]) -> Counts {
        let mut counts = Counts::default();
        for s in test {
            counts.add(&self.predict(&s.tokens(), &s.features()), &s.gold_mask());
        }
        counts
    }
}

/// Groups the words of `train` absent from `dsup` into thesaurus synonym
/// sets, drops sets seen in fewer than two visual scenes, and trains one
/// classifier per set: positives are the selected objects of sentences in
/// which only that set's terms occur, negatives the selected objects of the
/// other sets' sentences.
pub fn vision_baseline(
    dsup: &[Scene],
    train: &[Scene],
    thesaurus: &Thesaurus,
    config: &ClassifierConfig,
) -> VisionBaseline {
    let known: BTreeSet<String> = dsup.iter().flat_map(|s| s.tokens()).collect();
    let unknown: BTreeSet<String> = train.iter().flat_map(|s| s.tokens()).filter(|t| !known.contains(t)).collect();
    let mut sets: Vec<(String, BTreeSet<String>)> = Vec::new();
    for (attr, words) in thesaurus {
        let terms: BTreeSet<String> = words.iter().filter(|w| unknown.contains(*w)).cloned().collect();
        if !terms.is_empty() {
            sets.push((attr.clone(), terms));
        }
    }
    let tokens: Vec<BTreeSet<String>> = train.iter().map(|s| s.tokens().into_iter().collect()).collect();
    let occurs = |terms: &BTreeSet<String>, i: usize| !terms.is_disjoint(&tokens[i]);
    let mut out = VisionBaseline::default();
    let mut kept = Vec::new();
    for (attr, terms) in sets {
        let visual: BTreeSet<usize> = (0..train.len()).filter(|&i| occurs(&terms, i)).map(|i| train[i].scene).collect();
        if visual.len() < 2 {
            out.discarded.push(attr);
        } else {
            kept.push((attr, terms));
        }
    }
    // selected objects of the sentences that mention exactly one kept set
    let mut selected: BTreeMap<usize, BTreeMap<(usize, String), &ObjectFeatures>> = BTreeMap::new();
    for (i, s) in train.iter().enumerate() {
        let present: Vec<usize> = (0..kept.len()).filter(|&k| occurs(&kept[k].1, i)).collect();
        if let [k] = present[..] {
            for o in &s.objects {
                if s.gold.contains(&o.features.id) {
                    selected.entry(k).or_default().insert((s.scene, o.features.id.clone()), &o.features);
                }
            }
        }
    }
    for (k, (attr, terms)) in kept.into_iter().enumerate() {
        let Some(own) = selected.get(&k) else {
            out.discarded.push(attr);
            continue;
        };
        let pos: Vec<Vec<f64>> = own.values().map(|o| o.phi()).collect();
        let neg: Vec<Vec<f64>> = selected
            .iter()
            .filter(|(j, _)| **j != k)
            .flat_map(|(_, objs)| objs.iter().filter(|(key, _)| !own.contains_key(*key)).map(|(_, o)| o.phi()))
            .collect();
        if neg.is_empty() {
            out.discarded.push(attr);
            continue;
        }
        let (dc, ds) = (own.values().next().unwrap().color.len(), own.values().next().unwrap().shape.len());
        let weights = train_logistic(&pos, &neg, &channel_mask(None, dc, ds), config);
        out.classifiers.push(SynonymClassifier { attribute: attr, terms, weights });
    }
    out
}

/// The bootstrap model with unknown words left semantically empty.
pub fn language_ablation(model: &JointModel, test: &[Scene], beam: usize, threshold: f64) -> Counts {
    let examples: Vec<_> = test.iter().map(Scene::example).collect();
    joint::evaluate(&examples, model, beam, threshold)
}
