//! Repeated runs, the initialization-size curve and synonym binding.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grammar::Feature;
use crate::joint::{JointModel, TrainConfig};
use crate::scenes::{AttributeInventory, Scene, Split};

use super::{bootstrap, run_joint, BootstrapConfig, ExperimentError, JointRun, Metrics};

/// `runs` joint runs from the same bootstrap model, run r seeded with
/// `config.seed + r`.
pub fn joint_runs(
    base: &JointModel,
    train: &[Scene],
    test: &[Scene],
    config: &TrainConfig,
    runs: usize,
) -> Result<Vec<JointRun>, ExperimentError> {
    (0..runs)
        .map(|r| {
            let cfg = TrainConfig { seed: config.seed.wrapping_add(r as u64), ..config.clone() };
            run_joint(base, train, test, &cfg)
        })
        .collect()
}

/// The first `size` sentences of a seeded shuffle of `dsup`, so smaller
/// subsets are nested in larger ones.
pub fn subsample(dsup: &[Scene], size: usize, seed: u64) -> Vec<Scene> {
    let mut order: Vec<usize> = (0..dsup.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.into_iter().take(size).map(|i| dsup[i].clone()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    /// Sentences actually used (at most the D_sup size).
    pub size: usize,
    pub runs: Vec<Metrics>,
    pub mean: Metrics,
}

/// Bootstrap on nested subsets of `split.dsup`, then train and test on the
/// fixed `split.train` / `split.test`.
pub fn curve(
    split: &Split,
    inv: &AttributeInventory,
    sizes: &[usize],
    boot: &BootstrapConfig,
    config: &TrainConfig,
    runs: usize,
) -> Result<Vec<CurvePoint>, ExperimentError> {
    let mut out = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let dsup = subsample(&split.dsup, size, config.seed);
        let (model, _) = bootstrap(&dsup, inv, boot)?;
        let metrics: Vec<Metrics> =
            joint_runs(&model, &split.train, &split.test, config, runs)?.into_iter().map(|r| r.test.into()).collect();
        log::info!("curve size {}: f1 {:.3}", dsup.len(), Metrics::mean(&metrics).f1);
        out.push(CurvePoint { size: dsup.len(), mean: Metrics::mean(&metrics), runs: metrics });
    }
    Ok(out)
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("size,precision,recall,f1\n");
    for p in points {
        s.push_str(&format!("{},{:.4},{:.4},{:.4}\n", p.size, p.mean.precision, p.mean.recall, p.mean.f1));
    }
    s
}

/// The strongest single-word association of a word.
#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub word: String,
    /// Attribute the word names in the generator.
    pub attribute: String,
    /// Constant list of the heaviest lexeme (`null` for the null class,
    /// none on a tie or when the word has no entry).
    pub bound: Option<String>,
    pub correct: bool,
}

/// For every non-primary surface word of `inv` occurring in `sentences`,
/// whether its heaviest lexeme is the single constant of its attribute.
pub fn synonym_bindings(model: &JointModel, inv: &AttributeInventory, sentences: &[Scene]) -> Vec<Binding> {
    let used: std::collections::BTreeSet<String> = sentences.iter().flat_map(|s| s.tokens()).collect();
    let mut out = Vec::new();
    for a in &inv.attributes {
        for w in a.words.iter().skip(1).filter(|w| used.contains(*w)) {
            let mut scored: Vec<(String, f64)> = model
                .lexicon
                .lexemes_for(w)
                .map(|l| {
                    let names: Vec<&str> = l.constants.iter().map(|c| &*c.name).collect();
                    (format!("[{}]", names.join(",")), model.parse.weight(&Feature::Lexeme(l.key())))
                })
                .collect();
            if model.lexicon.null_words().contains(w) {
                scored.push(("null".into(), model.parse.weight(&Feature::Null(w.clone()))));
            }
            let best = scored.iter().map(|(_, x)| *x).fold(f64::NEG_INFINITY, f64::max);
            let top: Vec<&String> = scored.iter().filter(|(_, x)| *x == best).map(|(n, _)| n).collect();
            let bound = match top[..] {
                [one] => Some(one.clone()),
                _ => None,
            };
            let correct = bound.as_deref() == Some(&format!("[{}]", a.name));
            out.push(Binding { word: w.clone(), attribute: a.name.clone(), bound, correct });
        }
    }
    out
}

pub fn bindings_csv(bindings: &[Binding]) -> String {
    let mut s = String::from("word,attribute,bound,correct\n");
    for b in bindings {
        s.push_str(&format!("{},{},{},{}\n", b.word, b.attribute, b.bound.as_deref().unwrap_or("-"), b.correct));
    }
    s
}
