//! Synthetic scenes: attribute inventory, corpus generator, dataset files and
//! the attribute-based data splits.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::grammar::tokenize;
use crate::joint::GroundedExample;
use crate::logic::{attribute_set, canonicalize, form_of_attributes, parse_form, Channel, Constant, Expr};
use crate::perception::{ObjectFeatures, WorldAssignment};

mod text;

pub use text::{FILLER_WORDS, MULTI_TEMPLATES, SINGLE_TEMPLATES};

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("scene generation failed: {0}")]
    Generation(String),
    #[error("bad split: {0}")]
    Split(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed dataset at line {line}, column {column}: {message}")]
    Syntax { path: String, line: usize, column: usize, message: String },
    #[error("scene `{id}`: {message}")]
    Schema { id: String, message: String },
    #[error("thesaurus line {line}: {message}")]
    Thesaurus { line: usize, message: String },
}

pub const COLORS: [&str; 6] = ["red", "green", "blue", "yellow", "orange", "purple"];
pub const SHAPES: [&str; 6] = ["cube", "arch", "triangle", "cylinder", "sphere", "cone"];

/// Attributes whose data initializes the model.
pub const BOOTSTRAP_ATTRIBUTES: [&str; 6] = ["yellow", "orange", "purple", "cylinder", "sphere", "cone"];
/// Attributes that must be learned from sentence/scene/selection triples.
pub const EVAL_ATTRIBUTES: [&str; 6] = ["red", "green", "blue", "cube", "arch", "triangle"];

/// Surface words per attribute; the first entry is the primary word.
pub const SYNONYMS: [(&str, [&str; 5]); 12] = [
    ("red", ["red", "crimson", "scarlet", "ruby", "cherry"]),
    ("green", ["green", "emerald", "lime", "olive", "jade"]),
    ("blue", ["blue", "navy", "azure", "cobalt", "sapphire"]),
    ("yellow", ["yellow", "golden", "lemon", "mustard", "canary"]),
    ("orange", ["orange", "tangerine", "amber", "peach", "apricot"]),
    ("purple", ["purple", "violet", "lavender", "plum", "lilac"]),
    ("cube", ["cube", "box", "cuboid", "dice", "square"]),
    ("arch", ["arch", "half-pipe", "bridge", "tunnel", "curve"]),
    ("triangle", ["triangle", "wedge", "pyramid", "ramp", "prism"]),
    ("cylinder", ["cylinder", "tube", "pipe", "column", "can"]),
    ("sphere", ["sphere", "ball", "globe", "orb", "marble"]),
    ("cone", ["cone", "funnel", "spike", "spire", "horn"]),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub channel: Channel,
    pub prototype: Vec<f64>,
    /// Surface words, primary first.
    pub words: Vec<String>,
}

impl Attribute {
    pub fn constant(&self) -> Constant {
        Constant::new(&self.name, self.channel)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeInventory {
    pub color_dims: usize,
    pub shape_dims: usize,
    pub attributes: Vec<Attribute>,
}

/// `count` orthonormal random vectors of dimension `d` (Gram-Schmidt on
/// Gaussian draws); when `count > d` the surplus vectors are only unit-norm.
fn prototypes(rng: &mut ChaCha8Rng, count: usize, d: usize) -> Vec<Vec<f64>> {
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    while out.len() < count {
        let mut v: Vec<f64> = (0..d).map(|_| n.sample(rng)).collect();
        if out.len() < d {
            for u in &out {
                let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            out.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

impl AttributeInventory {
    /// Six colors and six shapes with random orthonormal prototypes (per
    /// channel) drawn from `seed`. With `synonyms` off each attribute has only its primary word.
    pub fn standard(color_dims: usize, shape_dims: usize, synonyms: bool, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table: BTreeMap<&str, &[&str; 5]> = SYNONYMS.iter().map(|(a, w)| (*a, w)).collect();
        let mut attributes = Vec::new();
        for (names, channel, d) in [(&COLORS, Channel::Color, color_dims), (&SHAPES, Channel::Shape, shape_dims)] {
            let protos = prototypes(&mut rng, names.len(), d);
            for (name, prototype) in names.iter().zip(protos) {
                let words = table[name];
                let words =
                    if synonyms { words.iter().map(|w| w.to_string()).collect() } else { vec![words[0].to_string()] };
                attributes.push(Attribute { name: name.to_string(), channel, prototype, words });
            }
        }
        AttributeInventory { color_dims, shape_dims, attributes }
    }

    pub fn get(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn of_channel(&self, channel: Channel) -> Vec<&Attribute> {
        self.attributes.iter().filter(|a| a.channel == channel).collect()
    }

    /// Attribute a surface word refers to, if any.
    pub fn attribute_of_word(&self, word: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.words.iter().any(|w| w == word))
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::Generation(m));
        if self.of_channel(Channel::Color).is_empty() || self.of_channel(Channel::Shape).is_empty() {
            return bad("inventory needs at least one color and one shape".into());
        }
        for a in &self.attributes {
            let d = match a.channel {
                Channel::Color => self.color_dims,
                Channel::Shape => self.shape_dims,
            };
            if a.prototype.len() != d {
                return bad(format!("prototype of `{}` has {} components, expected {d}", a.name, a.prototype.len()));
            }
            if a.words.is_empty() {
                return bad(format!("attribute `{}` has no surface words", a.name));
            }
        }
        Ok(())
    }

    /// Plain-text thesaurus, one `attribute: word, word, ...` line each.
    pub fn thesaurus(&self) -> String {
        self.attributes.iter().map(|a| format!("{}: {}\n", a.name, a.words.join(", "))).collect()
    }
}

/// Synonym sets keyed by attribute name, in file order.
pub type Thesaurus = Vec<(String, Vec<String>)>;

pub fn parse_thesaurus(text: &str) -> Result<Thesaurus, SceneError> {
    let mut out: Thesaurus = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| SceneError::Thesaurus { line: i + 1, message: m.to_string() };
        let (head, rest) = line.split_once(':').ok_or_else(|| err("expected `attribute: word, word, ...`"))?;
        let words: Vec<String> = rest.split(',').map(|w| w.trim().to_lowercase()).filter(|w| !w.is_empty()).collect();
        if head.trim().is_empty() || words.is_empty() {
            return Err(err("empty attribute or word list"));
        }
        out.push((head.trim().to_string(), words));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub scenes: usize,
    pub sentences_per_scene: usize,
    pub min_objects: usize,
    pub max_objects: usize,
    pub noise: f64,
    pub color_dims: usize,
    pub shape_dims: usize,
    pub seed: u64,
    /// Probability that an attribute is named by its primary word.
    pub primary_word: f64,
    /// Probability that a scene's description names a color and a shape.
    pub two_attributes: f64,
    pub max_retries: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            scenes: 142,
            sentences_per_scene: 7,
            min_objects: 4,
            max_objects: 10,
            noise: 0.1,
            color_dims: 16,
            shape_dims: 16,
            seed: 0,
            primary_word: 0.45,
            two_attributes: 0.4,
            max_retries: 1000,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: &str| Err(SceneError::Generation(m.to_string()));
        if !self.noise.is_finite() || self.noise < 0.0 {
            return bad("noise must be finite and non-negative");
        }
        if self.min_objects < 2 || self.min_objects > self.max_objects {
            return bad("object count range must be non-empty and start at 2 or more");
        }
        if self.sentences_per_scene == 0 {
            return bad("sentences per scene must be positive");
        }
        if !(0.0..=1.0).contains(&self.primary_word) || !(0.0..=1.0).contains(&self.two_attributes) {
            return bad("probabilities must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truth {
    pub color: String,
    pub shape: String,
}

impl Truth {
    pub fn has(&self, attribute: &str) -> bool {
        self.color == attribute || self.shape == attribute
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneObject {
    pub features: ObjectFeatures,
    pub truth: Option<Truth>,
}

/// One sentence/annotation pair over a visual scene.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    /// `s<visual scene>-<sentence>`.
    pub id: String,
    /// Index of the visual scene; sentences about the same objects share it.
    pub scene: usize,
    pub sentence: String,
    pub objects: Vec<SceneObject>,
    pub gold: BTreeSet<String>,
    pub lf: Option<Expr>,
    pub world: Option<WorldAssignment>,
}

impl Scene {
    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.sentence)
    }

    pub fn features(&self) -> Vec<ObjectFeatures> {
        self.objects.iter().map(|o| o.features.clone()).collect()
    }

    pub fn gold_mask(&self) -> Vec<bool> {
        self.objects.iter().map(|o| self.gold.contains(&o.features.id)).collect()
    }

    pub fn example(&self) -> GroundedExample {
        GroundedExample { tokens: self.tokens(), objects: self.features(), gold: self.gold_mask() }
    }

    /// Attribute names in the gold form.
    pub fn attributes(&self) -> BTreeSet<String> {
        match &self.lf {
            Some(z) => {
                attribute_set(z).map(|s| s.into_iter().map(|c| c.name.to_string()).collect()).unwrap_or_default()
            }
            None => BTreeSet::new(),
        }
    }

    pub fn strip_labels(&mut self) {
        self.lf = None;
        self.world = None;
    }
}

/// All objects whose true attributes include every constant of `z`.
pub fn select_by_truth(z: &Expr, objects: &[SceneObject]) -> Option<BTreeSet<String>> {
    let attrs = attribute_set(z).ok()?;
    let mut out = BTreeSet::new();
    for o in objects {
        let t = o.truth.as_ref()?;
        if attrs.iter().all(|c| t.has(&c.name)) {
            out.insert(o.features.id.clone());
        }
    }
    Some(out)
}

fn truth_world(objects: &[SceneObject], attributes: &[&str]) -> Option<WorldAssignment> {
    let mut w = WorldAssignment::new();
    for o in objects {
        let t = o.truth.as_ref()?;
        for a in attributes {
            w.insert((o.features.id.clone(), a.to_string()), t.has(a));
        }
    }
    Some(w)
}

fn noisy(rng: &mut ChaCha8Rng, proto: &[f64], noise: &Normal<f64>) -> Vec<f64> {
    proto.iter().map(|x| x + noise.sample(rng)).collect()
}

fn pick_word(rng: &mut ChaCha8Rng, a: &Attribute, primary: f64) -> String {
    if a.words.len() == 1 || rng.random_bool(primary) {
        a.words[0].clone()
    } else {
        a.words[rng.random_range(1..a.words.len())].clone()
    }
}

/// Cycles through shuffled copies of `items` until `count` are drawn.
fn cycle<T: Clone>(rng: &mut ChaCha8Rng, items: &[T], count: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count && !items.is_empty() {
        let mut round = items.to_vec();
        round.shuffle(rng);
        out.extend(round.into_iter().take(count - out.len()));
    }
    out
}

/// What each visual scene describes: a share `cfg.two_attributes` of
/// color-and-shape pairs, the rest single attributes, each kind cycled so
/// that attributes are described equally often.
fn schedule<'a>(rng: &mut ChaCha8Rng, attributes: &'a [Attribute], cfg: &GenConfig) -> Vec<Vec<&'a Attribute>> {
    let doubles = (cfg.scenes as f64 * cfg.two_attributes).round() as usize;
    let singles: Vec<Vec<&Attribute>> = attributes.iter().map(|a| vec![a]).collect();
    let mut pairs: Vec<Vec<&Attribute>> = Vec::new();
    for c in attributes.iter().filter(|a| a.channel == Channel::Color) {
        for sh in attributes.iter().filter(|a| a.channel == Channel::Shape) {
            pairs.push(vec![c, sh]);
        }
    }
    let mut out = cycle(rng, &pairs, doubles);
    out.extend(cycle(rng, &singles, cfg.scenes - doubles));
    out.shuffle(rng);
    out
}

/// Generates `cfg.scenes` visual scenes with `cfg.sentences_per_scene`
/// descriptions each. Every object carries its true attributes, and every
/// record carries its gold form and a world over all inventory attributes.
pub fn generate(inv: &AttributeInventory, cfg: &GenConfig) -> Result<Vec<Scene>, SceneError> {
    inv.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise).map_err(|e| SceneError::Generation(e.to_string()))?;
    let colors = inv.of_channel(Channel::Color);
    let shapes = inv.of_channel(Channel::Shape);
    let all_names: Vec<&str> = inv.attributes.iter().map(|a| a.name.as_str()).collect();
    let mut out = Vec::with_capacity(cfg.scenes * cfg.sentences_per_scene);
    for (s, described) in schedule(&mut rng, &inv.attributes, cfg).into_iter().enumerate() {
        let lf = form_of_attributes(described.iter().map(|a| a.constant()).collect::<Vec<_>>().iter());
        let mut attempt = 0;
        let (objects, gold) = loop {
            if attempt == cfg.max_retries {
                return Err(SceneError::Generation(format!("scene {s}: no object layout after {attempt} tries")));
            }
            attempt += 1;
            let n = rng.random_range(cfg.min_objects..=cfg.max_objects);
            let mut truths: Vec<(&Attribute, &Attribute)> =
                (0..n).map(|_| (*colors.choose(&mut rng).unwrap(), *shapes.choose(&mut rng).unwrap())).collect();
            // at least one object matches the description
            let k = rng.random_range(0..n);
            for a in &described {
                match a.channel {
                    Channel::Color => truths[k].0 = a,
                    Channel::Shape => truths[k].1 = a,
                }
            }
            let objects: Vec<SceneObject> = truths
                .iter()
                .enumerate()
                .map(|(i, (c, sh))| SceneObject {
                    features: ObjectFeatures::new(
                        format!("o{i}"),
                        noisy(&mut rng, &c.prototype, &noise),
                        noisy(&mut rng, &sh.prototype, &noise),
                    ),
                    truth: Some(Truth { color: c.name.clone(), shape: sh.name.clone() }),
                })
                .collect();
            let gold = select_by_truth(&lf, &objects).expect("generated objects carry truth");
            if !gold.is_empty() && gold.len() < objects.len() {
                break (objects, gold);
            }
        };
        let world = truth_world(&objects, &all_names);
        for j in 0..cfg.sentences_per_scene {
            let sentence = text::describe(&mut rng, &described, cfg.primary_word);
            out.push(Scene {
                id: format!("s{s:03}-{j}"),
                scene: s,
                sentence,
                objects: objects.clone(),
                gold: gold.clone(),
                lf: Some(lf.clone()),
                world: world.clone(),
            });
        }
    }
    Ok(out)
}

/// Bootstrap, training and held-out scenes.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub dsup: Vec<Scene>,
    pub train: Vec<Scene>,
    pub test: Vec<Scene>,
}

fn check_partition(inv: &AttributeInventory, bootstrap: &[&str], eval: &[&str]) -> Result<(), SceneError> {
    let b: BTreeSet<&str> = bootstrap.iter().copied().collect();
    let e: BTreeSet<&str> = eval.iter().copied().collect();
    if let Some(x) = b.intersection(&e).next() {
        return Err(SceneError::Split(format!("attribute `{x}` is both bootstrap and eval")));
    }
    let all: BTreeSet<&str> = inv.attributes.iter().map(|a| a.name.as_str()).collect();
    let covered: BTreeSet<&str> = b.union(&e).copied().collect();
    if covered != all {
        return Err(SceneError::Split("bootstrap and eval attributes must together cover the inventory".into()));
    }
    Ok(())
}

/// Shuffles visual-scene indices and splits their sentences by `fraction`.
fn split_scenes(scenes: Vec<Scene>, fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<Scene>, Vec<Scene>) {
    let mut ids: Vec<usize> = scenes.iter().map(|s| s.scene).collect::<BTreeSet<_>>().into_iter().collect();
    ids.shuffle(rng);
    let cut = ((ids.len() as f64) * fraction).round() as usize;
    let first: BTreeSet<usize> = ids[..cut.min(ids.len())].iter().copied().collect();
    scenes.into_iter().partition(|s| first.contains(&s.scene))
}

/// Scenes that mention only bootstrap attributes form D_sup (labels kept,
/// worlds restricted to bootstrap attributes). The rest are split 80/20 by
/// visual scene with labels stripped.
pub fn split_by_attribute(
    inv: &AttributeInventory,
    scenes: &[Scene],
    bootstrap: &[&str],
    eval: &[&str],
    train_fraction: f64,
    seed: u64,
) -> Result<Split, SceneError> {
    check_partition(inv, bootstrap, eval)?;
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(SceneError::Split(format!("train fraction {train_fraction} outside [0, 1]")));
    }
    let boot: BTreeSet<&str> = bootstrap.iter().copied().collect();
    let mut dsup = Vec::new();
    let mut rest = Vec::new();
    for s in scenes {
        let attrs = s.attributes();
        if attrs.is_empty() {
            return Err(SceneError::Split(format!("scene `{}` has no gold form", s.id)));
        }
        let mut s = s.clone();
        if attrs.iter().all(|a| boot.contains(a.as_str())) {
            let world = truth_world(&s.objects, bootstrap)
                .ok_or_else(|| SceneError::Split(format!("scene `{}` lacks generator truth", s.id)))?;
            s.world = Some(world);
            dsup.push(s);
        } else {
            s.strip_labels();
            rest.push(s);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train, test) = split_scenes(rest, train_fraction, &mut rng);
    Ok(Split { dsup, train, test })
}

/// True when every attribute in the sentence is named by its primary word.
pub fn uses_primary_words(inv: &AttributeInventory, s: &Scene) -> bool {
    s.tokens().iter().all(|t| match inv.attribute_of_word(t) {
        Some(a) => a.words[0] == *t,
        None => true,
    })
}

/// Split for the synonym experiment: every attribute is known from
/// initialization, but D_sup only ever names attributes by their primary
/// words. Visual scenes are split by `train_fraction`; the primary-word
/// sentences of the training scenes form D_sup, their other sentences
/// D_train, and the held-out scenes' sentences that use a non-primary
/// synonym D_test.
pub fn synonym_split(
    inv: &AttributeInventory,
    scenes: &[Scene],
    train_fraction: f64,
    seed: u64,
) -> Result<Split, SceneError> {
    if inv.attributes.iter().all(|a| a.words.len() < 2) {
        return Err(SceneError::Split("synonym table is absent".into()));
    }
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(SceneError::Split(format!("train fraction {train_fraction} outside [0, 1]")));
    }
    let names: Vec<&str> = inv.attributes.iter().map(|a| a.name.as_str()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train_half, test_half) = split_scenes(scenes.to_vec(), train_fraction, &mut rng);
    let (mut dsup, mut train) = (Vec::new(), Vec::new());
    for mut s in train_half {
        if s.lf.is_none() {
            return Err(SceneError::Split(format!("scene `{}` has no gold form", s.id)));
        }
        if uses_primary_words(inv, &s) {
            s.world = Some(
                truth_world(&s.objects, &names)
                    .ok_or_else(|| SceneError::Split(format!("scene `{}` lacks generator truth", s.id)))?,
            );
            dsup.push(s);
        } else {
            s.strip_labels();
            train.push(s);
        }
    }
    let test = test_half
        .into_iter()
        .filter(|s| !uses_primary_words(inv, s))
        .map(|mut s| {
            s.strip_labels();
            s
        })
        .collect();
    Ok(Split { dsup, train, test })
}

// -- dataset files

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub color: usize,
    pub shape: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub dims: Dims,
    pub seed: u64,
    pub inventory: Vec<Attribute>,
}

impl Meta {
    pub fn new(inv: &AttributeInventory, seed: u64) -> Self {
        Meta { dims: Dims { color: inv.color_dims, shape: inv.shape_dims }, seed, inventory: inv.attributes.clone() }
    }

    pub fn inventory(&self) -> AttributeInventory {
        AttributeInventory {
            color_dims: self.dims.color,
            shape_dims: self.dims.shape,
            attributes: self.inventory.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub meta: Meta,
    pub scenes: Vec<Scene>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectRepr {
    id: String,
    color_features: Vec<f64>,
    shape_features: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth: Option<Truth>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneRepr {
    id: String,
    scene: usize,
    sentence: String,
    objects: Vec<ObjectRepr>,
    gold: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lf: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    world: Option<BTreeMap<String, BTreeMap<String, bool>>>,
}

#[derive(Serialize)]
struct FileOut<'a> {
    meta: &'a Meta,
    scenes: Vec<SceneRepr>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileIn {
    meta: Meta,
    scenes: Vec<serde_json::Value>,
}

fn to_repr(s: &Scene) -> SceneRepr {
    let world = s.world.as_ref().map(|w| {
        let mut m: BTreeMap<String, BTreeMap<String, bool>> = BTreeMap::new();
        for ((o, c), v) in w {
            m.entry(o.clone()).or_default().insert(c.clone(), *v);
        }
        m
    });
    SceneRepr {
        id: s.id.clone(),
        scene: s.scene,
        sentence: s.sentence.clone(),
        objects: s
            .objects
            .iter()
            .map(|o| ObjectRepr {
                id: o.features.id.clone(),
                color_features: o.features.color.clone(),
                shape_features: o.features.shape.clone(),
                truth: o.truth.clone(),
            })
            .collect(),
        gold: s.gold.iter().cloned().collect(),
        lf: s.lf.as_ref().map(|z| z.to_string()),
        world,
    }
}

fn from_repr(r: SceneRepr, meta: &Meta) -> Result<Scene, SceneError> {
    let err = |m: String| SceneError::Schema { id: r.id.clone(), message: m };
    let mut ids = BTreeSet::new();
    for o in &r.objects {
        if o.color_features.len() != meta.dims.color || o.shape_features.len() != meta.dims.shape {
            return Err(err(format!("object `{}` does not match the declared feature dims", o.id)));
        }
        if !ids.insert(o.id.clone()) {
            return Err(err(format!("duplicate object id `{}`", o.id)));
        }
    }
    let gold: BTreeSet<String> = r.gold.iter().cloned().collect();
    if let Some(g) = gold.iter().find(|g| !ids.contains(*g)) {
        return Err(err(format!("gold object `{g}` is not in the scene")));
    }
    let lf = match &r.lf {
        Some(text) => {
            let z = parse_form(text).map_err(|e| err(format!("lf: {e}")))?;
            let canon = canonicalize(&z);
            if canon != z {
                return Err(err(format!("lf `{text}` is not canonical (expected `{canon}`)")));
            }
            attribute_set(&z).map_err(|e| err(format!("lf: {e}")))?;
            Some(z)
        }
        None => None,
    };
    let world = match r.world {
        Some(m) => {
            let mut w = WorldAssignment::new();
            for (o, row) in m {
                if !ids.contains(&o) {
                    return Err(err(format!("world mentions unknown object `{o}`")));
                }
                for (c, v) in row {
                    w.insert((o.clone(), c), v);
                }
            }
            Some(w)
        }
        None => None,
    };
    let objects = r
        .objects
        .into_iter()
        .map(|o| SceneObject {
            features: ObjectFeatures::new(o.id, o.color_features, o.shape_features),
            truth: o.truth,
        })
        .collect();
    Ok(Scene { id: r.id, scene: r.scene, sentence: r.sentence, objects, gold, lf, world })
}

impl Dataset {
    pub fn to_json(&self) -> String {
        let file = FileOut { meta: &self.meta, scenes: self.scenes.iter().map(to_repr).collect() };
        let mut s = serde_json::to_string_pretty(&file).expect("dataset serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &str) -> Result<Dataset, SceneError> {
        let file: FileIn = serde_json::from_str(text).map_err(|e| SceneError::Syntax {
            path: path.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut scenes = Vec::with_capacity(file.scenes.len());
        for (i, v) in file.scenes.into_iter().enumerate() {
            let id = v.get("id").and_then(|x| x.as_str()).map(str::to_string).unwrap_or_else(|| format!("#{i}"));
            let repr: SceneRepr =
                serde_json::from_value(v).map_err(|e| SceneError::Schema { id: id.clone(), message: e.to_string() })?;
            scenes.push(from_repr(repr, &file.meta)?);
        }
        Ok(Dataset { meta: file.meta, scenes })
    }

    pub fn save(&self, path: &Path) -> Result<(), SceneError> {
        fs::write(path, self.to_json()).map_err(|source| SceneError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Dataset, SceneError> {
        let text =
            fs::read_to_string(path).map_err(|source| SceneError::Io { path: path.display().to_string(), source })?;
        Dataset::from_json(&text, &path.display().to_string())
    }
}
