use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::grammar::{tokenize, Feature, Lexeme, Lexicon};
use crate::perception::sigmoid;

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Classifier whose output is `p` on every object.
fn constant_classifier(c: Constant, p: f64) -> AttributeClassifier {
    let mut k = AttributeClassifier::zeros(c, 2, 2);
    k.weights[4] = logit(p);
    k
}

fn random_classifier(c: Constant, rng: &mut ChaCha8Rng) -> AttributeClassifier {
    let mut k = AttributeClassifier::zeros(c, 2, 2);
    let delta: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
    k.apply(&delta, 1.0);
    k
}

fn random_objects(n: usize, rng: &mut ChaCha8Rng) -> Vec<ObjectFeatures> {
    (0..n)
        .map(|i| {
            ObjectFeatures::new(
                format!("o{i}"),
                vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            )
        })
        .collect()
}

const ATTRS: [(&str, bool); 3] = [("red", true), ("blue", true), ("cube", false)];

fn attr(i: usize) -> Constant {
    if ATTRS[i].1 {
        Constant::color(ATTRS[i].0)
    } else {
        Constant::shape(ATTRS[i].0)
    }
}

fn toy_lexicon() -> Lexicon {
    let mut lex = Lexicon::default();
    lex.add_lexeme(Lexeme::new(&["red"], vec![attr(0)]));
    lex.add_lexeme(Lexeme::new(&["blue"], vec![attr(1)]));
    lex.add_lexeme(Lexeme::new(&["cube"], vec![attr(2)]));
    lex.add_lexeme(Lexeme::new(&["thing"], vec![]));
    lex.add_lexeme(Lexeme::new(&["block"], vec![attr(2)]));
    lex.add_lexeme(Lexeme::new(&["block"], vec![attr(0)]));
    lex
}

/// Small model with random parse weights (≤ 30 parameters overall once the
/// classifiers are counted) and random classifiers.
fn random_model(seed: u64) -> JointModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lex = toy_lexicon();
    let mut parse = ParseModel::new();
    for l in lex.lexemes() {
        parse.set_weight(Feature::Lexeme(l.key()), rng.random_range(-1.0..1.0));
    }
    parse.set_weight(Feature::Skip, rng.random_range(-1.5..0.0));
    for t in ["attr_n", "attr_adj", "postmod_id", "np_const"] {
        parse.set_weight(Feature::Template(t.into()), rng.random_range(-1.0..1.0));
    }
    let classifiers = (0..3).map(|i| random_classifier(attr(i), &mut rng)).collect();
    JointModel::new(lex, parse, classifiers, 2, 2)
}

/// Every world over `objects` × `constants` with its probability.
fn worlds(objects: &[ObjectFeatures], constants: &[Constant], model: &JointModel) -> Vec<(WorldAssignment, f64)> {
    let cells: Vec<(String, String, f64)> = objects
        .iter()
        .flat_map(|o| {
            constants.iter().map(move |c| {
                let p = perception::classifier_prob(model.classifier(&c.name).unwrap(), o).unwrap();
                (o.id.clone(), c.name.to_string(), p)
            })
        })
        .collect();
    (0u64..1 << cells.len())
        .map(|bits| {
            let mut w = WorldAssignment::new();
            let mut p = 1.0;
            for (i, (o, c, pc)) in cells.iter().enumerate() {
                let on = bits >> i & 1 == 1;
                w.insert((o.clone(), c.clone()), on);
                p *= if on { *pc } else { 1.0 - pc };
            }
            (w, p)
        })
        .collect()
}

fn ids(objects: &[ObjectFeatures], mask: &[bool]) -> BTreeSet<String> {
    objects.iter().zip(mask).filter(|(_, &m)| m).map(|(o, _)| o.id.clone()).collect()
}

fn brute_set_likelihood(gold: &[bool], z: &Expr, objects: &[ObjectFeatures], model: &JointModel) -> f64 {
    let target = ids(objects, gold);
    worlds(objects, &model.constants(), model)
        .iter()
        .filter(|(w, _)| execute(z, w, objects).unwrap() == target)
        .map(|(_, p)| p)
        .sum()
}

fn forms() -> Vec<Expr> {
    vec![
        Expr::universal(),
        logic::form_of_attributes(&[attr(0)]),
        logic::form_of_attributes(&[attr(2)]),
        logic::form_of_attributes(&[attr(1), attr(2)]),
        logic::form_of_attributes(&[attr(0), attr(1), attr(2)]),
    ]
}

#[test]
fn execute_selects_objects_satisfying_every_conjunct() {
    let objects: Vec<ObjectFeatures> =
        (0..8).map(|i| ObjectFeatures::new(format!("o{i}"), vec![0.0], vec![0.0])).collect();
    let mut w = WorldAssignment::new();
    for (i, o) in objects.iter().enumerate() {
        w.insert((o.id.clone(), "yellow".into()), i < 5);
        w.insert((o.id.clone(), "cube".into()), false);
    }
    let yellow = logic::parse_form("(lam x (color x yellow))").unwrap();
    assert_eq!(execute(&yellow, &w, &objects).unwrap().len(), 5);
    assert_eq!(execute(&Expr::universal(), &w, &objects).unwrap().len(), 8);
    let both = logic::parse_form("(lam x (and (color x yellow) (shape x cube)))").unwrap();
    assert!(execute(&both, &w, &objects).unwrap().is_empty());
    let red = logic::parse_form("(lam x (color x red))").unwrap();
    assert!(matches!(execute(&red, &w, &objects), Err(JointError::MissingAssignment { .. })));
}

#[test]
fn membership_is_a_product() {
    let model = JointModel::new(
        Lexicon::default(),
        ParseModel::new(),
        vec![constant_classifier(attr(0), 0.9), constant_classifier(attr(2), 0.5), constant_classifier(attr(1), 0.8)],
        2,
        2,
    );
    let o = ObjectFeatures::new("o", vec![0.1, 0.2], vec![0.3, 0.4]);
    let red = logic::form_of_attributes(&[attr(0)]);
    assert!((membership_prob(&red, &o, &model).unwrap() - 0.9).abs() < 1e-12);
    let two = logic::form_of_attributes(&[attr(1), attr(2)]);
    assert!((membership_prob(&two, &o, &model).unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(membership_prob(&Expr::universal(), &o, &model).unwrap(), 1.0);
    let green = logic::parse_form("(lam x (color x green))").unwrap();
    assert_eq!(membership_prob(&green, &o, &model), Err(JointError::UnboundConstant("green".into())));
}

#[test]
fn single_object_likelihoods() {
    let model = JointModel::new(Lexicon::default(), ParseModel::new(), vec![constant_classifier(attr(0), 0.7)], 2, 2);
    let o = vec![ObjectFeatures::new("o", vec![0.0, 0.0], vec![0.0, 0.0])];
    let red = logic::form_of_attributes(&[attr(0)]);
    assert!((set_likelihood(&[true], &red, &o, &model).unwrap() - 0.7).abs() < 1e-12);
    assert!((set_likelihood(&[false], &red, &o, &model).unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn universal_form_selects_everything() {
    let model = random_model(1);
    let objects = random_objects(3, &mut ChaCha8Rng::seed_from_u64(2));
    assert_eq!(set_likelihood(&[true, true, true], &Expr::universal(), &objects, &model).unwrap(), 1.0);
    assert_eq!(set_likelihood(&[true, false, true], &Expr::universal(), &objects, &model).unwrap(), 0.0);
}

#[test]
fn membership_matches_world_enumeration() {
    for seed in 0..20 {
        let model = random_model(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let objects = random_objects(rng.random_range(1..=3), &mut rng);
        let all = worlds(&objects, &model.constants(), &model);
        for z in forms() {
            for o in &objects {
                let brute: f64 =
                    all.iter().filter(|(w, _)| execute(&z, w, &objects).unwrap().contains(&o.id)).map(|(_, p)| p).sum();
                assert!((membership_prob(&z, o, &model).unwrap() - brute).abs() < 1e-12);
            }
        }
    }
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn set_likelihood_matches_world_enumeration(seed in 0u64..10_000, n in 1usize..=4, gold_bits in 0u32..16) {
        let model = random_model(seed);
        let objects = random_objects(n, &mut ChaCha8Rng::seed_from_u64(seed ^ 77));
        let gold: Vec<bool> = (0..n).map(|i| gold_bits >> i & 1 == 1).collect();
        for z in forms() {
            let fast = set_likelihood(&gold, &z, &objects, &model).unwrap();
            let brute = brute_set_likelihood(&gold, &z, &objects, &model);
            prop_assert!((fast - brute).abs() <= 1e-12, "{} vs {}", fast, brute);
        }
    }

    #[test]
    fn selection_distribution_sums_to_one(seed in 0u64..10_000, n in 1usize..=5) {
        let model = random_model(seed);
        let objects = random_objects(n, &mut ChaCha8Rng::seed_from_u64(seed ^ 5));
        let x = tokenize("red cube thing");
        let a = Analysis::new(&x, &objects, &model, 50).unwrap();
        let probs = a.beam.probabilities();
        let total: f64 = subsets(n)
            .map(|g| {
                (0..a.beam.len()).map(|z| probs[z] * a.log_set_likelihood(z, &g).exp()).sum::<f64>()
            })
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn posterior_matches_joint_enumeration(seed in 0u64..10_000, n in 1usize..=3, gold_bits in 0u32..8) {
        let model = random_model(seed);
        let objects = random_objects(n, &mut ChaCha8Rng::seed_from_u64(seed ^ 9));
        let gold: Vec<bool> = (0..n).map(|i| gold_bits >> i & 1 == 1).collect();
        let ex = GroundedExample { tokens: tokenize("blue block thing"), objects: objects.clone(), gold: gold.clone() };
        let Ok((a, post)) = posterior(&ex, &model, 100) else { return Ok(()) };
        prop_assert!((post.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let all = worlds(&objects, &model.constants(), &model);
        let target = ids(&objects, &gold);
        let probs = a.beam.probabilities();
        let joint: Vec<f64> = a.beam.parses.iter().zip(&probs).map(|(p, pz)| {
            pz * all.iter().filter(|(w, _)| execute(&p.form, w, &objects).unwrap() == target).map(|(_, pw)| pw).sum::<f64>()
        }).collect();
        let norm: f64 = joint.iter().sum();
        for (w, j) in post.weights.iter().zip(&joint) {
            prop_assert!((w - j / norm).abs() < 1e-9);
        }
    }
}

#[test]
fn posterior_is_proportional_to_likelihood() {
    // two equally likely readings of "block": red (likelihood 0.2 on the
    // single selected object... built through constant classifiers)
    let mut lex = Lexicon::default();
    lex.add_lexeme(Lexeme::new(&["block"], vec![attr(0)]));
    lex.add_lexeme(Lexeme::new(&["block"], vec![attr(2)]));
    let mut parse = ParseModel::new();
    parse.set_weight(Feature::Skip, -1000.0);
    let model =
        JointModel::new(lex, parse, vec![constant_classifier(attr(0), 0.2), constant_classifier(attr(2), 0.1)], 2, 2);
    let ex = GroundedExample {
        tokens: tokenize("block"),
        objects: vec![ObjectFeatures::new("o", vec![0.0, 0.0], vec![0.0, 0.0])],
        gold: vec![true],
    };
    let (a, post) = posterior(&ex, &model, 10).unwrap();
    let red = a.beam.position("(lam x (color x red))").unwrap();
    let cube = a.beam.position("(lam x (shape x cube))").unwrap();
    assert!((post.weights[red] - 2.0 / 3.0).abs() < 1e-9);
    assert!((post.weights[cube] - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn unique_parse_has_full_weight_and_no_language_gradient() {
    let mut lex = Lexicon::default();
    lex.add_lexeme(Lexeme::new(&["red"], vec![attr(0)]));
    let model = JointModel::new(lex, ParseModel::new(), vec![constant_classifier(attr(0), 0.6)], 2, 2);
    let ex = GroundedExample {
        tokens: tokenize("red"),
        objects: vec![ObjectFeatures::new("o", vec![0.0, 0.0], vec![0.0, 0.0])],
        gold: vec![true],
    };
    let a = Analysis::new(&ex.tokens, &ex.objects, &model, 1).unwrap();
    assert_eq!(a.beam.len(), 1);
    let post = a.posterior(&ex.gold).unwrap();
    assert_eq!(post.weights, vec![1.0]);
    let g = a.language_gradient(&post);
    assert!(g.entries().iter().all(|&(_, v)| v.abs() < 1e-15));
}

#[test]
fn language_gradient_favors_the_explaining_parse() {
    let mut lex = Lexicon::default();
    lex.add_lexeme(Lexeme::new(&["block"], vec![attr(0)]));
    lex.add_lexeme(Lexeme::new(&["block"], vec![attr(2)]));
    let mut parse = ParseModel::new();
    crate::grammar::register_features(&lex, [&tokenize("block")], &mut parse);
    parse.set_weight(Feature::Skip, -1000.0);
    let model = JointModel::new(
        lex,
        parse.clone(),
        vec![constant_classifier(attr(0), 0.9), constant_classifier(attr(2), 0.1)],
        2,
        2,
    );
    let ex = GroundedExample {
        tokens: tokenize("block"),
        objects: vec![ObjectFeatures::new("o", vec![0.0, 0.0], vec![0.0, 0.0])],
        gold: vec![true],
    };
    let g = language_gradient(&ex, &model, 10).unwrap();
    let red = parse.id(&Feature::Lexeme("block|[red]".into())).unwrap();
    let cube = parse.id(&Feature::Lexeme("block|[cube]".into())).unwrap();
    assert!(g.get(red) > 0.0);
    assert!(g.get(cube) < 0.0);
}

fn fd_example(seed: u64) -> (JointModel, GroundedExample) {
    let model = random_model(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
    let n = rng.random_range(1..=4);
    let objects = random_objects(n, &mut rng);
    let sentences = ["red block", "blue cube thing", "block", "red blue thing", "thing cube"];
    let tokens = tokenize(sentences[seed as usize % sentences.len()]);
    let gold = (0..n).map(|_| rng.random_bool(0.6)).collect();
    (model, GroundedExample { tokens, objects, gold })
}

fn objective(ex: &GroundedExample, model: &JointModel) -> f64 {
    posterior(ex, model, 1000).map(|(_, p)| p.log_marginal).unwrap_or(f64::NEG_INFINITY)
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if norm < 1e-12 {
        diff
    } else {
        diff / norm
    }
}

#[test]
fn language_gradient_matches_finite_differences() {
    let h = 1e-5;
    let mut checked = 0;
    for seed in 0..30 {
        let (model, ex) = fd_example(seed);
        let Ok(g) = language_gradient(&ex, &model, 1000) else { continue };
        assert!(model.parse.len() + 15 <= 30);
        let (mut analytic, mut numeric) = (Vec::new(), Vec::new());
        for id in 0..model.parse.len() as u32 {
            let mut plus = model.clone();
            plus.parse.weights_mut()[id as usize] += h;
            let mut minus = model.clone();
            minus.parse.weights_mut()[id as usize] -= h;
            numeric.push((objective(&ex, &plus) - objective(&ex, &minus)) / (2.0 * h));
            analytic.push(g.get(id));
        }
        assert!(rel_err(&analytic, &numeric) < 1e-4, "seed {seed}: {analytic:?} vs {numeric:?}");
        checked += 1;
    }
    assert!(checked >= 20);
}

#[test]
fn perception_gradient_matches_finite_differences() {
    let h = 1e-5;
    for seed in 0..30 {
        let (model, ex) = fd_example(seed);
        let Ok(g) = perception_gradient(&ex, &model, 1000) else { continue };
        let (mut analytic, mut numeric) = (Vec::new(), Vec::new());
        for (name, c) in &model.classifiers {
            let mask = c.mask();
            for i in (0..c.dim()).filter(|&i| mask[i]) {
                let mut plus = model.clone();
                plus.classifiers.get_mut(name).unwrap().weights[i] += h;
                let mut minus = model.clone();
                minus.classifiers.get_mut(name).unwrap().weights[i] -= h;
                numeric.push((objective(&ex, &plus) - objective(&ex, &minus)) / (2.0 * h));
                analytic.push(g.get(name).map(|d| d[i]).unwrap_or(0.0));
            }
        }
        assert!(rel_err(&analytic, &numeric) < 1e-4, "seed {seed}");
    }
}

#[test]
fn perception_gradient_matches_world_enumeration() {
    for seed in 0..20 {
        let (model, mut ex) = fd_example(seed);
        ex.objects.truncate(3);
        ex.gold.truncate(3);
        let Ok((a, post)) = posterior(&ex, &model, 1000) else { continue };
        let g = a.perception_gradient(&post, &ex.objects, &ex.gold);
        let all = worlds(&ex.objects, &model.constants(), &model);
        let target = ids(&ex.objects, &ex.gold);
        for (name, c) in &model.classifiers {
            let mut want = vec![0.0; c.dim()];
            for (z, p) in a.beam.parses.iter().enumerate() {
                let consistent: Vec<&(WorldAssignment, f64)> =
                    all.iter().filter(|(w, _)| execute(&p.form, w, &ex.objects).unwrap() == target).collect();
                let mass: f64 = consistent.iter().map(|(_, pw)| pw).sum();
                if mass == 0.0 || !p.constants.iter().any(|k| *k.name == **name) {
                    continue;
                }
                for o in &ex.objects {
                    let expected: f64 = consistent
                        .iter()
                        .filter(|(w, _)| w[&(o.id.clone(), name.clone())])
                        .map(|(_, pw)| pw)
                        .sum::<f64>()
                        / mass;
                    let prior = perception::classifier_prob(c, o).unwrap();
                    for (d, x) in want.iter_mut().zip(o.phi()) {
                        *d += post.weights[z] * (expected - prior) * x;
                    }
                }
            }
            let got = g.get(name).cloned().unwrap_or(vec![0.0; c.dim()]);
            for (x, y) in got.iter().zip(&want) {
                assert!((x - y).abs() < 1e-9, "seed {seed} {name}");
            }
        }
    }
}

#[test]
fn unmentioned_classifiers_get_no_update() {
    let (model, ex) = fd_example(2);
    let g = perception_gradient(&ex, &model, 1000).unwrap();
    // "block" never mentions blue
    assert!(!g.contains_key("blue"));
}

#[test]
fn selected_object_contributes_one_minus_p() {
    let mut lex = Lexicon::default();
    lex.add_lexeme(Lexeme::new(&["red"], vec![attr(0)]));
    let mut parse = ParseModel::new();
    parse.set_weight(Feature::Skip, -1000.0);
    let model = JointModel::new(lex, parse, vec![constant_classifier(attr(0), 0.5)], 2, 2);
    let o = ObjectFeatures::new("o", vec![0.5, -1.0], vec![2.0, 2.0]);
    let ex = GroundedExample { tokens: tokenize("red"), objects: vec![o.clone()], gold: vec![true] };
    let g = perception_gradient(&ex, &model, 10).unwrap();
    let want: Vec<f64> = o.phi().iter().map(|x| 0.5 * x).collect();
    for (a, b) in g["red"].iter().zip(&want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn null_sentence_selects_everything() {
    let mut model = random_model(4);
    model.lexicon.add_null_word("zorp");
    model.lexicon.add_null_word("blick");
    let objects = random_objects(4, &mut ChaCha8Rng::seed_from_u64(1));
    let pred = predict(&tokenize("zorp blick"), &objects, &model, 50, 0.5);
    assert_eq!(pred, vec![true; 4]);
}

#[test]
fn unknown_words_alone_select_nothing() {
    let model = random_model(4);
    let objects = random_objects(4, &mut ChaCha8Rng::seed_from_u64(1));
    let pred = predict(&tokenize("zorp blick"), &objects, &model, 50, 0.5);
    assert_eq!(pred, vec![false; 4]);
}

#[test]
fn single_parse_prediction_is_the_exact_subset_argmax() {
    let mut lex = Lexicon::default();
    lex.add_lexeme(Lexeme::new(&["red"], vec![attr(0)]));
    lex.add_lexeme(Lexeme::new(&["cube"], vec![attr(2)]));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..20 {
        let classifiers = vec![random_classifier(attr(0), &mut rng), random_classifier(attr(2), &mut rng)];
        let model = JointModel::new(lex.clone(), ParseModel::new(), classifiers, 2, 2);
        let n = 1 + trial % 10;
        let objects = random_objects(n, &mut rng);
        let x = tokenize("red cube");
        let a = Analysis::new(&x, &objects, &model, 1).unwrap();
        assert_eq!(a.beam.len(), 1);
        let z = a.beam.parses[0].form.clone();
        let best = subsets(n)
            .map(|g| (set_likelihood(&g, &z, &objects, &model).unwrap(), g))
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap()
            .1;
        assert_eq!(predict(&x, &objects, &model, 1, 0.5), best);
    }
}

#[test]
fn learning_rate_decays_linearly_to_zero() {
    let c = TrainConfig::default();
    assert_eq!(c.rate(0), 0.1);
    assert!((c.rate(1000) - 0.09).abs() < 1e-12);
    assert_eq!(c.rate(20_000), 0.0);
}

fn bootstrap_model() -> JointModel {
    let mut lex = Lexicon::default();
    lex.add_lexeme(Lexeme::new(&["red"], vec![attr(0)]));
    lex.add_lexeme(Lexeme::new(&["cube"], vec![attr(2)]));
    lex.add_lexeme(Lexeme::new(&["the"], vec![]));
    let mut parse = ParseModel::new();
    crate::grammar::register_features(&lex, [&tokenize("the red cube")], &mut parse);
    JointModel::new(lex, parse, vec![constant_classifier(attr(0), 0.5), constant_classifier(attr(2), 0.5)], 2, 2)
}

fn unknown_word_data() -> Vec<GroundedExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    ["the green cube", "the green things", "the round thing", "red ball"]
        .iter()
        .map(|s| {
            let objects = random_objects(3, &mut rng);
            GroundedExample { tokens: tokenize(s), objects, gold: vec![true, false, false] }
        })
        .collect()
}

#[test]
fn extension_adds_bank_and_lexemes_once() {
    let model = bootstrap_model();
    let data = unknown_word_data();
    let config = TrainConfig::default();
    let once = extend_model(&model, &data, &config).unwrap();
    assert_eq!(once.classifiers.len(), 2 + 6);
    assert_eq!(once.classifiers["NEW0"].channel(), crate::logic::Channel::Color);
    assert_eq!(once.classifiers["NEW5"].channel(), crate::logic::Channel::Shape);
    let green: Vec<_> = once.lexicon.lexemes_for("green").collect();
    assert_eq!(green.len(), 6 + model.lexicon.constant_lists().len());
    for l in &green {
        assert_eq!(once.parse.weight(&Feature::Lexeme(l.key())), 0.0);
    }
    let twice = extend_model(&once, &data, &config).unwrap();
    assert_eq!(twice.lexicon.to_text(), once.lexicon.to_text());
    assert_eq!(twice.classifiers, once.classifiers);
    assert_eq!(twice.parse.to_entries(), once.parse.to_entries());
}

#[test]
fn extension_without_unknown_words_adds_only_classifiers() {
    let model = bootstrap_model();
    let mut data = unknown_word_data();
    data.clear();
    data.push(GroundedExample { tokens: tokenize("the red cube"), objects: vec![], gold: vec![] });
    let out = extend_model(&model, &data, &TrainConfig::default()).unwrap();
    assert_eq!(out.classifiers.len(), 8);
    assert_eq!(out.lexicon.to_text(), model.lexicon.to_text());
}

#[test]
fn zero_epochs_leave_model_unchanged() {
    let data = unknown_word_data();
    let model = extend_model(&bootstrap_model(), &data, &TrainConfig::default()).unwrap();
    let config = TrainConfig { epochs: 0, ..TrainConfig::default() };
    let (out, reports) = train_online(&model, &data, &config, |_, _| {});
    assert!(reports.is_empty());
    assert_eq!(out.parse.to_entries(), model.parse.to_entries());
    assert_eq!(out.classifiers, model.classifiers);
}

#[test]
fn training_is_deterministic_given_seed() {
    let data = unknown_word_data();
    let config = TrainConfig { epochs: 3, ..TrainConfig::default() };
    let model = extend_model(&bootstrap_model(), &data, &config).unwrap();
    let (a, ra) = train_online(&model, &data, &config, |_, _| {});
    let (b, rb) = train_online(&model, &data, &config, |_, _| {});
    assert_eq!(ra, rb);
    assert_eq!(a.parse.to_entries(), b.parse.to_entries());
    assert_eq!(a.classifiers, b.classifiers);
}

#[test]
fn sigmoid_of_logit_round_trips() {
    for p in [0.1, 0.5, 0.75, 0.99] {
        assert!((sigmoid(logit(p)) - p).abs() < 1e-12);
    }
}
