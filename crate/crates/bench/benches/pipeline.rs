use criterion::{criterion_group, criterion_main, Criterion};

use grounded::experiment::examples;
use grounded::joint::{extend_model, set_likelihood, train_online, TrainConfig};
use grounded::logic::{form_of_attributes, Constant};
use grounded::perception::{AttributeClassifier, ObjectFeatures};
use grounded_bench::small_setup;

fn parsing(c: &mut Criterion) {
    let (split, model) = small_setup(30, 1);
    let sentences: Vec<Vec<String>> = split.dsup.iter().take(20).map(|s| s.tokens()).collect();
    c.bench_function("parse 20 sentences, beam 50", |b| {
        b.iter(|| sentences.iter().map(|x| model.parse_sentence(x, 50).len()).sum::<usize>())
    });
}

fn likelihood(c: &mut Criterion) {
    let constants = [Constant::color("red"), Constant::shape("cube")];
    let classifiers: Vec<AttributeClassifier> = constants
        .iter()
        .map(|k| {
            let mut cl = AttributeClassifier::zeros(k.clone(), 16, 16);
            cl.apply(&(0..33).map(|i| (i as f64 * 0.37).sin()).collect::<Vec<_>>(), 1.0);
            cl
        })
        .collect();
    let model = grounded::joint::JointModel::new(Default::default(), Default::default(), classifiers, 16, 16);
    let objects: Vec<ObjectFeatures> = (0..10)
        .map(|i| {
            let v = |k: usize| (0..16).map(|j| ((i * 31 + j * k) as f64).cos() * 0.25).collect();
            ObjectFeatures::new(format!("o{i}"), v(3), v(7))
        })
        .collect();
    let gold: Vec<bool> = (0..10).map(|i| i % 3 == 0).collect();
    let z = form_of_attributes(&constants);
    c.bench_function("set likelihood, 10 objects, 2 conjuncts", |b| {
        b.iter(|| set_likelihood(&gold, &z, &objects, &model).unwrap())
    });
}

fn training(c: &mut Criterion) {
    let (split, model) = small_setup(30, 1);
    let data = examples(&split.train);
    let config = TrainConfig { epochs: 1, ..TrainConfig::default() };
    let extended = extend_model(&model, &data, &config).unwrap();
    let mut group = c.benchmark_group("joint");
    group.sample_size(10);
    group.bench_function("one epoch", |b| b.iter(|| train_online(&extended, &data, &config, |_, _| {})));
    group.finish();
}

criterion_group!(benches, parsing, likelihood, training);
criterion_main!(benches);
