//! Subcommand implementations. Each returns the comma-separated report that
//! the binary prints.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use grounded::experiment::{
    self, bindings_csv, bootstrap as bootstrap_model, curve as run_curve, curve_csv, inspect as weight_matrix,
    joint_runs, language_ablation, synonym_bindings, vision_baseline, BootstrapConfig, Metrics,
};
use grounded::joint::{self, Counts, EpochReport, JointModel, TrainConfig};
use grounded::perception::ClassifierConfig;
use grounded::scenes::{
    generate, parse_thesaurus, split_by_attribute, synonym_split, AttributeInventory, Dataset, GenConfig, Meta,
    BOOTSTRAP_ATTRIBUTES, EVAL_ATTRIBUTES,
};

use crate::model_file::ModelFile;

pub const DSUP_FILE: &str = "dsup.json";
pub const TRAIN_FILE: &str = "train.json";
pub const TEST_FILE: &str = "test.json";
/// Fraction of the eval scenes used for training.
pub const TRAIN_FRACTION: f64 = 0.8;

fn metrics_row(label: &str, c: &Counts) -> String {
    format!("{label},{:.4},{:.4},{:.4}", c.precision(), c.recall(), c.f1())
}

fn mean_row(label: &str, m: &Metrics) -> String {
    format!("{label},{:.4},{:.4},{:.4}", m.precision, m.recall, m.f1)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    Ok(Dataset::load(path)?)
}

pub fn load_model(path: &Path) -> Result<(JointModel, serde_json::Value)> {
    let file = ModelFile::load(path).with_context(|| format!("cannot load model {}", path.display()))?;
    Ok((file.model()?, file.config))
}

#[derive(Clone, Debug)]
pub struct GenArgs {
    pub scenes: usize,
    pub noise: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Also write the generator's thesaurus here.
    pub thesaurus: Option<PathBuf>,
}

/// Generates a corpus and writes the attribute split.
pub fn gen(args: &GenArgs) -> Result<String> {
    let cfg = GenConfig { scenes: args.scenes, noise: args.noise, seed: args.seed, ..GenConfig::default() };
    cfg.validate()?;
    let inv = AttributeInventory::standard(cfg.color_dims, cfg.shape_dims, true, args.seed);
    let scenes = generate(&inv, &cfg)?;
    let split = split_by_attribute(&inv, &scenes, &BOOTSTRAP_ATTRIBUTES, &EVAL_ATTRIBUTES, TRAIN_FRACTION, args.seed)?;
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let mut out = String::from("file,sentences,scenes\n");
    for (name, part) in [(DSUP_FILE, split.dsup), (TRAIN_FILE, split.train), (TEST_FILE, split.test)] {
        let visual = part.iter().map(|s| s.scene).collect::<std::collections::BTreeSet<_>>().len();
        let _ = writeln!(out, "{name},{},{visual}", part.len());
        Dataset { meta: Meta::new(&inv, args.seed), scenes: part }.save(&args.out_dir.join(name))?;
    }
    if let Some(path) = &args.thesaurus {
        std::fs::write(path, inv.thesaurus()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(out)
}

/// Supervised initialization from a labeled D_sup file.
pub fn bootstrap(dsup: &Path, model_out: &Path) -> Result<String> {
    let data = load_dataset(dsup)?;
    let inv = data.meta.inventory();
    if data.scenes.is_empty() {
        log::warn!("{} is empty; writing an empty model", dsup.display());
    }
    let config = BootstrapConfig::default();
    let (model, report) = bootstrap_model(&data.scenes, &inv, &config)?;
    ModelFile::new(&model, json!({ "bootstrap": config })).save(model_out)?;
    let mut out = format!("item,value\nsentences,{}\nparse_accuracy,{:.4}\n", report.sentences, report.parse_accuracy);
    for (name, acc) in &report.classifier_accuracy {
        let _ = writeln!(out, "classifier:{name},{acc:.4}");
    }
    Ok(out)
}

/// Joint-learning settings shared by the training subcommands.
#[derive(Clone, Debug)]
pub struct TrainArgs {
    pub epochs: usize,
    pub lr: f64,
    pub decay: f64,
    pub beam: usize,
    pub new_classifiers: usize,
    pub threshold: f64,
    pub jitter: f64,
    pub perception_scale: f64,
    pub runs: usize,
}

impl Default for TrainArgs {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainArgs {
            epochs: d.epochs,
            lr: d.learning_rate,
            decay: d.decay,
            beam: d.beam,
            new_classifiers: d.new_classifiers,
            threshold: d.threshold,
            jitter: d.init_jitter,
            perception_scale: d.perception_scale,
            runs: 1,
        }
    }
}

impl TrainArgs {
    pub fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.lr,
            decay: self.decay,
            beam: self.beam,
            new_classifiers: self.new_classifiers,
            threshold: self.threshold,
            seed,
            init_jitter: self.jitter,
            perception_scale: self.perception_scale,
        }
    }

    fn check(&self) -> Result<()> {
        if self.runs == 0 {
            bail!("--runs must be at least 1");
        }
        if self.beam == 0 {
            bail!("--beam must be at least 1");
        }
        if !self.new_classifiers.is_multiple_of(2) {
            bail!("--new-classifiers must be even (half color, half shape)");
        }
        Ok(())
    }
}

/// Path for run `r` of `runs`: the path itself for a single run, otherwise
/// `<stem>-run<r>.<ext>`.
pub fn run_path(path: &Path, r: usize, runs: usize) -> PathBuf {
    if runs == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-run{r}.{}", ext.to_string_lossy()),
        None => format!("{stem}-run{r}"),
    };
    path.with_file_name(name)
}

/// Joint learning from a bootstrap model, `args.runs` times with shuffled
/// orders; run r uses seed `seed + r`.
pub fn train(
    model: &Path,
    train: &Path,
    test: Option<&Path>,
    args: &TrainArgs,
    seed: u64,
    save: Option<&Path>,
) -> Result<String> {
    args.check()?;
    let (base, _) = load_model(model)?;
    let train = load_dataset(train)?.scenes;
    let test = match test {
        Some(p) => load_dataset(p)?.scenes,
        None => Vec::new(),
    };
    let config = args.config(seed);
    let runs = if args.epochs == 0 {
        // nothing to learn: the model passes through untouched
        (0..args.runs)
            .map(|_| experiment::JointRun {
                model: base.clone(),
                epochs: Vec::new(),
                test_by_epoch: Vec::new(),
                test: joint::evaluate(&experiment::examples(&test), &base, args.beam, args.threshold),
            })
            .collect()
    } else {
        joint_runs(&base, &train, &test, &config, args.runs)?
    };
    let mut out = format!("run,{},test_p,test_r,test_f1\n", EpochReport::csv_header());
    for (r, run) in runs.iter().enumerate() {
        for (e, c) in run.epochs.iter().zip(&run.test_by_epoch) {
            let _ = writeln!(out, "{r},{},{:.4},{:.4},{:.4}", e.csv_row(), c.precision(), c.recall(), c.f1());
        }
    }
    out.push_str("\nrun,precision,recall,f1\n");
    let mut all = Vec::new();
    for (r, run) in runs.iter().enumerate() {
        let _ = writeln!(out, "{}", metrics_row(&r.to_string(), &run.test));
        all.push(Metrics::from(run.test));
    }
    let _ = writeln!(out, "{}", mean_row("mean", &Metrics::mean(&all)));
    if let Some(path) = save {
        for (r, run) in runs.iter().enumerate() {
            let echo = json!({ "train": TrainConfig { seed: config.seed.wrapping_add(r as u64), ..config.clone() } });
            ModelFile::new(&run.model, echo).save(&run_path(path, r, args.runs))?;
        }
    }
    Ok(out)
}

/// Per-scene and micro-averaged object-level metrics.
pub fn eval(model: &Path, test: &Path, beam: usize, threshold: f64) -> Result<String> {
    let (model, _) = load_model(model)?;
    let test = load_dataset(test)?.scenes;
    let mut out = String::from("scene,tp,fp,fn,tn,precision,recall,f1\n");
    let mut total = Counts::default();
    for (s, (_, c)) in test.iter().zip(experiment::predict_scenes(&test, &model, beam, threshold)) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.4},{:.4},{:.4}",
            s.id,
            c.true_pos,
            c.false_pos,
            c.false_neg,
            c.true_neg,
            c.precision(),
            c.recall(),
            c.f1()
        );
        total = experiment::total([total, c]);
    }
    let _ = writeln!(
        out,
        "all,{},{},{},{},{:.4},{:.4},{:.4}",
        total.true_pos,
        total.false_pos,
        total.false_neg,
        total.true_neg,
        total.precision(),
        total.recall(),
        total.f1()
    );
    Ok(out)
}

/// The thesaurus-driven vision-only baseline.
pub fn ablate_vision(dsup: &Path, train: &Path, test: &Path, thesaurus: &Path) -> Result<String> {
    let text =
        std::fs::read_to_string(thesaurus).with_context(|| format!("cannot read thesaurus {}", thesaurus.display()))?;
    let thesaurus = parse_thesaurus(&text)?;
    let dsup = load_dataset(dsup)?.scenes;
    let train = load_dataset(train)?.scenes;
    let test = load_dataset(test)?.scenes;
    let baseline = vision_baseline(&dsup, &train, &thesaurus, &ClassifierConfig::default());
    let mut out = String::from("set,terms,status\n");
    for c in &baseline.classifiers {
        let terms: Vec<&str> = c.terms.iter().map(String::as_str).collect();
        let _ = writeln!(out, "{},{},kept", c.attribute, terms.join(" "));
    }
    for d in &baseline.discarded {
        let _ = writeln!(out, "{d},,discarded");
    }
    let _ = write!(out, "\nbaseline,precision,recall,f1\n{}\n", metrics_row("vision", &baseline.evaluate(&test)));
    Ok(out)
}

/// The bootstrap model with unknown words left semantically empty.
pub fn ablate_language(model: &Path, test: &Path, beam: usize, threshold: f64) -> Result<String> {
    let (model, _) = load_model(model)?;
    let test = load_dataset(test)?.scenes;
    Ok(format!(
        "baseline,precision,recall,f1\n{}\n",
        metrics_row("language", &language_ablation(&model, &test, beam, threshold))
    ))
}

/// Words with a lexeme on a new constant, in lexicon order.
pub fn novel_words(model: &JointModel) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for l in model.lexicon.lexemes() {
        let w = l.span();
        if l.constants.iter().any(|c| c.name.starts_with("NEW")) && !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

/// Lexeme weights of `words` (default: every word paired with a new
/// constant) against the new constants and the null class.
pub fn inspect(model: &Path, words: &[String]) -> Result<String> {
    let (model, _) = load_model(model)?;
    let words = if words.is_empty() { novel_words(&model) } else { words.to_vec() };
    Ok(weight_matrix(&model, &words).to_csv())
}

/// Initialization-size curve over the split stored in `data_dir`.
pub fn curve(data_dir: &Path, sizes: &[usize], args: &TrainArgs, seed: u64) -> Result<String> {
    args.check()?;
    let dsup = load_dataset(&data_dir.join(DSUP_FILE))?;
    let inv = dsup.meta.inventory();
    let split = grounded::scenes::Split {
        dsup: dsup.scenes,
        train: load_dataset(&data_dir.join(TRAIN_FILE))?.scenes,
        test: load_dataset(&data_dir.join(TEST_FILE))?.scenes,
    };
    let points = run_curve(&split, &inv, sizes, &BootstrapConfig::default(), &args.config(seed), args.runs)?;
    Ok(curve_csv(&points))
}

#[derive(Clone, Debug)]
pub struct SynonymReport {
    pub runs: Vec<Metrics>,
    /// Per run, whether every novel synonym binds to its attribute's constant.
    pub bound: Vec<bool>,
    pub csv: String,
}

/// Generates a corpus, builds the synonym split, and trains jointly from a
/// bootstrap on primary words only.
pub fn synonym_experiment(scenes: usize, noise: f64, args: &TrainArgs, seed: u64) -> Result<SynonymReport> {
    args.check()?;
    let cfg = GenConfig { scenes, noise, seed, ..GenConfig::default() };
    cfg.validate()?;
    let inv = AttributeInventory::standard(cfg.color_dims, cfg.shape_dims, true, seed);
    let corpus = generate(&inv, &cfg)?;
    let split = synonym_split(&inv, &corpus, TRAIN_FRACTION, seed)?;
    let (base, _) = bootstrap_model(&split.dsup, &inv, &BootstrapConfig::default())?;
    let runs = joint_runs(&base, &split.train, &split.test, &args.config(seed), args.runs)?;
    let mut csv = String::from("run,precision,recall,f1,bound,novel\n");
    let mut tables = String::from("run,word,attribute,bound,correct\n");
    let (mut metrics, mut bound) = (Vec::new(), Vec::new());
    for (r, run) in runs.iter().enumerate() {
        let b = synonym_bindings(&run.model, &inv, &split.train);
        let ok = b.iter().filter(|x| x.correct).count();
        let _ = writeln!(csv, "{},{},{}", metrics_row(&r.to_string(), &run.test), ok, b.len());
        for line in bindings_csv(&b).lines().skip(1) {
            let _ = writeln!(tables, "{r},{line}");
        }
        metrics.push(Metrics::from(run.test));
        bound.push(ok == b.len());
    }
    let _ = writeln!(csv, "{}", mean_row("mean", &Metrics::mean(&metrics)));
    csv.push('\n');
    csv.push_str(&tables);
    Ok(SynonymReport { runs: metrics, bound, csv })
}
