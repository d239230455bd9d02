//! Argument parsing and dispatch.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::commands::{self, GenArgs, TrainArgs};

#[derive(Debug, Parser)]
#[command(name = "grounded", version, about = "Joint learning of language and perception for object selection")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Model file to read (or, for `bootstrap`, to write).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Learning {
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.00001)]
    pub decay: f64,
    #[arg(long, default_value_t = 50)]
    pub beam: usize,
    #[arg(long, default_value_t = 6)]
    pub new_classifiers: usize,
    /// Marginal probability above which an object is selected.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Spread of the random initial weights of new classifiers.
    #[arg(long, default_value_t = TrainArgs::default().jitter)]
    pub jitter: f64,
    /// Step-size multiplier for classifier updates.
    #[arg(long, default_value_t = TrainArgs::default().perception_scale)]
    pub perception_scale: f64,
    /// Independent runs with different example orders.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
}

impl From<&Learning> for TrainArgs {
    fn from(l: &Learning) -> Self {
        TrainArgs {
            epochs: l.epochs,
            lr: l.lr,
            decay: l.decay,
            beam: l.beam,
            new_classifiers: l.new_classifiers,
            threshold: l.threshold,
            jitter: l.jitter,
            perception_scale: l.perception_scale,
            runs: l.runs,
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct Decoding {
    #[arg(long, default_value_t = 50)]
    pub beam: usize,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a corpus and write dsup.json, train.json and test.json.
    Gen {
        #[arg(long, default_value_t = 142)]
        scenes: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write the synonym thesaurus to this file.
        #[arg(long)]
        thesaurus: Option<PathBuf>,
    },
    /// Train the initial parser and classifiers on labeled data (writes --model).
    Bootstrap {
        #[arg(long, default_value = "dsup.json")]
        dsup: PathBuf,
    },
    /// Joint learning from a bootstrap model (reads --model).
    Train {
        #[arg(long, default_value = "train.json")]
        train: PathBuf,
        /// Held-out set evaluated after every epoch.
        #[arg(long)]
        test: Option<PathBuf>,
        /// Where to write the trained model(s).
        #[arg(long)]
        save: Option<PathBuf>,
        #[command(flatten)]
        learning: Learning,
    },
    /// Object-selection metrics of a model (reads --model).
    Eval {
        #[arg(long, default_value = "test.json")]
        test: PathBuf,
        #[command(flatten)]
        decoding: Decoding,
    },
    /// Vision-only baseline built from a thesaurus.
    AblateVision {
        #[arg(long)]
        thesaurus: PathBuf,
        #[arg(long, default_value = "dsup.json")]
        dsup: PathBuf,
        #[arg(long, default_value = "train.json")]
        train: PathBuf,
        #[arg(long, default_value = "test.json")]
        test: PathBuf,
    },
    /// Bootstrap model with unknown words skipped (reads --model).
    AblateLanguage {
        #[arg(long, default_value = "test.json")]
        test: PathBuf,
        #[command(flatten)]
        decoding: Decoding,
    },
    /// Lexeme weights against the new classifiers (reads --model).
    Inspect {
        /// Comma-separated words; default is every word paired with a new classifier.
        #[arg(long, value_delimiter = ',')]
        words: Vec<String>,
    },
    /// F1 against the amount of labeled initialization data.
    Curve {
        /// Directory holding dsup.json, train.json and test.json.
        #[arg(long, default_value = ".")]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,20,50,150,1000")]
        sizes: Vec<usize>,
        #[command(flatten)]
        learning: Learning,
    },
    /// Learning new words for known attributes.
    Synonym {
        #[arg(long, default_value_t = 142)]
        scenes: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[command(flatten)]
        learning: Learning,
    },
}

impl Cli {
    fn model(&self) -> Result<&PathBuf> {
        self.model.as_ref().context("--model <path> is required")
    }

    /// Runs the command and returns its report.
    pub fn run(&self) -> Result<String> {
        match &self.command {
            Command::Gen { scenes, noise, out_dir, thesaurus } => commands::gen(&GenArgs {
                scenes: *scenes,
                noise: *noise,
                seed: self.seed,
                out_dir: out_dir.clone(),
                thesaurus: thesaurus.clone(),
            }),
            Command::Bootstrap { dsup } => commands::bootstrap(dsup, self.model()?),
            Command::Train { train, test, save, learning } => {
                commands::train(self.model()?, train, test.as_deref(), &learning.into(), self.seed, save.as_deref())
            }
            Command::Eval { test, decoding } => commands::eval(self.model()?, test, decoding.beam, decoding.threshold),
            Command::AblateVision { thesaurus, dsup, train, test } => {
                commands::ablate_vision(dsup, train, test, thesaurus)
            }
            Command::AblateLanguage { test, decoding } => {
                commands::ablate_language(self.model()?, test, decoding.beam, decoding.threshold)
            }
            Command::Inspect { words } => commands::inspect(self.model()?, words),
            Command::Curve { data, sizes, learning } => commands::curve(data, sizes, &learning.into(), self.seed),
            Command::Synonym { scenes, noise, learning } => {
                Ok(commands::synonym_experiment(*scenes, *noise, &learning.into(), self.seed)?.csv)
            }
        }
    }
}
