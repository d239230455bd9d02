//! Lexeme weights pairing words with the new constants.

use std::fmt::Write as _;

use crate::grammar::{Feature, Lexeme};
use crate::joint::JointModel;
use crate::logic::Channel;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightRow {
    pub word: String,
    /// Weights for NEW0..NEW(k-1), then the null column.
    pub weights: Vec<f64>,
    /// Column of the unique largest weight.
    pub argmax: Option<usize>,
    /// The word has no entry in the lexicon.
    pub unknown: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    /// NEW0..NEW(k-1) and "null".
    pub columns: Vec<String>,
    pub channels: Vec<Option<Channel>>,
    pub rows: Vec<WeightRow>,
}

fn unique_argmax(xs: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    let mut tie = false;
    for (i, &x) in xs.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(b) if x > xs[b] => {
                best = Some(i);
                tie = false;
            }
            Some(b) if x == xs[b] => tie = true,
            _ => {}
        }
    }
    if tie {
        None
    } else {
        best
    }
}

/// Rows of lexeme-indicator weights for `words` against the model's new
/// constants (those named NEW<i>) and the null class.
pub fn inspect(model: &JointModel, words: &[String]) -> WeightMatrix {
    let mut new: Vec<(usize, &str, Channel)> = model
        .classifiers
        .values()
        .filter_map(|c| {
            c.constant.name.strip_prefix("NEW")?.parse().ok().map(|i: usize| (i, &*c.constant.name, c.channel()))
        })
        .collect();
    new.sort();
    let mut columns: Vec<String> = new.iter().map(|(_, n, _)| n.to_string()).collect();
    let mut channels: Vec<Option<Channel>> = new.iter().map(|(_, _, ch)| Some(*ch)).collect();
    columns.push("null".into());
    channels.push(None);
    let rows = words
        .iter()
        .map(|w| {
            let unknown = !model.lexicon.is_known(w);
            let mut weights: Vec<f64> = new
                .iter()
                .map(|(_, name, _)| {
                    let c = model.classifiers[*name].constant.clone();
                    model.parse.weight(&Feature::Lexeme(Lexeme::from_tokens(std::slice::from_ref(w), vec![c]).key()))
                })
                .collect();
            weights.push(model.parse.weight(&Feature::Null(w.clone())));
            let argmax = if unknown { None } else { unique_argmax(&weights) };
            WeightRow { word: w.clone(), weights, argmax, unknown }
        })
        .collect();
    WeightMatrix { columns, channels, rows }
}

impl WeightMatrix {
    pub fn null_column(&self) -> usize {
        self.columns.len() - 1
    }

    /// Comma-separated table with a trailing `argmax` column; unknown words
    /// are marked `?`.
    pub fn to_csv(&self) -> String {
        let mut s = format!("word,{},argmax\n", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.weights.iter().map(|w| format!("{w:.2}")).collect();
            let mark = match (r.unknown, r.argmax) {
                (true, _) => "?".to_string(),
                (false, Some(i)) => self.columns[i].clone(),
                (false, None) => "-".to_string(),
            };
            let _ = writeln!(s, "{},{},{}", r.word, cells.join(","), mark);
        }
        s
    }
}

/// Whether each word of `novel` (paired with its attribute's channel) has
/// its unique largest weight on a distinct new constant of that channel, and
/// how many of `fillers` have theirs on the null column.
pub fn alignment(matrix: &WeightMatrix, novel: &[(String, Channel)], fillers: &[String]) -> (bool, usize) {
    let row = |w: &str| matrix.rows.iter().find(|r| r.word == w);
    let mut used = std::collections::BTreeSet::new();
    let mut ok = true;
    for (w, ch) in novel {
        match row(w).and_then(|r| r.argmax) {
            Some(i) if matrix.channels[i] == Some(*ch) && used.insert(i) => {}
            _ => ok = false,
        }
    }
    let nulls = fillers.iter().filter(|w| row(w).and_then(|r| r.argmax) == Some(matrix.null_column())).count();
    (ok, nulls)
}
