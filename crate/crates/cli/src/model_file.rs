//! Versioned JSON container for a joint model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use grounded::grammar::{Lexicon, ParseModel};
use grounded::joint::JointModel;
use grounded::logic::{AttributeConstant, Constant, Origin};
use grounded::perception::AttributeClassifier;

pub const FORMAT: &str = "grounded-model";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("not a model file (format `{0}`)")]
    Format(String),
    #[error("model file version {found} is not supported (expected {VERSION})")]
    Version { found: u32 },
    #[error("model file: {0}")]
    Content(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierEntry {
    pub constant: AttributeConstant,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub color_dims: usize,
    pub shape_dims: usize,
    /// Lexicon in its line format.
    pub lexicon: Vec<String>,
    /// Parse-model weights sorted by feature name.
    pub weights: Vec<(String, f64)>,
    pub classifiers: Vec<ClassifierEntry>,
    /// Settings that produced the model.
    pub config: serde_json::Value,
}

fn origin(name: &str) -> Origin {
    match name.strip_prefix("NEW") {
        Some(rest) if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) => Origin::Induced,
        _ => Origin::Bootstrap,
    }
}

impl ModelFile {
    pub fn new(model: &JointModel, config: serde_json::Value) -> Self {
        ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            color_dims: model.color_dims,
            shape_dims: model.shape_dims,
            lexicon: model.lexicon.to_text().lines().map(str::to_string).collect(),
            weights: model.parse.to_entries(),
            classifiers: model
                .classifiers
                .values()
                .map(|c| ClassifierEntry {
                    constant: AttributeConstant {
                        name: c.constant.name.to_string(),
                        channel: c.channel(),
                        origin: origin(&c.constant.name),
                    },
                    weights: c.weights.clone(),
                })
                .collect(),
            config,
        }
    }

    pub fn model(&self) -> Result<JointModel, ModelFileError> {
        let mut text = self.lexicon.join("\n");
        text.push('\n');
        let lexicon = Lexicon::from_text(&text).map_err(|e| ModelFileError::Content(e.to_string()))?;
        let parse = ParseModel::from_entries(&self.weights).map_err(|e| ModelFileError::Content(e.to_string()))?;
        let mut classifiers = Vec::with_capacity(self.classifiers.len());
        for e in &self.classifiers {
            let c = Constant::new(&e.constant.name, e.constant.channel);
            let mut cl = AttributeClassifier::zeros(c, self.color_dims, self.shape_dims);
            if e.weights.len() != cl.weights.len() {
                return Err(ModelFileError::Content(format!(
                    "classifier `{}` has {} weights, expected {}",
                    e.constant.name,
                    e.weights.len(),
                    cl.weights.len()
                )));
            }
            cl.weights = e.weights.clone();
            classifiers.push(cl);
        }
        Ok(JointModel::new(lexicon, parse, classifiers, self.color_dims, self.shape_dims))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model file serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ModelFileError> {
        // check the header first so old versions get a clear message
        let v: serde_json::Value = serde_json::from_str(text)?;
        let format = v.get("format").and_then(|f| f.as_str()).unwrap_or("");
        if format != FORMAT {
            return Err(ModelFileError::Format(format.to_string()));
        }
        let found = v.get("version").and_then(|x| x.as_u64()).unwrap_or(0) as u32;
        if found != VERSION {
            return Err(ModelFileError::Version { found });
        }
        Ok(serde_json::from_value(v)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelFileError> {
        std::fs::write(path, self.to_json())
            .map_err(|source| ModelFileError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ModelFileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ModelFileError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}
