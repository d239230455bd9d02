use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::logic::{Channel, Constant, Expr};

use super::category::Category;
use super::model::Feature;
use super::template::{default_templates, instantiate, Template};
use super::GrammarError;

/// Longest word span a lexeme may cover.
pub const MAX_LEXEME_TOKENS: usize = 3;

/// A word span paired with an ordered list of constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lexeme {
    pub words: Vec<String>,
    pub constants: Vec<Constant>,
}

impl Lexeme {
    pub fn new(words: &[&str], constants: Vec<Constant>) -> Self {
        Lexeme { words: words.iter().map(|w| normalize_token(w)).collect(), constants }
    }

    pub fn from_tokens(words: &[String], constants: Vec<Constant>) -> Self {
        Lexeme { words: words.iter().map(|w| normalize_token(w)).collect(), constants }
    }

    pub fn span(&self) -> String {
        self.words.join(" ")
    }

    /// Stable identity used for feature names, e.g. `half-pipe|[arch]`.
    pub fn key(&self) -> String {
        format!("{}|{}", self.span(), constant_list(&self.constants))
    }
}

fn constant_list(cs: &[Constant]) -> String {
    let names: Vec<&str> = cs.iter().map(|c| &*c.name).collect();
    format!("[{}]", names.join(","))
}

pub fn normalize_token(w: &str) -> String {
    w.trim().to_lowercase()
}

/// Lowercases and splits a sentence on whitespace.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence.split_whitespace().map(normalize_token).collect()
}

/// A lexeme instantiated with a template: `words ⊢ category : form`.
#[derive(Clone, Debug)]
pub struct LexicalItem {
    pub words: Vec<String>,
    pub category: Category,
    pub form: Arc<Expr>,
    /// Printed canonical form.
    pub text: Arc<str>,
    pub lexeme: Arc<Lexeme>,
    pub template: Arc<Template>,
    /// Lexeme and template features fired by this item.
    pub features: [Feature; 2],
}

impl std::fmt::Display for LexicalItem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ⊢ {} : {}", self.words.join(" "), self.category, self.form)
    }
}

/// Factored lexicon: lexemes × templates, plus the words known to be
/// skippable (null class).
#[derive(Clone, Debug)]
pub struct Lexicon {
    templates: Vec<Arc<Template>>,
    lexemes: Vec<Arc<Lexeme>>,
    index: HashMap<Lexeme, usize>,
    items: HashMap<String, Vec<Arc<LexicalItem>>>,
    known: BTreeSet<String>,
    null_words: BTreeSet<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::new(default_templates())
    }
}

impl Lexicon {
    pub fn new(templates: Vec<Template>) -> Self {
        Lexicon {
            templates: templates.into_iter().map(Arc::new).collect(),
            lexemes: Vec::new(),
            index: HashMap::new(),
            items: HashMap::new(),
            known: BTreeSet::new(),
            null_words: BTreeSet::new(),
        }
    }

    pub fn templates(&self) -> &[Arc<Template>] {
        &self.templates
    }

    pub fn lexemes(&self) -> &[Arc<Lexeme>] {
        &self.lexemes
    }

    pub fn len(&self) -> usize {
        self.lexemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexemes.is_empty() && self.null_words.is_empty()
    }

    pub fn contains(&self, lexeme: &Lexeme) -> bool {
        self.index.contains_key(lexeme)
    }

    /// Adds a lexeme and its lexical items. Returns false if already present.
    pub fn add_lexeme(&mut self, lexeme: Lexeme) -> bool {
        if self.index.contains_key(&lexeme) {
            return false;
        }
        let lexeme = Arc::new(lexeme);
        self.index.insert((*lexeme).clone(), self.lexemes.len());
        self.lexemes.push(lexeme.clone());
        self.known.extend(lexeme.words.iter().cloned());
        let items = self.items.entry(lexeme.span()).or_default();
        for t in &self.templates {
            if let Some(item) = instantiate(&lexeme, t) {
                items.push(Arc::new(item));
            }
        }
        true
    }

    pub fn add_null_word(&mut self, word: &str) -> bool {
        let w = normalize_token(word);
        self.known.insert(w.clone());
        self.null_words.insert(w)
    }

    pub fn null_words(&self) -> &BTreeSet<String> {
        &self.null_words
    }

    /// Whether `word` occurs in some lexeme or has a null entry.
    pub fn is_known(&self, word: &str) -> bool {
        self.known.contains(word)
    }

    /// Lexical items whose words are exactly `span`.
    pub fn items_for(&self, span: &[String]) -> &[Arc<LexicalItem>] {
        self.items.get(&span.join(" ")).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Lexemes whose words equal the given span.
    pub fn lexemes_for<'a>(&'a self, span: &'a str) -> impl Iterator<Item = &'a Arc<Lexeme>> + 'a {
        self.lexemes.iter().filter(move |l| l.span() == span)
    }

    /// Distinct constant lists used by current lexemes, in first-seen order.
    pub fn constant_lists(&self) -> Vec<Vec<Constant>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for l in &self.lexemes {
            if seen.insert(l.constants.clone()) {
                out.push(l.constants.clone());
            }
        }
        out
    }

    /// Line-oriented serialization: a template header, then one
    /// `words TAB [constants] TAB channel-signature` line per lexeme and one
    /// `words TAB null TAB -` line per null word.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let ids: Vec<&str> = self.templates.iter().map(|t| t.id.as_str()).collect();
        writeln!(out, "#templates\t{}", ids.join(" ")).unwrap();
        for l in &self.lexemes {
            let sig = if l.constants.is_empty() {
                "-".to_string()
            } else {
                l.constants.iter().map(|c| c.channel.predicate()).collect::<Vec<_>>().join(",")
            };
            writeln!(out, "{}\t{}\t{}", l.span(), constant_list(&l.constants), sig).unwrap();
        }
        for w in &self.null_words {
            writeln!(out, "{w}\tnull\t-").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GrammarError> {
        let bad = |line: usize, msg: &str| GrammarError::BadLexicon { line: line + 1, message: msg.to_string() };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(0, "missing template header"))?;
        let ids = header.strip_prefix("#templates\t").ok_or_else(|| bad(0, "missing template header"))?;
        let inventory = default_templates();
        let mut templates = Vec::new();
        for id in ids.split_whitespace() {
            let t = inventory.iter().find(|t| t.id == id).ok_or_else(|| bad(0, &format!("unknown template `{id}`")))?;
            templates.push(t.clone());
        }
        let mut lexicon = Lexicon::new(templates);
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(bad(no, "expected three tab-separated fields"));
            }
            let words: Vec<&str> = fields[0].split(' ').collect();
            if fields[1] == "null" {
                lexicon.add_null_word(fields[0]);
                continue;
            }
            let names = fields[1]
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| bad(no, "constant list must be bracketed"))?;
            let names: Vec<&str> = if names.is_empty() { Vec::new() } else { names.split(',').collect() };
            let channels: Vec<&str> = if fields[2] == "-" { Vec::new() } else { fields[2].split(',').collect() };
            if names.len() != channels.len() {
                return Err(bad(no, "channel signature does not match constants"));
            }
            let mut constants = Vec::new();
            for (n, ch) in names.iter().zip(channels) {
                let ch = Channel::from_predicate(ch).ok_or_else(|| bad(no, &format!("unknown channel `{ch}`")))?;
                constants.push(Constant::new(n, ch));
            }
            lexicon.add_lexeme(Lexeme::new(&words, constants));
        }
        Ok(lexicon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut lex = Lexicon::default();
        lex.add_lexeme(Lexeme::new(&["half-pipe"], vec![Constant::shape("arch")]));
        lex.add_lexeme(Lexeme::new(&["in", "the"], vec![]));
        lex.add_lexeme(Lexeme::new(&["red"], vec![Constant::color("red")]));
        lex.add_null_word("thing");
        let text = lex.to_text();
        assert!(text.contains("half-pipe\t[arch]\tshape\n"));
        assert!(text.contains("in the\t[]\t-\n"));
        let back = Lexicon::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.len(), 3);
        assert!(back.is_known("thing"));
    }

    #[test]
    fn items_are_built_for_matching_templates() {
        let mut lex = Lexicon::default();
        lex.add_lexeme(Lexeme::new(&["red"], vec![Constant::color("red")]));
        let items = lex.items_for(&["red".to_string()]);
        let ids: Vec<&str> = items.iter().map(|i| i.template.id.as_str()).collect();
        assert_eq!(ids, vec!["attr_n", "np_const", "attr_adj"]);
        assert!(!lex.add_lexeme(Lexeme::new(&["red"], vec![Constant::color("red")])));
    }

    #[test]
    fn malformed_lines_report_position() {
        let err = Lexicon::from_text("#templates\tattr_n\nred\t[red]\n").unwrap_err();
        assert!(matches!(err, GrammarError::BadLexicon { line: 2, .. }));
        assert!(Lexicon::from_text("red\t[red]\tcolor\n").is_err());
    }
}
