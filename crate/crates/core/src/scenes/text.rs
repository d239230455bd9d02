//! Sentence templates for generated descriptions.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{pick_word, Attribute};
use crate::logic::Channel;

/// Words that never name an attribute.
pub const FILLER_WORDS: [&str; 6] = ["thing", "things", "toys", "objects", "ones", "that"];

const PLURAL_FILLERS: [&str; 4] = ["things", "toys", "objects", "ones"];

/// One-attribute templates. `{a}` is the attribute word, `{k}` is "colored"
/// or "shaped", `{f}` a plural filler noun.
pub const SINGLE_TEMPLATES: [&str; 8] = [
    "here are some {a} things",
    "these are various types of {a} {k} objects",
    "here are the {a} ones",
    "select the {a} {f}",
    "that {a} thing",
    "look at the {a} toys",
    "these {f} are {a}",
    "all of the {a} {f}",
];

/// Color-and-shape templates. `{c}` is the color word, `{s}` the shape word.
pub const MULTI_TEMPLATES: [&str; 5] = [
    "this toy is {c} {s}",
    "this {c} block is in the shape of a {s}",
    "here are some {c} {s} things",
    "the {c} {s} {f}",
    "that {s} is {c}",
];

pub(super) fn describe(rng: &mut ChaCha8Rng, described: &[&Attribute], primary: f64) -> String {
    let filler = PLURAL_FILLERS.choose(rng).unwrap().to_string();
    let mut out = match described {
        [a] => {
            let t = SINGLE_TEMPLATES[rng.random_range(0..SINGLE_TEMPLATES.len())];
            let kind = match a.channel {
                Channel::Color => "colored",
                Channel::Shape => "shaped",
            };
            t.replace("{a}", &pick_word(rng, a, primary)).replace("{k}", kind)
        }
        _ => {
            let t = MULTI_TEMPLATES[rng.random_range(0..MULTI_TEMPLATES.len())];
            let color = described.iter().find(|a| a.channel == Channel::Color).expect("a color");
            let shape = described.iter().find(|a| a.channel == Channel::Shape).expect("a shape");
            let c = pick_word(rng, color, primary);
            let s = pick_word(rng, shape, primary);
            t.replace("{c}", &c).replace("{s}", &s)
        }
    };
    out = out.replace("{f}", &filler);
    out
}
