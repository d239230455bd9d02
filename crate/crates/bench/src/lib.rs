//! Fixtures shared by the benchmarks.

use grounded::experiment::{bootstrap, BootstrapConfig};
use grounded::joint::JointModel;
use grounded::scenes::{
    generate, split_by_attribute, AttributeInventory, GenConfig, Split, BOOTSTRAP_ATTRIBUTES, EVAL_ATTRIBUTES,
};

/// A small corpus split and its bootstrap model.
pub fn small_setup(scenes: usize, seed: u64) -> (Split, JointModel) {
    let cfg = GenConfig { scenes, seed, ..GenConfig::default() };
    let inv = AttributeInventory::standard(cfg.color_dims, cfg.shape_dims, true, seed);
    let corpus = generate(&inv, &cfg).expect("default generator settings are valid");
    let split = split_by_attribute(&inv, &corpus, &BOOTSTRAP_ATTRIBUTES, &EVAL_ATTRIBUTES, 0.8, seed)
        .expect("standard partition");
    let (model, _) = bootstrap(&split.dsup, &inv, &BootstrapConfig::default()).expect("generated D_sup is labeled");
    (split, model)
}
