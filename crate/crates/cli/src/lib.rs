//! Command-line harness for the grounded joint learner: data generation,
//! bootstrapping, joint training, evaluation, the two ablation baselines and
//! diagnostic reports.

pub mod cli;
pub mod commands;
pub mod model_file;
