//! Segmentation metrics and the ablation experiments.

mod dataset;
mod experiments;
mod metrics;

pub use dataset::{frame_noise_seed, generate_dataset, synth_frame, synth_scene, Condition, Split};
pub use experiments::{
    crf_table, evaluate_forest, evaluate_with_crf, modeling_table, noise_table, run_crf_comparison,
    run_modeling_comparison, run_noise_sweep, run_split_comparison, split_table, test_split, CrfComparison, Frames,
    ModelingRow, NoiseRow, SplitRow, Table,
};
pub use metrics::{report, ConfusionMatrix, MetricsReport};
