//! Config-driven experiments: presets, the full pipeline, and the file
//! formats it writes.

mod config;
mod run;
mod scene;

pub use config::{
    parse_pairs, preset_names, preset_text, ExperimentConfig, Problem, SamplerKind, ENV_SEED,
    ENV_WORKERS,
};
pub use run::{
    compare_point_estimates, compare_runs, diagnose, image_chain, myula_settings, projector_for,
    run_experiment, run_sampler, write_acf_csv, write_csv, write_demo1d, write_metrics_csv,
    Diagnosis, MetricRow, RunReport, CSV_VERSION_LINE,
};
pub use scene::{
    build_operator, build_scene, load_image, load_kernel, load_mask, load_observation,
    observation_image, observe, save_observation, synthetic_blocks_mask, ObservationFile, Scene,
    DEGRADE_STREAM, PHANTOM_SIZE,
};
