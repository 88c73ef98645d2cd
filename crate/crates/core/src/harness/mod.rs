//! Experiment orchestration, reporting, and model persistence.

mod experiment;
mod model_io;
mod report;

pub use experiment::{
    cell_config, run_experiment, run_experiment_on, run_experiment_traced, run_experiment_with_model, run_suite, synthetic_suite_base, train,
    DataSource, ExperimentConfig, ExperimentResult, FoldOutcome, SuiteCell, DEFAULT_EPOCHS,
    DEFAULT_HOLDOUT_FRACTION, SUITE_CELLS,
};
pub use model_io::{decode_model, encode_model, load_model, save_model, FORMAT_VERSION, MAGIC};
pub use report::{render_csv, render_json, render_report, render_suite_text, render_text, RenderedReport};
