use std::fmt;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::data::{holdout_split, load_csv, loo_splits, standardize, synthesize_dataset, Dataset, SyntheticSpec};
use crate::error::{Error, Result};
use crate::evaluation::{accumulate_confusion, summarize, Report};
use crate::initializers::{InitDist, InitFamily, InitScheme};
use crate::network::{build_model, MlpModel, Topology};
use crate::numerics::{cross_entropy, Matrix, Rng};
use crate::optimizer::{preset_hyperparams, Hyperparams, SgdMomentum};

pub const DEFAULT_EPOCHS: usize = 200;
pub const DEFAULT_HOLDOUT_FRACTION: f64 = 0.2;

// RNG streams carved out of an experiment seed.
const FINAL_INIT_STREAM: u64 = 1;
const FINAL_SHUFFLE_STREAM: u64 = 2;
const FOLD_STREAM_BASE: u64 = 1 << 32;

/// Suite cells in report order, with the offset added to the base seed to
/// obtain each cell's experiment seed.
pub const SUITE_CELLS: [(Topology, InitFamily, u64); 6] = [
    (Topology::OneLayer, InitFamily::Xavier, 0),
    (Topology::OneLayer, InitFamily::Kaiming, 1_000),
    (Topology::TwoLayer, InitFamily::Xavier, 2_000),
    (Topology::TwoLayer, InitFamily::Kaiming, 3_000),
    (Topology::ThreeLayer, InitFamily::Xavier, 4_000),
    (Topology::ThreeLayer, InitFamily::Kaiming, 5_000),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Csv(PathBuf),
    Synthetic(SyntheticSpec),
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Csv(path) => load_csv(path),
            DataSource::Synthetic(spec) => synthesize_dataset(spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub topology: Topology,
    pub scheme: InitScheme,
    pub hyperparams: Hyperparams,
    pub epochs: usize,
    pub seed: u64,
    pub data: DataSource,
    pub holdout_fraction: f64,
    pub loo_enabled: bool,
}

impl ExperimentConfig {
    /// Preset hyperparameters, 200 epochs, 20% holdout, LOO on.
    pub fn new(topology: Topology, scheme: InitScheme, data: DataSource, seed: u64) -> Self {
        Self {
            topology,
            scheme,
            hyperparams: preset_hyperparams(topology, scheme.family),
            epochs: DEFAULT_EPOCHS,
            seed,
            data,
            holdout_fraction: DEFAULT_HOLDOUT_FRACTION,
            loo_enabled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyperparams.validate()?;
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        Ok(())
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}+{} seed {} (bs {}, lr {}, m {})",
            self.topology,
            self.scheme,
            self.seed,
            self.hyperparams.batch_size,
            self.hyperparams.learning_rate,
            self.hyperparams.momentum
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldOutcome {
    /// Position of the held-out sample within the train/validation split.
    pub index: usize,
    pub truth: usize,
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub holdout: Report,
    pub loo_mean_accuracy: Option<f64>,
    pub loo_folds: Vec<FoldOutcome>,
    pub final_train_loss: f64,
    /// Not serialized: result files must be reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Trains `model` for `epochs` passes over `(x, labels)`, reshuffling the
/// batch order every epoch and keeping the final partial batch. `on_batch`
/// sees the row indices of every batch as it is used. Returns the mean
/// training loss of the last epoch.
#[allow(clippy::too_many_arguments)]
pub fn train(
    model: &mut MlpModel,
    x: &Matrix,
    labels: &[usize],
    hp: &Hyperparams,
    epochs: usize,
    rng: &mut Rng,
    context: &dyn fmt::Display,
    on_batch: &mut dyn FnMut(&[usize]),
) -> Result<f64> {
    hp.validate()?;
    if x.rows() != labels.len() || x.rows() == 0 {
        return Err(Error::Shape {
            op: "train",
            left: x.shape(),
            right: (labels.len(), 1),
        });
    }
    let mut opt = SgdMomentum::new(model);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut epoch_loss = f64::NAN;
    for epoch in 1..=epochs {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        for batch in order.chunks(hp.batch_size) {
            let xb = x.gather_rows(batch);
            let yb: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
            let pass = model.forward(&xb)?;
            let loss = cross_entropy(&pass.probs, &yb)?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    config: context.to_string(),
                });
            }
            total += loss * batch.len() as f64;
            let grads = model.backward(&pass, &yb)?;
            opt.step(model, &grads, hp)?;
            on_batch(batch);
        }
        epoch_loss = total / x.rows() as f64;
    }
    Ok(epoch_loss)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let dataset = config.data.load()?;
    run_experiment_on(config, &dataset)
}

/// Like [`run_experiment`] with an already loaded dataset (which must be
/// what `config.data` describes).
pub fn run_experiment_on(config: &ExperimentConfig, dataset: &Dataset) -> Result<ExperimentResult> {
    run_experiment_traced(config, dataset, &mut |_| {})
}

/// Full pipeline. `on_train_batch` receives, for every minibatch of every
/// training run (LOO folds and the final model), the indices of its samples
/// in `dataset`.
pub fn run_experiment_traced(
    config: &ExperimentConfig,
    dataset: &Dataset,
    on_train_batch: &mut dyn FnMut(&[usize]),
) -> Result<ExperimentResult> {
    run_pipeline(config, dataset, on_train_batch).map(|(result, _)| result)
}

/// [`run_experiment_on`], also returning the final model evaluated on the holdout split.
pub fn run_experiment_with_model(config: &ExperimentConfig, dataset: &Dataset) -> Result<(ExperimentResult, MlpModel)> {
    run_pipeline(config, dataset, &mut |_| {})
}

fn run_pipeline(
    config: &ExperimentConfig,
    dataset: &Dataset,
    on_train_batch: &mut dyn FnMut(&[usize]),
) -> Result<(ExperimentResult, MlpModel)> {
    config.validate()?;
    let started = Instant::now();

    let split = holdout_split(dataset, config.holdout_fraction, config.seed)?;
    if split.test.is_empty() {
        return Err(Error::Data("holdout split left no test samples".into()));
    }
    let (trainval, rest, _stats) = standardize(&split.trainval, &[&split.test])?;
    let test = &rest[0];
    let source = &split.trainval_indices;
    let mut mapped = Vec::new();

    let mut loo_folds = Vec::new();
    let mut loo_mean_accuracy = None;
    if config.loo_enabled {
        for fold in loo_splits(&trainval)? {
            let k = fold.index;
            let x = fold.train.features();
            let mut model = build_model(
                &mut Rng::with_stream(config.seed, FOLD_STREAM_BASE + 2 * k as u64),
                config.topology,
                config.scheme,
            );
            let mut shuffle = Rng::with_stream(config.seed, FOLD_STREAM_BASE + 2 * k as u64 + 1);
            let context = format!("{config}, LOO fold {k}");
            train(
                &mut model,
                &x,
                &fold.train.labels(),
                &config.hyperparams,
                config.epochs,
                &mut shuffle,
                &context,
                &mut |batch| {
                    mapped.clear();
                    // fold-local row i skips the held-out position k
                    mapped.extend(batch.iter().map(|&i| source[if i < k { i } else { i + 1 }]));
                    on_train_batch(&mapped);
                },
            )?;
            let probe = Matrix::from_rows(&[fold.validation.features.as_slice()])?;
            loo_folds.push(FoldOutcome {
                index: k,
                truth: fold.validation.label.index(),
                predicted: model.predict(&probe)?[0],
            });
        }
        let correct = loo_folds.iter().filter(|f| f.truth == f.predicted).count();
        loo_mean_accuracy = Some(correct as f64 / loo_folds.len() as f64);
    }

    let mut model = build_model(
        &mut Rng::with_stream(config.seed, FINAL_INIT_STREAM),
        config.topology,
        config.scheme,
    );
    let final_train_loss = train(
        &mut model,
        &trainval.features(),
        &trainval.labels(),
        &config.hyperparams,
        config.epochs,
        &mut Rng::with_stream(config.seed, FINAL_SHUFFLE_STREAM),
        config,
        &mut |batch| {
            mapped.clear();
            mapped.extend(batch.iter().map(|&i| source[i]));
            on_train_batch(&mapped);
        },
    )?;

    let preds = model.predict(&test.features())?;
    let holdout = summarize(&accumulate_confusion(&preds, &test.labels())?)?;
    let result = ExperimentResult {
        config: config.clone(),
        holdout,
        loo_mean_accuracy,
        loo_folds,
        final_train_loss,
        wall_time: started.elapsed(),
    };
    Ok((result, model))
}

/// One cell of the six-configuration suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCell {
    pub topology: Topology,
    pub family: InitFamily,
    pub seed: u64,
    pub result: Option<ExperimentResult>,
    pub error: Option<String>,
    /// CLI exit code class of `error` (2 config, 3 data, 4 diverged).
    pub error_code: Option<i32>,
}

/// The configuration the suite runs for `(topology, family)`: the base
/// config's data, distribution variant, epochs and LOO flag, the cell's
/// preset hyperparameters, and seed `base.seed + offset`.
pub fn cell_config(base: &ExperimentConfig, topology: Topology, family: InitFamily) -> ExperimentConfig {
    let offset = SUITE_CELLS
        .iter()
        .find(|(t, f, _)| *t == topology && *f == family)
        .map(|c| c.2)
        .expect("every topology/family pair is a suite cell");
    ExperimentConfig {
        topology,
        scheme: InitScheme::new(family, base.scheme.dist),
        hyperparams: preset_hyperparams(topology, family),
        seed: base.seed.wrapping_add(offset),
        ..base.clone()
    }
}

/// Runs all six cells on one dataset. A failing cell is recorded in its
/// `error` field and the remaining cells still run.
pub fn run_suite(base: &ExperimentConfig) -> Result<Vec<SuiteCell>> {
    let dataset = base.data.load()?;
    Ok(SUITE_CELLS
        .iter()
        .map(|&(topology, family, _)| {
            let config = cell_config(base, topology, family);
            let outcome = run_experiment_on(&config, &dataset);
            if let Err(e) = &outcome {
                log::error!("{topology}+{family} failed: {e}");
            }
            SuiteCell {
                topology,
                family,
                seed: config.seed,
                error: outcome.as_ref().err().map(|e| e.to_string()),
                error_code: outcome.as_ref().err().map(|e| e.exit_code()),
                result: outcome.ok(),
            }
        })
        .collect())
}

/// Default base config for a suite run on a synthetic cohort.
pub fn synthetic_suite_base(seed: u64, dist: InitDist) -> ExperimentConfig {
    ExperimentConfig::new(
        Topology::OneLayer,
        InitScheme::new(InitFamily::Xavier, dist),
        DataSource::Synthetic(SyntheticSpec::with_seed(seed)),
        seed,
    )
}
