use serde::{Deserialize, Serialize};

use super::{Dataset, Sample, FEATURE_COUNT, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Features whose training standard deviation falls below this are treated
/// as constant and mapped to 0.
pub const STD_FLOOR: f64 = 1e-8;

/// Stream id reserved for the holdout shuffle, so a holdout draw never
/// shares state with model or batch randomness derived from the same seed.
const HOLDOUT_STREAM: u64 = 0x4f4c_4448; // "HOLD"

/// Per-feature z-score parameters estimated on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    /// Population standard deviation, floored at [`STD_FLOOR`].
    pub std: Vec<f64>,
}

impl FeatureStats {
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Data("cannot standardize against an empty training set".into()));
        }
        let n = train.len() as f64;
        let mut mean = vec![0.0; FEATURE_COUNT];
        for s in train.samples() {
            for (m, v) in mean.iter_mut().zip(&s.features) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; FEATURE_COUNT];
        for s in train.samples() {
            for ((acc, v), m) in var.iter_mut().zip(&s.features).zip(&mean) {
                *acc += (v - m).powi(2);
            }
        }
        let std = var.iter().map(|v| (v / n).sqrt().max(STD_FLOOR)).collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, dataset: &Dataset) -> Dataset {
        let samples = dataset
            .samples()
            .iter()
            .map(|s| Sample {
                features: self.transform(&s.features),
                ..s.clone()
            })
            .collect();
        Dataset::from_parts(samples, dataset.provenance().clone())
    }

    fn transform(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s <= STD_FLOOR { 0.0 } else { (v - m) / s })
            .collect()
    }
}

/// Z-scores `train` and every dataset in `others` with statistics from
/// `train` alone.
pub fn standardize(train: &Dataset, others: &[&Dataset]) -> Result<(Dataset, Vec<Dataset>, FeatureStats)> {
    let stats = FeatureStats::fit(train)?;
    let rest = others.iter().map(|d| stats.apply(d)).collect();
    Ok((stats.apply(train), rest, stats))
}

#[derive(Debug, Clone)]
pub struct HoldoutSplit {
    pub trainval: Dataset,
    pub test: Dataset,
    /// Positions in the source dataset, ascending.
    pub trainval_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Stratified holdout: for each class, `floor(fraction × class count)`
/// samples chosen at random go to the test split. Both splits keep the
/// source order.
pub fn holdout_split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<HoldoutSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("holdout fraction must lie in (0, 1), got {fraction}")));
    }
    let counts = dataset.class_counts();
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Data(format!(
            "class {} has no samples; stratified holdout needs all {NUM_CLASSES} classes",
            super::Label::ALL[c]
        )));
    }

    let mut rng = Rng::with_stream(seed, HOLDOUT_STREAM);
    let mut in_test = vec![false; dataset.len()];
    for class in 0..NUM_CLASSES {
        let mut members: Vec<usize> = dataset
            .samples()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label.index() == class)
            .map(|(i, _)| i)
            .collect();
        // 0.29 * 100 is 28.999999999999996 in binary
        let take = ((fraction * members.len() as f64) * (1.0 + 1e-12)).floor() as usize;
        rng.shuffle(&mut members);
        for &i in &members[..take] {
            in_test[i] = true;
        }
    }

    let (test_indices, trainval_indices): (Vec<usize>, Vec<usize>) =
        (0..dataset.len()).partition(|&i| in_test[i]);
    if test_indices.is_empty() {
        log::warn!(
            "holdout fraction {fraction} leaves no test samples for class counts {counts:?}"
        );
    }
    Ok(HoldoutSplit {
        trainval: dataset.subset(&trainval_indices),
        test: dataset.subset(&test_indices),
        trainval_indices,
        test_indices,
    })
}

/// One leave-one-out fold: `validation` is sample `index` of the source.
#[derive(Debug, Clone)]
pub struct LooFold {
    pub index: usize,
    pub train: Dataset,
    pub validation: Sample,
}

/// Lazily yields the N leave-one-record-out folds of a dataset.
#[derive(Debug, Clone)]
pub struct LooSplits<'a> {
    source: &'a Dataset,
    next: usize,
}

impl Iterator for LooSplits<'_> {
    type Item = LooFold;

    fn next(&mut self) -> Option<LooFold> {
        let k = self.next;
        let samples = self.source.samples();
        if k >= samples.len() {
            return None;
        }
        self.next += 1;
        let train = samples[..k].iter().chain(&samples[k + 1..]).cloned().collect();
        Some(LooFold {
            index: k,
            train: Dataset::from_parts(train, self.source.provenance().clone()),
            validation: samples[k].clone(),
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.source.len() - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for LooSplits<'_> {}

pub fn loo_splits(trainval: &Dataset) -> Result<LooSplits<'_>> {
    if trainval.len() < 2 {
        return Err(Error::Data(format!(
            "leave-one-out needs at least 2 samples, got {}",
            trainval.len()
        )));
    }
    Ok(LooSplits {
        source: trainval,
        next: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize_dataset, Label, Provenance, SyntheticSpec};
    use proptest::prelude::*;

    fn prov() -> Provenance {
        Provenance::Csv { path: "mem".into() }
    }

    fn tiny(labels: &[Label]) -> Dataset {
        let samples = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| Sample::new(i as u32, vec![i as f64; FEATURE_COUNT], l).unwrap())
            .collect();
        Dataset::new(samples, prov()).unwrap()
    }

    #[test]
    fn default_holdout_sizes() {
        let ds = synthesize_dataset(&SyntheticSpec::default()).unwrap();
        let split = holdout_split(&ds, 0.2, 1).unwrap();
        assert_eq!(split.test.len(), 36);
        assert_eq!(split.trainval.len(), 156);
        assert_eq!(split.test.class_counts(), [9; 4]);
    }

    #[test]
    fn degenerate_holdout_is_empty() {
        let ds = tiny(&Label::ALL);
        let split = holdout_split(&ds, 0.5, 0).unwrap();
        assert!(split.test.is_empty());
        assert_eq!(split.trainval.len(), 4);
    }

    #[test]
    fn holdout_needs_every_class() {
        let ds = tiny(&[Label::None, Label::Mild, Label::Mild]);
        assert!(matches!(holdout_split(&ds, 0.2, 0), Err(Error::Data(_))));
        let ds = tiny(&Label::ALL);
        assert!(holdout_split(&ds, 0.0, 0).is_err());
        assert!(holdout_split(&ds, 1.0, 0).is_err());
    }

    #[test]
    fn loo_smallest_case() {
        let ds = tiny(&[Label::None, Label::Severe]);
        let folds: Vec<_> = loo_splits(&ds).unwrap().collect();
        assert_eq!(folds.len(), 2);
        assert_eq!(folds[0].train.samples(), &ds.samples()[1..]);
        assert_eq!(folds[1].train.samples(), &ds.samples()[..1]);
        assert!(loo_splits(&tiny(&[Label::None])).is_err());
    }

    #[test]
    fn loo_on_trainval_covers_every_sample() {
        let ds = synthesize_dataset(&SyntheticSpec::default()).unwrap();
        let trainval = holdout_split(&ds, 0.2, 3).unwrap().trainval;
        let folds = loo_splits(&trainval).unwrap();
        assert_eq!(folds.len(), 156);
        let mut seen = Vec::new();
        for fold in folds {
            assert_eq!(fold.train.len(), 155);
            assert!(!fold.train.samples().contains(&fold.validation));
            seen.push(fold.validation);
        }
        assert_eq!(seen, trainval.samples());
    }

    #[test]
    fn standardize_uses_train_statistics() {
        let ds = synthesize_dataset(&SyntheticSpec::with_seed(4)).unwrap();
        let split = holdout_split(&ds, 0.2, 4).unwrap();
        let (train, others, stats) = standardize(&split.trainval, &[&split.test]).unwrap();
        let x = train.features();
        let n = x.rows() as f64;
        for j in 0..FEATURE_COUNT {
            let col: Vec<f64> = (0..x.rows()).map(|i| x.get(i, j)).collect();
            let mean = col.iter().sum::<f64>() / n;
            let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            assert!(mean.abs() < 1e-10);
            assert!((std - 1.0).abs() < 1e-10);
        }
        // test split keeps the train shift, so its own means drift from 0
        let t = others[0].features();
        let off: f64 = (0..FEATURE_COUNT)
            .map(|j| ((0..t.rows()).map(|i| t.get(i, j)).sum::<f64>() / t.rows() as f64).abs())
            .sum();
        assert!(off > 1e-3);
        assert_eq!(stats, FeatureStats::fit(&split.trainval).unwrap());
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let mut ds = tiny(&Label::ALL);
        let samples: Vec<Sample> = ds
            .samples()
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.features[7] = 0.1;
                s
            })
            .collect();
        ds = Dataset::new(samples, prov()).unwrap();
        let (train, _, stats) = standardize(&ds, &[]).unwrap();
        assert_eq!(stats.std[7], STD_FLOOR);
        assert!(train.samples().iter().all(|s| s.features[7] == 0.0));
        assert!(train.features().is_finite());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn holdout_is_stratified_partition(seed in any::<u64>(), fraction in 0.05f64..0.95, per_class in 1usize..20) {
            let labels: Vec<Label> = (0..per_class * 4).map(|i| Label::ALL[i % 4]).collect();
            let ds = tiny(&labels);
            let split = holdout_split(&ds, fraction, seed).unwrap();
            let mut all: Vec<usize> = split.trainval_indices.iter().chain(&split.test_indices).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());
            let expected = (fraction * per_class as f64).floor() as usize;
            prop_assert_eq!(split.test.class_counts(), [expected; 4]);
            for (k, &i) in split.test_indices.iter().enumerate() {
                prop_assert_eq!(&split.test.samples()[k], &ds.samples()[i]);
            }
        }
    }
}
