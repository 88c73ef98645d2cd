//! Samples, datasets, and the split protocol.
//!
//! Each sample carries 85 physiological features laid out as
//! `[gsr_00..gsr_22, pd_00..pd_38, st_00..st_22]`, a participant id, and one
//! of four severity labels.

mod csv_io;
mod split;
mod synthetic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub use csv_io::{csv_header, load_csv, write_csv};
pub use split::{holdout_split, loo_splits, standardize, FeatureStats, HoldoutSplit, LooFold, LooSplits, STD_FLOOR};
pub use synthetic::{synthesize_dataset, SyntheticSpec};

pub const GSR_FEATURES: usize = 23;
pub const PD_FEATURES: usize = 39;
pub const ST_FEATURES: usize = 23;
pub const FEATURE_COUNT: usize = GSR_FEATURES + PD_FEATURES + ST_FEATURES;
pub const NUM_CLASSES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    None = 0,
    Mild = 1,
    Moderate = 2,
    Severe = 3,
}

impl Label {
    pub const ALL: [Label; NUM_CLASSES] = [Label::None, Label::Mild, Label::Moderate, Label::Severe];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::None => "None",
            Label::Mild => "Mild",
            Label::Moderate => "Moderate",
            Label::Severe => "Severe",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    /// Accepts `None|Mild|Moderate|Severe` (case-sensitive) or `0`–`3`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "None" | "0" => Ok(Label::None),
            "Mild" | "1" => Ok(Label::Mild),
            "Moderate" | "2" => Ok(Label::Moderate),
            "Severe" | "3" => Ok(Label::Severe),
            _ => Err(Error::invalid(format!("unknown label {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub participant_id: u32,
    pub features: Vec<f64>,
    pub label: Label,
}

impl Sample {
    pub fn new(participant_id: u32, features: Vec<f64>, label: Label) -> Result<Self> {
        if features.len() != FEATURE_COUNT {
            return Err(Error::invalid(format!(
                "sample needs {FEATURE_COUNT} features, got {}",
                features.len()
            )));
        }
        Ok(Self {
            participant_id,
            features,
            label,
        })
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Csv { path: String },
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    provenance: Provenance,
}

impl Dataset {
    /// A nonempty dataset.
    pub fn new(samples: Vec<Sample>, provenance: Provenance) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Data("dataset has no samples".into()));
        }
        Ok(Self::from_parts(samples, provenance))
    }

    /// Split outputs may legitimately be empty (e.g. a degenerate holdout).
    pub(crate) fn from_parts(samples: Vec<Sample>, provenance: Provenance) -> Self {
        debug_assert!(samples.iter().all(|s| s.features.len() == FEATURE_COUNT));
        Self { samples, provenance }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `len × 85` feature matrix.
    pub fn features(&self) -> Matrix {
        let rows: Vec<&[f64]> = self.samples.iter().map(|s| s.features.as_slice()).collect();
        if rows.is_empty() {
            return Matrix::zeros(0, FEATURE_COUNT);
        }
        Matrix::from_rows(&rows).expect("samples share the feature width")
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label.index()).collect()
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for s in &self.samples {
            counts[s.label.index()] += 1;
        }
        counts
    }

    pub(crate) fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset::from_parts(
            indices.iter().map(|&i| self.samples[i].clone()).collect(),
            self.provenance.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_layout() {
        assert_eq!(FEATURE_COUNT, 85);
    }

    #[test]
    fn label_tokens() {
        assert_eq!("Mild".parse::<Label>().unwrap(), Label::Mild);
        assert_eq!("3".parse::<Label>().unwrap(), Label::Severe);
        assert!("mild".parse::<Label>().is_err());
        assert!("4".parse::<Label>().is_err());
        for l in Label::ALL {
            assert_eq!(Label::from_index(l.index()), Some(l));
            assert_eq!(l.name().parse::<Label>().unwrap(), l);
        }
    }

    #[test]
    fn sample_width_checked() {
        assert!(Sample::new(0, vec![0.0; 84], Label::None).is_err());
        assert!(Sample::new(0, vec![0.0; 85], Label::None).is_ok());
    }

    #[test]
    fn empty_dataset_rejected() {
        let p = Provenance::Csv { path: "x".into() };
        assert!(matches!(Dataset::new(vec![], p), Err(Error::Data(_))));
    }
}
