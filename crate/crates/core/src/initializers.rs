//! Xavier and Kaiming weight initialization.
//!
//! Both schemes draw i.i.d. zero-mean weights whose variance is a function
//! of the layer's fan-in `d` (the number of inputs each output unit sums):
//!
//! | family  | variance | uniform bound |
//! |---------|----------|---------------|
//! | Xavier  | `1/d`    | `±√(3/d)`     |
//! | Kaiming | `2/d`    | `±√(6/d)`     |
//!
//! Xavier keeps `Var(Wx) = Var(x)` for a linear layer. Kaiming doubles the
//! variance to compensate for ReLU zeroing half of a symmetric input.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{relu_in_place, sample, Distribution, Matrix, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitFamily {
    Xavier,
    Kaiming,
}

impl InitFamily {
    pub const ALL: [InitFamily; 2] = [InitFamily::Xavier, InitFamily::Kaiming];

    /// Numerator of the variance formula `gain / d`.
    fn gain(self) -> f64 {
        match self {
            InitFamily::Xavier => 1.0,
            InitFamily::Kaiming => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InitFamily::Xavier => "Xavier",
            InitFamily::Kaiming => "Kaiming",
        }
    }
}

impl fmt::Display for InitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xavier" | "glorot" => Ok(InitFamily::Xavier),
            "kaiming" | "he" => Ok(InitFamily::Kaiming),
            _ => Err(Error::invalid(format!("unknown init family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitDist {
    Normal,
    Uniform,
}

impl FromStr for InitDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(InitDist::Normal),
            "uniform" => Ok(InitDist::Uniform),
            _ => Err(Error::invalid(format!("unknown init distribution {s:?}"))),
        }
    }
}

impl fmt::Display for InitDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitDist::Normal => "normal",
            InitDist::Uniform => "uniform",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InitScheme {
    pub family: InitFamily,
    pub dist: InitDist,
}

impl InitScheme {
    pub const ALL: [InitScheme; 4] = [
        InitScheme::new(InitFamily::Xavier, InitDist::Normal),
        InitScheme::new(InitFamily::Xavier, InitDist::Uniform),
        InitScheme::new(InitFamily::Kaiming, InitDist::Normal),
        InitScheme::new(InitFamily::Kaiming, InitDist::Uniform),
    ];

    pub const fn new(family: InitFamily, dist: InitDist) -> Self {
        Self { family, dist }
    }

    /// Target `Var(W_ij)`: `1/d` for Xavier, `2/d` for Kaiming.
    pub fn target_variance(&self, fan_in: usize) -> Result<f64> {
        check_fan_in(fan_in)?;
        Ok(self.family.gain() / fan_in as f64)
    }

    /// Half-width `a` of the uniform variant `U(-a, a)`, chosen so `a²/3`
    /// equals the target variance.
    pub fn uniform_bound(&self, fan_in: usize) -> Result<f64> {
        check_fan_in(fan_in)?;
        Ok((3.0 * self.family.gain() / fan_in as f64).sqrt())
    }

    pub fn distribution(&self, fan_in: usize) -> Result<Distribution> {
        Ok(match self.dist {
            InitDist::Normal => Distribution::Normal {
                mean: 0.0,
                variance: self.target_variance(fan_in)?,
            },
            InitDist::Uniform => {
                let a = self.uniform_bound(fan_in)?;
                Distribution::Uniform { lo: -a, hi: a }
            }
        })
    }
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.family, self.dist)
    }
}

fn check_fan_in(fan_in: usize) -> Result<()> {
    if fan_in == 0 {
        return Err(Error::invalid("fan-in must be at least 1"));
    }
    Ok(())
}

/// Convenience wrapper over [`InitScheme::target_variance`].
pub fn target_variance(scheme: InitScheme, fan_in: usize) -> Result<f64> {
    scheme.target_variance(fan_in)
}

/// Convenience wrapper over [`InitScheme::uniform_bound`].
pub fn uniform_bound(scheme: InitScheme, fan_in: usize) -> Result<f64> {
    scheme.uniform_bound(fan_in)
}

/// A `rows × cols` weight matrix of i.i.d. draws for a layer with the given fan-in.
pub fn initialize(
    rng: &mut Rng,
    scheme: InitScheme,
    fan_in: usize,
    rows: usize,
    cols: usize,
) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "weight matrix dimensions must be nonzero, got {rows}x{cols}"
        )));
    }
    let data = sample(rng, scheme.distribution(fan_in)?, rows * cols)?;
    Matrix::new(rows, cols, data)
}

/// Population variance of `values` around their mean.
pub fn empirical_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Pushes `input` through `depth` square zero-bias layers of the given
/// width, each computing `Y_l = W_l · relu(Y_{l-1})` with `Y_0 = input`, and
/// returns the pooled empirical variance of every `Y_l` (`l = 1..=depth`).
///
/// Treating the input as the pre-activation of an earlier layer means an
/// ideal initializer keeps every entry of the profile at `Var(input)`.
pub fn relu_variance_profile(
    rng: &mut Rng,
    scheme: InitScheme,
    depth: usize,
    input: &Matrix,
) -> Result<Vec<f64>> {
    let width = input.cols();
    let mut current = input.clone();
    let mut profile = Vec::with_capacity(depth);
    for _ in 0..depth {
        relu_in_place(&mut current);
        let w = initialize(rng, scheme, width, width, width)?;
        current = current.matmul_nt(&w)?;
        profile.push(empirical_variance(current.as_slice()));
    }
    Ok(profile)
}
