//! SGD with classic momentum and the published per-configuration presets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initializers::InitFamily;
use crate::network::{Gradients, MlpModel, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Hyperparams {
    pub fn new(batch_size: usize, learning_rate: f64, momentum: f64) -> Result<Self> {
        let hp = Self {
            batch_size,
            learning_rate,
            momentum,
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        Ok(())
    }
}

/// Batch size, learning rate and momentum tuned for each depth/initializer pair.
pub fn preset_hyperparams(topology: Topology, family: InitFamily) -> Hyperparams {
    let (batch_size, learning_rate, momentum) = match (topology, family) {
        (Topology::OneLayer, InitFamily::Xavier) => (24, 0.0001, 0.6),
        (Topology::OneLayer, InitFamily::Kaiming) => (36, 0.0001, 0.6),
        (Topology::TwoLayer, InitFamily::Xavier) => (24, 0.006, 0.7),
        (Topology::TwoLayer, InitFamily::Kaiming) => (36, 0.003, 0.7),
        (Topology::ThreeLayer, InitFamily::Xavier) => (36, 0.006, 0.7),
        (Topology::ThreeLayer, InitFamily::Kaiming) => (36, 0.0002, 0.6),
    };
    Hyperparams {
        batch_size,
        learning_rate,
        momentum,
    }
}

/// Velocity buffers for one model: `v ← m·v + g`, `θ ← θ − lr·v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdMomentum {
    velocity: Vec<Vec<f64>>,
}

impl SgdMomentum {
    pub fn new(model: &MlpModel) -> Self {
        let velocity = Gradients::zeros_like(model)
            .blocks()
            .map(|b| b.to_vec())
            .collect();
        Self { velocity }
    }

    pub fn velocity(&self) -> &[Vec<f64>] {
        &self.velocity
    }

    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients, hp: &Hyperparams) -> Result<()> {
        let congruent = grads.blocks().count() == self.velocity.len()
            && grads
                .blocks()
                .zip(&self.velocity)
                .zip(model.param_blocks_mut())
                .all(|((g, v), p)| g.len() == v.len() && v.len() == p.len());
        if !congruent {
            return Err(Error::invalid(
                "optimizer state, model and gradients have different shapes",
            ));
        }
        let (lr, m) = (hp.learning_rate, hp.momentum);
        for ((params, g), v) in model
            .param_blocks_mut()
            .zip(grads.blocks())
            .zip(self.velocity.iter_mut())
        {
            for ((p, &g), v) in params.iter_mut().zip(g).zip(v.iter_mut()) {
                *v = m * *v + g;
                *p -= lr * *v;
            }
        }
        Ok(())
    }
}

/// Free-function form of [`SgdMomentum::step`].
pub fn sgd_step(
    state: &mut SgdMomentum,
    model: &mut MlpModel,
    grads: &Gradients,
    hp: &Hyperparams,
) -> Result<()> {
    state.step(model, grads, hp)
}
