//! Dense matrices, activations, losses, and the seeded random source.

mod matrix;
mod ops;
mod rng;

pub use matrix::Matrix;
pub use ops::{argmax, cross_entropy, relu, relu_in_place, softmax, softmax_in_place, PROB_FLOOR};
pub use rng::{sample, Distribution, Rng};
