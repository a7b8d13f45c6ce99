//! Shock selection for forward-backward diffusion with a non-monotone
//! diffusivity: shock families and selection rules, the weight parameter
//! that makes a regularisation pick a given shock, travelling-wave speeds by
//! shooting, and a method-of-lines simulator for the regularised equation.

// Negated comparisons are deliberate: they send NaN down the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod model;
pub mod numeric;
pub mod output;
pub mod pde;
pub mod regularization;
pub mod shock;
pub mod wave;

pub use error::{Error, Result};
pub use model::{DiffusivityModel, PotentialModel, ReactionModel, Shape};
pub use pde::{Discretisation, Regularisation, SimulationConfig, SimulationResult};
pub use regularization::{RegularisationWeight, Weight, WeightFamily};
pub use shock::{ShockFamily, ShockPosition, ShockRule};
pub use wave::WaveSpeedSolution;
