//! Numerical laboratory for memorization in overparameterized autoencoders.
//!
//! The crate is organized bottom-up:
//!
//! * [`numkit`] dense linear algebra (eigen/SVD/rank/spectral radius)
//! * [`linear_fc`] gradient descent on linear single-layer autoencoders and
//!   its minimum-norm limit
//! * [`nonlinear_fc`] the nonlinear single-layer reduction, φ-eigenvectors
//!   and φ-span membership
//! * [`net_engine`] trainable deep fully connected / convolutional
//!   autoencoders with backpropagation
//! * [`dynsys`] trajectories, fixed-point classification and recovery
//!   probability
//! * [`conv_linear`] exact matrix forms of convolution and upsampling layers,
//!   forced-zero analysis and spectrum reports
//! * [`robustness`] the piecewise-linear interpolant that memorizes without
//!   overfitting
//! * [`datagen`] synthetic datasets

pub mod activation;
pub mod conv_linear;
pub mod datagen;
pub mod dynsys;
pub mod error;
pub mod linear_fc;
pub mod net_engine;
pub mod nonlinear_fc;
pub mod numkit;
pub mod rng;
pub mod robustness;

pub use activation::Activation;
pub use error::{Error, Result};
pub use linear_fc::TrainingSet;
pub use net_engine::Network;
pub use numkit::Matrix;
