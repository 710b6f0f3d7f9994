//! Multivariate time-series forecasting on hypervariate graphs.
//!
//! Each lookback window of N variables over T steps becomes a fully-connected
//! graph of N*T nodes. Node embeddings are transformed to Fourier space, run
//! through a stack of learnable complex operators (a matrix product per
//! diffusion order, summed with a residual), transformed back, and projected
//! onto the forecast horizon by a feed-forward head. Training is reverse-mode
//! gradients plus RMSProp, all implemented here.
//!
//! The `oracle` module carries brute-force time-domain references (dense
//! circulant graph convolutions, naive convolution checks) that pin down the
//! spectral path's correctness on small instances; the `verify` CLI
//! subcommand runs them as a gate.

pub mod backward;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod fft;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod spectral;
pub mod train;

pub use error::{Error, Result};
