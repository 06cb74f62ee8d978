//! Community detection under the stochastic block model: batch and
//! sequential mean-field variational inference, batched Gibbs sampling,
//! iterative maximum likelihood, spectral initialization, and the loss and
//! rate diagnostics used to evaluate them.

pub mod error;
pub mod gibbs;
pub mod harness;
pub mod init;
pub mod loss;
pub mod mle;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod theory;
pub mod trace;
pub mod variational;

pub use error::{Result, SbmError};
