//! Non-Gaussian process regression: Gaussian processes on inputs warped by a
//! random subordinator, fitted by MH-within-Gibbs over the subordinator's jumps.

pub mod cli;
pub mod commands;
pub mod config;
pub mod datagen;
pub mod error;
pub mod gp;
pub mod io;
pub mod kernels;
pub mod levy;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
