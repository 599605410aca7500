//! Polynomial-diffusion models for bounded energy spot prices.
//!
//! A latent Jacobi factor on `[0, 1]` is mapped to prices in `[0, s_max]`
//! by an increasing polynomial. Conditional expectations of polynomials are
//! matrix exponentials of the generator, so forwards have closed forms, and
//! the spectral expansion of the Jacobi transition density gives exact
//! likelihoods for one factor and Bayes-filter likelihoods for two.

pub mod calibrate;
pub mod cli;
pub mod error;
pub mod filter;
pub mod generator;
pub mod jacobi;
pub mod model;
pub mod optim;
pub mod polymap;
pub mod pricing;
pub mod quadrature;

pub use error::{Error, Result};
