//! Dirichlet flow matching on the probability simplex with family-specific
//! (ancestral) priors.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: log-beta, the regularized incomplete beta function and its
//!   derivative in the first shape parameter, seeded random streams and the
//!   Gamma / Dirichlet / categorical samplers.
//! - [`lineage`]: aligned families, cleaning and splitting, root posterior to
//!   Dirichlet prior mapping, synthetic families, PSSMs and the family sampler.
//! - [`flow`]: conditional Dirichlet paths, the analytic transport speed,
//!   classifier-reconstructed drift and the gap-aware Euler integrator.
//! - [`denoiser`]: the exact Bayes oracle, a small trainable network and its
//!   training loop.
//! - [`reroute`]: mutate / select / amplify at an intermediate time.
//! - [`evalsuite`]: family validity, novelty, diversity and length strata.

pub mod denoiser;
pub mod error;
pub mod evalsuite;
pub mod flow;
pub mod lineage;
pub mod reroute;
pub mod specfun;

pub use error::{Error, Result};
