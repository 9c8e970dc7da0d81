//! Non-Bayesian social learning under inferential attacks.
//!
//! Agents hold beliefs over two hypotheses, update them with private
//! observations and pool their neighbors' intermediate beliefs geometrically.
//! Malicious agents run the same protocol but with forged likelihoods. The
//! crate simulates these dynamics, constructs forged likelihoods that mislead
//! the network, and predicts the outcome in closed form.

pub mod analysis;
pub mod attacks;
pub mod error;
pub mod learning;
pub mod network;
pub mod probability;
pub mod simulator;

pub use error::{Error, Result};
