//! Phase-driven multi-UAV emergency-communication laboratory.
//!
//! This crate bundles a desk-scale simulator for UAV aerial base stations
//! serving mobile ground users (air-to-ground channel, rotary-wing energy,
//! crowd mobility, phase-switched demand) with a from-scratch multi-agent
//! PPO trainer built around a sparsely gated mixture-of-experts policy and a
//! non-gradient Phase Controller that re-plasticizes the experts at regime
//! switches. Plasticity diagnostics (dormant-neuron fraction, stable rank,
//! interquartile means) round out the toolkit.
//!
//! The companion guide under `book/` walks through each layer; its code
//! snippets compile and run as doc-tests of this crate.

pub mod channel;
pub mod energy;
pub mod env;
pub mod error;
pub mod mobility;
pub mod nnet;
pub mod rng;
