//! Minimal dense-layer neural toolkit with exact reverse-mode gradients.
//!
//! Parameters live in a flat named [`ParamStore`]; the actor and critic are
//! views over it. Only the selected experts execute, and gradients flow
//! through the executed graph exactly (the discrete top-k choice is held
//! constant), which the test suite pins against central finite differences.

pub mod actor;
pub mod checkpoint;
pub mod critic;
pub mod gaussian;
mod init;
mod net;
mod params;

pub use actor::{count_params, ActorNet, PolicyOutput};
pub use critic::CriticNet;
pub use init::orthogonal;
pub use net::{FusionMode, MoeNet, NetCache, NetConfig, NetKind};
pub use params::{ParamEntry, ParamGroup, ParamStore};
