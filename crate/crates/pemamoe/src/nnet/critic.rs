//! The centralized value network: the same router/expert structure with a
//! scalar head, always routed deterministically (no gate noise).

use rand_chacha::ChaCha8Rng;

use super::net::{GroupScheme, MoeNet, NetCache, NetConfig};
use super::params::ParamStore;
use crate::error::NnetError;

#[derive(Debug, Clone)]
pub struct CriticNet {
    pub net: MoeNet,
}

impl CriticNet {
    pub const PREFIX: &'static str = "critic";

    pub fn register(
        cfg: NetConfig,
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, NnetError> {
        Ok(Self { net: MoeNet::register(Self::PREFIX, cfg, GroupScheme::Critic, store, rng)? })
    }

    pub fn attach(cfg: NetConfig, store: &ParamStore) -> Result<Self, NnetError> {
        Ok(Self { net: MoeNet::attach(Self::PREFIX, cfg, store)? })
    }

    pub fn cfg(&self) -> &NetConfig {
        &self.net.cfg
    }

    /// Team value of a global state.
    pub fn value(&self, store: &ParamStore, x: &[f64]) -> (f64, NetCache) {
        let (out, cache) = self.net.forward(store.data(), x, 1.0, None);
        (out[0], cache)
    }

    pub fn backward(
        &self,
        store: &ParamStore,
        cache: &mut NetCache,
        d_value: f64,
        grads: &mut [f64],
    ) -> Result<(), NnetError> {
        self.net.backward(store.data(), cache, &[d_value], grads)
    }
}
