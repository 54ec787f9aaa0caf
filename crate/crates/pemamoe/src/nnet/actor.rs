//! The policy network: a `MoeNet` producing the action mean, plus a free
//! log-std vector forming a diagonal Gaussian.

use rand_chacha::ChaCha8Rng;

use super::net::{GroupScheme, MoeNet, NetCache, NetConfig, NetKind};
use super::params::{ParamGroup, ParamStore};
use crate::error::NnetError;

/// Everything the Gaussian head needs from one policy forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
    /// Router probabilities over all experts (empty for the MLP).
    pub gate_probs: Vec<f64>,
    /// Indices of the executed experts, ascending.
    pub selected: Vec<usize>,
    /// Dense mix weights: zero off `selected`, summing to 1 on it.
    pub mix_weights: Vec<f64>,
}

/// Actor network bound to a parameter store.
#[derive(Debug, Clone)]
pub struct ActorNet {
    pub net: MoeNet,
    logstd_off: usize,
    logstd_len: usize,
    /// Router temperature; the Phase Controller rewrites this at runtime.
    pub temperature: f64,
}

impl ActorNet {
    pub const PREFIX: &'static str = "actor";

    /// Register fresh actor parameters. `logstd_init` doubles as the value
    /// the controller resets to after a phase switch.
    pub fn register(
        cfg: NetConfig,
        logstd_init: f64,
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, NnetError> {
        let net = MoeNet::register(Self::PREFIX, cfg, GroupScheme::Actor, store, rng)?;
        let action_dim = net.cfg.out_dim;
        store.register(
            "actor.logstd",
            &[action_dim],
            ParamGroup::LogStd,
            vec![logstd_init; action_dim],
        )?;
        let e = store.entry("actor.logstd")?;
        Ok(Self { net, logstd_off: e.offset, logstd_len: e.len, temperature: 1.0 })
    }

    /// Bind to already-registered actor parameters (e.g. from a checkpoint).
    pub fn attach(cfg: NetConfig, store: &ParamStore) -> Result<Self, NnetError> {
        let net = MoeNet::attach(Self::PREFIX, cfg, store)?;
        let e = store.entry("actor.logstd")?;
        Ok(Self { net, logstd_off: e.offset, logstd_len: e.len, temperature: 1.0 })
    }

    pub fn cfg(&self) -> &NetConfig {
        &self.net.cfg
    }

    pub fn log_std<'a>(&self, store: &'a ParamStore) -> &'a [f64] {
        &store.data()[self.logstd_off..self.logstd_off + self.logstd_len]
    }

    /// Location of the log-std vector inside gradient buffers.
    pub fn logstd_span(&self) -> (usize, usize) {
        (self.logstd_off, self.logstd_len)
    }

    /// Overwrite every log-std component (the controller's reset rule).
    pub fn reset_log_std(&self, store: &mut ParamStore, value: f64) {
        for v in &mut store.data_mut()[self.logstd_off..self.logstd_off + self.logstd_len] {
            *v = value;
        }
    }

    /// Router pass only: gate probabilities, selection, mix weights. Gate
    /// noise is drawn when `training` and the config enables it.
    pub fn router_forward(
        &self,
        store: &ParamStore,
        x: &[f64],
        rng: &mut ChaCha8Rng,
        training: bool,
    ) -> (Vec<f64>, Vec<usize>, Vec<f64>) {
        let mut macs = 0;
        let (gate, selected, mixw_sel) = self.net.route(
            store.data(),
            x,
            self.temperature,
            training.then_some(rng),
            &mut macs,
        );
        let mut mix_dense = vec![0.0; self.net.cfg.n_experts];
        for (idx, &j) in selected.iter().enumerate() {
            mix_dense[j] = mixw_sel[idx];
        }
        (gate, selected, mix_dense)
    }

    /// Full policy forward pass. Supply `noise_rng` during rollouts to draw
    /// router exploration noise; pass `None` in loss recomputation so the
    /// pass is deterministic and exactly differentiable.
    pub fn forward(
        &self,
        store: &ParamStore,
        x: &[f64],
        noise_rng: Option<&mut ChaCha8Rng>,
    ) -> (PolicyOutput, NetCache) {
        let (mean, cache) = self.net.forward(store.data(), x, self.temperature, noise_rng);
        let mut mix_dense = vec![0.0; if self.net.cfg.has_router() { self.net.cfg.n_experts } else { 0 }];
        if self.net.cfg.has_router() {
            for (idx, &j) in cache.selected().iter().enumerate() {
                mix_dense[j] = cache.mixw_sel_at(idx);
            }
        }
        (
            PolicyOutput {
                mean,
                log_std: self.log_std(store).to_vec(),
                gate_probs: cache.gate().to_vec(),
                selected: cache.selected().to_vec(),
                mix_weights: mix_dense,
            },
            cache,
        )
    }

    /// Backward through the mean path. Log-std gradients are accumulated
    /// directly by the caller via `logstd_span`.
    pub fn backward(
        &self,
        store: &ParamStore,
        cache: &mut NetCache,
        d_mean: &[f64],
        grads: &mut [f64],
    ) -> Result<(), NnetError> {
        self.net.backward(store.data(), cache, d_mean, grads)
    }
}

/// Exact actor parameter count for a network family, as constructed.
pub fn count_params(
    obs_dim: usize,
    action_dim: usize,
    n_experts: usize,
    hidden: usize,
    kind: NetKind,
) -> usize {
    let mut store = ParamStore::new();
    let mut rng = crate::rng::stream(0, "count");
    let cfg = NetConfig::actor(kind, obs_dim, action_dim, n_experts, hidden);
    ActorNet::register(cfg, 0.0, &mut store, &mut rng).expect("fresh store");
    store.count_with_prefix("actor.")
}
