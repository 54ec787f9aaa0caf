//! Observation and global-state construction.
//!
//! Both share one fixed layout; per-agent observations rotate the UAV-indexed
//! blocks so the observing UAV comes first, the global state keeps canonical
//! order. The phase index is deliberately absent: regimes must be inferred
//! from demand classes and crowd geometry.

use super::{LinkReport, ScenarioConfig, WorldState};

/// One named block of the feature layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObsBlock {
    pub name: &'static str,
    pub len: usize,
    /// Whether the block is indexed by UAV and therefore ego-rotated in
    /// per-agent observations.
    pub uav_indexed: bool,
}

/// The documented feature layout for a fleet of `n_uavs` and `n_users`.
pub fn obs_layout(n_uavs: usize, n_users: usize) -> Vec<ObsBlock> {
    vec![
        ObsBlock { name: "uav_pose", len: 3 * n_uavs, uav_indexed: true },
        ObsBlock { name: "battery_fraction", len: n_uavs, uav_indexed: true },
        ObsBlock { name: "user_rate", len: n_users, uav_indexed: false },
        ObsBlock { name: "user_class", len: n_users, uav_indexed: false },
        ObsBlock { name: "user_pos", len: 2 * n_users, uav_indexed: false },
    ]
}

pub fn obs_dim(n_uavs: usize, n_users: usize) -> usize {
    obs_layout(n_uavs, n_users).iter().map(|b| b.len).sum()
}

/// Build the feature vector with UAV blocks in the order given by `order`.
fn build(
    cfg: &ScenarioConfig,
    state: &WorldState,
    report: &LinkReport,
    order: impl Iterator<Item = usize> + Clone,
) -> Vec<f64> {
    let s = cfg.area_s;
    let rate_scale = cfg.phase.demand_thresholds_mbps[2] * 1e6;
    let mut out = Vec::with_capacity(obs_dim(cfg.n_uavs, cfg.n_users));
    for u in order.clone() {
        let uav = &state.uavs[u];
        out.push(uav.pos.x / s);
        out.push(uav.pos.y / s);
        out.push(uav.altitude_m / s);
    }
    for u in order {
        out.push(state.uavs[u].battery.fraction());
    }
    for n in 0..cfg.n_users {
        out.push((report.rate_bps[n] / rate_scale).min(2.0));
    }
    for user in &state.users {
        out.push(user.demand_class.obs_value());
    }
    for user in &state.users {
        out.push(user.pos.x / s);
        out.push(user.pos.y / s);
    }
    out
}

/// Local observation of `agent`: UAV blocks cyclically rotated ego-first.
pub fn observe(
    cfg: &ScenarioConfig,
    state: &WorldState,
    report: &LinkReport,
    agent: usize,
) -> Vec<f64> {
    let n = cfg.n_uavs;
    build(cfg, state, report, (0..n).map(move |k| (agent + k) % n))
}

/// Centralized state: the same layout in canonical UAV order.
pub fn global_state(cfg: &ScenarioConfig, state: &WorldState, report: &LinkReport) -> Vec<f64> {
    build(cfg, state, report, 0..cfg.n_uavs)
}
