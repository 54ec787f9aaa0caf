//! Per-slot resource allocation.
//!
//! Deterministic heuristics executed inside every simulator step:
//! 1. association — each user attaches to the nearest active UAV within the
//!    phase service radius;
//! 2. admission — each UAV admits its associated users in decreasing
//!    demand-class priority (H > M > L, ties broken by proximity) up to the
//!    per-UAV capacity;
//! 3. bandwidth — the color bandwidth B/F is split equally among admitted
//!    users;
//! 4. power — each admitted user gets the power required to hit its class
//!    rate target under the previous slot's interference; users whose
//!    requirement would push the UAV over its power budget are dropped.
//!
//! Realized SINR and rate are then recomputed with the realized powers, and
//! a user counts as served only if its realized rate meets the class target.

use rand_chacha::ChaCha8Rng;

use super::{ScenarioConfig, WorldState};
use crate::channel::{interference, required_power, sample_link, sinr_and_rate, LinkGeometry};

/// Outcome of one slot's allocation, indexed by user (and UAV where noted).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    /// Serving UAV per user, `None` when out of every service radius.
    pub association: Vec<Option<usize>>,
    /// Admitted users per UAV, in admission order, after the power cut.
    pub admitted: Vec<Vec<usize>>,
    /// Per-user bandwidth, Hz (zero unless admitted).
    pub bandwidth_hz: Vec<f64>,
    /// Per-user allocated power, W.
    pub power_w: Vec<f64>,
    /// Per-user realized SINR.
    pub sinr: Vec<f64>,
    /// Per-user realized rate, bit/s.
    pub rate_bps: Vec<f64>,
    /// Whether the realized rate met the user's class threshold.
    pub served_ok: Vec<bool>,
    /// Realized total downlink power per UAV, W.
    pub tx_power_w: Vec<f64>,
}

impl LinkReport {
    pub fn empty(n_uavs: usize, n_users: usize) -> Self {
        Self {
            association: vec![None; n_users],
            admitted: vec![Vec::new(); n_uavs],
            bandwidth_hz: vec![0.0; n_users],
            power_w: vec![0.0; n_users],
            sinr: vec![0.0; n_users],
            rate_bps: vec![0.0; n_users],
            served_ok: vec![false; n_users],
            tx_power_w: vec![0.0; n_uavs],
        }
    }
}

/// Reuse color of a UAV.
pub fn color_of(uav: usize, reuse_factor: usize) -> usize {
    uav % reuse_factor
}

/// Slack on the served-rate check (1e-6 Mbps). The power rule inverts the
/// rate formula exactly, so the realized rate can round a hair below the
/// target; a user is not dropped over float dust.
const SERVED_SLACK_BPS: f64 = 1.0;

pub(super) fn allocate(
    cfg: &ScenarioConfig,
    state: &WorldState,
    rng: &mut ChaCha8Rng,
) -> LinkReport {
    let n_uavs = cfg.n_uavs;
    let n_users = cfg.n_users;
    let radio = &cfg.radio;
    let mut report = LinkReport::empty(n_uavs, n_users);

    // Fresh fading draws for every pair, active or not (inactive UAVs simply
    // transmit zero power).
    let mut gains = vec![vec![0.0f64; n_users]; n_uavs];
    let mut dists = vec![vec![0.0f64; n_users]; n_uavs];
    for (u, uav) in state.uavs.iter().enumerate() {
        for (n, user) in state.users.iter().enumerate() {
            let d = uav.pos.sub(user.pos).norm();
            dists[u][n] = d;
            let geom = LinkGeometry::new(d, uav.altitude_m)
                .expect("altitude is positive so the link length cannot vanish");
            gains[u][n] = sample_link(geom, radio, rng)
                .expect("validated geometry")
                .gain_linear;
        }
    }

    // (1) Association: nearest active UAV within the phase service radius.
    let r_srv = cfg.phase.service_radius_per_phase[state.phase];
    for n in 0..n_users {
        let mut best: Option<(usize, f64)> = None;
        for (u, uav) in state.uavs.iter().enumerate() {
            if !uav.active || dists[u][n] > r_srv {
                continue;
            }
            if best.map_or(true, |(_, bd)| dists[u][n] < bd) {
                best = Some((u, dists[u][n]));
            }
        }
        report.association[n] = best.map(|(u, _)| u);
    }

    let colors: Vec<usize> = (0..n_uavs).map(|u| color_of(u, radio.reuse_factor)).collect();

    for u in 0..n_uavs {
        // (2) Admission: priority desc, distance asc, index asc.
        let mut pool: Vec<usize> =
            (0..n_users).filter(|n| report.association[*n] == Some(u)).collect();
        pool.sort_by(|&a, &b| {
            let pa = state.users[a].demand_class.priority();
            let pb = state.users[b].demand_class.priority();
            pb.cmp(&pa)
                .then(dists[u][a].partial_cmp(&dists[u][b]).expect("finite distances"))
                .then(a.cmp(&b))
        });
        pool.truncate(cfg.max_users_per_uav);
        if pool.is_empty() {
            continue;
        }

        // (3) Equal bandwidth split over the admitted count.
        let b_user = radio.color_bandwidth_hz() / pool.len() as f64;

        // (4) Feasibility-driven power under last slot's interference.
        let mut budget_used = 0.0;
        let mut kept = Vec::with_capacity(pool.len());
        for &n in &pool {
            let user_gains: Vec<f64> = (0..n_uavs).map(|w| gains[w][n]).collect();
            let i_cons =
                interference(&user_gains, &state.prev_tx_powers, &colors, u, radio)
                    .expect("lengths match by construction");
            let target = cfg.phase.threshold_bps(state.users[n].demand_class);
            let p = required_power(target, b_user, i_cons, gains[u][n], radio);
            if budget_used + p <= radio.p_max_w {
                budget_used += p;
                report.power_w[n] = p;
                report.bandwidth_hz[n] = b_user;
                kept.push(n);
            }
        }
        report.tx_power_w[u] = budget_used;
        report.admitted[u] = kept;
    }

    // Realized SINR and rate with the realized powers.
    for u in 0..n_uavs {
        for idx in 0..report.admitted[u].len() {
            let n = report.admitted[u][idx];
            let user_gains: Vec<f64> = (0..n_uavs).map(|w| gains[w][n]).collect();
            let i_real = interference(&user_gains, &report.tx_power_w, &colors, u, radio)
                .expect("lengths match by construction");
            let (sinr, rate) =
                sinr_and_rate(report.power_w[n], gains[u][n], report.bandwidth_hz[n], i_real, radio);
            report.sinr[n] = sinr;
            report.rate_bps[n] = rate;
            report.served_ok[n] =
                rate >= cfg.phase.threshold_bps(state.users[n].demand_class) - SERVED_SLACK_BPS;
        }
    }
    report
}
