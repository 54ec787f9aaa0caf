//! The phase-driven multi-agent environment.
//!
//! Each step: UAVs move according to 2D policy actions, the crowd moves, the
//! phase clock advances (switching demand classes and objective weights every
//! `phase_len_steps` environment steps, cycling 0 -> 1 -> 2), the resource
//! allocator assigns users to UAVs and sets per-link bandwidth and power, and
//! a single team reward is computed. Agents observe local feature vectors;
//! the critic consumes a global feature vector with the same layout. The
//! phase index itself is never observable.

mod alloc;
mod obs;

pub use alloc::LinkReport;
pub use obs::{obs_layout, ObsBlock};

use rand_chacha::ChaCha8Rng;

use crate::channel::RadioConfig;
use crate::energy::{battery_step, slot_energy, Battery, RotorParams};
use crate::error::{ConfigError, SimError};
use crate::mobility::{
    blend_rpgm, gm_velocity, reflect_position, step_center, DemandClass, Hotspot, MobilityParams,
    UserState, Vec2,
};
use crate::rng;

/// Phase schedule and objective weights.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    /// Environment steps per phase segment.
    pub phase_len_steps: u64,
    /// Number of 0-1-2 cycles a full run is budgeted for.
    pub cycles: usize,
    /// Demand-class rate thresholds in Mbps, order L, M, H.
    pub demand_thresholds_mbps: [f64; 3],
    /// Reward for serving one user of class L, M, H.
    pub qoe_weights: [f64; 3],
    /// Weight on total propulsion energy (per joule).
    pub energy_weight: f64,
    /// Weight per UAV pair closer than `d_min_m`.
    pub collision_weight: f64,
    /// Overlap penalty weight per phase.
    pub overlap_weight_per_phase: [f64; 3],
    /// Overlap Gaussian scale, m.
    pub overlap_sigma_m: f64,
    /// Service radius per phase, m.
    pub service_radius_per_phase: [f64; 3],
    /// Minimum safe separation, m.
    pub d_min_m: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            phase_len_steps: 147_456,
            cycles: 3,
            demand_thresholds_mbps: [0.5, 1.0, 2.0],
            qoe_weights: [5.0, 10.0, 20.0],
            energy_weight: 0.1,
            collision_weight: 100.0,
            overlap_weight_per_phase: [20.0, 40.0, 80.0],
            overlap_sigma_m: 150.0,
            service_radius_per_phase: [200.0, 150.0, 150.0],
            d_min_m: 50.0,
        }
    }
}

impl PhaseConfig {
    /// Rate threshold of a demand class, bit/s.
    pub fn threshold_bps(&self, class: DemandClass) -> f64 {
        self.demand_thresholds_mbps[class.index()] * 1e6
    }
}

/// Crowd-motion configuration; speed, jitter and follow gain are per phase.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityConfig {
    pub user_speed_per_phase: [f64; 3],
    /// Multiplier applied to `gm_noise` per phase.
    pub direction_jitter_per_phase: [f64; 3],
    pub follow_gain_per_phase: [f64; 3],
    pub gm_memory: f64,
    pub gm_noise: f64,
    pub follow_noise: f64,
    /// Hotspot center speed as a multiple of the phase user speed.
    pub center_speed_factor: f64,
    pub group_count: usize,
    pub retarget_period: u64,
    pub eps: f64,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            user_speed_per_phase: [0.2, 0.5, 0.8],
            direction_jitter_per_phase: [0.2, 0.5, 0.8],
            follow_gain_per_phase: [0.3, 0.3, 0.3],
            gm_memory: 0.9,
            gm_noise: 0.08,
            follow_noise: 0.15,
            center_speed_factor: 1.2,
            group_count: 3,
            retarget_period: 40,
            eps: 1e-9,
        }
    }
}

impl MobilityConfig {
    /// Resolve the per-phase mobility parameters.
    pub fn params_for_phase(&self, phase: usize) -> MobilityParams {
        let v0 = self.user_speed_per_phase[phase];
        MobilityParams {
            v0_nominal: v0,
            gm_alpha: self.gm_memory,
            gm_sigma: self.gm_noise * self.direction_jitter_per_phase[phase],
            follow_kappa: self.follow_gain_per_phase[phase],
            follow_sigma_f: self.follow_noise,
            center_speed: self.center_speed_factor * v0,
            retarget_period: self.retarget_period,
            group_count: self.group_count,
            eps: self.eps,
        }
    }
}

/// Full scenario: world geometry, fleet, radio, rotor, mobility, phases.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Side of the square area, m.
    pub area_s: f64,
    pub n_uavs: usize,
    pub n_users: usize,
    /// Slot length, s.
    pub dt_s: f64,
    /// Steps per episode.
    pub episode_len: usize,
    /// Fixed flight altitude, m.
    pub altitude_m: f64,
    /// Largest per-axis displacement per slot, m.
    pub max_step_m: f64,
    /// Commanded horizontal cruise speed, m/s.
    pub uav_speed_mps: f64,
    pub max_users_per_uav: usize,
    pub battery_capacity_j: f64,
    pub phase: PhaseConfig,
    pub radio: RadioConfig,
    pub rotor: RotorParams,
    pub mobility: MobilityConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_s: 1000.0,
            n_uavs: 3,
            n_users: 20,
            dt_s: 60.0,
            episode_len: 32,
            altitude_m: 100.0,
            max_step_m: 60.0,
            uav_speed_mps: 2.0,
            max_users_per_uav: 5,
            battery_capacity_j: 650_000.0,
            phase: PhaseConfig::default(),
            radio: RadioConfig::default(),
            rotor: RotorParams::default(),
            mobility: MobilityConfig::default(),
        }
    }
}

macro_rules! require {
    ($cond:expr, $path:expr, $msg:expr) => {
        if !$cond {
            return Err(ConfigError::new($path, $msg));
        }
    };
}

impl ScenarioConfig {
    /// Validate every field, reporting the offending path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        require!(self.area_s > 0.0, "scenario.area_s", "must be positive");
        require!(self.n_uavs >= 1, "scenario.n_uavs", "need at least one UAV");
        require!(self.n_users >= 1, "scenario.n_users", "need at least one user");
        require!(self.dt_s > 0.0, "scenario.dt_s", "must be positive");
        require!(self.episode_len >= 1, "scenario.episode_len", "must be positive");
        require!(self.altitude_m > 0.0, "scenario.altitude_m", "must be positive");
        require!(self.max_step_m >= 0.0, "scenario.max_step_m", "must be nonnegative");
        require!(
            self.uav_speed_mps * self.dt_s >= std::f64::consts::SQRT_2 * self.max_step_m,
            "scenario.uav_speed_mps",
            "cruise speed too low to cover a diagonal max step within one slot"
        );
        require!(self.max_users_per_uav >= 1, "scenario.max_users_per_uav", "must be positive");
        require!(self.battery_capacity_j > 0.0, "scenario.battery_capacity_j", "must be positive");

        let p = &self.phase;
        require!(p.phase_len_steps >= 1, "scenario.phase.phase_len_steps", "must be positive");
        require!(p.cycles >= 1, "scenario.phase.cycles", "must be positive");
        require!(
            p.demand_thresholds_mbps[0] > 0.0
                && p.demand_thresholds_mbps[0] < p.demand_thresholds_mbps[1]
                && p.demand_thresholds_mbps[1] < p.demand_thresholds_mbps[2],
            "scenario.phase.demand_thresholds_mbps",
            "must be strictly increasing and positive"
        );
        for (i, w) in p.qoe_weights.iter().enumerate() {
            require!(*w >= 0.0, format!("scenario.phase.qoe_weights[{i}]"), "must be nonnegative");
        }
        require!(p.energy_weight >= 0.0, "scenario.phase.energy_weight", "must be nonnegative");
        require!(p.collision_weight >= 0.0, "scenario.phase.collision_weight", "must be nonnegative");
        for (i, w) in p.overlap_weight_per_phase.iter().enumerate() {
            require!(
                *w >= 0.0,
                format!("scenario.phase.overlap_weight_per_phase[{i}]"),
                "must be nonnegative"
            );
        }
        require!(p.overlap_sigma_m > 0.0, "scenario.phase.overlap_sigma_m", "must be positive");
        for (i, r) in p.service_radius_per_phase.iter().enumerate() {
            require!(
                *r > 0.0,
                format!("scenario.phase.service_radius_per_phase[{i}]"),
                "must be positive"
            );
        }
        require!(p.d_min_m >= 0.0, "scenario.phase.d_min_m", "must be nonnegative");

        let r = &self.radio;
        require!(r.fc_ghz > 0.0, "scenario.radio.fc_ghz", "must be positive");
        require!(r.nakagami_m >= 0.5, "scenario.radio.nakagami_m", "must be >= 0.5");
        require!(r.shadow_sigma_los_db >= 0.0, "scenario.radio.shadow_sigma_los_db", "must be nonnegative");
        require!(r.shadow_sigma_nlos_db >= 0.0, "scenario.radio.shadow_sigma_nlos_db", "must be nonnegative");
        require!(r.n0 > 0.0, "scenario.radio.n0", "must be positive");
        require!(r.bandwidth_total_hz > 0.0, "scenario.radio.bandwidth_total_hz", "must be positive");
        require!(r.reuse_factor >= 1, "scenario.radio.reuse_factor", "must be >= 1");
        require!((0.0..1.0).contains(&r.rho_adj), "scenario.radio.rho_adj", "must be in [0,1)");
        require!(
            r.alpha_impl > 0.0 && r.alpha_impl <= 1.0,
            "scenario.radio.alpha_impl",
            "must be in (0,1]"
        );
        require!(r.p_max_w > 0.0, "scenario.radio.p_max_w", "must be positive");
        require!(r.eps_gain > 0.0, "scenario.radio.eps_gain", "must be positive");

        let rot = &self.rotor;
        for (v, path) in [
            (rot.p0_w, "p0_w"),
            (rot.pi_w, "pi_w"),
            (rot.u_tip, "u_tip"),
            (rot.v0_hover, "v0_hover"),
            (rot.d0, "d0"),
            (rot.rho_air, "rho_air"),
            (rot.solidity_s, "solidity_s"),
            (rot.disk_area_a, "disk_area_a"),
        ] {
            require!(v > 0.0, format!("scenario.rotor.{path}"), "must be positive");
        }

        let m = &self.mobility;
        require!((0.0..1.0).contains(&m.gm_memory), "scenario.mobility.gm_memory", "must be in [0,1)");
        for (i, k) in m.follow_gain_per_phase.iter().enumerate() {
            require!(
                (0.0..=1.0).contains(k),
                format!("scenario.mobility.follow_gain_per_phase[{i}]"),
                "must be in [0,1]"
            );
        }
        require!(m.group_count >= 1, "scenario.mobility.group_count", "must be positive");
        require!(m.eps > 0.0, "scenario.mobility.eps", "must be positive");
        Ok(())
    }
}

/// Cyclic phase index at environment step `t`.
pub fn phase_of(t: u64, phase_len_steps: u64) -> usize {
    ((t / phase_len_steps) % 3) as usize
}

/// Demand class of a user in a phase; the class mix shifts by one slot per
/// phase so every phase sees a different population split.
pub fn demand_class_of(user_index: usize, phase: usize) -> DemandClass {
    DemandClass::ALL[(user_index + phase) % 3]
}

/// One UAV.
#[derive(Debug, Clone, PartialEq)]
pub struct UavState {
    pub pos: Vec2,
    pub altitude_m: f64,
    pub battery: Battery,
    pub active: bool,
}

/// Complete simulator state.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    /// Global step counter driving the phase clock; survives episode resets.
    pub time_step: u64,
    /// Steps taken in the current episode.
    pub episode_step: usize,
    pub uavs: Vec<UavState>,
    pub users: Vec<UserState>,
    pub hotspots: Vec<Hotspot>,
    pub phase: usize,
    /// Realized per-UAV downlink power of the previous slot, W.
    pub prev_tx_powers: Vec<f64>,
}

/// Additive reward decomposition. `total` is what the agents receive.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RewardParts {
    pub qoe: f64,
    pub energy: f64,
    pub collision: f64,
    pub overlap: f64,
    pub total: f64,
}

/// Per-step metadata alongside observations and reward.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub phase: usize,
    pub phase_switched: bool,
    pub collisions: usize,
    pub energy_j: Vec<f64>,
    pub served: usize,
    /// Fraction of users associated with some UAV.
    pub coverage: f64,
    pub reward_parts: RewardParts,
    pub link: LinkReport,
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observations: Vec<Vec<f64>>,
    pub global_state: Vec<f64>,
    /// Shared team reward (replicated to every agent).
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

impl StepOutcome {
    /// Per-agent view of the shared team reward.
    pub fn rewards(&self, n_agents: usize) -> Vec<f64> {
        vec![self.reward; n_agents]
    }
}

/// Line-delimited trace record for debugging runs.
#[derive(Debug, serde::Serialize)]
pub struct StepTrace {
    pub t: u64,
    pub phase: usize,
    pub reward: f64,
    pub qoe: f64,
    pub energy: f64,
    pub collision: f64,
    pub overlap: f64,
    pub served: usize,
    pub coverage: f64,
    pub collisions: usize,
    pub uav_x: Vec<f64>,
    pub uav_y: Vec<f64>,
    pub battery_frac: Vec<f64>,
}

/// The simulator. One instance is single-threaded; run several instances
/// with distinct seeds for parallel collection.
pub struct Env {
    cfg: ScenarioConfig,
    state: WorldState,
    rng_init: ChaCha8Rng,
    rng_mobility: ChaCha8Rng,
    rng_channel: ChaCha8Rng,
    last_report: LinkReport,
}

impl Env {
    /// Build a deterministic environment from a validated scenario and seed.
    pub fn new(cfg: ScenarioConfig, seed: u64) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let n_uavs = cfg.n_uavs;
        let n_users = cfg.n_users;
        let mut env = Self {
            state: WorldState {
                time_step: 0,
                episode_step: 0,
                uavs: Vec::new(),
                users: Vec::new(),
                hotspots: Vec::new(),
                phase: 0,
                prev_tx_powers: vec![0.0; n_uavs],
            },
            rng_init: rng::stream(seed, "env.init"),
            rng_mobility: rng::stream(seed, "env.mobility"),
            rng_channel: rng::stream(seed, "env.channel"),
            last_report: LinkReport::empty(n_uavs, n_users),
            cfg,
        };
        env.reset();
        Ok(env)
    }

    pub fn cfg(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    /// Mutable world access for scripting hand-placed scenarios. The caller
    /// is responsible for keeping positions inside the area.
    pub fn state_mut(&mut self) -> &mut WorldState {
        &mut self.state
    }

    pub fn last_report(&self) -> &LinkReport {
        &self.last_report
    }

    pub fn n_agents(&self) -> usize {
        self.cfg.n_uavs
    }

    /// Dimension of both the per-agent observation and the global state.
    pub fn obs_dim(&self) -> usize {
        obs::obs_dim(self.cfg.n_uavs, self.cfg.n_users)
    }

    /// Start a fresh episode. The global phase clock is preserved so phases
    /// advance over a whole training run, not per episode.
    ///
    /// Returns (per-agent observations, global state).
    pub fn reset(&mut self) -> (Vec<Vec<f64>>, Vec<f64>) {
        use rand::Rng;
        let cfg = &self.cfg;
        let s = cfg.area_s;
        let phase = phase_of(self.state.time_step, cfg.phase.phase_len_steps);

        // UAVs evenly spaced on a circle around the area center, full charge.
        let n = cfg.n_uavs;
        self.state.uavs = (0..n)
            .map(|u| {
                let ang = std::f64::consts::TAU * u as f64 / n as f64;
                UavState {
                    pos: Vec2::new(
                        s / 2.0 + s / 4.0 * ang.cos(),
                        s / 2.0 + s / 4.0 * ang.sin(),
                    ),
                    altitude_m: cfg.altitude_m,
                    battery: Battery::full(cfg.battery_capacity_j),
                    active: true,
                }
            })
            .collect();

        // Hotspots with locked, near-even membership (sizes differ by <= 1).
        let g = cfg.mobility.group_count;
        let base = cfg.n_users / g;
        let extra = cfg.n_users % g;
        let mut next_user = 0usize;
        self.state.hotspots = (0..g)
            .map(|gi| {
                let size = base + usize::from(gi < extra);
                let members: Vec<usize> = (next_user..next_user + size).collect();
                next_user += size;
                Hotspot {
                    center: Vec2::new(
                        self.rng_init.gen::<f64>() * s,
                        self.rng_init.gen::<f64>() * s,
                    ),
                    waypoint: Vec2::new(
                        self.rng_init.gen::<f64>() * s,
                        self.rng_init.gen::<f64>() * s,
                    ),
                    members,
                }
            })
            .collect();

        // Users scattered around their hotspot center, at rest.
        let scatter = s / 10.0;
        let mut users = vec![
            UserState {
                pos: Vec2::ZERO,
                vel: Vec2::ZERO,
                group: 0,
                demand_class: DemandClass::Low,
            };
            cfg.n_users
        ];
        for (gi, hs) in self.state.hotspots.iter().enumerate() {
            for &ui in &hs.members {
                let dx: f64 = self.rng_init.sample(rand_distr::StandardNormal);
                let dy: f64 = self.rng_init.sample(rand_distr::StandardNormal);
                users[ui] = UserState {
                    pos: Vec2::new(
                        (hs.center.x + scatter * dx).clamp(0.0, s),
                        (hs.center.y + scatter * dy).clamp(0.0, s),
                    ),
                    vel: Vec2::ZERO,
                    group: gi,
                    demand_class: demand_class_of(ui, phase),
                };
            }
        }
        self.state.users = users;
        self.state.episode_step = 0;
        self.state.phase = phase;
        self.state.prev_tx_powers = vec![0.0; n];

        self.last_report = alloc::allocate(&self.cfg, &self.state, &mut self.rng_channel);
        self.state.prev_tx_powers = self.last_report.tx_power_w.clone();
        (self.observations(), self.global_state())
    }

    fn observations(&self) -> Vec<Vec<f64>> {
        (0..self.cfg.n_uavs)
            .map(|a| obs::observe(&self.cfg, &self.state, &self.last_report, a))
            .collect()
    }

    fn global_state(&self) -> Vec<f64> {
        obs::global_state(&self.cfg, &self.state, &self.last_report)
    }

    /// Advance one slot. `actions[u]` is UAV `u`'s displacement target in
    /// `[-1, 1]^2`, scaled by `max_step_m` per axis.
    pub fn step(&mut self, actions: &[[f64; 2]]) -> Result<StepOutcome, SimError> {
        let cfg = self.cfg.clone();
        if actions.len() != cfg.n_uavs {
            return Err(SimError::InvalidArgument(format!(
                "expected {} actions, got {}",
                cfg.n_uavs,
                actions.len()
            )));
        }
        let old_phase = self.state.phase;

        // UAV motion and propulsion energy.
        let mut energy_j = vec![0.0; cfg.n_uavs];
        for (u, act) in actions.iter().enumerate() {
            if !act[0].is_finite() || !act[1].is_finite() {
                return Err(SimError::InvalidAction {
                    agent: u,
                    reason: format!("non-finite action ({}, {})", act[0], act[1]),
                });
            }
            let uav = &mut self.state.uavs[u];
            if !uav.active {
                continue; // grounded: no motion, no energy
            }
            let want = Vec2::new(
                act[0].clamp(-1.0, 1.0) * cfg.max_step_m,
                act[1].clamp(-1.0, 1.0) * cfg.max_step_m,
            );
            let target = Vec2::new(
                (uav.pos.x + want.x).clamp(0.0, cfg.area_s),
                (uav.pos.y + want.y).clamp(0.0, cfg.area_s),
            );
            let s_h = target.sub(uav.pos).norm();
            let e = slot_energy(s_h, 0.0, cfg.uav_speed_mps, 0.0, cfg.dt_s, &cfg.rotor)?;
            uav.pos = target;
            let step = battery_step(uav.battery, e)?;
            uav.battery = step.battery;
            if step.depleted {
                uav.active = false;
            }
            energy_j[u] = e;
        }

        // Crowd motion under the pre-switch phase parameters.
        let mob = cfg.mobility.params_for_phase(old_phase);
        for h in 0..self.state.hotspots.len() {
            let stepped = step_center(
                &self.state.hotspots[h],
                &mob,
                cfg.area_s,
                self.state.time_step + 1,
                cfg.dt_s,
                &mut self.rng_mobility,
            );
            self.state.hotspots[h] = stepped;
        }
        for ui in 0..self.state.users.len() {
            let center = self.state.hotspots[self.state.users[ui].group].center;
            let v_gm = gm_velocity(self.state.users[ui].vel, &mob, &mut self.rng_mobility);
            let v =
                blend_rpgm(v_gm, &self.state.users[ui], center, &mob, &mut self.rng_mobility);
            let (pos, vel) = reflect_position(self.state.users[ui].pos, v, cfg.dt_s, cfg.area_s);
            self.state.users[ui].pos = pos;
            self.state.users[ui].vel = vel;
        }

        // Advance the phase clock and refresh demand classes.
        self.state.time_step += 1;
        self.state.episode_step += 1;
        let phase = phase_of(self.state.time_step, cfg.phase.phase_len_steps);
        self.state.phase = phase;
        for (ui, user) in self.state.users.iter_mut().enumerate() {
            user.demand_class = demand_class_of(ui, phase);
        }

        // Resource allocation and reward.
        let report = alloc::allocate(&cfg, &self.state, &mut self.rng_channel);
        self.state.prev_tx_powers = report.tx_power_w.clone();

        let collisions = self.collision_pairs();
        let reward_parts = self.reward_parts(&report, &energy_j, collisions);

        let served = report.served_ok.iter().filter(|s| **s).count();
        let coverage = report.association.iter().filter(|a| a.is_some()).count() as f64
            / cfg.n_users as f64;

        self.last_report = report.clone();
        let done = self.state.episode_step >= cfg.episode_len;
        Ok(StepOutcome {
            observations: self.observations(),
            global_state: self.global_state(),
            reward: reward_parts.total,
            done,
            info: StepInfo {
                phase,
                phase_switched: phase != old_phase,
                collisions,
                energy_j,
                served,
                coverage,
                reward_parts,
                link: report,
            },
        })
    }

    /// Number of UAV pairs closer than the safety separation.
    fn collision_pairs(&self) -> usize {
        let mut count = 0;
        for u in 0..self.state.uavs.len() {
            for v in u + 1..self.state.uavs.len() {
                if self.state.uavs[u].pos.sub(self.state.uavs[v].pos).norm()
                    < self.cfg.phase.d_min_m
                {
                    count += 1;
                }
            }
        }
        count
    }

    fn reward_parts(&self, report: &LinkReport, energy_j: &[f64], collisions: usize) -> RewardParts {
        let cfg = &self.cfg;
        let phase = self.state.phase;
        let qoe: f64 = self
            .state
            .users
            .iter()
            .enumerate()
            .filter(|(ui, _)| report.served_ok[*ui])
            .map(|(_, user)| cfg.phase.qoe_weights[user.demand_class.index()])
            .sum();
        let energy = cfg.phase.energy_weight * energy_j.iter().sum::<f64>();
        let collision = cfg.phase.collision_weight * collisions as f64;

        let r_srv = cfg.phase.service_radius_per_phase[phase];
        let sigma = cfg.phase.overlap_sigma_m;
        let mut overlap_sum = 0.0;
        for u in 0..self.state.uavs.len() {
            for v in u + 1..self.state.uavs.len() {
                let d = self.state.uavs[u].pos.sub(self.state.uavs[v].pos).norm();
                if d < 2.0 * r_srv {
                    overlap_sum += (-d * d / (2.0 * sigma * sigma)).exp();
                }
            }
        }
        let overlap = cfg.phase.overlap_weight_per_phase[phase] * overlap_sum;
        RewardParts {
            qoe,
            energy,
            collision,
            overlap,
            total: qoe - energy - collision - overlap,
        }
    }

    /// Serialize one step outcome as a line-delimited trace record.
    pub fn trace_record(&self, outcome: &StepOutcome) -> StepTrace {
        StepTrace {
            t: self.state.time_step,
            phase: outcome.info.phase,
            reward: outcome.reward,
            qoe: outcome.info.reward_parts.qoe,
            energy: outcome.info.reward_parts.energy,
            collision: outcome.info.reward_parts.collision,
            overlap: outcome.info.reward_parts.overlap,
            served: outcome.info.served,
            coverage: outcome.info.coverage,
            collisions: outcome.info.collisions,
            uav_x: self.state.uavs.iter().map(|u| u.pos.x).collect(),
            uav_y: self.state.uavs.iter().map(|u| u.pos.y).collect(),
            battery_frac: self.state.uavs.iter().map(|u| u.battery.fraction()).collect(),
        }
    }
}
