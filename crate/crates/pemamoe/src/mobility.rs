//! Ground-user crowd motion.
//!
//! Users are partitioned into hotspots with locked membership. Each hotspot
//! center migrates toward a waypoint that is redrawn periodically; each user
//! runs a Gauss-Markov velocity process blended with a pull toward its
//! hotspot center, and positions reflect off the area boundary.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::SimError;

/// Minimal 2D vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Self = Self { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// Direction of `self`, regularized so the zero vector maps to zero.
    pub fn unit_eps(self, eps: f64) -> Self {
        let n = self.norm();
        self.scale(1.0 / (n + eps))
    }
}

/// Traffic demand class of a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum DemandClass {
    Low,
    Mid,
    High,
}

impl DemandClass {
    pub const ALL: [DemandClass; 3] = [DemandClass::Low, DemandClass::Mid, DemandClass::High];

    pub fn index(self) -> usize {
        match self {
            DemandClass::Low => 0,
            DemandClass::Mid => 1,
            DemandClass::High => 2,
        }
    }

    /// Admission priority: High > Mid > Low.
    pub fn priority(self) -> usize {
        self.index()
    }

    /// Normalized observation feature in {0, 0.5, 1}.
    pub fn obs_value(self) -> f64 {
        self.index() as f64 * 0.5
    }
}

/// Per-phase crowd-motion parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityParams {
    /// Nominal user speed, m/s.
    pub v0_nominal: f64,
    /// Gauss-Markov memory in [0, 1).
    pub gm_alpha: f64,
    /// Gauss-Markov noise scale, m/s.
    pub gm_sigma: f64,
    /// Group-following gain in [0, 1].
    pub follow_kappa: f64,
    /// Follow-noise scale, m/s.
    pub follow_sigma_f: f64,
    /// Hotspot center speed, m/s.
    pub center_speed: f64,
    /// Steps between waypoint redraws.
    pub retarget_period: u64,
    /// Number of hotspots.
    pub group_count: usize,
    /// Direction regularizer.
    pub eps: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            v0_nominal: 0.5,
            gm_alpha: 0.9,
            gm_sigma: 0.08,
            follow_kappa: 0.3,
            follow_sigma_f: 0.15,
            center_speed: 0.6,
            retarget_period: 40,
            group_count: 3,
            eps: 1e-9,
        }
    }
}

impl MobilityParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..1.0).contains(&self.gm_alpha) {
            return Err(SimError::InvalidArgument(format!(
                "gm_alpha must be in [0,1), got {}",
                self.gm_alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.follow_kappa) {
            return Err(SimError::InvalidArgument(format!(
                "follow_kappa must be in [0,1], got {}",
                self.follow_kappa
            )));
        }
        Ok(())
    }
}

/// A moving crowd hotspot with locked membership.
#[derive(Debug, Clone, PartialEq)]
pub struct Hotspot {
    pub center: Vec2,
    pub waypoint: Vec2,
    pub members: Vec<usize>,
}

/// One ground user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserState {
    pub pos: Vec2,
    pub vel: Vec2,
    pub group: usize,
    pub demand_class: DemandClass,
}

/// Advance a hotspot center one slot; redraw the waypoint every
/// `retarget_period` steps.
pub fn step_center<R: Rng + ?Sized>(
    h: &Hotspot,
    params: &MobilityParams,
    area_s: f64,
    step_count: u64,
    dt: f64,
    rng: &mut R,
) -> Hotspot {
    let mut out = h.clone();
    if params.retarget_period > 0 && step_count > 0 && step_count % params.retarget_period == 0 {
        out.waypoint = Vec2::new(rng.gen::<f64>() * area_s, rng.gen::<f64>() * area_s);
    }
    let to_wp = out.waypoint.sub(out.center);
    let step = to_wp.unit_eps(params.eps).scale(params.center_speed * dt);
    // Do not overshoot the waypoint.
    let step = if step.norm() > to_wp.norm() { to_wp } else { step };
    out.center = out.center.add(step);
    out.center.x = out.center.x.clamp(0.0, area_s);
    out.center.y = out.center.y.clamp(0.0, area_s);
    out
}

/// Gauss-Markov velocity update with memory `gm_alpha`.
pub fn gm_velocity<R: Rng + ?Sized>(v: Vec2, params: &MobilityParams, rng: &mut R) -> Vec2 {
    let a = params.gm_alpha;
    let drift = v.unit_eps(params.eps).scale((1.0 - a) * params.v0_nominal);
    let noise_scale = (1.0 - a * a).sqrt() * params.gm_sigma;
    let xi = Vec2::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    v.scale(a).add(drift).add(xi.scale(noise_scale))
}

/// Blend a Gauss-Markov velocity with the pull toward the hotspot center.
pub fn blend_rpgm<R: Rng + ?Sized>(
    v_gm: Vec2,
    user: &UserState,
    center: Vec2,
    params: &MobilityParams,
    rng: &mut R,
) -> Vec2 {
    let k = params.follow_kappa;
    let pull = center.sub(user.pos).unit_eps(params.eps).scale(k * params.v0_nominal);
    let eta = Vec2::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        .scale(params.follow_sigma_f);
    v_gm.scale(1.0 - k).add(pull).add(eta)
}

/// Integrate one slot of motion with reflecting boundaries on [0, S]^2.
///
/// Each boundary crossing mirrors the offending coordinate and flips the
/// matching velocity component so momentum does not tunnel through walls.
pub fn reflect_position(pos: Vec2, vel: Vec2, dt: f64, area_s: f64) -> (Vec2, Vec2) {
    let mut p = pos.add(vel.scale(dt));
    let mut v = vel;
    for (c, vc) in [(&mut p.x, &mut v.x), (&mut p.y, &mut v.y)] {
        while *c < 0.0 || *c > area_s {
            if *c < 0.0 {
                *c = -*c;
                *vc = -*vc;
            } else {
                *c = 2.0 * area_s - *c;
                *vc = -*vc;
            }
        }
    }
    (p, v)
}
