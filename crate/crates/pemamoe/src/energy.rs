//! Rotary-wing propulsion power and battery bookkeeping.
//!
//! A slot's motion is executed as a horizontal segment, a vertical segment,
//! and hover for the remainder; each segment is billed at the corresponding
//! propulsion power.

use crate::error::SimError;

/// Rotor model constants. Defaults are standard rotary-wing values.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotorParams {
    /// Blade profile power in hover, W.
    pub p0_w: f64,
    /// Induced power in hover, W.
    pub pi_w: f64,
    /// Blade tip speed, m/s.
    pub u_tip: f64,
    /// Mean rotor induced velocity in hover, m/s.
    pub v0_hover: f64,
    /// Fuselage drag ratio.
    pub d0: f64,
    /// Air density, kg/m^3.
    pub rho_air: f64,
    /// Rotor solidity.
    pub solidity_s: f64,
    /// Rotor disk area, m^2.
    pub disk_area_a: f64,
}

impl Default for RotorParams {
    fn default() -> Self {
        Self {
            p0_w: 79.86,
            pi_w: 88.63,
            u_tip: 120.0,
            v0_hover: 4.03,
            d0: 0.6,
            rho_air: 1.225,
            solidity_s: 0.05,
            disk_area_a: 0.503,
        }
    }
}

impl RotorParams {
    /// Power to hold position: P0 + Pi.
    pub fn hover_power_w(&self) -> f64 {
        self.p0_w + self.pi_w
    }
}

/// Onboard energy store.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Battery {
    pub remaining_j: f64,
    pub capacity_j: f64,
}

impl Battery {
    pub fn full(capacity_j: f64) -> Self {
        Self { remaining_j: capacity_j, capacity_j }
    }

    pub fn fraction(&self) -> f64 {
        if self.capacity_j > 0.0 { self.remaining_j / self.capacity_j } else { 0.0 }
    }
}

/// Propulsion power at horizontal speed `vh` and vertical speed `vz`.
///
/// Profile term grows quadratically with `vh`, the induced term decays with
/// total speed, and the parasite term grows with `vh^3`.
pub fn rotor_power(vh: f64, vz: f64, params: &RotorParams) -> Result<f64, SimError> {
    if !vh.is_finite() || !vz.is_finite() || vh < 0.0 {
        return Err(SimError::InvalidArgument(format!(
            "rotor_power requires finite speeds with vh >= 0, got vh={vh}, vz={vz}"
        )));
    }
    let v2 = vh * vh + vz * vz;
    let v0sq = params.v0_hover * params.v0_hover;
    let profile = params.p0_w * (1.0 + 3.0 * vh * vh / (params.u_tip * params.u_tip));
    // sqrt(1 + x^2) - x with x = v^2 / (2 v0^2); stays in (0, 1] for x >= 0.
    let x = v2 / (2.0 * v0sq);
    let induced = params.pi_w * ((1.0 + x * x).sqrt() - x).sqrt();
    let parasite =
        0.5 * params.d0 * params.rho_air * params.solidity_s * params.disk_area_a * vh.powi(3);
    Ok(profile + induced + parasite)
}

/// Split a slot into horizontal, vertical and hover times.
///
/// Errors with `InfeasibleAction` when the commanded motion does not fit in
/// the slot.
pub fn slot_times(
    s_h: f64,
    s_v: f64,
    vh: f64,
    vz: f64,
    dt: f64,
) -> Result<(f64, f64, f64), SimError> {
    if dt <= 0.0 {
        return Err(SimError::InvalidArgument(format!("slot length must be positive, got {dt}")));
    }
    if s_h < 0.0 || s_v < 0.0 {
        return Err(SimError::InvalidArgument("displacements must be nonnegative".into()));
    }
    if (s_h > 0.0 && vh.abs() <= 0.0) || (s_v > 0.0 && vz.abs() <= 0.0) {
        return Err(SimError::InvalidArgument(
            "zero speed with nonzero displacement".into(),
        ));
    }
    let t_h = if s_h > 0.0 { s_h / vh.abs() } else { 0.0 };
    let t_v = if s_v > 0.0 { s_v / vz.abs() } else { 0.0 };
    if t_h + t_v > dt {
        return Err(SimError::InfeasibleAction(format!(
            "motion time {:.3} s exceeds slot {:.3} s",
            t_h + t_v,
            dt
        )));
    }
    Ok((t_h, t_v, dt - t_h - t_v))
}

/// Propulsion energy of one slot: move horizontally, move vertically, hover.
pub fn slot_energy(
    s_h: f64,
    s_v: f64,
    vh: f64,
    vz: f64,
    dt: f64,
    params: &RotorParams,
) -> Result<f64, SimError> {
    let (t_h, t_v, t_hover) = slot_times(s_h, s_v, vh, vz, dt)?;
    let mut e = params.hover_power_w() * t_hover;
    if t_h > 0.0 {
        e += rotor_power(vh.abs(), 0.0, params)? * t_h;
    }
    if t_v > 0.0 {
        e += rotor_power(0.0, vz, params)? * t_v;
    }
    Ok(e)
}

/// Outcome of draining a battery by one slot's energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryStep {
    pub battery: Battery,
    /// Set when the demand exceeded the remaining charge; the battery is
    /// clamped to empty and the UAV should be marked inactive.
    pub depleted: bool,
}

/// Drain `e` joules. Depletion clamps to zero and raises a flag rather than
/// erroring; the environment decides what an empty UAV does.
pub fn battery_step(b: Battery, e: f64) -> Result<BatteryStep, SimError> {
    if !e.is_finite() || e < 0.0 {
        return Err(SimError::InvalidArgument(format!("energy must be nonnegative, got {e}")));
    }
    let left = b.remaining_j - e;
    if left < 0.0 {
        Ok(BatteryStep { battery: Battery { remaining_j: 0.0, ..b }, depleted: true })
    } else {
        Ok(BatteryStep { battery: Battery { remaining_j: left, ..b }, depleted: false })
    }
}
