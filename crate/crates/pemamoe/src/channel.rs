//! Air-to-ground radio links.
//!
//! Stateless computations over explicit RNG streams: line-of-sight
//! probability, large-scale path loss, small-scale fading and shadowing,
//! co-channel interference with adjacent-channel leakage, SINR, achievable
//! rate, and the feasibility-driven power rule that inverts the rate formula.
//!
//! All gains and powers are linear (watts, dimensionless power gain); path
//! loss is carried in dB. Carrier frequency is in GHz so that the LoS
//! path-loss constant 28 matches the urban-microcell convention.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::SimError;

/// Geometry of one UAV-user link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Horizontal (ground-projected) distance, m.
    pub d_horiz: f64,
    /// UAV altitude minus user height, m.
    pub h_rel: f64,
    /// 3D distance, m.
    pub r_3d: f64,
}

impl LinkGeometry {
    /// Build from horizontal distance and relative height.
    pub fn new(d_horiz: f64, h_rel: f64) -> Result<Self, SimError> {
        if !d_horiz.is_finite() || !h_rel.is_finite() {
            return Err(SimError::InvalidArgument(format!(
                "non-finite link geometry: d_horiz={d_horiz}, h_rel={h_rel}"
            )));
        }
        if d_horiz < 0.0 {
            return Err(SimError::InvalidArgument(format!(
                "negative horizontal distance {d_horiz}"
            )));
        }
        let r_3d = d_horiz.hypot(h_rel);
        if r_3d <= 0.0 {
            return Err(SimError::InvalidArgument(
                "zero-length link (UAV and user coincide)".into(),
            ));
        }
        Ok(Self { d_horiz, h_rel, r_3d })
    }
}

/// Radio configuration shared by all links.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    /// Carrier frequency, GHz.
    pub fc_ghz: f64,
    /// Rician K factor under LoS, dB.
    pub rician_k_db: f64,
    /// Nakagami shape under NLoS (>= 0.5).
    pub nakagami_m: f64,
    /// Lognormal shadowing std, dB, LoS state.
    pub shadow_sigma_los_db: f64,
    /// Lognormal shadowing std, dB, NLoS state.
    pub shadow_sigma_nlos_db: f64,
    /// Transmit antenna gain, dB.
    pub g_tx_db: f64,
    /// Receive antenna gain, dB.
    pub g_rx_db: f64,
    /// One-sided noise spectral density, W/Hz.
    pub n0: f64,
    /// Total downlink bandwidth, Hz.
    pub bandwidth_total_hz: f64,
    /// Frequency reuse factor (number of colors).
    pub reuse_factor: usize,
    /// Adjacent-channel leakage in [0, 1).
    pub rho_adj: f64,
    /// Implementation-loss factor in (0, 1].
    pub alpha_impl: f64,
    /// Per-UAV transmit power budget, W.
    pub p_max_w: f64,
    /// Gain floor for the power rule.
    pub eps_gain: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            fc_ghz: 2.0,
            rician_k_db: 6.0,
            nakagami_m: 2.0,
            shadow_sigma_los_db: 4.0,
            shadow_sigma_nlos_db: 7.8,
            g_tx_db: 0.0,
            g_rx_db: 0.0,
            n0: 4e-21,
            bandwidth_total_hz: 20e6,
            reuse_factor: 1,
            rho_adj: 1e-3,
            alpha_impl: 0.9,
            p_max_w: 5.0,
            eps_gain: 1e-15,
        }
    }
}

impl RadioConfig {
    /// Bandwidth available to one reuse color, Hz.
    pub fn color_bandwidth_hz(&self) -> f64 {
        self.bandwidth_total_hz / self.reuse_factor as f64
    }

    /// Combined antenna gain, linear.
    pub fn antenna_gain_linear(&self) -> f64 {
        db_to_linear(self.g_tx_db + self.g_rx_db)
    }
}

/// One sampled link realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub is_los: bool,
    /// Dimensionless power gain, > 0.
    pub gain_linear: f64,
    /// Large-scale path loss, dB.
    pub pl_db: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Height correction of the LoS model: ((max(h-13, 0))/10)^1.5.
fn height_correction(h_rel: f64) -> f64 {
    ((h_rel - 13.0).max(0.0) / 10.0).powf(1.5)
}

/// Line-of-sight probability for a link, clipped to [0, 1].
///
/// Links shorter than 18 m are always LoS; beyond that the probability
/// decays with 3D distance and is boosted by altitude above 13 m.
pub fn los_probability(geom: LinkGeometry) -> Result<f64, SimError> {
    let r = geom.r_3d;
    if !r.is_finite() || !geom.h_rel.is_finite() {
        return Err(SimError::InvalidArgument("non-finite geometry".into()));
    }
    if r <= 18.0 {
        return Ok(1.0);
    }
    let p = 18.0 / r
        + (-r / 36.0).exp() * (1.0 - 18.0 / r) * (1.0 + height_correction(geom.h_rel));
    Ok(p.clamp(0.0, 1.0))
}

/// Large-scale path loss in dB, conditioned on the LoS state.
///
/// 3D distances below 1 m are clamped to 1 m; such links cannot occur under
/// the altitude floor but the clamp keeps the log term nonnegative.
pub fn path_loss_db(geom: LinkGeometry, cfg: &RadioConfig, is_los: bool) -> f64 {
    let r = geom.r_3d.max(1.0);
    let los = 28.0 + 22.0 * r.log10() + 20.0 * cfg.fc_ghz.log10();
    if is_los {
        los
    } else {
        los + 13.0 + 0.1 * r.powf(0.25)
    }
}

/// Draw a unit-mean small-scale fading power coefficient.
///
/// Rician under LoS (K from `rician_k_db`), Nakagami-m under NLoS. Unit mean
/// is exact by construction in both branches.
pub fn fading_power<R: Rng + ?Sized>(is_los: bool, cfg: &RadioConfig, rng: &mut R) -> f64 {
    if is_los {
        // |h|^2 = (s + sigma*n1)^2 + (sigma*n2)^2 with s^2 = K/(K+1),
        // sigma^2 = 1/(2(K+1)); E|h|^2 = s^2 + 2 sigma^2 = 1.
        let k = db_to_linear(cfg.rician_k_db);
        let s = (k / (k + 1.0)).sqrt();
        let sigma = (1.0 / (2.0 * (k + 1.0))).sqrt();
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        let a = s + sigma * n1;
        let b = sigma * n2;
        a * a + b * b
    } else {
        // Gamma(shape=m, scale=1/m) has mean 1.
        let m = cfg.nakagami_m;
        Gamma::new(m, 1.0 / m).expect("nakagami shape validated by config").sample(rng)
    }
}

/// Combine path loss, fading and shadowing into a linear power gain.
pub fn compose_gain(cfg: &RadioConfig, pl_db: f64, fading: f64, shadow_db: f64) -> f64 {
    cfg.antenna_gain_linear() * fading * db_to_linear(shadow_db - pl_db)
}

/// Sample a full link realization: LoS state, fading, shadowing, gain.
pub fn sample_link<R: Rng + ?Sized>(
    geom: LinkGeometry,
    cfg: &RadioConfig,
    rng: &mut R,
) -> Result<LinkSample, SimError> {
    let p_los = los_probability(geom)?;
    let is_los = rng.gen::<f64>() < p_los;
    let pl_db = path_loss_db(geom, cfg, is_los);
    let fading = fading_power(is_los, cfg, rng);
    let sigma_db = if is_los { cfg.shadow_sigma_los_db } else { cfg.shadow_sigma_nlos_db };
    let shadow_db = sigma_db * rng.sample::<f64, _>(StandardNormal);
    let gain_linear = compose_gain(cfg, pl_db, fading, shadow_db);
    Ok(LinkSample { is_los, gain_linear, pl_db })
}

/// Aggregate interference seen by one user served by `serving`.
///
/// Full power from same-color UAVs, leakage-scaled power from other colors.
/// `user_gains[u]` is this user's gain toward UAV `u`; `tx_powers[u]` is UAV
/// `u`'s total downlink power in the slot being accounted.
pub fn interference(
    user_gains: &[f64],
    tx_powers: &[f64],
    colors: &[usize],
    serving: usize,
    cfg: &RadioConfig,
) -> Result<f64, SimError> {
    if user_gains.len() != tx_powers.len() || user_gains.len() != colors.len() {
        return Err(SimError::InvalidArgument(format!(
            "mismatched lengths: gains={}, powers={}, colors={}",
            user_gains.len(),
            tx_powers.len(),
            colors.len()
        )));
    }
    if serving >= user_gains.len() {
        return Err(SimError::InvalidArgument(format!(
            "serving index {serving} out of range {}",
            user_gains.len()
        )));
    }
    let own_color = colors[serving];
    let mut acc = 0.0;
    for u in 0..user_gains.len() {
        if u == serving {
            continue;
        }
        let w = if colors[u] == own_color { 1.0 } else { cfg.rho_adj };
        acc += w * tx_powers[u] * user_gains[u];
    }
    Ok(acc)
}

/// SINR and achievable rate for one link.
///
/// Returns `(sinr, rate_bps)` with `rate = alpha * b * log2(1 + sinr)`.
pub fn sinr_and_rate(p_w: f64, gain: f64, b_user_hz: f64, interf_w: f64, cfg: &RadioConfig) -> (f64, f64) {
    let sinr = p_w * gain / (cfg.n0 * b_user_hz + interf_w);
    let rate = cfg.alpha_impl * b_user_hz * (1.0 + sinr).log2();
    (sinr, rate)
}

/// Transmit power required to hit `target_rate_bps` under the given
/// (conservative) interference, with the gain floored at `eps_gain`.
pub fn required_power(
    target_rate_bps: f64,
    b_user_hz: f64,
    interf_w: f64,
    gain: f64,
    cfg: &RadioConfig,
) -> f64 {
    let gamma_star = 2f64.powf(target_rate_bps / (cfg.alpha_impl * b_user_hz)) - 1.0;
    gamma_star * (cfg.n0 * b_user_hz + interf_w) / gain.max(cfg.eps_gain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn geom(d: f64, h: f64) -> LinkGeometry {
        LinkGeometry::new(d, h).unwrap()
    }

    /// Geometry with a prescribed 3D distance at a given relative height.
    fn geom_r(r: f64, h: f64) -> LinkGeometry {
        assert!(r >= h.abs());
        geom((r * r - h * h).sqrt(), h)
    }

    #[test]
    fn geometry_invariant_holds() {
        let g = geom(30.0, 40.0);
        assert!((g.r_3d * g.r_3d - (g.d_horiz.powi(2) + g.h_rel.powi(2))).abs() < 1e-9 * g.r_3d * g.r_3d);
        assert!(g.r_3d >= g.h_rel.abs());
        assert!(LinkGeometry::new(f64::NAN, 1.0).is_err());
        assert!(LinkGeometry::new(0.0, 0.0).is_err());
        assert!(LinkGeometry::new(-1.0, 5.0).is_err());
    }

    #[test]
    fn los_probability_boundary_is_one() {
        assert_eq!(los_probability(geom_r(18.0, 15.0)).unwrap(), 1.0);
        assert_eq!(los_probability(geom_r(5.0, 3.0)).unwrap(), 1.0);
    }

    #[test]
    fn los_probability_height_13_kills_correction() {
        // At h = 13 the height correction vanishes, leaving the bare law.
        for r in [20.0, 50.0, 200.0, 1000.0] {
            let got = los_probability(geom_r(r, 13.0)).unwrap();
            let bare = 18.0 / r + (-r / 36.0).exp() * (1.0 - 18.0 / r);
            assert!((got - bare).abs() < 1e-12, "r={r}: {got} vs {bare}");
        }
    }

    #[test]
    fn los_probability_far_link_is_small() {
        // Independent scalar evaluation at r = 1000, h = 13.
        let got = los_probability(geom_r(1000.0, 13.0)).unwrap();
        let oracle = 18.0 / 1000.0 + (-1000.0f64 / 36.0).exp() * (1.0 - 18.0 / 1000.0);
        assert!((got - oracle).abs() < 1e-15);
        assert!((0.0..0.05).contains(&got));
    }

    #[test]
    fn los_probability_clips_to_one_at_high_altitude() {
        // Nearly vertical link from a tall UAV: the raw value exceeds 1.
        let p = los_probability(geom(5.0, 100.0)).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn los_probability_monotone_in_r_at_fixed_height() {
        for h in [13.0f64, 50.0, 100.0] {
            let mut prev = f64::INFINITY;
            let mut r = 18.0f64;
            while r <= 5000.0 {
                let p = los_probability(geom_r(r.max(h.abs() + 1e-9), h)).unwrap();
                assert!(p <= prev + 1e-12, "h={h}, r={r}");
                prev = p;
                r += 7.0;
            }
        }
    }

    #[test]
    fn path_loss_hand_values() {
        let cfg = RadioConfig::default(); // fc = 2 GHz
        // r clamped to 1 m: 28 + 0 + 20 log10(2) = 34.0206 dB.
        let pl = path_loss_db(geom(0.5, 0.5), &cfg, true);
        assert!((pl - (28.0 + 20.0 * 2f64.log10())).abs() < 1e-9);
        // NLoS offset at r = 100: 13 + 0.1 * 100^0.25.
        let g100 = geom_r(100.0, 50.0);
        let off = path_loss_db(g100, &cfg, false) - path_loss_db(g100, &cfg, true);
        assert!((off - (13.0 + 0.1 * 100f64.powf(0.25))).abs() < 1e-9);
        assert!((off - 13.3162).abs() < 1e-3);
    }

    #[test]
    fn path_loss_nlos_dominates_and_grows() {
        let cfg = RadioConfig::default();
        let mut prev_los = f64::NEG_INFINITY;
        let mut prev_nlos = f64::NEG_INFINITY;
        for i in 1..60 {
            let r = 2.0 + 80.0 * i as f64;
            let g = geom_r(r, 40.0);
            let los = path_loss_db(g, &cfg, true);
            let nlos = path_loss_db(g, &cfg, false);
            assert!(nlos >= los + 13.0);
            assert!(los > prev_los && nlos > prev_nlos);
            prev_los = los;
            prev_nlos = nlos;
        }
        // Strictly increasing in fc as well.
        let g = geom_r(200.0, 40.0);
        let mut hi = RadioConfig::default();
        hi.fc_ghz = 3.5;
        assert!(path_loss_db(g, &hi, true) > path_loss_db(g, &cfg, true));
    }

    #[test]
    fn degenerate_gain_matches_path_loss_exactly() {
        let mut cfg = RadioConfig::default();
        cfg.g_tx_db = 3.0;
        cfg.g_rx_db = 1.0;
        let pl = 96.5;
        let gain = compose_gain(&cfg, pl, 1.0, 0.0);
        let expect = db_to_linear(4.0) * db_to_linear(-pl);
        assert!((gain - expect).abs() <= 1e-15 * expect);
    }

    #[test]
    fn rician_power_has_unit_mean() {
        let cfg = RadioConfig::default();
        let mut rng = stream(7, "test.rician");
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| fading_power(true, &cfg, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn nakagami_power_has_unit_mean() {
        let cfg = RadioConfig::default();
        let mut rng = stream(8, "test.nakagami");
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| fading_power(false, &cfg, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn shadowing_is_zero_mean_in_db_domain() {
        let cfg = RadioConfig::default();
        let mut rng = stream(9, "test.shadow");
        let n = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let shadow_db: f64 =
                cfg.shadow_sigma_los_db * rng.sample::<f64, _>(rand_distr::StandardNormal);
            acc += shadow_db;
        }
        let mean_db = acc / n as f64;
        assert!(mean_db.abs() < 0.02, "mean {mean_db} dB");
    }

    #[test]
    fn sampled_gains_positive_finite_and_consistent() {
        let cfg = RadioConfig::default();
        let mut rng = stream(10, "test.samples");
        for i in 0..200_000 {
            let d = 1.0 + rng.gen::<f64>() * 1500.0;
            let s = sample_link(geom(d, 100.0), &cfg, &mut rng).unwrap();
            assert!(s.gain_linear.is_finite() && s.gain_linear > 0.0, "draw {i}");
            // Gain decomposes into path loss times a positive fading/shadowing factor.
            let residual = s.gain_linear / (cfg.antenna_gain_linear() * db_to_linear(-s.pl_db));
            assert!(residual.is_finite() && residual > 0.0);
        }
    }

    #[test]
    fn interference_single_uav_is_zero() {
        let cfg = RadioConfig::default();
        assert_eq!(interference(&[1e-9], &[5.0], &[0], 0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn interference_same_color_sums_full_power() {
        let cfg = RadioConfig::default(); // F irrelevant; colors given directly
        let g = [1e-9, 2e-9, 3e-9];
        let p = [1.0, 1.0, 1.0];
        let i = interference(&g, &p, &[0, 0, 0], 0, &cfg).unwrap();
        assert!((i - (2e-9 + 3e-9)).abs() < 1e-24);
    }

    #[test]
    fn interference_distinct_colors_use_leakage() {
        let mut cfg = RadioConfig::default();
        cfg.rho_adj = 1e-3;
        let g = [1e-9, 2e-9, 3e-9];
        let p = [1.0, 2.0, 4.0];
        let i = interference(&g, &p, &[0, 1, 2], 0, &cfg).unwrap();
        assert!((i - 1e-3 * (2.0 * 2e-9 + 4.0 * 3e-9)).abs() < 1e-24);
    }

    #[test]
    fn interference_is_linear_in_each_power() {
        let cfg = RadioConfig::default();
        let g = [1e-9, 2e-9, 3e-9];
        let colors = [0, 1, 0];
        let base = interference(&g, &[1.0, 1.0, 1.0], &colors, 0, &cfg).unwrap();
        let bumped = interference(&g, &[1.0, 1.0, 3.0], &colors, 0, &cfg).unwrap();
        let slope = (bumped - base) / 2.0;
        let again = interference(&g, &[1.0, 1.0, 5.0], &colors, 0, &cfg).unwrap();
        assert!((again - (base + 4.0 * slope)).abs() < 1e-12 * again);
        assert_eq!(interference(&g, &[1.0, 0.0, 0.0], &colors, 0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn interference_rejects_mismatched_lengths() {
        let cfg = RadioConfig::default();
        assert!(interference(&[1e-9], &[1.0, 2.0], &[0, 0], 0, &cfg).is_err());
        assert!(interference(&[1e-9], &[1.0], &[0], 3, &cfg).is_err());
    }

    #[test]
    fn sinr_and_rate_hand_values() {
        let cfg = RadioConfig::default();
        let b = 1e6;
        let (s0, r0) = sinr_and_rate(0.0, 1e-9, b, 0.0, &cfg);
        assert_eq!(s0, 0.0);
        assert_eq!(r0, 0.0);
        // p*g == N0*b -> sinr 1, rate alpha*b.
        let (s1, r1) = sinr_and_rate(cfg.n0 * b / 1e-9, 1e-9, b, 0.0, &cfg);
        assert!((s1 - 1.0).abs() < 1e-12);
        assert!((r1 - cfg.alpha_impl * b).abs() < 1e-3);
        // p=1, g=1e-9, N0*b=1e-10 -> sinr 10.
        let mut cfg10 = cfg.clone();
        cfg10.n0 = 1e-10 / b;
        let (s2, r2) = sinr_and_rate(1.0, 1e-9, b, 0.0, &cfg10);
        assert!((s2 - 10.0).abs() < 1e-9);
        assert!((r2 - cfg10.alpha_impl * b * 11f64.log2()).abs() < 1e-6);
    }

    #[test]
    fn sinr_monotonicity() {
        let cfg = RadioConfig::default();
        let b = 1e6;
        let (s, _) = sinr_and_rate(1.0, 1e-9, b, 1e-12, &cfg);
        let (sp, _) = sinr_and_rate(2.0, 1e-9, b, 1e-12, &cfg);
        let (sg, _) = sinr_and_rate(1.0, 2e-9, b, 1e-12, &cfg);
        let (si, _) = sinr_and_rate(1.0, 1e-9, b, 2e-12, &cfg);
        assert!(sp > s && sg > s && si < s);
    }

    #[test]
    fn required_power_zero_target_is_zero() {
        let cfg = RadioConfig::default();
        assert_eq!(required_power(0.0, 1e6, 0.0, 1e-9, &cfg), 0.0);
    }

    #[test]
    fn required_power_inverts_rate() {
        let cfg = RadioConfig::default();
        let mut rng = stream(11, "test.invert");
        for _ in 0..1000 {
            let b = 1e5 + rng.gen::<f64>() * 5e6;
            let g = 10f64.powf(-12.0 + 4.0 * rng.gen::<f64>());
            let i = 10f64.powf(-18.0 + 6.0 * rng.gen::<f64>());
            let target = 1e5 + rng.gen::<f64>() * 3e6;
            let p = required_power(target, b, i, g, &cfg);
            let (_, rate) = sinr_and_rate(p, g, b, i, &cfg);
            assert!(rate >= target - 1e-9);
            assert!((rate - target).abs() <= 1e-9 * f64::max(target, 1.0));
        }
    }

    #[test]
    fn required_power_floors_tiny_gain() {
        let cfg = RadioConfig::default();
        let p = required_power(1e6, 1e6, 0.0, 1e-30, &cfg);
        let expect = required_power(1e6, 1e6, 0.0, cfg.eps_gain, &cfg);
        assert!(p.is_finite());
        assert_eq!(p, expect);
    }
}
