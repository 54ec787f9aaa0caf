//! Generalized advantage estimation.

/// Backward GAE recursion over one rollout.
///
/// `values` has one entry per step; `bootstrap` is V(s_T) for the state after
/// the final step (ignored when that step terminated). Episode boundaries are
/// marked in `dones` and cut both the TD target and the advantage carry.
///
/// Returns `(advantages, returns)` with `returns = advantages + values`.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let t_max = rewards.len();
    assert_eq!(values.len(), t_max);
    assert_eq!(dones.len(), t_max);
    let mut adv = vec![0.0; t_max];
    let mut carry = 0.0;
    for t in (0..t_max).rev() {
        let cont = if dones[t] { 0.0 } else { 1.0 };
        let next_v = if t + 1 < t_max { values[t + 1] } else { bootstrap };
        let delta = rewards[t] + gamma * next_v * cont - values[t];
        carry = delta + gamma * lambda * cont * carry;
        adv[t] = carry;
    }
    let ret: Vec<f64> = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, ret)
}
