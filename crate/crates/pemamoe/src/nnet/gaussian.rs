//! Diagonal Gaussian action head: sampling, exact log-density, entropy, and
//! the closed-form KL divergence used by the reference anchor.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const LN_2PI: f64 = 1.8378770664093453; // ln(2*pi)

/// Reparameterized sample: mean + sigma * eps.
pub fn sample(mean: &[f64], log_std: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    mean.iter()
        .zip(log_std)
        .map(|(m, s)| m + s.exp() * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Exact log-density of `action` under the diagonal Gaussian.
pub fn log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((m, s), a) in mean.iter().zip(log_std).zip(action) {
        let z = (a - m) / s.exp();
        acc += -0.5 * (z * z + LN_2PI) - s;
    }
    acc
}

/// Gradients of `log_prob` w.r.t. mean and log-std.
pub fn log_prob_grads(mean: &[f64], log_std: &[f64], action: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d_mean = Vec::with_capacity(mean.len());
    let mut d_logstd = Vec::with_capacity(mean.len());
    for ((m, s), a) in mean.iter().zip(log_std).zip(action) {
        let var = (2.0 * s).exp();
        let diff = a - m;
        d_mean.push(diff / var);
        d_logstd.push(diff * diff / var - 1.0);
    }
    (d_mean, d_logstd)
}

/// Entropy: sum_i (log_std_i + 0.5 ln(2*pi*e)). Gradient w.r.t. each
/// log-std component is exactly 1.
pub fn entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|s| s + 0.5 * (LN_2PI + 1.0)).sum()
}

/// KL(new || ref) between diagonal Gaussians, summed over dimensions.
pub fn kl(mean_new: &[f64], logstd_new: &[f64], mean_ref: &[f64], logstd_ref: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..mean_new.len() {
        let var_n = (2.0 * logstd_new[i]).exp();
        let var_r = (2.0 * logstd_ref[i]).exp();
        let diff = mean_new[i] - mean_ref[i];
        acc += logstd_ref[i] - logstd_new[i] + (var_n + diff * diff) / (2.0 * var_r) - 0.5;
    }
    acc
}

/// Gradients of `kl` w.r.t. the new mean and log-std.
pub fn kl_grads(
    mean_new: &[f64],
    logstd_new: &[f64],
    mean_ref: &[f64],
    logstd_ref: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let mut d_mean = Vec::with_capacity(mean_new.len());
    let mut d_logstd = Vec::with_capacity(mean_new.len());
    for i in 0..mean_new.len() {
        let var_n = (2.0 * logstd_new[i]).exp();
        let var_r = (2.0 * logstd_ref[i]).exp();
        d_mean.push((mean_new[i] - mean_ref[i]) / var_r);
        d_logstd.push(var_n / var_r - 1.0);
    }
    (d_mean, d_logstd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_prob_at_mode_of_standard_normal() {
        let mean = [0.3, -1.2];
        let logstd = [0.0, 0.0];
        let lp = log_prob(&mean, &logstd, &mean);
        assert!((lp - (-(2.0 / 2.0) * LN_2PI)).abs() < 1e-12);
    }

    #[test]
    fn log_prob_is_translation_invariant() {
        let logstd = [0.2, -0.4];
        let a = log_prob(&[0.0, 0.0], &logstd, &[0.3, -0.1]);
        let b = log_prob(&[5.0, 5.0], &logstd, &[5.3, 4.9]);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn entropy_closed_form_2d() {
        let h = entropy(&[0.0, 0.0]);
        assert!((h - (LN_2PI + 1.0)).abs() < 1e-12);
        assert!((h - 2.8378770664).abs() < 1e-9);
    }

    #[test]
    fn kl_of_unit_gaussians_shifted_by_one() {
        let k = kl(&[0.0], &[0.0], &[1.0], &[0.0]);
        assert!((k - 0.5).abs() < 1e-12);
        assert_eq!(kl(&[0.7, -0.2], &[0.3, 0.1], &[0.7, -0.2], &[0.3, 0.1]), 0.0);
    }

    #[test]
    fn grads_match_finite_differences() {
        let mean = [0.4, -0.3];
        let logstd = [0.1, -0.2];
        let action = [0.9, 0.2];
        let mref = [0.1, 0.3];
        let sref = [-0.1, 0.25];
        let h = 1e-6;
        let (dm, ds) = log_prob_grads(&mean, &logstd, &action);
        let (dkm, dks) = kl_grads(&mean, &logstd, &mref, &sref);
        for i in 0..2 {
            let mut mp = mean;
            mp[i] += h;
            let mut mm = mean;
            mm[i] -= h;
            let num = (log_prob(&mp, &logstd, &action) - log_prob(&mm, &logstd, &action)) / (2.0 * h);
            assert!((num - dm[i]).abs() < 1e-6);
            let knum = (kl(&mp, &logstd, &mref, &sref) - kl(&mm, &logstd, &mref, &sref)) / (2.0 * h);
            assert!((knum - dkm[i]).abs() < 1e-6);

            let mut sp = logstd;
            sp[i] += h;
            let mut sm = logstd;
            sm[i] -= h;
            let num = (log_prob(&mean, &sp, &action) - log_prob(&mean, &sm, &action)) / (2.0 * h);
            assert!((num - ds[i]).abs() < 1e-6);
            let knum = (kl(&mean, &sp, &mref, &sref) - kl(&mean, &sm, &mref, &sref)) / (2.0 * h);
            assert!((knum - dks[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn sampling_is_reparameterized_around_the_mean() {
        let mut rng = crate::rng::stream(3, "test.gauss");
        let mean = [1.0, -2.0];
        let logstd = [-0.5f64, 0.3];
        let n = 200_000;
        let mut acc = [0.0, 0.0];
        let mut acc2 = [0.0, 0.0];
        for _ in 0..n {
            let a = sample(&mean, &logstd, &mut rng);
            for i in 0..2 {
                acc[i] += a[i];
                acc2[i] += (a[i] - mean[i]) * (a[i] - mean[i]);
            }
        }
        for i in 0..2 {
            let m = acc[i] / n as f64;
            let sd = (acc2[i] / n as f64).sqrt();
            assert!((m - mean[i]).abs() < 0.01);
            assert!((sd - logstd[i].exp()).abs() < 0.01);
        }
    }
}
