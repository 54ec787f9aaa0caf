//! Weight initialization.

use rand::Rng;
use rand_distr::StandardNormal;

/// Orthogonal initialization of a `rows x cols` matrix (row-major), scaled by
/// `gain`. The smaller dimension's vectors are orthonormalized from a
/// Gaussian draw by modified Gram-Schmidt.
pub fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Vec<f64> {
    let (n_vecs, dim, transpose) =
        if rows <= cols { (rows, cols, false) } else { (cols, rows, true) };
    let mut vecs: Vec<Vec<f64>> = (0..n_vecs)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    for i in 0..n_vecs {
        for j in 0..i {
            let proj: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
            for k in 0..dim {
                vecs[i][k] -= proj * vecs[j][k];
            }
        }
        let norm: f64 = vecs[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        // A fresh Gaussian vector is almost surely independent; guard anyway.
        let inv = if norm > 1e-12 { 1.0 / norm } else { 0.0 };
        for v in vecs[i].iter_mut() {
            *v *= inv;
        }
    }
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let v = if transpose { vecs[c][r] } else { vecs[r][c] };
            out[r * cols + c] = gain * v;
        }
    }
    out
}
