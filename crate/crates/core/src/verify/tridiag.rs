//! Lowest eigenpairs of a real symmetric tridiagonal matrix: Sturm-sequence
//! bisection for the eigenvalues, inverse iteration for the vectors.

use crate::error::{Error, Result};

/// Number of eigenvalues strictly below `lambda`.
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let guard = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q.abs() < guard { guard.copysign(q) } else { q };
        q = diag[i] - lambda - off[i - 1] * off[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `index`-th smallest eigenvalue (0-based) by bisection.
pub fn kth_eigenvalue(diag: &[f64], off: &[f64], index: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    lo -= pad;
    hi += pad;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves (T − σI)y = b by Gaussian elimination with partial pivoting.
fn shifted_solve(diag: &[f64], off: &[f64], sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let tiny = f64::EPSILON * diag.iter().chain(off).fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    // row i holds u0 (diagonal), u1, u2 (superdiagonals after pivoting)
    let mut u0: Vec<f64> = diag.iter().map(|d| d - sigma).collect();
    let mut u1: Vec<f64> = off.to_vec();
    u1.push(0.0);
    let mut u2 = vec![0.0; n];
    let mut sub: Vec<f64> = off.to_vec();
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        if sub[i].abs() > u0[i].abs() {
            // swap rows i and i+1
            let (a0, a1, a2, bi) = (u0[i], u1[i], u2[i], b[i]);
            u0[i] = sub[i];
            u1[i] = u0[i + 1];
            u2[i] = u1[i + 1];
            b[i] = b[i + 1];
            sub[i] = a0;
            u0[i + 1] = a1;
            u1[i + 1] = a2;
            b[i + 1] = bi;
        }
        if u0[i] == 0.0 {
            u0[i] = tiny;
        }
        let m = sub[i] / u0[i];
        u0[i + 1] -= m * u1[i];
        if i + 1 < n - 1 {
            u1[i + 1] -= m * u2[i];
        }
        b[i + 1] -= m * b[i];
    }
    if u0[n - 1] == 0.0 {
        u0[n - 1] = tiny;
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * y[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * y[i + 2];
        }
        y[i] = s / u0[i];
    }
    y
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Deterministic start vector without symmetry.
fn start_vector(n: usize) -> Vec<f64> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..n)
        .map(|_| {
            state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            0.5 + (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

/// The `k` smallest eigenvalues (ascending) and unit eigenvectors.
pub fn lowest_eigenpairs(diag: &[f64], off: &[f64], k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    if off.len() + 1 != n {
        return Err(Error::Eigen(format!("off-diagonal length {} does not match {n}", off.len())));
    }
    if k == 0 || k > n {
        return Err(Error::Eigen(format!("requested {k} eigenpairs from a {n}×{n} matrix")));
    }
    if let Some(v) = diag.iter().chain(off).find(|v| !v.is_finite()) {
        return Err(Error::Eigen(format!("non-finite matrix entry {v}")));
    }
    let values: Vec<f64> = (0..k).map(|i| kth_eigenvalue(diag, off, i)).collect();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &lambda in &values {
        let mut v = start_vector(n);
        for _ in 0..3 {
            v = shifted_solve(diag, off, lambda, &v);
            for prev in &vectors {
                let dot: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(prev).for_each(|(x, p)| *x -= dot * p);
            }
            normalize(&mut v);
        }
        vectors.push(v);
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_laplacian_closed_form() {
        // tridiag(−1, 2, −1): λ_j = 2 − 2cos(jπ/(n+1))
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let (vals, vecs) = lowest_eigenpairs(&diag, &off, 4).unwrap();
        for (j, &v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-14, "{j}: {v} vs {exact}");
        }
        // residual ‖Tv − λv‖
        for (v, &l) in vecs.iter().zip(&vals) {
            let mut r = 0.0f64;
            for i in 0..n {
                let mut tv = diag[i] * v[i];
                if i > 0 {
                    tv += off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    tv += off[i] * v[i + 1];
                }
                r = r.max((tv - l * v[i]).abs());
            }
            assert!(r < 1e-12);
        }
    }

    #[test]
    fn vectors_are_orthonormal() {
        let n = 30;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 - 15.0).powi(2) * 0.01 + 2.0).collect();
        let off = vec![-1.0; n - 1];
        let (_, vecs) = lowest_eigenpairs(&diag, &off, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((d - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(lowest_eigenpairs(&[1.0, 2.0], &[0.5], 3).is_err());
        assert!(lowest_eigenpairs(&[1.0, f64::NAN], &[0.5], 1).is_err());
    }
}
