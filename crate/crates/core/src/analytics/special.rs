use nalgebra::DMatrix;

use crate::fock::linalg::real_symmetric_eigen;

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `L_n(x)` by the three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Smallest positive root of `L_n`, or `None` for `n = 0`.
///
/// Scans upward from the origin in steps small against the root spacing,
/// then bisects the first sign change to full precision.
pub fn laguerre_smallest_root(n: usize) -> Option<f64> {
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    let step = 0.01 / (nf * nf);
    let mut lo = 0.0;
    let mut f_lo = laguerre(n, lo);
    loop {
        let hi = lo + step;
        let f_hi = laguerre(n, hi);
        if f_hi == 0.0 {
            return Some(hi);
        }
        if f_lo.signum() != f_hi.signum() {
            return Some(bisect(|x| laguerre(n, x), lo, hi));
        }
        lo = hi;
        f_lo = f_hi;
        if lo > 4.0 * nf + 4.0 {
            // every root of L_n lies below 4n + 2
            return None;
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gauss–Hermite rule for the weight `e^{−x²}` (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let (nodes, vecs) = real_symmetric_eigen(&j);
    let weights = (0..n)
        .map(|i| std::f64::consts::PI.sqrt() * vecs[(0, i)].powi(2))
        .collect();
    (nodes, weights)
}

/// Nodes and weights for expectations under a standard normal variable.
pub fn standard_normal_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_hermite(n);
    let s = std::f64::consts::PI.sqrt();
    (
        x.iter().map(|v| v * std::f64::consts::SQRT_2).collect(),
        w.iter().map(|v| v / s).collect(),
    )
}
