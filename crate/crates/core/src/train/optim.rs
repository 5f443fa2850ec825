//! First- and quasi-second-order minimisers over flat parameter vectors.

use nalgebra::{DMatrix, DVector};

/// Adam state for one parameter vector.
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, x: &mut [f64], g: &[f64]) {
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t);
        let b2t = 1.0 - self.beta2.powi(self.t);
        for i in 0..x.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let mh = self.m[i] / b1t;
            let vh = self.v[i] / b2t;
            x[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }
}

/// BFGS with Armijo backtracking. `f` returns the value and writes the
/// gradient. Every accepted iterate's value is passed to `on_step`.
pub fn bfgs(
    x0: &[f64],
    mut f: impl FnMut(&[f64], &mut [f64]) -> f64,
    max_iter: usize,
    mut on_step: impl FnMut(f64),
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut g = DVector::zeros(n);
    let mut fx = f(x.as_slice(), g.as_mut_slice());
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut g_new = DVector::zeros(n);
    for _ in 0..max_iter {
        if !fx.is_finite() || g.norm() < 1e-15 {
            break;
        }
        let mut p = -(&h * &g);
        let mut slope = g.dot(&p);
        if slope >= 0.0 {
            h = DMatrix::identity(n, n);
            p = -g.clone();
            slope = g.dot(&p);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn = &x + &p * step;
            let fnew = f(xn.as_slice(), g_new.as_mut_slice());
            if fnew.is_finite() && fnew <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            if h != DMatrix::identity(n, n) {
                h = DMatrix::identity(n, n);
                continue;
            }
            break;
        };
        let s = &xn - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            h += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let improvement = fx - fnew;
        x = xn;
        fx = fnew;
        g.copy_from(&g_new);
        on_step(fx);
        if improvement <= 0.0 && s.norm() < 1e-14 {
            break;
        }
    }
    (x.as_slice().to_vec(), fx)
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Levenberg–Marquardt on `‖r(x)‖²` with a central-difference Jacobian and
/// Marquardt's diagonal scaling. Every accepted value goes to `on_step`.
pub fn levenberg_marquardt(
    x0: &[f64],
    mut r: impl FnMut(&[f64]) -> Vec<f64>,
    max_iter: usize,
    mut on_step: impl FnMut(f64),
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut res = r(&x);
    let mut f = sum_sq(&res);
    let mut mu = 1e-3;
    let mut stalled = 0;
    for _ in 0..max_iter {
        if !f.is_finite() || f == 0.0 {
            break;
        }
        let m = res.len();
        let mut jac = DMatrix::<f64>::zeros(m, n);
        let mut xp = x.clone();
        for j in 0..n {
            let h = 1e-6 * (1.0 + x[j].abs());
            xp[j] = x[j] + h;
            let up = r(&xp);
            xp[j] = x[j] - h;
            let down = r(&xp);
            xp[j] = x[j];
            for i in 0..m {
                jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * DVector::from_column_slice(&res);
        let floor = 1e-12 * jtj.trace().max(1e-300) / n as f64;
        let mut accepted = false;
        while mu < 1e12 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += mu * jtj[(k, k)].max(floor);
            }
            let Some(chol) = a.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&jtr));
            let xn: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let rn = r(&xn);
            let fnew = sum_sq(&rn);
            if fnew.is_finite() && fnew < f {
                stalled = if fnew > f * (1.0 - 1e-9) { stalled + 1 } else { 0 };
                x = xn;
                res = rn;
                f = fnew;
                mu = (mu / 3.0).max(1e-15);
                accepted = true;
                on_step(f);
                break;
            }
            mu *= 4.0;
        }
        if !accepted || stalled >= 5 {
            break;
        }
    }
    (x, f)
}
