//! Fibre-level kernels for applying single-mode operators in place.
//!
//! A displacement `D(β) = exp(β a† − β* a)` on a truncated mode factors as
//! `R(φ) exp(−i r K) R(φ)†` with `β = r e^{iφ}`, `K = i(a† − a)` and
//! `R(φ) = exp(iφ n)`. `K` is diagonalised once per cutoff, so every later
//! application costs two dense `d×d` products and no further factorisation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::fock::linalg::HermitianEigen;
use crate::{CMatrix, C64};

pub struct DisplacementKernel {
    d: usize,
    /// Row-major eigenvectors of `K`.
    v: Vec<C64>,
    lambda: Vec<f64>,
    sqrt_n: Vec<f64>,
}

impl DisplacementKernel {
    fn build(d: usize) -> Self {
        let mut k = CMatrix::zeros(d, d);
        for n in 1..d {
            let s = (n as f64).sqrt();
            // K = i(a† − a): ⟨n|a†|n−1⟩ = √n, ⟨n−1|a|n⟩ = √n
            k[(n, n - 1)] = C64::new(0.0, s);
            k[(n - 1, n)] = C64::new(0.0, -s);
        }
        let eig = HermitianEigen::new(&k);
        let mut v = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                v[i * d + j] = eig.vectors[(i, j)];
            }
        }
        DisplacementKernel {
            d,
            v,
            lambda: eig.values,
            sqrt_n: (0..=d).map(|n| (n as f64).sqrt()).collect(),
        }
    }

    /// Shared kernel for cutoff `d`.
    pub fn for_cutoff(d: usize) -> Arc<DisplacementKernel> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<DisplacementKernel>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("kernel cache poisoned");
        guard
            .entry(d)
            .or_insert_with(|| Arc::new(DisplacementKernel::build(d)))
            .clone()
    }

    pub fn cutoff(&self) -> usize {
        self.d
    }

    /// `f ← D(β) f` for a contiguous fibre of length `d`.
    pub fn displace(&self, beta: C64, f: &mut [C64], scratch: &mut [C64]) {
        let r = beta.norm();
        if r == 0.0 {
            return;
        }
        let d = self.d;
        let phase = C64::from_polar(1.0, beta.arg());
        // f ← R(φ)† f
        let mut ph = C64::new(1.0, 0.0);
        let conj = phase.conj();
        for x in f.iter_mut() {
            *x *= ph;
            ph *= conj;
        }
        // scratch ← diag(e^{−irλ}) V† f
        for j in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..d {
                acc += self.v[n * d + j].conj() * f[n];
            }
            scratch[j] = acc * C64::from_polar(1.0, -r * self.lambda[j]);
        }
        // f ← R(φ) V scratch
        let mut ph = C64::new(1.0, 0.0);
        for n in 0..d {
            let row = &self.v[n * d..(n + 1) * d];
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                acc += row[j] * scratch[j];
            }
            f[n] = acc * ph;
            ph *= phase;
        }
    }

    /// Dense matrix of `D(β)`.
    pub fn matrix(&self, beta: C64) -> CMatrix {
        let d = self.d;
        let mut m = CMatrix::identity(d, d);
        let mut col = vec![C64::new(0.0, 0.0); d];
        let mut scratch = vec![C64::new(0.0, 0.0); d];
        for c in 0..d {
            for r in 0..d {
                col[r] = m[(r, c)];
            }
            self.displace(beta, &mut col, &mut scratch);
            for r in 0..d {
                m[(r, c)] = col[r];
            }
        }
        m
    }

    /// `out ← (e^{iφ} a† − e^{−iφ} a) f`, the unit-amplitude generator
    /// pointing along `phase = e^{iφ}`.
    pub fn generator(&self, phase: C64, f: &[C64], out: &mut [C64]) {
        let d = self.d;
        for n in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            if n > 0 {
                acc += phase * self.sqrt_n[n] * f[n - 1];
            }
            if n + 1 < d {
                acc -= phase.conj() * self.sqrt_n[n + 1] * f[n + 1];
            }
            out[n] = acc;
        }
    }

    /// `⟨g| (c a† − c* a) |f⟩` for complex `c`, without allocating.
    pub fn generator_inner(&self, c: C64, g: &[C64], f: &[C64]) -> C64 {
        let d = self.d;
        let mut acc = C64::new(0.0, 0.0);
        for n in 1..d {
            // ⟨n|a†|n−1⟩ = √n ; ⟨n−1|a|n⟩ = √n
            acc += g[n].conj() * c * self.sqrt_n[n] * f[n - 1];
            acc -= g[n - 1].conj() * c.conj() * self.sqrt_n[n] * f[n];
        }
        acc
    }

    /// `⟨g| n |f⟩`.
    pub fn number_inner(g: &[C64], f: &[C64]) -> C64 {
        g.iter()
            .zip(f)
            .enumerate()
            .map(|(n, (a, b))| a.conj() * b * n as f64)
            .sum()
    }
}

pub fn gather(src: &[C64], base: usize, stride: usize, out: &mut [C64]) {
    for (j, o) in out.iter_mut().enumerate() {
        *o = src[base + j * stride];
    }
}

pub fn scatter(dst: &mut [C64], base: usize, stride: usize, vals: &[C64]) {
    for (j, v) in vals.iter().enumerate() {
        dst[base + j * stride] = *v;
    }
}
