//! Random-unitary noise `U_ζ = exp(−i ζ·ĝ)` with Gaussian `ζ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analytics::standard_normal_rule;
use crate::circuit::engine::ModeOp;
use crate::fock::linalg::{expm_hermitian, real_symmetric_eigen};
use crate::fock::operator::{number, position, momentum};
use crate::{CMatrix, Error, Result, C64};

/// Single-mode Hermitian noise generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "mode")]
pub enum Generator {
    Q(usize),
    P(usize),
    N(usize),
}

impl Generator {
    pub fn mode(&self) -> usize {
        match *self {
            Generator::Q(m) | Generator::P(m) | Generator::N(m) => m,
        }
    }

    pub fn matrix(&self, d: usize) -> Result<CMatrix> {
        Ok(match self {
            Generator::Q(_) => position(d)?.into_matrix(),
            Generator::P(_) => momentum(d)?.into_matrix(),
            Generator::N(_) => number(d)?.into_matrix(),
        })
    }
}

fn default_max_norm() -> f64 {
    0.02
}

fn default_quadrature_nodes() -> usize {
    15
}

/// Zero-mean Gaussian distribution over generator coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub generators: Vec<Generator>,
    /// Row-major `Cov(ζ_i, ζ_j)`.
    pub covariance: Vec<Vec<f64>>,
    #[serde(default = "default_quadrature_nodes")]
    pub nodes: usize,
    /// Largest covariance eigenvalue accepted by the quadrature.
    #[serde(default = "default_max_norm")]
    pub max_norm: f64,
}

/// One quadrature node: weight and coefficient vector `ζ`.
#[derive(Clone, Debug)]
pub struct NoiseNode {
    pub weight: f64,
    pub zeta: Vec<f64>,
}

impl NoiseModel {
    pub fn new(generators: Vec<Generator>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        let model = NoiseModel {
            generators,
            covariance,
            nodes: default_quadrature_nodes(),
            max_norm: default_max_norm(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Independent amplitude jitter of variance `δ²` on `Re α` and `Im α`
    /// of each listed mode.
    ///
    /// `D(a + ib) = exp(−i(ζ_q q̂ + ζ_p p̂))` with `ζ_q = −√2 b`, `ζ_p = √2 a`,
    /// so the generator coefficients carry variance `2δ²`.
    pub fn amplitude(modes: &[usize], delta: f64) -> Result<Self> {
        let generators: Vec<Generator> = modes
            .iter()
            .flat_map(|&m| [Generator::Q(m), Generator::P(m)])
            .collect();
        let n = generators.len();
        let cov = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 2.0 * delta * delta } else { 0.0 }).collect())
            .collect();
        NoiseModel::new(generators, cov)
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            generators: Vec::new(),
            covariance: Vec::new(),
            nodes: default_quadrature_nodes(),
            max_norm: default_max_norm(),
        }
    }

    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let n = self.generators.len();
        DMatrix::from_fn(n, n, |i, j| self.covariance[i][j])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.generators.len();
        if self.covariance.len() != n || self.covariance.iter().any(|r| r.len() != n) {
            return Err(Error::Contract(format!(
                "noise covariance must be {n}×{n} for {n} generators"
            )));
        }
        if self.nodes == 0 {
            return Err(Error::Config("noise quadrature needs at least one node".into()));
        }
        if n == 0 {
            return Ok(());
        }
        let c = self.covariance_matrix();
        if (&c - c.transpose()).abs().max() > 1e-15 {
            return Err(Error::Contract("noise covariance is not symmetric".into()));
        }
        let (vals, _) = real_symmetric_eigen(&c);
        if vals[0] < -1e-15 {
            return Err(Error::Contract(format!("noise covariance has eigenvalue {:.3e}", vals[0])));
        }
        if vals[n - 1] > self.max_norm {
            return Err(Error::Config(format!(
                "noise covariance norm {:.3e} exceeds the quadrature limit {}",
                vals[n - 1],
                self.max_norm
            )));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.covariance.iter().flatten().all(|&v| v == 0.0)
    }

    /// Tensor Gauss–Hermite rule over the non-degenerate principal axes of
    /// the covariance, `nodes` points per axis.
    pub fn quadrature(&self, nodes: usize) -> Vec<NoiseNode> {
        let n = self.generators.len();
        if n == 0 || self.is_noiseless() {
            return vec![NoiseNode {
                weight: 1.0,
                zeta: vec![0.0; n],
            }];
        }
        let (vals, vecs) = real_symmetric_eigen(&self.covariance_matrix());
        let axes: Vec<(f64, Vec<f64>)> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| (v.sqrt(), vecs.column(i).iter().copied().collect()))
            .collect();
        let (z, w) = standard_normal_rule(nodes);
        let mut out = vec![NoiseNode {
            weight: 1.0,
            zeta: vec![0.0; n],
        }];
        for (sd, dir) in &axes {
            let mut next = Vec::with_capacity(out.len() * nodes);
            for node in &out {
                for (zi, wi) in z.iter().zip(&w) {
                    let zeta = node.zeta.iter().zip(dir).map(|(a, b)| a + sd * zi * b).collect();
                    next.push(NoiseNode {
                        weight: node.weight * wi,
                        zeta,
                    });
                }
            }
            out = next;
        }
        out
    }

    /// `U_ζ` as a list of single-mode operations on an architecture with
    /// cutoff `d`. Pure quadrature noise becomes a displacement.
    pub fn mode_ops(&self, zeta: &[f64], d: usize) -> Result<Vec<(usize, ModeOp)>> {
        let mut modes: Vec<usize> = self.generators.iter().map(|g| g.mode()).collect();
        modes.sort_unstable();
        modes.dedup();
        let mut ops = Vec::new();
        for m in modes {
            let terms: Vec<(Generator, f64)> = self
                .generators
                .iter()
                .zip(zeta)
                .filter(|(g, _)| g.mode() == m)
                .map(|(g, &z)| (*g, z))
                .collect();
            if terms.iter().all(|(g, _)| !matches!(g, Generator::N(_))) {
                let (mut zq, mut zp) = (0.0, 0.0);
                for (g, z) in terms {
                    match g {
                        Generator::Q(_) => zq += z,
                        _ => zp += z,
                    }
                }
                ops.push((m, ModeOp::Displace(C64::new(zp, -zq) / std::f64::consts::SQRT_2)));
            } else {
                let mut h = CMatrix::zeros(d, d);
                for (g, z) in terms {
                    h += g.matrix(d)? * C64::new(z, 0.0);
                }
                ops.push((m, ModeOp::Dense(expm_hermitian(&h))));
            }
        }
        Ok(ops)
    }
}
