//! Threshold detection along an `ε` grid.

use serde::{Deserialize, Serialize};

use crate::train::{minimize, TrainConfig, TrainResult};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub error: f64,
    pub energy_residual: f64,
    pub restart: usize,
    pub cutoff: usize,
    pub leakage: f64,
    pub params: Vec<f64>,
}

impl SweepPoint {
    fn from_result(epsilon: f64, r: &TrainResult) -> Self {
        SweepPoint {
            epsilon,
            error: r.error,
            energy_residual: r.energy_residual,
            restart: r.restart,
            cutoff: r.architecture.cutoff,
            leakage: r.leakage,
            params: r.params.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub n_s: f64,
    pub tolerance: f64,
    /// Grid points in order.
    pub curve: Vec<SweepPoint>,
    /// Points trained while refining the threshold.
    pub refinement: Vec<SweepPoint>,
    /// `None` when no grid point reaches the tolerance.
    pub epsilon_th: Option<f64>,
    /// Final `(below, above)` bracket of the threshold.
    pub bracket: Option<(f64, f64)>,
}

impl SweepResult {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "epsilon,error,energy_residual,kind")?;
        for p in &self.curve {
            writeln!(out, "{},{:e},{:e},grid", p.epsilon, p.error, p.energy_residual)?;
        }
        for p in &self.refinement {
            writeln!(out, "{},{:e},{:e},bisection", p.epsilon, p.error, p.energy_residual)?;
        }
        Ok(())
    }
}

fn train_at(base: &TrainConfig, eps: f64, warm: &[&SweepPoint]) -> Result<SweepPoint> {
    let mut cfg = base.clone();
    cfg.task = base.task.with_epsilon(eps);
    cfg.warm_starts = warm
        .iter()
        .filter(|p| p.params.len() == 2 * base.architecture.param_count())
        .map(|p| p.params.clone())
        .collect();
    cfg.warm_starts.truncate(cfg.restarts);
    let r = minimize(&cfg)?;
    log::info!("ε = {eps:.4}: P_E = {:.3e}", r.error);
    Ok(SweepPoint::from_result(eps, &r))
}

/// Trains along an increasing `ε` grid, then bisects between the last
/// failing and first passing grid points until the bracket is narrower than
/// `1e−3`. Points are visited from the largest `ε` down, each warm-started
/// from its upper neighbour, so solutions are continued from the easy end.
pub fn sweep_threshold(base: &TrainConfig, grid: &[f64], tolerance: f64) -> Result<SweepResult> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("the ε grid must be non-empty and strictly increasing".into()));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Config("threshold tolerance must be positive".into()));
    }
    let mut curve: Vec<SweepPoint> = Vec::with_capacity(grid.len());
    for &eps in grid.iter().rev() {
        let warm: Vec<&SweepPoint> = curve.last().into_iter().collect();
        curve.push(train_at(base, eps, &warm)?);
    }
    curve.reverse();
    let first = curve.iter().position(|p| p.error < tolerance);
    let mut refinement = Vec::new();
    let (epsilon_th, bracket) = match first {
        None => (None, None),
        Some(0) => (Some(curve[0].epsilon), None),
        Some(k) => {
            let mut lo = curve[k - 1].clone();
            let mut hi = curve[k].clone();
            while hi.epsilon - lo.epsilon > 1e-3 {
                let mid = 0.5 * (lo.epsilon + hi.epsilon);
                let p = train_at(base, mid, &[&hi, &lo])?;
                refinement.push(p.clone());
                if p.error < tolerance {
                    hi = p;
                } else {
                    lo = p;
                }
            }
            (Some(hi.epsilon), Some((lo.epsilon, hi.epsilon)))
        }
    };
    Ok(SweepResult {
        n_s: base.n_s,
        tolerance,
        curve,
        refinement,
        epsilon_th,
        bracket,
    })
}
