//! Penalised error minimisation with restarts, and threshold sweeps.

pub mod optim;
pub mod sweep;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Architecture, CircuitParams};
use crate::fock::Tolerances;
use crate::tasks::{make_task, Pipeline, TaskSpec};
use crate::{Error, Result};

pub use optim::{bfgs, levenberg_marquardt, Adam};
pub use sweep::{sweep_threshold, SweepPoint, SweepResult};

/// `λ_k = min(start · factor^⌊k / every⌋, max)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySchedule {
    pub start: f64,
    pub factor: f64,
    pub every: usize,
    pub max: f64,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        PenaltySchedule {
            start: 10.0,
            factor: 10.0,
            every: 1000,
            max: 1e3,
        }
    }
}

impl PenaltySchedule {
    pub fn lambda(&self, iteration: usize) -> f64 {
        let k = (iteration / self.every.max(1)) as i32;
        (self.start * self.factor.powi(k)).min(self.max)
    }

    /// First iteration at which `λ` reaches its cap.
    pub fn saturation(&self) -> usize {
        let mut k = 0;
        while self.lambda(k * self.every.max(1)) < self.max && k < 64 {
            k += 1;
        }
        k * self.every.max(1)
    }
}

/// Second stage run at the final penalty weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polish {
    None,
    #[default]
    Bfgs,
    /// Gauss–Newton on the residual vector whose squared norm is the loss.
    LevenbergMarquardt,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    #[default]
    Adjoint,
    FiniteDifference,
}

fn default_lr() -> f64 {
    0.01
}
fn default_max_iterations() -> usize {
    5000
}
fn default_restarts() -> usize {
    8
}
fn default_tolerance() -> f64 {
    1e-12
}
fn default_window() -> usize {
    100
}
fn default_polish() -> usize {
    5000
}
fn default_energy_tolerance() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub architecture: Architecture,
    pub task: TaskSpec,
    pub n_s: f64,
    #[serde(default)]
    pub penalty: PenaltySchedule,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Stop once the loss improved by less than this over `window` iterations.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub polish: Polish,
    #[serde(default = "default_polish")]
    pub polish_iterations: usize,
    #[serde(default = "default_energy_tolerance")]
    pub energy_tolerance: f64,
    #[serde(default)]
    pub gradient: GradientMethod,
    #[serde(default)]
    pub seed: u64,
    /// Starting points for the first restarts; the rest are random.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warm_starts: Vec<Vec<f64>>,
    /// Packed `θ_p` held fixed; only the measurement circuit is trained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_probe: Option<Vec<f64>>,
}

impl TrainConfig {
    pub fn new(architecture: Architecture, task: TaskSpec, n_s: f64) -> Self {
        TrainConfig {
            architecture,
            task,
            n_s,
            penalty: PenaltySchedule::default(),
            learning_rate: default_lr(),
            max_iterations: default_max_iterations(),
            restarts: default_restarts(),
            tolerance: default_tolerance(),
            window: default_window(),
            polish: Polish::default(),
            polish_iterations: default_polish(),
            energy_tolerance: default_energy_tolerance(),
            gradient: GradientMethod::default(),
            seed: 0,
            warm_starts: Vec::new(),
            fixed_probe: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.architecture.validate()?;
        self.task.validate()?;
        let positive = [
            ("learning_rate", self.learning_rate),
            ("tolerance", self.tolerance),
            ("energy_tolerance", self.energy_tolerance),
            ("penalty.start", self.penalty.start),
            ("penalty.max", self.penalty.max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.penalty.factor >= 1.0) || self.penalty.every == 0 {
            return Err(Error::Config("penalty schedule must be non-decreasing".into()));
        }
        if !(self.n_s >= 0.0 && self.n_s.is_finite()) {
            return Err(Error::Config(format!("N_S must be non-negative, got {}", self.n_s)));
        }
        if self.restarts == 0 {
            return Err(Error::Config("at least one restart is required".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("convergence window must be positive".into()));
        }
        if self.task.modes() != self.architecture.data_modes {
            return Err(Error::Config(format!(
                "task has {} modes but the architecture has {} data modes",
                self.task.modes(),
                self.architecture.data_modes
            )));
        }
        let n = 2 * self.architecture.param_count();
        if let Some(w) = self.warm_starts.iter().find(|w| w.len() != n) {
            return Err(Error::Config(format!("warm start has {} values, expected {n}", w.len())));
        }
        if let Some(p) = &self.fixed_probe {
            if p.len() != n / 2 {
                return Err(Error::Config(format!("fixed probe has {} values, expected {}", p.len(), n / 2)));
            }
        }
        Ok(())
    }
}

/// Outcome of one restart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub error: f64,
    pub loss: f64,
    pub energy_residual: f64,
    pub iterations: usize,
    pub feasible: bool,
    pub cutoff: usize,
    pub leakage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    /// Architecture at the cutoff `error` was evaluated with.
    pub architecture: Architecture,
    /// Packed `(θ_p, θ_m)`.
    pub params: Vec<f64>,
    pub error: f64,
    pub energy: f64,
    pub energy_residual: f64,
    /// Best-so-far loss of the winning restart.
    pub loss_trace: Vec<f64>,
    /// Seconds; excluded from equality-sensitive comparisons by callers.
    pub wall_time: f64,
    pub seed: u64,
    pub restart: usize,
    pub leakage: f64,
    pub restarts: Vec<RestartSummary>,
}

impl TrainResult {
    pub fn circuit_params(&self) -> Result<CircuitParams> {
        CircuitParams::unpack(&self.architecture, &self.params)
    }

    /// Loss trace as `iteration,loss` rows.
    pub fn write_trace_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,loss")?;
        for (i, v) in self.loss_trace.iter().enumerate() {
            writeln!(out, "{i},{v:e}")?;
        }
        Ok(())
    }
}

/// `P_E + λ(⟨n̂⟩ − N_S)²` evaluated on a fixed pipeline.
pub struct LossContext<'a> {
    pub pipeline: &'a Pipeline,
    pub n_s: f64,
    pub lambda: f64,
}

impl<'a> LossContext<'a> {
    pub fn new(pipeline: &'a Pipeline, n_s: f64, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::Contract(format!("penalty weight must be non-negative, got {lambda}")));
        }
        Ok(LossContext { pipeline, n_s, lambda })
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        self.pipeline.evaluate(params, self.n_s, self.lambda, None).loss
    }

    fn checked(&self, params: &[f64]) -> Result<f64> {
        let v = self.value(params);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric(format!("loss evaluated to {v}")))
        }
    }

    fn central(&self, params: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut x = params.to_vec();
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            let x0 = x[i];
            x[i] = x0 + h;
            let up = self.checked(&x)?;
            x[i] = x0 - h;
            let down = self.checked(&x)?;
            x[i] = x0;
            g[i] = (up - down) / (2.0 * h);
        }
        Ok(g)
    }

    /// Central differences with step `1e−5` per real coordinate.
    pub fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite parameters".into()));
        }
        self.central(params, 1e-5)
    }

    /// Two-level Richardson extrapolation of central differences from `h = 1e−3`.
    pub fn richardson_gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        let h = 1e-3;
        let d1 = self.central(params, h)?;
        let d2 = self.central(params, h / 2.0)?;
        let d4 = self.central(params, h / 4.0)?;
        Ok((0..params.len())
            .map(|i| {
                let r1 = (4.0 * d2[i] - d1[i]) / 3.0;
                let r2 = (4.0 * d4[i] - d2[i]) / 3.0;
                (16.0 * r2 - r1) / 15.0
            })
            .collect())
    }

    /// Reverse-mode gradient through the circuit.
    pub fn adjoint_gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; params.len()];
        let ev = self.pipeline.evaluate(params, self.n_s, self.lambda, Some(&mut g));
        if !ev.loss.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite loss gradient".into()));
        }
        Ok(g)
    }
}

/// `loss(params) = P_E + λ(⟨n̂⟩ − N_S)²` for a freshly built task pipeline.
pub fn loss(params: &[f64], task: &TaskSpec, arch: &Architecture, n_s: f64, lambda: f64) -> Result<f64> {
    let pipeline = Pipeline::new(arch, &make_task(task)?)?;
    if params.len() != pipeline.param_count() {
        return Err(Error::Contract("parameters do not match the architecture".into()));
    }
    LossContext::new(&pipeline, n_s, lambda)?.checked(params)
}

struct RestartOutcome {
    summary: RestartSummary,
    params: Vec<f64>,
    energy: f64,
    trace: Vec<f64>,
    architecture: Architecture,
}

/// Gradient of the trainable slice written into `g`; returns the loss.
fn loss_and_grad(
    ctx: &LossContext,
    method: GradientMethod,
    full: &mut [f64],
    offset: usize,
    trainable: &[f64],
    g: &mut [f64],
) -> f64 {
    full[offset..offset + trainable.len()].copy_from_slice(trainable);
    match method {
        GradientMethod::Adjoint => {
            let mut all = vec![0.0; full.len()];
            let loss = ctx.pipeline.evaluate(full, ctx.n_s, ctx.lambda, Some(&mut all)).loss;
            g.copy_from_slice(&all[offset..offset + trainable.len()]);
            loss
        }
        GradientMethod::FiniteDifference => match ctx.gradient(full) {
            Ok(all) => {
                g.copy_from_slice(&all[offset..offset + trainable.len()]);
                ctx.value(full)
            }
            Err(_) => f64::NAN,
        },
    }
}

fn run_restart(config: &TrainConfig, pipeline: &Pipeline, restart: usize) -> Result<RestartOutcome> {
    let arch = &config.architecture;
    let n = arch.param_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    let warm = config.warm_starts.get(restart);
    let mut full = match warm {
        Some(w) => w.clone(),
        None => CircuitParams::random(arch, &mut rng).pack(),
    };
    let (offset, fixed) = match &config.fixed_probe {
        Some(p) => {
            full[..n].copy_from_slice(p);
            (n, true)
        }
        None => (0, false),
    };
    let mut x = full[offset..].to_vec();
    let mut g = vec![0.0; x.len()];
    let mut adam = Adam::new(x.len(), config.learning_rate);
    let mut trace: Vec<f64> = Vec::new();
    let mut best = f64::INFINITY;
    let mut record = |v: f64, trace: &mut Vec<f64>| {
        if v < best {
            best = v;
        }
        trace.push(best);
    };
    let saturation = config.penalty.saturation();
    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let mut diverged = false;
    // Adam's normalised steps would scatter a converged warm start.
    let adam_iterations = if warm.is_some() && config.polish != Polish::None {
        0
    } else {
        config.max_iterations
    };
    for it in 0..adam_iterations {
        let lambda = if fixed { 0.0 } else { config.penalty.lambda(it) };
        let ctx = LossContext {
            pipeline,
            n_s: config.n_s,
            lambda,
        };
        let v = loss_and_grad(&ctx, config.gradient, &mut full, offset, &x, &mut g);
        if !v.is_finite() || g.iter().any(|gi| !gi.is_finite()) {
            diverged = true;
            break;
        }
        record(v, &mut trace);
        iterations = it + 1;
        if it >= saturation {
            history.push(v);
            let k = history.len();
            if k > config.window {
                let old = history[..k - config.window].iter().copied().fold(f64::INFINITY, f64::min);
                let new = history[k - config.window..].iter().copied().fold(f64::INFINITY, f64::min);
                if old - new < config.tolerance {
                    break;
                }
            }
        }
        adam.step(&mut x, &g);
    }
    if !diverged && config.polish_iterations > 0 && config.polish != Polish::None {
        let lambda = if fixed { 0.0 } else { config.penalty.max };
        let ctx = LossContext {
            pipeline,
            n_s: config.n_s,
            lambda,
        };
        let mut polish_trace = Vec::new();
        let (xp, fp) = match config.polish {
            Polish::Bfgs => bfgs(
                &x,
                |y, gy| loss_and_grad(&ctx, config.gradient, &mut full.clone(), offset, y, gy),
                config.polish_iterations,
                |v| polish_trace.push(v),
            ),
            _ => {
                let mut buf = full.clone();
                levenberg_marquardt(
                    &x,
                    |y| {
                        buf[offset..].copy_from_slice(y);
                        pipeline.residuals(&buf, config.n_s, lambda)
                    },
                    config.polish_iterations,
                    |v| polish_trace.push(v),
                )
            }
        };
        if fp.is_finite() {
            x = xp;
            iterations += polish_trace.len();
            for v in polish_trace {
                record(v, &mut trace);
            }
        }
    }
    full[offset..].copy_from_slice(&x);
    if diverged || full.iter().any(|v| !v.is_finite()) {
        return Ok(RestartOutcome {
            summary: RestartSummary {
                restart,
                error: f64::NAN,
                loss: f64::NAN,
                energy_residual: f64::NAN,
                iterations,
                feasible: false,
                cutoff: arch.cutoff,
                leakage: f64::NAN,
            },
            params: full,
            energy: f64::NAN,
            trace,
            architecture: arch.clone(),
        });
    }

    // Re-evaluate at growing cutoffs until the truncation is clean.
    let tol = Tolerances::default().leakage;
    let ens = make_task(&config.task)?;
    let mut eval_arch = arch.clone();
    let mut eval_pipe: Option<Pipeline> = None;
    let mut leakage = pipeline.leakage(&full);
    for _ in 0..6 {
        if leakage < tol {
            break;
        }
        eval_arch = eval_arch.with_cutoff(eval_arch.cutoff + 10);
        let p = Pipeline::new(&eval_arch, &ens)?;
        leakage = p.leakage(&full);
        eval_pipe = Some(p);
    }
    let p = eval_pipe.as_ref().unwrap_or(pipeline);
    let ev = p.evaluate(&full, config.n_s, config.penalty.max, None);
    let residual = (ev.energy - config.n_s).abs();
    let feasible = ev.error.is_finite() && (fixed || residual <= config.energy_tolerance);
    Ok(RestartOutcome {
        summary: RestartSummary {
            restart,
            error: ev.error,
            loss: ev.loss,
            energy_residual: residual,
            iterations,
            feasible,
            cutoff: eval_arch.cutoff,
            leakage,
        },
        params: full,
        energy: ev.energy,
        trace,
        architecture: eval_arch,
    })
}

/// Best-over-restarts minimisation of the penalised error.
pub fn minimize(config: &TrainConfig) -> Result<TrainResult> {
    config.validate()?;
    let start = Instant::now();
    let ens = make_task(&config.task)?;
    let pipeline = Pipeline::new(&config.architecture, &ens)?;
    let outcomes = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(config, &pipeline, r))
        .collect::<Result<Vec<_>>>()?;
    let summaries: Vec<RestartSummary> = outcomes.iter().map(|o| o.summary.clone()).collect();
    for s in &summaries {
        log::debug!(
            "restart {}: P_E {:.3e}, |E − N_S| {:.1e}, {} iterations, cutoff {}",
            s.restart,
            s.error,
            s.energy_residual,
            s.iterations,
            s.cutoff
        );
    }
    let best = outcomes
        .iter()
        .filter(|o| o.summary.feasible)
        .min_by(|a, b| a.summary.error.total_cmp(&b.summary.error));
    let Some(best) = best else {
        return Err(Error::OptimizationFailure {
            restarts: config.restarts,
            traces: outcomes.into_iter().map(|o| o.trace).collect(),
        });
    };
    Ok(TrainResult {
        architecture: best.architecture.clone(),
        params: best.params.clone(),
        error: best.summary.error,
        energy: best.energy,
        energy_residual: best.summary.energy_residual,
        loss_trace: best.trace.clone(),
        wall_time: start.elapsed().as_secs_f64(),
        seed: config.seed,
        restart: best.summary.restart,
        leakage: best.summary.leakage,
        restarts: summaries,
    })
}
