//! `train` and `sweep` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use bosonet::analytics::{
    gaussian_binary_error, generator_covariance, helstrom_squeezed, helstrom_squeezed_binary,
    number_interferometry_error, on_state_error, theorem2_bound, threshold_asymptotic,
};
use bosonet::circuit::{probe_state, Architecture};
use bosonet::fock::{multimode_displacement, Operator, OperatorKind};
use bosonet::tasks::noise::NoiseModel;
use bosonet::tasks::pipeline::noisy_error_probability;
use bosonet::tasks::{make_task, TaskSpec};
use bosonet::train::{minimize, sweep_threshold, SweepResult, TrainConfig, TrainResult};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Method, SweepAxis, SweepSpec};
use crate::record::{unix_now, write_csv, Curve, ExperimentRecord, Payload, SweepPayload, ThresholdPoint};
use crate::CliError;

fn train_or_report(config: &TrainConfig, dir: &Path) -> Result<TrainResult, CliError> {
    match minimize(config) {
        Ok(mut r) => {
            r.wall_time = 0.0;
            Ok(r)
        }
        Err(bosonet::Error::OptimizationFailure { restarts, traces }) => {
            fs::create_dir_all(dir)?;
            let body = serde_json::json!({ "restarts": restarts, "traces": traces });
            fs::write(dir.join("failure.json"), serde_json::to_string_pretty(&body).expect("json"))?;
            Err(bosonet::Error::OptimizationFailure { restarts, traces }.into())
        }
        Err(e) => Err(e.into()),
    }
}

/// Trains one configuration and writes `record.json`, `payload.json` and
/// `loss.csv` under the run directory.
pub fn run_train(config: &ExperimentConfig, out: &Path) -> Result<(ExperimentRecord, PathBuf), CliError> {
    let dir = config.run_dir(out);
    let started = unix_now();
    let result = train_or_report(&config.train, &dir)?;
    let (cutoff, leakage) = (result.architecture.cutoff, result.leakage);
    fs::create_dir_all(&dir)?;
    write_csv(&dir, "loss.csv", |w| result.write_trace_csv(w))?;
    let record = ExperimentRecord::new(config, started, cutoff, leakage, Payload::Train(result));
    record.write(&dir)?;
    Ok((record, dir))
}

fn ea_architecture(spec: &SweepSpec, base: &Architecture) -> Architecture {
    spec.ea_architecture.clone().unwrap_or_else(|| Architecture {
        ancilla_modes: base.ancilla_modes.max(1),
        ..base.clone()
    })
}

fn require_single_mode(task: &TaskSpec, method: Method) -> Result<(), CliError> {
    if task.modes() != 1 {
        return Err(CliError::Config(format!("{} needs a single-mode task", method.name())));
    }
    Ok(())
}

fn unsupported(method: Method, axis: &SweepAxis) -> CliError {
    CliError::Config(format!("method {} is not defined on a {} sweep", method.name(), axis.column()))
}

struct Collector {
    payload: SweepPayload,
    cutoff: usize,
    leakage: f64,
}

impl Collector {
    fn curve(&mut self, method: &str, value_column: &str, points: Vec<(f64, f64)>, axis: &SweepAxis) {
        self.payload.curves.push(Curve {
            method: method.to_string(),
            columns: (axis.column().to_string(), value_column.to_string()),
            points,
        });
    }

    fn sweep(&mut self, method: Method, sweep: SweepResult) {
        for p in sweep.curve.iter().chain(&sweep.refinement) {
            self.cutoff = self.cutoff.max(p.cutoff);
            self.leakage = self.leakage.max(p.leakage);
        }
        self.payload.thresholds.push(ThresholdPoint {
            method: method.name().to_string(),
            n_s: sweep.n_s,
            epsilon_th: sweep.epsilon_th,
            bracket: sweep.bracket,
        });
        self.payload.sweeps.push(sweep);
    }
}

fn epsilon_sweep(
    config: &ExperimentConfig,
    spec: &SweepSpec,
    grid: &[f64],
    out: &mut Collector,
) -> Result<(), CliError> {
    let train = &config.train;
    let task = &train.task;
    let n_s = train.n_s;
    let d = train.architecture.cutoff;
    for &method in &spec.methods {
        let points: Vec<(f64, f64)> = match method {
            Method::Vqc | Method::EaVqc => {
                let mut cfg = train.clone();
                if method == Method::EaVqc {
                    cfg.architecture = ea_architecture(spec, &train.architecture);
                }
                let sweep = sweep_threshold(&cfg, grid, spec.tolerance)?;
                let pts = sweep.curve.iter().map(|p| (p.epsilon, p.error)).collect();
                out.sweep(method, sweep);
                pts
            }
            Method::GaussianHomodyne => {
                if !matches!(task, TaskSpec::BinaryPmEpsilon { .. }) {
                    return Err(CliError::Config("gaussian-homodyne needs the binary-pm-epsilon task".into()));
                }
                grid.iter().map(|&e| (e, gaussian_binary_error(e, n_s))).collect()
            }
            Method::HelstromSqueezed => {
                if matches!(task, TaskSpec::BinaryPmEpsilon { .. }) {
                    grid.iter().map(|&e| (e, helstrom_squeezed_binary(e, n_s))).collect()
                } else {
                    grid.par_iter()
                        .map(|&e| Ok((e, helstrom_squeezed(&make_task(&task.with_epsilon(e))?, n_s, d)?)))
                        .collect::<Result<_, bosonet::Error>>()?
                }
            }
            Method::NumberInterferometry => {
                require_single_mode(task, method)?;
                let n = match spec.interferometry_fock {
                    Some(n) => n,
                    None if n_s.fract() == 0.0 => n_s as usize,
                    None => {
                        return Err(CliError::Config(
                            "number-interferometry needs an integer N_S or sweep.interferometry_fock".into(),
                        ))
                    }
                };
                grid.iter().map(|&e| (e, number_interferometry_error(n, e))).collect()
            }
            Method::OnState => {
                require_single_mode(task, method)?;
                grid.par_iter()
                    .map(|&e| Ok((e, on_state_error(&make_task(&task.with_epsilon(e))?, n_s, d)?.error)))
                    .collect::<Result<_, bosonet::Error>>()?
            }
            Method::Theorem2Bound | Method::ThresholdAsymptotic => return Err(unsupported(method, &spec.axis)),
        };
        out.curve(method.name(), "error_probability", points, &spec.axis);
    }
    Ok(())
}

/// `Σ Cov(ζ) Cov(ĝ)` with the generator covariance averaged over the
/// displaced probe states, i.e. the states the noise acts on.
fn noise_bound(result: &TrainResult, task: &TaskSpec, noise: &NoiseModel) -> Result<f64, CliError> {
    let arch = &result.architecture;
    let params = result.circuit_params()?;
    let probe = probe_state(&params.probe, arch)?;
    let layout = probe.layout().clone();
    let ensemble = make_task(task)?;
    let states = ensemble
        .iter()
        .map(|(_, w, atom)| {
            let mut x = atom.x.clone();
            x.resize(2 * arch.modes(), 0.0);
            let op = multimode_displacement(&x, &layout)?;
            Ok((w, probe.evolve(&op)?))
        })
        .collect::<Result<Vec<_>, bosonet::Error>>()?;
    let generators = noise
        .generators
        .iter()
        .map(|g| Operator::embed(&layout, &[g.mode()], &g.matrix(arch.cutoff)?, OperatorKind::Hermitian))
        .collect::<Result<Vec<_>, bosonet::Error>>()?;
    let cov = generator_covariance(&states, &generators)?;
    Ok(theorem2_bound(&noise.covariance_matrix(), &cov)?)
}

fn delta_sweep(
    config: &ExperimentConfig,
    spec: &SweepSpec,
    deltas: &[f64],
    dir: &Path,
    out: &mut Collector,
) -> Result<(), CliError> {
    let reference = train_or_report(&config.train, dir)?;
    let arch = reference.architecture.clone();
    let ensemble = make_task(&config.train.task)?;
    let params = reference.circuit_params()?;
    let data: Vec<usize> = (0..arch.data_modes).collect();
    for &method in &spec.methods {
        let points: Vec<(f64, f64)> = match method {
            Method::Vqc => deltas
                .par_iter()
                .map(|&delta| {
                    let noise = NoiseModel::amplitude(&data, delta)?;
                    Ok((delta, noisy_error_probability(&ensemble, &params, &arch, &noise)?))
                })
                .collect::<Result<_, bosonet::Error>>()?,
            Method::Theorem2Bound => deltas
                .iter()
                .map(|&delta| {
                    let noise = NoiseModel::amplitude(&data, delta)?;
                    Ok((delta, noise_bound(&reference, &config.train.task, &noise)?))
                })
                .collect::<Result<_, CliError>>()?,
            _ => return Err(unsupported(method, &spec.axis)),
        };
        out.curve(method.name(), "error_probability", points, &spec.axis);
    }
    out.cutoff = out.cutoff.max(arch.cutoff);
    out.leakage = out.leakage.max(reference.leakage);
    out.payload.reference = Some(reference);
    Ok(())
}

fn budget_sweep(
    config: &ExperimentConfig,
    spec: &SweepSpec,
    budgets: &[f64],
    grid: &[f64],
    out: &mut Collector,
) -> Result<(), CliError> {
    for &method in &spec.methods {
        let points: Vec<(f64, f64)> = match method {
            Method::Vqc | Method::EaVqc => {
                let mut pts = Vec::new();
                for &n_s in budgets {
                    let mut cfg = config.train.clone();
                    cfg.n_s = n_s;
                    if method == Method::EaVqc {
                        cfg.architecture = ea_architecture(spec, &config.train.architecture);
                    }
                    let sweep = sweep_threshold(&cfg, grid, spec.tolerance)?;
                    let curve = sweep.curve.iter().map(|p| (p.epsilon, p.error)).collect();
                    let name = format!("{}-ns-{n_s}", method.name());
                    out.payload.curves.push(Curve {
                        method: name,
                        columns: ("epsilon".into(), "error_probability".into()),
                        points: curve,
                    });
                    match sweep.epsilon_th {
                        Some(th) => pts.push((n_s, th)),
                        None => log::warn!("no threshold below {} at N_S = {n_s}", spec.tolerance),
                    }
                    out.sweep(method, sweep);
                }
                pts
            }
            Method::ThresholdAsymptotic => budgets.iter().map(|&n| (n, threshold_asymptotic(n))).collect(),
            _ => return Err(unsupported(method, &spec.axis)),
        };
        out.curve(method.name(), "epsilon_th", points, &spec.axis);
    }
    Ok(())
}

/// Runs every requested method along the sweep axis; one CSV per curve.
pub fn run_sweep(config: &ExperimentConfig, out: &Path) -> Result<(ExperimentRecord, PathBuf), CliError> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no `sweep` section".into()))?;
    let dir = config.run_dir(out);
    let started = unix_now();
    let mut collector = Collector {
        payload: SweepPayload {
            axis: spec.axis.column().to_string(),
            curves: Vec::new(),
            thresholds: Vec::new(),
            sweeps: Vec::new(),
            reference: None,
        },
        cutoff: config.train.architecture.cutoff,
        leakage: 0.0,
    };
    match &spec.axis {
        SweepAxis::Epsilon { values } => epsilon_sweep(config, spec, values, &mut collector)?,
        SweepAxis::Delta { values } => delta_sweep(config, spec, values, &dir, &mut collector)?,
        SweepAxis::NS { values, epsilon_grid } => budget_sweep(config, spec, values, epsilon_grid, &mut collector)?,
    }
    fs::create_dir_all(&dir)?;
    for curve in &collector.payload.curves {
        write_csv(&dir, &format!("{}.csv", curve.method), |w| curve.write_csv(w))?;
    }
    for (k, sweep) in collector.payload.sweeps.iter().enumerate() {
        let method = &collector.payload.thresholds[k].method;
        write_csv(&dir, &format!("{method}-sweep-ns-{}.csv", sweep.n_s), |w| sweep.write_csv(w))?;
    }
    let record = ExperimentRecord::new(
        config,
        started,
        collector.cutoff,
        collector.leakage,
        Payload::Sweep(collector.payload),
    );
    record.write(&dir)?;
    Ok((record, dir))
}
