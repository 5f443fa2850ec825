//! Forward pipeline `V(θ_m) U_ζ D(x) U(θ_p) |vac⟩|0⟩` and its gradient.

use crate::circuit::engine::{Engine, ModeOp};
use crate::circuit::{AnsatzParams, Architecture, CircuitParams};
use crate::fock::state::QuantumState;
use crate::fock::Tolerances;
use crate::tasks::noise::NoiseModel;
use crate::tasks::LabeledDisplacementEnsemble;
use crate::{Error, Result, C64};

/// One term of the error average: a label, its total weight, and the
/// single-mode operations applied between probe and measurement.
#[derive(Clone, Debug)]
pub struct Branch {
    pub label: usize,
    pub weight: f64,
    pub ops: Vec<(usize, ModeOp)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub error: f64,
    pub energy: f64,
}

/// An ensemble bound to an architecture, ready for repeated evaluation.
pub struct Pipeline {
    engine: Engine,
    branches: Vec<Branch>,
}

impl Pipeline {
    pub fn new(arch: &Architecture, ensemble: &LabeledDisplacementEnsemble) -> Result<Self> {
        Self::with_noise(arch, ensemble, &NoiseModel::noiseless(), 1)
    }

    /// Expands every atom over a tensor quadrature of the noise distribution.
    pub fn with_noise(
        arch: &Architecture,
        ensemble: &LabeledDisplacementEnsemble,
        noise: &NoiseModel,
        nodes: usize,
    ) -> Result<Self> {
        let engine = Engine::new(arch)?;
        if ensemble.modes() != arch.data_modes {
            return Err(Error::Shape(format!(
                "ensemble has {} modes, architecture has {} data modes",
                ensemble.modes(),
                arch.data_modes
            )));
        }
        if ensemble.labels() > 2 {
            return Err(Error::Config(format!(
                "{} labels exceed the capacity of one decision qubit",
                ensemble.labels()
            )));
        }
        noise.validate()?;
        if let Some(g) = noise.generators.iter().find(|g| g.mode() >= arch.modes()) {
            return Err(Error::Shape(format!("noise generator on missing mode {}", g.mode())));
        }
        let quad = noise.quadrature(nodes);
        let noise_ops = quad
            .iter()
            .map(|n| noise.mode_ops(&n.zeta, arch.cutoff))
            .collect::<Result<Vec<_>>>()?;
        let mut branches = Vec::new();
        for (label, weight, atom) in ensemble.iter() {
            for (node, extra) in quad.iter().zip(&noise_ops) {
                let mut amps: Vec<C64> = (0..arch.data_modes)
                    .map(|m| C64::new(atom.x[2 * m], atom.x[2 * m + 1]))
                    .collect();
                let mut ops = Vec::new();
                let mut dense = Vec::new();
                for (m, op) in extra {
                    match op {
                        // D(ζ)D(x) equals D(x + ζ) up to a global phase
                        ModeOp::Displace(b) if *m < arch.data_modes => amps[*m] += b,
                        _ => dense.push((*m, op.clone())),
                    }
                }
                for (m, a) in amps.into_iter().enumerate() {
                    if a.norm() > 0.0 {
                        ops.push((m, ModeOp::Displace(a)));
                    }
                }
                ops.extend(dense);
                branches.push(Branch {
                    label,
                    weight: weight * node.weight,
                    ops,
                });
            }
        }
        Ok(Pipeline { engine, branches })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn architecture(&self) -> &Architecture {
        self.engine.architecture()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Length of the packed `(θ_p, θ_m)` vector.
    pub fn param_count(&self) -> usize {
        2 * self.architecture().param_count()
    }

    fn split<'a>(&self, values: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        assert_eq!(values.len(), self.param_count(), "parameter length");
        values.split_at(self.architecture().param_count())
    }

    pub fn probe(&self, values: &[f64]) -> Vec<C64> {
        let (p, _) = self.split(values);
        let mut psi = self.engine.vacuum();
        self.engine.apply(&self.engine.compile(p), &mut psi);
        psi
    }

    /// Mean occupation of the data modes in the probe state.
    pub fn energy(&self, values: &[f64]) -> f64 {
        let psi = self.probe(values);
        self.engine.occupation(&psi, 0..self.architecture().data_modes)
    }

    fn apply_ops(&self, ops: &[(usize, ModeOp)], psi: &mut [C64]) {
        for (m, op) in ops {
            self.engine.apply_mode_op(*m, op, psi);
        }
    }

    fn apply_ops_adjoint(&self, ops: &[(usize, ModeOp)], psi: &mut [C64]) {
        for (m, op) in ops.iter().rev() {
            self.engine.apply_mode_op(*m, &op.adjoint(), psi);
        }
    }

    /// States just before the measurement unitary, with label and weight.
    pub fn pre_measurement(&self, values: &[f64]) -> Vec<(usize, f64, Vec<C64>)> {
        let probe = self.probe(values);
        self.branches
            .iter()
            .map(|b| {
                let mut psi = probe.clone();
                self.apply_ops(&b.ops, &mut psi);
                (b.label, b.weight, psi)
            })
            .collect()
    }

    /// Final states in branch order.
    pub fn outputs(&self, values: &[f64]) -> Vec<Vec<C64>> {
        let (_, m) = self.split(values);
        let v = self.engine.compile(m);
        self.pre_measurement(values)
            .into_iter()
            .map(|(_, _, mut psi)| {
                self.engine.apply(&v, &mut psi);
                psi
            })
            .collect()
    }

    /// Largest truncation leakage over the probe and every output.
    pub fn leakage(&self, values: &[f64]) -> f64 {
        let probe = self.engine.leakage(&self.probe(values));
        self.outputs(values)
            .iter()
            .map(|psi| self.engine.leakage(psi))
            .fold(probe, f64::max)
    }

    /// Weighted probability of reading the wrong label, summed in branch order.
    pub fn error_probability(&self, values: &[f64]) -> f64 {
        self.evaluate(values, 0.0, 0.0, None).error
    }

    /// Real residual vector whose squared norm is `P_E + λ (E − N_S)²`:
    /// the wrong-outcome amplitudes of every branch scaled by `√weight`,
    /// followed by `√λ (E − N_S)`.
    pub fn residuals(&self, values: &[f64], n_s: f64, lambda: f64) -> Vec<f64> {
        let arch = self.architecture();
        let q = arch.decision_qubit;
        let (p, m) = self.split(values);
        let v = self.engine.compile(m);
        let mut probe = self.engine.vacuum();
        self.engine.apply(&self.engine.compile(p), &mut probe);
        let energy = self.engine.occupation(&probe, 0..arch.data_modes);
        let mut out = Vec::with_capacity(self.branches.len() * probe.len() + 1);
        for b in &self.branches {
            let mut psi = probe.clone();
            self.apply_ops(&b.ops, &mut psi);
            self.engine.apply(&v, &mut psi);
            let s = b.weight.sqrt();
            for z in self.engine.qubit_component(&psi, q, 1 - b.label) {
                out.push(s * z.re);
                out.push(s * z.im);
            }
        }
        out.push(lambda.sqrt() * (energy - n_s));
        out
    }

    /// `P_E + λ (E − N_S)²`, optionally accumulating its gradient into `grad`.
    pub fn evaluate(&self, values: &[f64], n_s: f64, lambda: f64, grad: Option<&mut [f64]>) -> Evaluation {
        let arch = self.architecture();
        let n = arch.param_count();
        let q = arch.decision_qubit;
        let (p, m) = self.split(values);
        let u = self.engine.compile(p);
        let v = self.engine.compile(m);
        let mut probe = self.engine.vacuum();
        self.engine.apply(&u, &mut probe);
        let data = 0..arch.data_modes;
        let energy = self.engine.occupation(&probe, data.clone());

        let want_grad = grad.is_some();
        let mut local = vec![0.0; if want_grad { 2 * n } else { 0 }];
        let mut lambda_probe = vec![C64::new(0.0, 0.0); if want_grad { probe.len() } else { 0 }];
        let mut cot = vec![C64::new(0.0, 0.0); probe.len()];
        let mut error = 0.0;
        for b in &self.branches {
            let mut psi = probe.clone();
            self.apply_ops(&b.ops, &mut psi);
            self.engine.apply(&v, &mut psi);
            let wrong = 1 - b.label;
            error += b.weight * self.engine.qubit_probability(&psi, q, wrong);
            if want_grad {
                self.engine.project_qubit(&psi, q, wrong, b.weight, &mut cot);
                self.engine.backprop(&v, &mut psi, &mut cot, &mut local[n..]);
                self.apply_ops_adjoint(&b.ops, &mut cot);
                for (acc, c) in lambda_probe.iter_mut().zip(&cot) {
                    *acc += c;
                }
            }
        }
        let offset = energy - n_s;
        let loss = error + lambda * offset * offset;
        if let Some(g) = grad {
            self.engine
                .add_number_action(&probe, data, 2.0 * lambda * offset, &mut lambda_probe);
            self.engine.backprop(&u, &mut probe, &mut lambda_probe, &mut local[..n]);
            for (gi, li) in g.iter_mut().zip(&local) {
                *gi += li;
            }
        }
        Evaluation { loss, error, energy }
    }
}

fn check_output(psi: Vec<C64>, arch: &Architecture, engine: &Engine) -> Result<QuantumState> {
    let tol = Tolerances::default().leakage;
    let leak = engine.leakage(&psi);
    if leak >= tol {
        return Err(Error::Leakage {
            leakage: leak,
            tolerance: tol,
            cutoff: arch.cutoff,
        });
    }
    QuantumState::pure(engine.layout().clone(), psi.into())
}

/// `V(θ_m) D(x) U(θ_p) |vac⟩|0⟩`.
pub fn output_state(
    x: &[f64],
    theta_p: &AnsatzParams,
    theta_m: &AnsatzParams,
    arch: &Architecture,
) -> Result<QuantumState> {
    if x.len() != 2 * arch.data_modes {
        return Err(Error::Shape(format!(
            "data vector has length {}, expected {}",
            x.len(),
            2 * arch.data_modes
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite data vector".into()));
    }
    let engine = Engine::new(arch)?;
    let p = theta_p.pack();
    let m = theta_m.pack();
    AnsatzParams::unpack(arch, &p)?;
    AnsatzParams::unpack(arch, &m)?;
    let mut psi = engine.vacuum();
    engine.apply(&engine.compile(&p), &mut psi);
    for k in 0..arch.data_modes {
        engine.apply_mode_op(k, &ModeOp::Displace(C64::new(x[2 * k], x[2 * k + 1])), &mut psi);
    }
    engine.apply(&engine.compile(&m), &mut psi);
    check_output(psi, arch, &engine)
}

/// `[P(ỹ = 0 | x), P(ỹ = 1 | x)]` from the decision qubit.
pub fn classification_prob(x: &[f64], params: &CircuitParams, arch: &Architecture) -> Result<Vec<f64>> {
    let out = output_state(x, &params.probe, &params.measurement, arch)?;
    let v = out.vector().expect("pipeline output is pure");
    let engine = Engine::new(arch)?;
    let slice = v.as_slice();
    Ok(vec![
        engine.qubit_probability(slice, arch.decision_qubit, 0),
        engine.qubit_probability(slice, arch.decision_qubit, 1),
    ])
}

fn leak_checked(pipeline: &Pipeline, values: &[f64]) -> Result<()> {
    let tol = Tolerances::default().leakage;
    let leak = pipeline.leakage(values);
    if leak >= tol {
        return Err(Error::Leakage {
            leakage: leak,
            tolerance: tol,
            cutoff: pipeline.architecture().cutoff,
        });
    }
    Ok(())
}

/// Prior- and weight-averaged misclassification probability.
pub fn error_probability(
    ensemble: &LabeledDisplacementEnsemble,
    params: &CircuitParams,
    arch: &Architecture,
) -> Result<f64> {
    let pipeline = Pipeline::new(arch, ensemble)?;
    let values = params.pack();
    if values.len() != pipeline.param_count() {
        return Err(Error::Contract("parameters do not match the architecture".into()));
    }
    leak_checked(&pipeline, &values)?;
    Ok(pipeline.error_probability(&values))
}

/// Error probability averaged over the noise distribution by tensor
/// Gauss–Hermite quadrature, checked against a rule with twice the nodes.
pub fn noisy_error_probability(
    ensemble: &LabeledDisplacementEnsemble,
    params: &CircuitParams,
    arch: &Architecture,
    noise: &NoiseModel,
) -> Result<f64> {
    let values = params.pack();
    let coarse = Pipeline::with_noise(arch, ensemble, noise, noise.nodes)?;
    if values.len() != coarse.param_count() {
        return Err(Error::Contract("parameters do not match the architecture".into()));
    }
    let pe = coarse.error_probability(&values);
    if noise.is_noiseless() {
        leak_checked(&coarse, &values)?;
        return Ok(pe);
    }
    let fine = Pipeline::with_noise(arch, ensemble, noise, 2 * noise.nodes)?;
    let pe_fine = fine.error_probability(&values);
    if (pe - pe_fine).abs() > 1e-8 {
        return Err(Error::Precision((pe - pe_fine).abs()));
    }
    leak_checked(&fine, &values)?;
    Ok(pe)
}
