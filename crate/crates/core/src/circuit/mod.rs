//! ECD + rotation gate set and the layered ansatz.
//!
//! Within each layer every qubit is rotated first, then the layer's ECD
//! couplings are applied in listed order. The probe `U(θ_p)` and the
//! measurement `V(θ_m)` share one [`Architecture`] but own separate
//! parameters.

pub mod engine;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::fock::layout::SubsystemLayout;
use crate::fock::operator::{Operator, OperatorKind};
use crate::fock::state::QuantumState;
use crate::fock::kernel::DisplacementKernel;
use crate::{CMatrix, Error, Result, C64};

pub use engine::Engine;

/// Which qubit couples to which qumode in each layer.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum CouplingPattern {
    /// Qubit `q` couples to qumode `(ℓ + q) mod modes` in layer `ℓ`.
    #[default]
    RoundRobin,
    /// Every qubit couples to every qumode in every layer.
    AllModes,
    /// `(qubit, mode)` pairs listed per layer.
    Explicit { layers: Vec<Vec<(usize, usize)>> },
}

fn default_qubits() -> usize {
    1
}

fn default_cutoff() -> usize {
    30
}

fn default_layers() -> usize {
    8
}

/// Mode/qubit wiring of the variational circuits.
///
/// Qumodes are ordered data modes first, then ancillae; qubits follow the
/// qumodes in the layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub data_modes: usize,
    #[serde(default)]
    pub ancilla_modes: usize,
    #[serde(default = "default_qubits")]
    pub qubits: usize,
    /// Index among the qubits.
    #[serde(default)]
    pub decision_qubit: usize,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default)]
    pub coupling: CouplingPattern,
}

impl Architecture {
    /// One data mode, one qubit, round-robin coupling.
    pub fn single_mode(layers: usize, cutoff: usize) -> Self {
        Architecture {
            data_modes: 1,
            ancilla_modes: 0,
            qubits: 1,
            decision_qubit: 0,
            layers,
            cutoff,
            coupling: CouplingPattern::RoundRobin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data_modes == 0 {
            return Err(Error::Config("architecture needs at least one data mode".into()));
        }
        if self.qubits == 0 {
            return Err(Error::Config("architecture needs at least one qubit".into()));
        }
        if self.decision_qubit >= self.qubits {
            return Err(Error::Config(format!(
                "decision qubit {} does not exist ({} qubits)",
                self.decision_qubit, self.qubits
            )));
        }
        if self.layers == 0 {
            return Err(Error::Config("layers must be positive".into()));
        }
        if self.cutoff < 2 {
            return Err(Error::InvalidCutoff(self.cutoff));
        }
        if let CouplingPattern::Explicit { layers } = &self.coupling {
            if layers.len() != self.layers {
                return Err(Error::Config(format!(
                    "explicit coupling lists {} layers, architecture has {}",
                    layers.len(),
                    self.layers
                )));
            }
            for &(q, m) in layers.iter().flatten() {
                if q >= self.qubits || m >= self.modes() {
                    return Err(Error::Config(format!("coupling ({q}, {m}) out of range")));
                }
            }
        }
        Ok(())
    }

    pub fn is_entanglement_assisted(&self) -> bool {
        self.ancilla_modes > 0
    }

    pub fn modes(&self) -> usize {
        self.data_modes + self.ancilla_modes
    }

    pub fn layout(&self) -> Result<SubsystemLayout> {
        SubsystemLayout::modes_then_qubits(self.modes(), self.cutoff, self.qubits)
    }

    /// Layout index of qubit `q`.
    pub fn qubit_index(&self, q: usize) -> usize {
        self.modes() + q
    }

    pub fn decision_index(&self) -> usize {
        self.qubit_index(self.decision_qubit)
    }

    /// `(qubit, mode)` couplings of layer `layer`.
    pub fn couplings(&self, layer: usize) -> Vec<(usize, usize)> {
        let modes = self.modes();
        match &self.coupling {
            CouplingPattern::RoundRobin => (0..self.qubits).map(|q| (q, (layer + q) % modes)).collect(),
            CouplingPattern::AllModes => (0..self.qubits)
                .flat_map(|q| (0..modes).map(move |m| (q, m)))
                .collect(),
            CouplingPattern::Explicit { layers } => layers[layer].clone(),
        }
    }

    /// Length of one flat ansatz vector.
    pub fn param_count(&self) -> usize {
        (0..self.layers)
            .map(|l| 2 * self.couplings(l).len() + 2 * self.qubits)
            .sum()
    }

    /// Same wiring at a different cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        Architecture {
            cutoff,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub xi: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    /// One rotation per qubit.
    pub rotations: Vec<Rotation>,
    /// One amplitude per coupling, in the layer's coupling order.
    pub displacements: Vec<C64>,
}

/// Parameters of one ansatz unitary.
///
/// The flat form lists, per layer, `(ξ, φ)` for each qubit followed by
/// `(Re β, Im β)` for each coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzParams {
    pub layers: Vec<LayerParams>,
}

impl AnsatzParams {
    pub fn zeros(arch: &Architecture) -> Self {
        AnsatzParams::unpack(arch, &vec![0.0; arch.param_count()]).expect("length matches")
    }

    pub fn unpack(arch: &Architecture, values: &[f64]) -> Result<Self> {
        if values.len() != arch.param_count() {
            return Err(Error::Contract(format!(
                "parameter vector has length {}, architecture needs {}",
                values.len(),
                arch.param_count()
            )));
        }
        let mut it = values.iter().copied();
        let mut next = || it.next().expect("length checked");
        let layers = (0..arch.layers)
            .map(|l| {
                let rotations = (0..arch.qubits)
                    .map(|_| Rotation {
                        xi: next(),
                        phi: next(),
                    })
                    .collect();
                let displacements = (0..arch.couplings(l).len())
                    .map(|_| C64::new(next(), next()))
                    .collect();
                LayerParams {
                    rotations,
                    displacements,
                }
            })
            .collect();
        Ok(AnsatzParams { layers })
    }

    pub fn pack(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for r in &layer.rotations {
                out.push(r.xi);
                out.push(r.phi);
            }
            for b in &layer.displacements {
                out.push(b.re);
                out.push(b.im);
            }
        }
        out
    }

    /// `β ~ CN(0, σ = 0.3)`, angles uniform on `[0, 2π)`.
    pub fn random<R: Rng>(arch: &Architecture, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, 0.3).expect("valid sigma");
        let tau = std::f64::consts::TAU;
        let layers = (0..arch.layers)
            .map(|l| LayerParams {
                rotations: (0..arch.qubits)
                    .map(|_| Rotation {
                        xi: rng.random::<f64>() * tau,
                        phi: rng.random::<f64>() * tau,
                    })
                    .collect(),
                displacements: (0..arch.couplings(l).len())
                    .map(|_| C64::new(normal.sample(rng), normal.sample(rng)))
                    .collect(),
            })
            .collect();
        AnsatzParams { layers }
    }
}

/// Probe and measurement parameters, packed probe first.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitParams {
    pub probe: AnsatzParams,
    pub measurement: AnsatzParams,
}

impl CircuitParams {
    pub fn zeros(arch: &Architecture) -> Self {
        CircuitParams {
            probe: AnsatzParams::zeros(arch),
            measurement: AnsatzParams::zeros(arch),
        }
    }

    pub fn random<R: Rng>(arch: &Architecture, rng: &mut R) -> Self {
        CircuitParams {
            probe: AnsatzParams::random(arch, rng),
            measurement: AnsatzParams::random(arch, rng),
        }
    }

    pub fn pack(&self) -> Vec<f64> {
        let mut v = self.probe.pack();
        v.extend(self.measurement.pack());
        v
    }

    pub fn unpack(arch: &Architecture, values: &[f64]) -> Result<Self> {
        let n = arch.param_count();
        if values.len() != 2 * n {
            return Err(Error::Contract(format!(
                "circuit parameter vector has length {}, expected {}",
                values.len(),
                2 * n
            )));
        }
        Ok(CircuitParams {
            probe: AnsatzParams::unpack(arch, &values[..n])?,
            measurement: AnsatzParams::unpack(arch, &values[n..])?,
        })
    }
}

/// Serialized form: architecture descriptor plus the ordered flat vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsRecord {
    pub architecture: Architecture,
    pub values: Vec<f64>,
}

impl ParamsRecord {
    pub fn new(arch: &Architecture, params: &AnsatzParams) -> Self {
        ParamsRecord {
            architecture: arch.clone(),
            values: params.pack(),
        }
    }

    pub fn params(&self) -> Result<AnsatzParams> {
        AnsatzParams::unpack(&self.architecture, &self.values)
    }
}

/// Single-qubit rotation matrix `exp[−iξ/2 (cos φ σx + sin φ σy)]`.
pub fn rotation_matrix(xi: f64, phi: f64) -> [[C64; 2]; 2] {
    let c = (xi / 2.0).cos();
    let s = (xi / 2.0).sin();
    let e = C64::from_polar(1.0, phi);
    let mi = C64::new(0.0, -1.0);
    [
        [C64::new(c, 0.0), mi * s * e.conj()],
        [mi * s * e, C64::new(c, 0.0)],
    ]
}

/// `U_ECD(β) = D(β) ⊗ |1⟩⟨0| + D(−β) ⊗ |0⟩⟨1|` on `(mode, qubit)`.
pub fn ecd_gate(beta: C64, layout: &SubsystemLayout, mode: usize, qubit: usize) -> Result<Operator> {
    let d = layout.expect_qumode(mode)?;
    layout.expect_qubit(qubit)?;
    let kernel = DisplacementKernel::for_cutoff(d);
    let leak = displaced_vacuum_leakage(&kernel, beta);
    let tolerance = crate::fock::Tolerances::default().leakage;
    if leak >= tolerance {
        return Err(Error::Leakage {
            leakage: leak,
            tolerance,
            cutoff: d,
        });
    }
    let dp = kernel.matrix(beta);
    let dm = kernel.matrix(-beta);
    // local ordering (mode, qubit): index = n * 2 + b
    let mut local = CMatrix::zeros(2 * d, 2 * d);
    for r in 0..d {
        for c in 0..d {
            local[(2 * r + 1, 2 * c)] = dp[(r, c)];
            local[(2 * r, 2 * c + 1)] = dm[(r, c)];
        }
    }
    Operator::embed(layout, &[mode, qubit], &local, OperatorKind::Unitary)
}

/// Top-two-level population of `D(β)|0⟩`.
fn displaced_vacuum_leakage(kernel: &DisplacementKernel, beta: C64) -> f64 {
    let d = kernel.cutoff();
    let mut f = vec![C64::new(0.0, 0.0); d];
    f[0] = C64::new(1.0, 0.0);
    let mut scratch = f.clone();
    kernel.displace(beta, &mut f, &mut scratch);
    f[d - 1].norm_sqr() + f[d - 2].norm_sqr()
}

pub fn rotation_gate(xi: f64, phi: f64, layout: &SubsystemLayout, qubit: usize) -> Result<Operator> {
    layout.expect_qubit(qubit)?;
    let r = rotation_matrix(xi, phi);
    let local = CMatrix::from_row_slice(2, 2, &[r[0][0], r[0][1], r[1][0], r[1][1]]);
    Operator::embed(layout, &[qubit], &local, OperatorKind::Unitary)
}

/// Dense `U(θ)` as the ordered gate product.
pub fn build_unitary(params: &AnsatzParams, arch: &Architecture) -> Result<Operator> {
    arch.validate()?;
    let flat = params.pack();
    AnsatzParams::unpack(arch, &flat)?;
    let layout = arch.layout()?;
    let n = layout.dim();
    let engine = Engine::new(arch)?;
    let program = engine.compile(&flat);
    let mut u = CMatrix::zeros(n, n);
    let mut col = vec![C64::new(0.0, 0.0); n];
    for c in 0..n {
        col.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        col[c] = C64::new(1.0, 0.0);
        engine.apply(&program, &mut col);
        for (r, z) in col.iter().enumerate() {
            u[(r, c)] = *z;
        }
    }
    Operator::new(layout, u, OperatorKind::Unitary)
}

/// `U(θ_p)|vac⟩ ⊗ |0…0⟩`, with leakage checked at the architecture cutoff.
pub fn probe_state(theta_p: &AnsatzParams, arch: &Architecture) -> Result<QuantumState> {
    arch.validate()?;
    let engine = Engine::new(arch)?;
    let flat = theta_p.pack();
    AnsatzParams::unpack(arch, &flat)?;
    let program = engine.compile(&flat);
    let mut psi = engine.vacuum();
    engine.apply(&program, &mut psi);
    let state = QuantumState::pure(engine.layout().clone(), psi.into())?;
    state.check_leakage(crate::fock::Tolerances::default().leakage)?;
    Ok(state)
}

/// Mean occupation summed over the data modes.
pub fn data_occupation(state: &QuantumState, arch: &Architecture) -> Result<f64> {
    (0..arch.data_modes).map(|m| state.occupation(m)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::linalg::max_abs;
    use crate::fock::operator::number;

    fn one_mode(layers: usize, d: usize) -> Architecture {
        Architecture::single_mode(layers, d)
    }

    #[test]
    fn pack_unpack_round_trip() {
        let arch = Architecture {
            data_modes: 2,
            ancilla_modes: 1,
            qubits: 2,
            decision_qubit: 1,
            layers: 3,
            cutoff: 6,
            coupling: CouplingPattern::AllModes,
        };
        arch.validate().unwrap();
        assert_eq!(arch.param_count(), 3 * (2 * 6 + 4));
        let v: Vec<f64> = (0..arch.param_count()).map(|i| (i as f64).sin()).collect();
        assert_eq!(AnsatzParams::unpack(&arch, &v).unwrap().pack(), v);
        assert!(AnsatzParams::unpack(&arch, &v[1..]).is_err());
        let json = serde_json::to_string(&ParamsRecord {
            architecture: arch.clone(),
            values: v.clone(),
        })
        .unwrap();
        let back: ParamsRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.values, v);
        assert_eq!(back.architecture, arch);
    }

    #[test]
    fn architecture_validation() {
        let mut arch = one_mode(2, 10);
        arch.decision_qubit = 1;
        assert!(matches!(arch.validate(), Err(Error::Config(_))));
        let mut arch = one_mode(2, 10);
        arch.coupling = CouplingPattern::Explicit {
            layers: vec![vec![(0, 0)]],
        };
        assert!(arch.validate().is_err());
        assert!(!one_mode(1, 4).is_entanglement_assisted());
    }

    #[test]
    fn ecd_at_zero_is_sigma_x() {
        let layout = SubsystemLayout::modes_then_qubits(1, 5, 1).unwrap();
        let u = ecd_gate(C64::new(0.0, 0.0), &layout, 0, 1).unwrap();
        let x = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        );
        let want = CMatrix::identity(5, 5).kronecker(&x);
        assert!(max_abs(&(u.matrix() - want)) < 1e-15);
    }

    #[test]
    fn ecd_squares_to_identity() {
        let layout = SubsystemLayout::modes_then_qubits(1, 20, 1).unwrap();
        let u = ecd_gate(C64::new(0.7, -0.4), &layout, 0, 1).unwrap();
        let sq = u.compose(&u).unwrap();
        assert!(max_abs(&(sq.matrix() - CMatrix::identity(40, 40))) < 1e-12);
    }

    #[test]
    fn ecd_displaces_vacuum_energy() {
        let d = 30;
        let layout = SubsystemLayout::modes_then_qubits(1, d, 1).unwrap();
        let beta = C64::new(0.9, 0.5);
        let u = ecd_gate(beta, &layout, 0, 1).unwrap();
        let st = QuantumState::vacuum(layout.clone()).evolve(&u).unwrap();
        let n = Operator::embed(&layout, &[0], number(d).unwrap().matrix(), OperatorKind::Hermitian).unwrap();
        assert!((st.expectation(&n).unwrap() - beta.norm_sqr()).abs() < 1e-10);
        // the qubit is entangled with the mode once β ≠ 0
        let sup = rotation_gate(std::f64::consts::FRAC_PI_2, 0.0, &layout, 1).unwrap();
        let st = QuantumState::vacuum(layout).evolve(&sup).unwrap().evolve(&u).unwrap();
        assert!(st.partial_trace(&[1]).unwrap().purity() < 0.99);
    }

    #[test]
    fn rotation_identities() {
        let layout = SubsystemLayout::modes_then_qubits(0, 2, 1).unwrap();
        let id = rotation_gate(0.0, 1.3, &layout, 0).unwrap();
        assert!(max_abs(&(id.matrix() - CMatrix::identity(2, 2))) < 1e-15);
        let x = rotation_gate(std::f64::consts::PI, 0.0, &layout, 0).unwrap();
        let minus_i_x = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, -1.0), C64::new(0.0, 0.0)],
        );
        assert!(max_abs(&(x.matrix() - minus_i_x)) < 1e-15);
        let a = rotation_gate(0.8, 0.3, &layout, 0).unwrap();
        let b = rotation_gate(-0.8, 0.3, &layout, 0).unwrap();
        assert!(max_abs(&(a.compose(&b).unwrap().matrix() - CMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn zero_parameters_give_sigma_x_layers() {
        let arch = one_mode(2, 6);
        let u = build_unitary(&AnsatzParams::zeros(&arch), &arch).unwrap();
        assert!(max_abs(&(u.matrix() - CMatrix::identity(12, 12))) < 1e-15);
        let arch = one_mode(3, 6);
        let st = probe_state(&AnsatzParams::zeros(&arch), &arch).unwrap();
        // odd layer count leaves the qubit flipped
        let p = st.partial_trace(&[1]).unwrap().density_matrix();
        assert!((p[(1, 1)].re - 1.0).abs() < 1e-15);
        assert_eq!(data_occupation(&st, &arch).unwrap(), 0.0);
    }

    #[test]
    fn single_layer_cat_has_beta_squared_energy() {
        let arch = one_mode(1, 30);
        let beta = 1.0;
        let params = AnsatzParams {
            layers: vec![LayerParams {
                rotations: vec![Rotation {
                    xi: std::f64::consts::FRAC_PI_2,
                    phi: -std::f64::consts::FRAC_PI_2,
                }],
                displacements: vec![C64::new(beta, 0.0)],
            }],
        };
        let st = probe_state(&params, &arch).unwrap();
        assert!((data_occupation(&st, &arch).unwrap() - beta * beta).abs() < 1e-10);
        // both qubit branches are populated equally
        let q = st.partial_trace(&[1]).unwrap().density_matrix();
        assert!((q[(0, 0)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dense_unitary_matches_gate_product() {
        let arch = one_mode(2, 14);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let p = AnsatzParams::random(&arch, &mut rng);
        let layout = arch.layout().unwrap();
        let mut want = Operator::identity(&layout);
        for (l, layer) in p.layers.iter().enumerate() {
            for (q, r) in layer.rotations.iter().enumerate() {
                let g = rotation_gate(r.xi, r.phi, &layout, arch.qubit_index(q)).unwrap();
                want = g.compose(&want).unwrap();
            }
            for ((q, m), b) in arch.couplings(l).into_iter().zip(&layer.displacements) {
                let g = ecd_gate(*b, &layout, m, arch.qubit_index(q)).unwrap();
                want = g.compose(&want).unwrap();
            }
        }
        let got = build_unitary(&p, &arch).unwrap();
        assert!(max_abs(&(got.matrix() - want.matrix())) < 1e-12);
    }
}
