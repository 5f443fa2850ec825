use crate::fock::kernel::DisplacementKernel;
use crate::fock::layout::{SubsystemKind, SubsystemLayout};
use crate::fock::linalg::{max_abs, HermitianEigen};
use crate::fock::operator::{Operator, OperatorKind};
use crate::fock::Tolerances;
use crate::{CMatrix, CVector, Error, Result, C64};

#[derive(Clone, Debug)]
pub enum StateData {
    Pure(CVector),
    Mixed(CMatrix),
}

/// Pure or mixed state over a [`SubsystemLayout`].
#[derive(Clone, Debug)]
pub struct QuantumState {
    layout: SubsystemLayout,
    data: StateData,
}

impl QuantumState {
    /// Wraps a state vector, checking its norm.
    pub fn pure(layout: SubsystemLayout, psi: CVector) -> Result<Self> {
        if psi.len() != layout.dim() {
            return Err(Error::Shape(format!(
                "state vector length {} does not match layout dimension {}",
                psi.len(),
                layout.dim()
            )));
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > Tolerances::default().norm {
            return Err(Error::Contract(format!("state norm is {norm}, expected 1")));
        }
        Ok(QuantumState {
            layout,
            data: StateData::Pure(psi),
        })
    }

    /// Wraps a density matrix, checking trace, Hermiticity and positivity.
    pub fn mixed(layout: SubsystemLayout, rho: CMatrix) -> Result<Self> {
        if rho.nrows() != layout.dim() || rho.ncols() != layout.dim() {
            return Err(Error::Shape("density matrix does not match layout".into()));
        }
        let tol = Tolerances::default();
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.norm {
            return Err(Error::Contract(format!("density matrix trace is {tr}")));
        }
        let herm = max_abs(&(&rho - rho.adjoint()));
        if herm > tol.norm {
            return Err(Error::Contract(format!("density matrix not Hermitian ({herm:.2e})")));
        }
        let min_eig = HermitianEigen::new(&rho)
            .values
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -tol.norm {
            return Err(Error::Contract(format!("density matrix has eigenvalue {min_eig:.3e}")));
        }
        Ok(QuantumState {
            layout,
            data: StateData::Mixed(rho),
        })
    }

    pub(crate) fn pure_unchecked(layout: SubsystemLayout, psi: CVector) -> Self {
        QuantumState {
            layout,
            data: StateData::Pure(psi),
        }
    }

    pub(crate) fn mixed_unchecked(layout: SubsystemLayout, rho: CMatrix) -> Self {
        QuantumState {
            layout,
            data: StateData::Mixed(rho),
        }
    }

    /// Product basis state; `levels[k]` is the level of subsystem `k`.
    pub fn basis(layout: SubsystemLayout, levels: &[usize]) -> Result<Self> {
        if levels.len() != layout.len() {
            return Err(Error::Shape("one level per subsystem required".into()));
        }
        let mut idx = 0;
        for (k, &l) in levels.iter().enumerate() {
            if l >= layout.entries()[k].dim {
                return Err(Error::Shape(format!("level {l} outside subsystem {k}")));
            }
            idx += l * layout.stride(k);
        }
        let mut psi = CVector::zeros(layout.dim());
        psi[idx] = C64::new(1.0, 0.0);
        Ok(QuantumState::pure_unchecked(layout, psi))
    }

    /// All qumodes in vacuum, all qubits in `|0⟩`.
    pub fn vacuum(layout: SubsystemLayout) -> Self {
        let mut psi = CVector::zeros(layout.dim());
        psi[0] = C64::new(1.0, 0.0);
        QuantumState::pure_unchecked(layout, psi)
    }

    /// Single-mode coherent state `D(α)|0⟩` at cutoff `d`.
    pub fn coherent(alpha: C64, d: usize) -> Result<Self> {
        let layout = SubsystemLayout::single_mode(d)?;
        let mut psi = vec![C64::new(0.0, 0.0); d];
        psi[0] = C64::new(1.0, 0.0);
        let mut scratch = vec![C64::new(0.0, 0.0); d];
        DisplacementKernel::for_cutoff(d).displace(alpha, &mut psi, &mut scratch);
        Ok(QuantumState::pure_unchecked(layout, CVector::from_vec(psi)))
    }

    /// Single-mode superposition with the given (unnormalised) Fock amplitudes.
    pub fn fock_superposition(amplitudes: &[(usize, C64)], d: usize) -> Result<Self> {
        let layout = SubsystemLayout::single_mode(d)?;
        let mut psi = CVector::zeros(d);
        for &(n, a) in amplitudes {
            if n >= d {
                return Err(Error::Shape(format!("Fock level {n} outside cutoff {d}")));
            }
            psi[n] += a;
        }
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::Contract("zero superposition".into()));
        }
        Ok(QuantumState::pure_unchecked(layout, psi.unscale(norm)))
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn vector(&self) -> Option<&CVector> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Mixed(m) => m.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared(),
            StateData::Mixed(m) => m.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared().powi(2),
            StateData::Mixed(m) => (m * m).trace().re,
        }
    }

    /// `U|ψ⟩` or `UρU†`.
    pub fn evolve(&self, op: &Operator) -> Result<Self> {
        if op.layout() != &self.layout {
            return Err(Error::Shape("operator and state layouts differ".into()));
        }
        let u = op.matrix();
        let data = match &self.data {
            StateData::Pure(v) => StateData::Pure(u * v),
            StateData::Mixed(m) => StateData::Mixed(u * m * u.adjoint()),
        };
        Ok(QuantumState {
            layout: self.layout.clone(),
            data,
        })
    }

    /// `⟨op⟩` for a Hermitian operator on the full layout.
    pub fn expectation(&self, op: &Operator) -> Result<f64> {
        if op.layout() != &self.layout {
            return Err(Error::Shape("operator and state layouts differ".into()));
        }
        if op.kind() != OperatorKind::Hermitian
            && op.hermiticity_defect() >= Tolerances::default().hermiticity
        {
            return Err(Error::Contract("expectation requires a Hermitian operator".into()));
        }
        let value = match &self.data {
            StateData::Pure(v) => v.dotc(&(op.matrix() * v)),
            StateData::Mixed(m) => (op.matrix() * m).trace(),
        };
        let scale = 1.0f64.max(value.re.abs());
        if value.im.abs() > 1e-10 * scale {
            return Err(Error::Contract(format!(
                "expectation has imaginary residue {:.3e}",
                value.im
            )));
        }
        Ok(value.re)
    }

    /// Expectation of an operator acting on the listed subsystems only.
    pub fn local_expectation(&self, targets: &[usize], local: &CMatrix) -> Result<f64> {
        let op = Operator::embed(&self.layout, targets, local, OperatorKind::Hermitian)?;
        self.expectation(&op)
    }

    /// Reduced state on `keep` (ordered as in the layout).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<QuantumState> {
        if keep.is_empty() {
            return Err(Error::Contract("partial trace needs a non-empty keep set".into()));
        }
        for &k in keep {
            self.layout.entry(k)?;
        }
        let sub = self.layout.sub_layout(keep)?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let traced: Vec<usize> = (0..self.layout.len()).filter(|i| !kept.contains(i)).collect();
        let rest_layout = if traced.is_empty() {
            None
        } else {
            Some(self.layout.sub_layout(&traced)?)
        };
        let rest_dim = rest_layout.as_ref().map_or(1, |l| l.dim());
        // flat index -> (kept index, traced index)
        let split = |flat: usize| -> (usize, usize) {
            let mut ki = 0;
            for (pos, &k) in kept.iter().enumerate() {
                ki += self.layout.digit(flat, k) * sub.stride(pos);
            }
            let mut ri = 0;
            if let Some(rl) = &rest_layout {
                for (pos, &t) in traced.iter().enumerate() {
                    ri += self.layout.digit(flat, t) * rl.stride(pos);
                }
            }
            (ki, ri)
        };
        let n = self.layout.dim();
        let kd = sub.dim();
        let mut rho = CMatrix::zeros(kd, kd);
        match &self.data {
            StateData::Pure(v) => {
                // reshape into kd × rest_dim, then ρ = A A†
                let mut a = CMatrix::zeros(kd, rest_dim);
                for flat in 0..n {
                    let (ki, ri) = split(flat);
                    a[(ki, ri)] = v[flat];
                }
                rho = &a * a.adjoint();
            }
            StateData::Mixed(m) => {
                let idx: Vec<(usize, usize)> = (0..n).map(split).collect();
                for i in 0..n {
                    for j in 0..n {
                        if idx[i].1 == idx[j].1 {
                            rho[(idx[i].0, idx[j].0)] += m[(i, j)];
                        }
                    }
                }
            }
        }
        Ok(QuantumState::mixed_unchecked(sub, rho))
    }

    /// Photon-number distribution of qumode `mode`.
    pub fn photon_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        let d = self.layout.expect_qumode(mode)?;
        let stride = self.layout.stride(mode);
        let mut probs = vec![0.0; d];
        match &self.data {
            StateData::Pure(v) => {
                for (flat, z) in v.iter().enumerate() {
                    probs[(flat / stride) % d] += z.norm_sqr();
                }
            }
            StateData::Mixed(m) => {
                for flat in 0..self.layout.dim() {
                    probs[(flat / stride) % d] += m[(flat, flat)].re;
                }
            }
        }
        Ok(probs)
    }

    /// Mean photon number of one qumode.
    pub fn occupation(&self, mode: usize) -> Result<f64> {
        Ok(self
            .photon_distribution(mode)?
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum())
    }

    /// Largest population held in the top two Fock levels of any qumode.
    pub fn leakage(&self) -> f64 {
        self.layout
            .qumodes()
            .into_iter()
            .map(|m| {
                let p = self.photon_distribution(m).expect("qumode index");
                let d = p.len();
                p[d - 1] + p[d - 2]
            })
            .fold(0.0, f64::max)
    }

    pub fn check_leakage(&self, tolerance: f64) -> Result<()> {
        let leak = self.leakage();
        if leak >= tolerance {
            let cutoff = self
                .layout
                .entries()
                .iter()
                .filter(|e| e.kind == SubsystemKind::Qumode)
                .map(|e| e.dim)
                .max()
                .unwrap_or(0);
            return Err(Error::Leakage {
                leakage: leak,
                tolerance,
                cutoff,
            });
        }
        Ok(())
    }

    /// Re-expresses a state on a layout with a larger (or equal) cutoff.
    pub fn embed_cutoff(&self, cutoff: usize) -> Result<QuantumState> {
        let target = self.layout.with_cutoff(cutoff)?;
        for (a, b) in self.layout.entries().iter().zip(target.entries()) {
            if b.dim < a.dim {
                return Err(Error::Shape("cannot shrink a cutoff by embedding".into()));
            }
        }
        let map = |flat: usize| -> usize {
            (0..self.layout.len())
                .map(|k| self.layout.digit(flat, k) * target.stride(k))
                .sum()
        };
        Ok(match &self.data {
            StateData::Pure(v) => {
                let mut out = CVector::zeros(target.dim());
                for (flat, z) in v.iter().enumerate() {
                    out[map(flat)] = *z;
                }
                QuantumState::pure_unchecked(target, out)
            }
            StateData::Mixed(m) => {
                let mut out = CMatrix::zeros(target.dim(), target.dim());
                let idx: Vec<usize> = (0..self.layout.dim()).map(map).collect();
                for i in 0..idx.len() {
                    for j in 0..idx.len() {
                        out[(idx[i], idx[j])] = m[(i, j)];
                    }
                }
                QuantumState::mixed_unchecked(target, out)
            }
        })
    }
}

/// `|⟨φ|ψ⟩|²` for pure states, `⟨φ|ρ|φ⟩` when `other` is mixed.
pub fn fidelity_with_pure(target: &CVector, state: &QuantumState) -> f64 {
    match state.data() {
        StateData::Pure(v) => target.dotc(v).norm_sqr(),
        StateData::Mixed(m) => target.dotc(&(m * target)).re,
    }
}
