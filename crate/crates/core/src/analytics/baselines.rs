//! Closed-form and semi-analytic error baselines.

use nalgebra::DMatrix;

use crate::analytics::special::{erfc, laguerre, laguerre_smallest_root};
use crate::fock::kernel::{gather, scatter, DisplacementKernel};
use crate::fock::layout::SubsystemLayout;
use crate::fock::linalg::{trace_norm_hermitian, HermitianEigen};
use crate::fock::operator::{gaussian_op, multimode_displacement, GaussianGate, Operator};
use crate::fock::state::QuantumState;
use crate::tasks::LabeledDisplacementEnsemble;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Squeezed-vacuum homodyne error `½ erfc(√2 ε e^r)` with `N_S = sinh² r`.
pub fn gaussian_binary_error(epsilon: f64, n_s: f64) -> f64 {
    let r = n_s.sqrt().asinh();
    0.5 * erfc(std::f64::consts::SQRT_2 * epsilon * r.exp())
}

/// Helstrom limit of `D(±ε)S(r)|0⟩` with `N_S = sinh² r`: the squared
/// overlap is `exp(−4ε² e^{2r})`.
pub fn helstrom_squeezed_binary(epsilon: f64, n_s: f64) -> f64 {
    let r = n_s.sqrt().asinh();
    let overlap = (-4.0 * epsilon * epsilon * (2.0 * r).exp()).exp();
    0.5 * (1.0 - (1.0 - overlap).max(0.0).sqrt())
}

fn check_priors(priors: [f64; 2]) -> Result<()> {
    if priors.iter().any(|p| !(*p >= 0.0)) || (priors[0] + priors[1] - 1.0).abs() > 1e-12 {
        return Err(Error::Contract(format!("priors {priors:?} are not a distribution")));
    }
    Ok(())
}

fn check_density(rho: &CMatrix, name: &str) -> Result<()> {
    let tol = 1e-10;
    if !rho.is_square() {
        return Err(Error::Contract(format!("{name} is not square")));
    }
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > tol {
        return Err(Error::Contract(format!("{name} is not Hermitian ({herm:.1e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::Contract(format!("{name} has trace {tr}")));
    }
    let min = HermitianEigen::new(rho).values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(Error::Contract(format!("{name} has eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// `½(1 − ‖p₀ρ₀ − p₁ρ₁‖₁)` for density matrices.
pub fn helstrom_binary_matrices(rho0: &CMatrix, rho1: &CMatrix, priors: [f64; 2]) -> Result<f64> {
    check_priors(priors)?;
    check_density(rho0, "rho0")?;
    check_density(rho1, "rho1")?;
    if rho0.shape() != rho1.shape() {
        return Err(Error::Contract("density matrices have different dimensions".into()));
    }
    let diff = rho0 * C64::new(priors[0], 0.0) - rho1 * C64::new(priors[1], 0.0);
    let pe = 0.5 * (1.0 - trace_norm_hermitian(&diff));
    Ok(pe.clamp(0.0, priors[0].min(priors[1])))
}

/// Helstrom limit for two states on the same layout.
pub fn helstrom_binary(rho0: &QuantumState, rho1: &QuantumState, priors: [f64; 2]) -> Result<f64> {
    if rho0.layout() != rho1.layout() {
        return Err(Error::Contract("states live on different layouts".into()));
    }
    helstrom_binary_matrices(&rho0.density_matrix(), &rho1.density_matrix(), priors)
}

/// Helstrom limit between two weighted mixtures of pure states, with the
/// weights already including the priors.
///
/// `p₀ρ₀ − p₁ρ₁ = Φ Σ Φ†` with `Φ = [√w_k ψ_k]` and `Σ = diag(±1)`; after
/// `Φ = QR` the nonzero spectrum is that of the small matrix `R Σ R†`.
pub fn helstrom_pure_ensembles(class0: &[(f64, CVector)], class1: &[(f64, CVector)]) -> Result<f64> {
    let all: Vec<(f64, &CVector, f64)> = class0
        .iter()
        .map(|(w, v)| (*w, v, 1.0))
        .chain(class1.iter().map(|(w, v)| (*w, v, -1.0)))
        .collect();
    if all.is_empty() {
        return Err(Error::Contract("no states given".into()));
    }
    let dim = all[0].1.len();
    if all.iter().any(|(w, v, _)| v.len() != dim || !(*w >= 0.0)) {
        return Err(Error::Contract("states must share a dimension and carry non-negative weights".into()));
    }
    let total: f64 = all.iter().map(|(w, _, _)| w).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Contract(format!("weights sum to {total}")));
    }
    let k = all.len();
    let mut phi = CMatrix::zeros(dim, k);
    for (j, (w, v, _)) in all.iter().enumerate() {
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Contract(format!("state {j} has norm {norm}")));
        }
        phi.set_column(j, &(*v * C64::new(w.sqrt(), 0.0)));
    }
    let r = phi.qr().r();
    let mut rs = r.clone();
    for (j, (_, _, s)) in all.iter().enumerate() {
        if *s < 0.0 {
            let col = -rs.column(j);
            rs.set_column(j, &col);
        }
    }
    let m = rs * r.adjoint();
    let p0: f64 = class0.iter().map(|(w, _)| w).sum();
    let pe = 0.5 * (1.0 - trace_norm_hermitian(&m));
    Ok(pe.clamp(0.0, p0.min(1.0 - p0)))
}

/// `ψ ← ⊗_m D(x_m) ψ` on the qumodes of a mode-only layout.
pub fn displace_vector(psi: &CVector, layout: &SubsystemLayout, x: &[f64]) -> Result<CVector> {
    let modes = layout.qumodes();
    if x.len() != 2 * modes.len() {
        return Err(Error::Shape(format!(
            "displacement of length {} on {} modes",
            x.len(),
            modes.len()
        )));
    }
    let mut out = psi.clone();
    let data = out.as_mut_slice();
    for (k, &m) in modes.iter().enumerate() {
        let beta = C64::new(x[2 * k], x[2 * k + 1]);
        if beta.norm() == 0.0 {
            continue;
        }
        let d = layout.entries()[m].dim;
        let kernel = DisplacementKernel::for_cutoff(d);
        let stride = layout.stride(m);
        let mut fibre = vec![C64::new(0.0, 0.0); d];
        let mut scratch = vec![C64::new(0.0, 0.0); d];
        for base in layout.fibre_bases(m) {
            gather(data, base, stride, &mut fibre);
            kernel.displace(beta, &mut fibre, &mut scratch);
            scatter(data, base, stride, &fibre);
        }
    }
    Ok(out)
}

/// Helstrom limit of a displacement ensemble interrogated by a fixed pure
/// probe, with each class mixed over its atoms.
pub fn helstrom_ensemble(ensemble: &LabeledDisplacementEnsemble, probe: &QuantumState) -> Result<f64> {
    let psi = probe
        .vector()
        .ok_or_else(|| Error::Contract("probe must be pure".into()))?;
    let layout = probe.layout();
    if layout.qumodes().len() != ensemble.modes() {
        return Err(Error::Shape(format!(
            "probe has {} qumodes, ensemble has {} modes",
            layout.qumodes().len(),
            ensemble.modes()
        )));
    }
    if ensemble.labels() != 2 {
        return Err(Error::Contract("Helstrom limit needs exactly two classes".into()));
    }
    let mut classes: [Vec<(f64, CVector)>; 2] = [Vec::new(), Vec::new()];
    for (label, w, atom) in ensemble.iter() {
        classes[label].push((w, displace_vector(psi, layout, &atom.x)?));
    }
    helstrom_pure_ensembles(&classes[0], &classes[1])
}

/// Product of per-mode squeezed vacua sharing the budget equally, each
/// squeezing `q̂`.
pub fn squeezed_probe(modes: usize, n_s: f64, d: usize) -> Result<QuantumState> {
    let layout = SubsystemLayout::modes_then_qubits(modes, d, 0)?;
    let r = (n_s / modes as f64).sqrt().asinh();
    let mut state = QuantumState::vacuum(layout.clone());
    for m in 0..modes {
        state = state.evolve(&gaussian_op(GaussianGate::Squeezer(r), &layout, &[m])?)?;
    }
    Ok(state)
}

/// Helstrom limit with a squeezed-vacuum probe on every data mode.
pub fn helstrom_squeezed(ensemble: &LabeledDisplacementEnsemble, n_s: f64, d: usize) -> Result<f64> {
    helstrom_ensemble(ensemble, &squeezed_probe(ensemble.modes(), n_s, d)?)
}

/// `½ e^{−ε²} L_n(ε²)²`: probe `|n⟩`, circle-averaged overlap
/// `|⟨n|D(α)|n⟩|²`, and a `|n⟩⟨n|` test for the vacuum class.
pub fn number_interferometry_error(n: usize, epsilon: f64) -> f64 {
    let x = epsilon * epsilon;
    let l = laguerre(n, x);
    0.5 * (-x).exp() * l * l
}

/// Zero of `number_interferometry_error(n, ·)`: `√x₁` for the smallest
/// Laguerre root `x₁`.
pub fn interferometry_threshold(n: usize) -> Option<f64> {
    laguerre_smallest_root(n).map(f64::sqrt)
}

/// The interferometer with its beamsplitter tuned so the effective
/// amplitude `ε cos θ` never exceeds the zero of the error curve.
pub fn adaptive_interferometry_error(n: usize, epsilon: f64) -> f64 {
    match interferometry_threshold(n) {
        Some(th) if epsilon > th => number_interferometry_error(n, th),
        _ => number_interferometry_error(n, epsilon),
    }
}

/// Fock simulation of the number interferometer on a single-mode ensemble:
/// `|n⟩|0⟩`, beamsplitter `θ`, displacement on the first arm, inverse
/// beamsplitter, then `Π₀ = |n⟩⟨n| ⊗ I` announces class 0.
pub struct NumberInterferometer {
    layout: SubsystemLayout,
    beamsplitter: Operator,
}

impl NumberInterferometer {
    pub fn new(theta: f64, d: usize) -> Result<Self> {
        let layout = SubsystemLayout::modes_then_qubits(2, d, 0)?;
        let beamsplitter = gaussian_op(GaussianGate::Beamsplitter(theta), &layout, &[0, 1])?;
        Ok(NumberInterferometer { layout, beamsplitter })
    }

    pub fn error(&self, n: usize, ensemble: &LabeledDisplacementEnsemble) -> Result<f64> {
        if ensemble.modes() != 1 || ensemble.labels() != 2 {
            return Err(Error::Contract("interferometer expects a binary single-mode ensemble".into()));
        }
        let d = self.layout.entries()[0].dim;
        if n + 2 > d {
            return Err(Error::Shape(format!("Fock level {n} does not fit cutoff {d}")));
        }
        let input = QuantumState::basis(self.layout.clone(), &[n, 0])?;
        let probe = input.evolve(&self.beamsplitter)?;
        let psi = probe.vector().expect("pure");
        let bs_dag = self.beamsplitter.matrix().adjoint();
        let mut pe = 0.0;
        for (label, w, atom) in ensemble.iter() {
            let shifted = displace_vector(psi, &self.layout, &[atom.x[0], atom.x[1], 0.0, 0.0])?;
            let out = &bs_dag * shifted;
            let p0: f64 = (0..d).map(|k| out[n * d + k].norm_sqr()).sum();
            pe += w * if label == 0 { 1.0 - p0 } else { p0 };
        }
        Ok(pe)
    }
}

pub fn simulate_number_interferometry(
    n: usize,
    ensemble: &LabeledDisplacementEnsemble,
    theta: f64,
    d: usize,
) -> Result<f64> {
    NumberInterferometer::new(theta, d)?.error(n, ensemble)
}

/// Smallest Fock number guaranteeing the zero-error threshold at `ε`:
/// `⌈2/ε² − 1⌉`, clamped at zero.
pub fn required_fock(epsilon: f64) -> Result<usize> {
    if epsilon == 0.0 || !epsilon.is_finite() {
        return Err(Error::Undefined(format!("required Fock number at ε = {epsilon}")));
    }
    let v = 2.0 / (epsilon * epsilon) - 1.0;
    // guard against 2/ε² − 1 landing a rounding error above an integer
    Ok((v - 1e-12).ceil().max(0.0) as usize)
}

/// First-order threshold `[(1 + 2N_S − 2√(N_S(N_S+1)))/2]^{1/2}`.
pub fn threshold_asymptotic(n_s: f64) -> f64 {
    ((1.0 + 2.0 * n_s - 2.0 * (n_s * (n_s + 1.0)).sqrt()) / 2.0).sqrt()
}

/// Best Helstrom error of `(w|0⟩ + |N⟩)/√(1+w²)` with `⟨n̂⟩ = N_S`, so
/// `w² = N/N_S − 1`, scanned over `N ≤ d − 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnStateOptimum {
    pub error: f64,
    pub n: usize,
    pub w: f64,
}

pub fn on_state_error(ensemble: &LabeledDisplacementEnsemble, n_s: f64, d: usize) -> Result<OnStateOptimum> {
    if ensemble.modes() != 1 {
        return Err(Error::Contract("ON-state baseline is single-mode".into()));
    }
    if !(n_s > 0.0) {
        return Err(Error::Contract("ON-state baseline needs a positive budget".into()));
    }
    let reach = ensemble
        .iter()
        .map(|(_, _, a)| a.x[0].hypot(a.x[1]))
        .fold(0.0, f64::max);
    let d_sim = d + 20 + (4.0 * reach * reach).ceil() as usize;
    let mut best: Option<OnStateOptimum> = None;
    let first = n_s.ceil().max(1.0) as usize;
    for n in first..=d.saturating_sub(2) {
        let w = (n as f64 / n_s - 1.0).max(0.0).sqrt();
        let probe = QuantumState::fock_superposition(&[(0, C64::new(w, 0.0)), (n, C64::new(1.0, 0.0))], d_sim)?;
        let error = helstrom_ensemble(ensemble, &probe)?;
        if best.is_none_or(|b| error < b.error) {
            best = Some(OnStateOptimum { error, n, w });
        }
    }
    best.ok_or_else(|| Error::Contract(format!("no Fock level in [{first}, {}]", d.saturating_sub(2))))
}

/// `Σᵢⱼ Cov(ζᵢ, ζⱼ) Cov(ĝᵢ, ĝⱼ)`.
pub fn theorem2_bound(noise_cov: &DMatrix<f64>, generator_cov: &DMatrix<f64>) -> Result<f64> {
    if noise_cov.shape() != generator_cov.shape() || !noise_cov.is_square() {
        return Err(Error::Contract(format!(
            "noise covariance {:?} and generator covariance {:?} differ in shape",
            noise_cov.shape(),
            generator_cov.shape()
        )));
    }
    if (noise_cov - noise_cov.transpose()).abs().max() > 1e-14 {
        return Err(Error::Contract("noise covariance is not symmetric".into()));
    }
    let n = noise_cov.nrows();
    if n > 0 {
        let (vals, _) = crate::fock::linalg::real_symmetric_eigen(noise_cov);
        if vals[0] < -1e-14 {
            return Err(Error::Contract("noise covariance is not positive semidefinite".into()));
        }
    }
    Ok(noise_cov.component_mul(generator_cov).sum())
}

/// `½⟨{ĝᵢ, ĝⱼ}⟩ − ⟨ĝᵢ⟩⟨ĝⱼ⟩` averaged over weighted states; each generator is
/// a Hermitian operator on the states' layout.
pub fn generator_covariance(states: &[(f64, QuantumState)], generators: &[Operator]) -> Result<DMatrix<f64>> {
    let n = generators.len();
    let total: f64 = states.iter().map(|(w, _)| w).sum();
    if states.is_empty() || !(total > 0.0) {
        return Err(Error::Contract("need at least one weighted state".into()));
    }
    let mut cov = DMatrix::zeros(n, n);
    for (w, state) in states {
        let means = generators
            .iter()
            .map(|g| state.expectation(g))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..n {
            for j in i..n {
                let gi = generators[i].matrix();
                let gj = generators[j].matrix();
                let anti = (gi * gj + gj * gi) * C64::new(0.5, 0.0);
                let op = Operator::new(state.layout().clone(), anti, crate::fock::OperatorKind::Hermitian)?;
                let c = state.expectation(&op)? - means[i] * means[j];
                cov[(i, j)] += w / total * c;
                if i != j {
                    cov[(j, i)] += w / total * c;
                }
            }
        }
    }
    Ok(cov)
}

/// A named `(axis, P_E)` series for figure export.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineCurve {
    pub method: String,
    pub points: Vec<(f64, f64)>,
}

impl BaselineCurve {
    pub fn new(method: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        BaselineCurve {
            method: method.into(),
            points,
        }
    }

    pub fn tabulate(method: impl Into<String>, axis: &[f64], f: impl Fn(f64) -> f64) -> Self {
        BaselineCurve::new(method, axis.iter().map(|&x| (x, f(x))).collect())
    }

    pub fn write_csv<W: std::io::Write>(&self, axis_name: &str, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{axis_name},error")?;
        for (x, y) in &self.points {
            writeln!(out, "{x},{y:e}")?;
        }
        Ok(())
    }
}

/// Displaced copies of a probe, one per atom, for use outside the pipeline.
pub fn displaced_states(
    ensemble: &LabeledDisplacementEnsemble,
    probe: &QuantumState,
) -> Result<Vec<(usize, f64, QuantumState)>> {
    ensemble
        .iter()
        .map(|(label, w, atom)| {
            let op = multimode_displacement(&atom.x, probe.layout())?;
            Ok((label, w, probe.evolve(&op)?))
        })
        .collect()
}
