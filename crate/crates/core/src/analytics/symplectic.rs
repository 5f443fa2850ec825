//! Symplectic maps on quadrature vectors and the induced transforms of
//! displacement ensembles and energy budgets.
//!
//! Quadratures are interleaved per mode, `(q₁, p₁, q₂, p₂, …)`, and a map
//! acts on displacement vectors as `x ↦ S x`.

use nalgebra::{DMatrix, DVector};

use crate::fock::linalg::HermitianEigen;
use crate::fock::operator::{momentum, position};
use crate::fock::state::QuantumState;
use crate::tasks::LabeledDisplacementEnsemble;
use crate::{CMatrix, Error, Result, C64};

/// `⊕ [[0, 1], [−1, 0]]` over `modes` modes.
pub fn omega(modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

/// A symplectic matrix partitioned into `m1` data modes followed by `m2`
/// ancilla modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMap {
    s: DMatrix<f64>,
    m1: usize,
    m2: usize,
}

impl SymplecticMap {
    pub fn new(s: DMatrix<f64>, m1: usize, m2: usize) -> Result<Self> {
        let n = 2 * (m1 + m2);
        if m1 == 0 || s.nrows() != n || s.ncols() != n {
            return Err(Error::Shape(format!(
                "{}x{} matrix for {m1} data and {m2} ancilla modes",
                s.nrows(),
                s.ncols()
            )));
        }
        let w = omega(m1 + m2);
        let scale = s.abs().max().max(1.0).powi(2);
        let defect = (&s * &w * s.transpose() - &w).abs().max();
        if defect > 1e-10 * scale {
            return Err(Error::Transform(format!("matrix is not symplectic (defect {defect:.2e})")));
        }
        let det = s.determinant();
        if (det.abs() - 1.0).abs() > 1e-8 {
            return Err(Error::Transform(format!("determinant {det} is not unit")));
        }
        Ok(SymplecticMap { s, m1, m2 })
    }

    pub fn identity(modes: usize) -> Self {
        SymplecticMap {
            s: DMatrix::identity(2 * modes, 2 * modes),
            m1: modes,
            m2: 0,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn data_modes(&self) -> usize {
        self.m1
    }

    pub fn ancilla_modes(&self) -> usize {
        self.m2
    }

    fn block(&self, r: usize, c: usize) -> DMatrix<f64> {
        let (r0, nr) = if r == 0 { (0, 2 * self.m1) } else { (2 * self.m1, 2 * self.m2) };
        let (c0, nc) = if c == 0 { (0, 2 * self.m1) } else { (2 * self.m1, 2 * self.m2) };
        self.s.view((r0, c0), (nr, nc)).into_owned()
    }

    pub fn s11(&self) -> DMatrix<f64> {
        self.block(0, 0)
    }

    pub fn s12(&self) -> DMatrix<f64> {
        self.block(0, 1)
    }

    pub fn s21(&self) -> DMatrix<f64> {
        self.block(1, 0)
    }

    pub fn s22(&self) -> DMatrix<f64> {
        self.block(1, 1)
    }

    /// Same matrix with a different data/ancilla split.
    pub fn repartition(&self, m1: usize) -> Result<Self> {
        let total = self.m1 + self.m2;
        if m1 == 0 || m1 > total {
            return Err(Error::Shape(format!("{m1} data modes out of {total}")));
        }
        Ok(SymplecticMap {
            s: self.s.clone(),
            m1,
            m2: total - m1,
        })
    }

    /// `[[cI, −sI], [sI, cI]]` on one data and one ancilla mode.
    pub fn beamsplitter(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[c, 0.0, -s, 0.0, 0.0, c, 0.0, -s, s, 0.0, c, 0.0, 0.0, s, 0.0, c],
        );
        SymplecticMap { s: m, m1: 1, m2: 1 }
    }

    /// `[[cosh r I, sinh r Z], [sinh r Z, cosh r I]]` on one data and one
    /// ancilla mode.
    pub fn two_mode_squeezer(r: f64) -> Self {
        let (ch, sh) = (r.cosh(), r.sinh());
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[ch, 0.0, sh, 0.0, 0.0, ch, 0.0, -sh, sh, 0.0, ch, 0.0, 0.0, -sh, 0.0, ch],
        );
        SymplecticMap { s: m, m1: 1, m2: 1 }
    }

    /// `diag(e^{−r}, e^{r})`.
    pub fn squeezer(r: f64) -> Self {
        SymplecticMap {
            s: DMatrix::from_diagonal(&DVector::from_vec(vec![(-r).exp(), r.exp()])),
            m1: 1,
            m2: 0,
        }
    }

    /// `diag(√(a/b), √(b/a))`, which sends the ellipse with semi-axes `a`
    /// and `b` to the circle of radius `√(ab)`.
    pub fn ellipse_to_circle(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Transform(format!("ellipse axes ({a}, {b}) must be positive")));
        }
        Ok(SymplecticMap::squeezer(0.5 * (b / a).ln()))
    }

    /// `[[cos φ, sin φ], [−sin φ, cos φ]]`.
    pub fn phase_rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        SymplecticMap {
            s: DMatrix::from_row_slice(2, 2, &[c, s, -s, c]),
            m1: 1,
            m2: 0,
        }
    }

    /// Quadrature action of `exp(−i q₁ p₂)`: `p₁ → p₁ − p₂`, `q₂ → q₂ + q₁`.
    pub fn sum_gate() -> Self {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        );
        SymplecticMap { s: m, m1: 2, m2: 0 }
    }

    /// Quarter-turn on the second mode after the SUM gate. Sends real
    /// displacements `(a, 0, b, 0)` to `(a, b, −a, b)`, so the first mode
    /// carries `a + ib`.
    pub fn reduction_2d() -> Self {
        let rot = SymplecticMap::identity(1).direct_sum(&SymplecticMap::phase_rotation(std::f64::consts::FRAC_PI_2));
        rot.compose(&SymplecticMap::sum_gate()).expect("same size")
    }

    /// Block-diagonal sum; data modes of `self` come first.
    pub fn direct_sum(&self, other: &SymplecticMap) -> Self {
        let (a, b) = (self.s.nrows(), other.s.nrows());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.s);
        m.view_mut((a, a), (b, b)).copy_from(&other.s);
        SymplecticMap {
            s: m,
            m1: (a + b) / 2,
            m2: 0,
        }
    }

    /// A one-data, one-ancilla map applied to each of `m` pairs, with the
    /// `m` data modes first and the `m` ancillas after.
    pub fn pairwise(two_mode: &SymplecticMap, m: usize) -> Result<Self> {
        if two_mode.m1 != 1 || two_mode.m2 != 1 {
            return Err(Error::Shape("pairwise needs a one-data, one-ancilla map".into()));
        }
        let mut s = DMatrix::zeros(4 * m, 4 * m);
        for k in 0..m {
            let idx = [2 * k, 2 * k + 1, 2 * (m + k), 2 * (m + k) + 1];
            for (i, &r) in idx.iter().enumerate() {
                for (j, &c) in idx.iter().enumerate() {
                    s[(r, c)] = two_mode.s[(i, j)];
                }
            }
        }
        Ok(SymplecticMap { s, m1: m, m2: m })
    }

    /// `self · other`, keeping the partition of `self`.
    pub fn compose(&self, other: &SymplecticMap) -> Result<Self> {
        if self.s.nrows() != other.s.nrows() {
            return Err(Error::Shape("composed maps act on different mode counts".into()));
        }
        Ok(SymplecticMap {
            s: &self.s * &other.s,
            m1: self.m1,
            m2: self.m2,
        })
    }

    /// `S⁻¹ = −Ω Sᵀ Ω`.
    pub fn inverse(&self) -> Self {
        let w = omega(self.m1 + self.m2);
        SymplecticMap {
            s: -(&w * self.s.transpose() * &w),
            m1: self.m1,
            m2: self.m2,
        }
    }

    /// `S₁₁ − S₁₂ S₂₂⁻¹ S₂₁`, or `S` itself without ancillas.
    pub fn data_matrix(&self) -> Result<DMatrix<f64>> {
        if self.m2 == 0 {
            return Ok(self.s.clone());
        }
        let s22 = self.s22();
        if s22.determinant().abs() < 1e-12 {
            return Err(Error::Transform("S₂₂ is singular".into()));
        }
        let s22_inv = s22.try_inverse().expect("nonzero determinant");
        Ok(self.s11() - self.s12() * s22_inv * self.s21())
    }
}

/// First and second moments of a probe, `r = ⟨x̂⟩` and
/// `V = ½⟨{Δx̂, Δx̂ᵀ}⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianProbe {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianProbe {
    /// Fails unless `V + iΩ/2 ⪰ 0`.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = covariance.nrows();
        if n % 2 != 0 || covariance.ncols() != n || mean.len() != n {
            return Err(Error::Shape(format!(
                "covariance {:?} with mean of length {}",
                covariance.shape(),
                mean.len()
            )));
        }
        if (&covariance - covariance.transpose()).abs().max() > 1e-9 {
            return Err(Error::Contract("covariance is not symmetric".into()));
        }
        let w = omega(n / 2);
        let h = CMatrix::from_fn(n, n, |i, j| C64::new(covariance[(i, j)], 0.5 * w[(i, j)]));
        let min = HermitianEigen::new(&h).values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(Error::Contract(format!(
                "covariance violates the uncertainty principle (eigenvalue {min:.3e})"
            )));
        }
        Ok(GaussianProbe { mean, covariance })
    }

    pub fn vacuum(modes: usize) -> Self {
        GaussianProbe {
            mean: DVector::zeros(2 * modes),
            covariance: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
        }
    }

    /// Single-mode squeezed vacuum `diag(e^{−2r}, e^{2r})/2`.
    pub fn squeezed(r: f64) -> Self {
        GaussianProbe {
            mean: DVector::zeros(2),
            covariance: DMatrix::from_diagonal(&DVector::from_vec(vec![0.5 * (-2.0 * r).exp(), 0.5 * (2.0 * r).exp()])),
        }
    }

    /// Squeezed vacuum with `sinh² r = N_S`.
    pub fn from_budget(n_s: f64) -> Self {
        GaussianProbe::squeezed(n_s.sqrt().asinh())
    }

    /// Moments of `state` restricted to the listed qumodes.
    pub fn from_state(state: &QuantumState, modes: &[usize]) -> Result<Self> {
        let (mean, covariance) = quadrature_covariance(state, modes)?;
        GaussianProbe::new(mean, covariance)
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    /// `½(Tr V − M) + ½|r|²`.
    pub fn energy(&self) -> f64 {
        0.5 * (self.covariance.trace() - self.modes() as f64) + 0.5 * self.mean.norm_squared()
    }

    /// Moments of the two probes side by side.
    pub fn direct_sum(&self, other: &GaussianProbe) -> Self {
        let (a, b) = (self.mean.len(), other.mean.len());
        let mut cov = DMatrix::zeros(a + b, a + b);
        cov.view_mut((0, 0), (a, a)).copy_from(&self.covariance);
        cov.view_mut((a, a), (b, b)).copy_from(&other.covariance);
        let mean = DVector::from_iterator(a + b, self.mean.iter().chain(other.mean.iter()).copied());
        GaussianProbe { mean, covariance: cov }
    }
}

/// Means and symmetrised covariance of `(q, p)` on each listed qumode.
pub fn quadrature_covariance(state: &QuantumState, modes: &[usize]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let layout = state.layout();
    let mut ops: Vec<(usize, CMatrix)> = Vec::with_capacity(2 * modes.len());
    for &m in modes {
        let d = layout.expect_qumode(m)?;
        ops.push((m, position(d)?.into_matrix()));
        ops.push((m, momentum(d)?.into_matrix()));
    }
    let n = ops.len();
    let mut mean = DVector::zeros(n);
    for (i, (m, x)) in ops.iter().enumerate() {
        mean[i] = state.local_expectation(&[*m], x)?;
    }
    let mut cov = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let (mi, xi) = &ops[i];
            let (mj, xj) = &ops[j];
            let second = if mi == mj {
                let anti = (xi * xj + xj * xi) * C64::new(0.5, 0.0);
                state.local_expectation(&[*mi], &anti)?
            } else {
                state.local_expectation(&[*mi, *mj], &xi.kronecker(xj))?
            };
            let c = second - mean[i] * mean[j];
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    Ok((mean, cov))
}

/// Maps each atom to `x' = A⁻¹ x` with `A = S₁₁ − S₁₂ S₂₂⁻¹ S₂₁`, so that
/// `P'(x') ∝ P(A x')`. Weights are unchanged.
pub fn transform_distribution(
    ensemble: &LabeledDisplacementEnsemble,
    map: &SymplecticMap,
) -> Result<LabeledDisplacementEnsemble> {
    if ensemble.modes() != map.data_modes() {
        return Err(Error::Shape(format!(
            "{}-mode ensemble under a map with {} data modes",
            ensemble.modes(),
            map.data_modes()
        )));
    }
    let a = map.data_matrix()?;
    if a.determinant().abs() < 1e-12 {
        return Err(Error::Transform("reduced data matrix is singular".into()));
    }
    let a_inv = a.try_inverse().expect("nonzero determinant");
    ensemble.map_atoms(ensemble.modes(), |x| (&a_inv * DVector::from_column_slice(x)).as_slice().to_vec())
}

/// Budgets on either side of a transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBudget {
    /// Energy of the probe for the original task.
    pub n_s: f64,
    /// Energy of the probe `V'` for the transformed task.
    pub n_s_prime: f64,
}

/// The original-task probe is the data marginal of `S(V' ⊕ I/2)Sᵀ`, i.e.
/// `V = S₁₁V'S₁₁ᵀ + ½S₁₂S₁₂ᵀ` with mean `S₁₁ r'`.
pub fn transform_energy(map: &SymplecticMap, probe: &GaussianProbe) -> Result<EnergyBudget> {
    if probe.modes() != map.data_modes() {
        return Err(Error::Shape(format!(
            "{}-mode probe under a map with {} data modes",
            probe.modes(),
            map.data_modes()
        )));
    }
    let s11 = map.s11();
    let mut v = &s11 * &probe.covariance * s11.transpose();
    if map.ancilla_modes() > 0 {
        let s12 = map.s12();
        v += &s12 * s12.transpose() * 0.5;
    }
    let mean = &s11 * &probe.mean;
    let original = GaussianProbe { mean, covariance: v };
    Ok(EnergyBudget {
        n_s: original.energy(),
        n_s_prime: probe.energy(),
    })
}

/// `N'_S = c² N_S + M max(c² − 1, 0)` for data rescaled by `c`.
pub fn lemma1_check(c: f64, n_s: f64, modes: usize) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Contract(format!("scale {c} must be positive")));
    }
    let c2 = c * c;
    Ok(c2 * n_s + modes as f64 * (c2 - 1.0).max(0.0))
}

/// Outcome of folding a two-mode real task onto one complex mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub map: SymplecticMap,
    /// Transformed two-mode ensemble, atoms `(a, b, −a, b)`.
    pub reduced: LabeledDisplacementEnsemble,
    /// First-mode marginal, atoms `(a, b)`.
    pub effective: LabeledDisplacementEnsemble,
}

impl Reduction {
    /// Budgets when `probe` runs on the first mode and the second starts in
    /// vacuum.
    pub fn energy(&self, probe: &GaussianProbe) -> Result<EnergyBudget> {
        if probe.modes() != 1 {
            return Err(Error::Shape("the reduced probe is single-mode".into()));
        }
        transform_energy(&self.map, &probe.direct_sum(&GaussianProbe::vacuum(1)))
    }
}

/// Sends a two-mode ensemble with atoms `(a, 0, b, 0)` to one whose first
/// mode carries `a + ib`.
pub fn reduce_2d_real_to_1d_complex(ensemble: &LabeledDisplacementEnsemble) -> Result<Reduction> {
    if ensemble.modes() != 2 {
        return Err(Error::Transform(format!("expected two modes, got {}", ensemble.modes())));
    }
    if let Some((_, _, a)) = ensemble.iter().find(|(_, _, a)| a.x[1] != 0.0 || a.x[3] != 0.0) {
        return Err(Error::Transform(format!("atom {:?} has imaginary components", a.x)));
    }
    let map = SymplecticMap::reduction_2d();
    let reduced = transform_distribution(ensemble, &map)?;
    let effective = reduced.map_atoms(1, |x| x[..2].to_vec())?;
    Ok(Reduction {
        map,
        reduced,
        effective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::layout::SubsystemLayout;
    use crate::fock::operator::{gaussian_op, GaussianGate};
    use crate::tasks::{make_task, Atom, TaskSpec};

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).abs().max() < tol
    }

    #[test]
    fn constructors_are_symplectic() {
        let maps = [
            SymplecticMap::beamsplitter(0.7),
            SymplecticMap::two_mode_squeezer(0.4),
            SymplecticMap::squeezer(-0.3),
            SymplecticMap::ellipse_to_circle(0.5, 2.0).unwrap(),
            SymplecticMap::phase_rotation(1.1),
            SymplecticMap::sum_gate(),
            SymplecticMap::reduction_2d(),
            SymplecticMap::pairwise(&SymplecticMap::beamsplitter(0.3), 3).unwrap(),
        ];
        for m in maps {
            let checked = SymplecticMap::new(m.matrix().clone(), m.data_modes(), m.ancilla_modes()).unwrap();
            let back = checked.compose(&checked.inverse()).unwrap();
            assert!(close(back.matrix(), &DMatrix::identity(back.matrix().nrows(), back.matrix().nrows()), 1e-12));
        }
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(SymplecticMap::new(swap, 1, 0), Err(Error::Transform(_))));
        assert!(matches!(SymplecticMap::new(DMatrix::identity(3, 3), 1, 0), Err(Error::Shape(_))));
    }

    #[test]
    fn gate_matrices_match_fock_action() {
        // ⟨U† x̂ U⟩ on coherent inputs gives S acting on the mean vector
        let d = 18;
        let layout = SubsystemLayout::modes_then_qubits(2, d, 0).unwrap();
        let x0 = [0.3, -0.2, 0.1, 0.25];
        let input = QuantumState::vacuum(layout.clone())
            .evolve(&crate::fock::multimode_displacement(&x0, &layout).unwrap())
            .unwrap();
        let r0 = quadrature_covariance(&input, &[0, 1]).unwrap().0;
        let cases = [
            (GaussianGate::Beamsplitter(0.6), SymplecticMap::beamsplitter(0.6)),
            (GaussianGate::TwoModeSqueezer(0.3), SymplecticMap::two_mode_squeezer(0.3)),
            (GaussianGate::Sum, SymplecticMap::sum_gate()),
        ];
        for (gate, map) in cases {
            let out = input.evolve(&gaussian_op(gate, &layout, &[0, 1]).unwrap()).unwrap();
            let r = quadrature_covariance(&out, &[0, 1]).unwrap().0;
            let want = map.matrix() * &r0;
            assert!((r - want).abs().max() < 1e-6, "{gate:?}");
        }
        let single = SubsystemLayout::single_mode(d).unwrap();
        let coh = QuantumState::coherent(C64::new(0.3, 0.2), d).unwrap();
        let out = coh.evolve(&gaussian_op(GaussianGate::Squeezer(0.25), &single, &[0]).unwrap()).unwrap();
        let r = quadrature_covariance(&out, &[0]).unwrap().0;
        let r0 = quadrature_covariance(&coh, &[0]).unwrap().0;
        assert!((r - SymplecticMap::squeezer(0.25).matrix() * r0).abs().max() < 1e-6);
    }

    #[test]
    fn identity_leaves_atoms_alone() {
        let task = make_task(&TaskSpec::CircleVsVacuum { epsilon: 0.7, atoms: 8 }).unwrap();
        assert_eq!(transform_distribution(&task, &SymplecticMap::identity(1)).unwrap(), task);
        assert!(matches!(
            transform_distribution(&task, &SymplecticMap::identity(2)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn beamsplitter_scales_atoms_by_cosine() {
        let theta = 0.5f64;
        let task = make_task(&TaskSpec::CircleVsVacuum { epsilon: 1.0, atoms: 8 }).unwrap();
        let out = transform_distribution(&task, &SymplecticMap::beamsplitter(theta)).unwrap();
        for ((_, _, a), (_, _, b)) in task.iter().zip(out.iter()) {
            for k in 0..2 {
                assert!((b.x[k] - theta.cos() * a.x[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ellipse_becomes_circle() {
        let (a, b) = (0.4, 1.6);
        let atoms: Vec<Atom> = (0..12)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 12.0;
                Atom {
                    x: vec![a * t.cos(), b * t.sin()],
                    weight: 1.0 / 12.0,
                }
            })
            .collect();
        let origin = vec![Atom {
            x: vec![0.0, 0.0],
            weight: 1.0,
        }];
        let task = LabeledDisplacementEnsemble::new(1, vec![0.5, 0.5], vec![origin, atoms]).unwrap();
        let out = transform_distribution(&task, &SymplecticMap::ellipse_to_circle(a, b).unwrap()).unwrap();
        for a1 in out.atoms(1) {
            assert!((a1.x[0].hypot(a1.x[1]) - (a * b).sqrt()).abs() < 1e-12);
        }
        assert_eq!(out.atoms(0)[0].x, vec![0.0, 0.0]);
    }

    #[test]
    fn singular_ancilla_block_is_rejected() {
        let bs = SymplecticMap::beamsplitter(std::f64::consts::FRAC_PI_2);
        let task = make_task(&TaskSpec::BinaryPmEpsilon { epsilon: 0.3 }).unwrap();
        assert!(matches!(transform_distribution(&task, &bs), Err(Error::Transform(_))));
    }

    #[test]
    fn transform_then_inverse_restores_atoms() {
        let task = make_task(&TaskSpec::RfCircle2d {
            epsilon: 0.8,
            aspect: 1.0,
            delta_phi: std::f64::consts::FRAC_PI_2,
            atoms: 10,
        })
        .unwrap();
        let map = SymplecticMap::reduction_2d();
        let there = transform_distribution(&task, &map).unwrap();
        let back = transform_distribution(&there, &map.inverse()).unwrap();
        for ((_, _, a), (_, _, b)) in task.iter().zip(back.iter()) {
            for k in 0..4 {
                assert!((a.x[k] - b.x[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn beamsplitter_and_squeezer_budgets() {
        let theta = 0.6f64;
        let probe = GaussianProbe::from_budget(1.3);
        let e = transform_energy(&SymplecticMap::beamsplitter(theta), &probe).unwrap();
        assert!((e.n_s_prime - 1.3).abs() < 1e-12);
        assert!((e.n_s_prime - e.n_s / theta.cos().powi(2)).abs() < 1e-12);
        let r = 0.45f64;
        let e = transform_energy(&SymplecticMap::two_mode_squeezer(r), &probe).unwrap();
        let ch2 = r.cosh().powi(2);
        assert!((e.n_s - (ch2 * e.n_s_prime + ch2 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn reduction_sends_real_pairs_to_complex_amplitudes() {
        let m = SymplecticMap::reduction_2d();
        let sts = m.matrix().transpose() * m.matrix();
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[2.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 2.0],
        );
        assert!(close(&sts, &want, 1e-14));

        let eps = 0.9;
        let task = make_task(&TaskSpec::RfCircle2d {
            epsilon: eps,
            aspect: 1.0,
            delta_phi: std::f64::consts::FRAC_PI_2,
            atoms: 16,
        })
        .unwrap();
        let red = reduce_2d_real_to_1d_complex(&task).unwrap();
        for ((_, _, a), (_, _, b)) in task.iter().zip(red.reduced.iter()) {
            let want = [a.x[0], a.x[2], -a.x[0], a.x[2]];
            for k in 0..4 {
                assert!((b.x[k] - want[k]).abs() < 1e-14);
            }
        }
        assert_eq!(red.effective.atoms(0)[0].x, vec![0.0, 0.0]);
        for a in red.effective.atoms(1) {
            assert!((a.x[0].hypot(a.x[1]) - eps).abs() < 1e-12);
        }
        let bad = make_task(&TaskSpec::CircleVsVacuum { epsilon: 0.5, atoms: 4 }).unwrap();
        assert!(matches!(reduce_2d_real_to_1d_complex(&bad), Err(Error::Transform(_))));
    }

    #[test]
    fn reduction_energy_matches_the_moment_formula() {
        // N = N' + ½⟨q₁² + p₂² + {q₁,q₂} − {p₁,p₂}⟩ for any two-mode V'
        let cov = DMatrix::from_row_slice(
            4,
            4,
            &[0.9, 0.1, 0.2, 0.0, 0.1, 0.7, 0.05, -0.15, 0.2, 0.05, 0.8, 0.1, 0.0, -0.15, 0.1, 0.6],
        );
        let probe = GaussianProbe::new(DVector::zeros(4), cov.clone()).unwrap();
        let e = transform_energy(&SymplecticMap::reduction_2d(), &probe).unwrap();
        let extra = 0.5 * (cov[(0, 0)] + cov[(3, 3)] + 2.0 * cov[(0, 2)] - 2.0 * cov[(1, 3)]);
        assert!((e.n_s - e.n_s_prime - extra).abs() < 1e-12);

        // single-photon probe on the complex mode: N' = 1, N = 2
        let one = QuantumState::fock_superposition(&[(1, C64::new(1.0, 0.0))], 10).unwrap();
        let probe = GaussianProbe::from_state(&one, &[0]).unwrap();
        let task = make_task(&TaskSpec::RfCircle2d {
            epsilon: 1.0,
            aspect: 1.0,
            delta_phi: std::f64::consts::FRAC_PI_2,
            atoms: 4,
        })
        .unwrap();
        let e = reduce_2d_real_to_1d_complex(&task).unwrap().energy(&probe).unwrap();
        assert!((e.n_s_prime - 1.0).abs() < 1e-12);
        assert!((e.n_s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn probe_validation() {
        assert!(GaussianProbe::new(DVector::zeros(2), DMatrix::identity(2, 2) * 0.4).is_err());
        let p = GaussianProbe::from_budget(0.8);
        assert!((p.energy() - 0.8).abs() < 1e-12);
        assert_eq!(GaussianProbe::vacuum(3).energy(), 0.0);
    }

    #[test]
    fn state_moments_of_a_squeezed_vacuum() {
        let d = 60;
        let r: f64 = 0.3;
        let layout = SubsystemLayout::single_mode(d).unwrap();
        let s = QuantumState::vacuum(layout.clone())
            .evolve(&gaussian_op(GaussianGate::Squeezer(r), &layout, &[0]).unwrap())
            .unwrap();
        let probe = GaussianProbe::from_state(&s, &[0]).unwrap();
        assert!(close(&probe.covariance, &GaussianProbe::squeezed(r).covariance, 1e-10));
        assert!((probe.energy() - r.sinh().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn lemma1_budgets() {
        assert_eq!(lemma1_check(1.0, 0.7, 2).unwrap(), 0.7);
        assert_eq!(lemma1_check(0.5, 1.0, 1).unwrap(), 0.25);
        assert_eq!(lemma1_check(2.0, 1.0, 1).unwrap(), 7.0);
        assert!(matches!(lemma1_check(0.0, 1.0, 1), Err(Error::Contract(_))));
    }

    #[test]
    fn lemma1_budget_agrees_with_pairwise_transforms() {
        // beamsplitters give c = cos θ < 1, two-mode squeezers c = cosh r > 1
        let m = 2;
        let per_mode = GaussianProbe::from_budget(0.45);
        let probe = per_mode.direct_sum(&per_mode);
        let maps = [
            (0.5f64, SymplecticMap::beamsplitter(0.5f64.acos())),
            (0.8, SymplecticMap::beamsplitter(0.8f64.acos())),
            (1.5, SymplecticMap::two_mode_squeezer(1.5f64.acosh())),
            (2.0, SymplecticMap::two_mode_squeezer(2.0f64.acosh())),
        ];
        for (c, two_mode) in maps {
            let e = transform_energy(&SymplecticMap::pairwise(&two_mode, m).unwrap(), &probe).unwrap();
            assert!((lemma1_check(c, e.n_s_prime, m).unwrap() - e.n_s).abs() < 1e-12, "c = {c}");
        }
    }
}
