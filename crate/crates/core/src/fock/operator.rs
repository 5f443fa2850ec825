use crate::fock::kernel::DisplacementKernel;
use crate::fock::layout::SubsystemLayout;
use crate::fock::linalg::{expm_hermitian, max_abs};
use crate::fock::Tolerances;
use crate::{CMatrix, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    Hermitian,
    General,
}

/// A dense operator on a declared subsystem layout.
#[derive(Clone, Debug)]
pub struct Operator {
    layout: SubsystemLayout,
    matrix: CMatrix,
    kind: OperatorKind,
}

impl Operator {
    /// Wraps a matrix, verifying the declared kind with default tolerances.
    pub fn new(layout: SubsystemLayout, matrix: CMatrix, kind: OperatorKind) -> Result<Self> {
        Self::with_tolerances(layout, matrix, kind, &Tolerances::default())
    }

    pub fn with_tolerances(
        layout: SubsystemLayout,
        matrix: CMatrix,
        kind: OperatorKind,
        tol: &Tolerances,
    ) -> Result<Self> {
        if matrix.nrows() != layout.dim() || matrix.ncols() != layout.dim() {
            return Err(Error::Shape(format!(
                "operator is {}x{} but layout has dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                layout.dim()
            )));
        }
        let op = Operator {
            layout,
            matrix,
            kind,
        };
        match kind {
            OperatorKind::Hermitian => {
                let defect = op.hermiticity_defect();
                if defect >= tol.hermiticity {
                    return Err(Error::Contract(format!(
                        "operator flagged Hermitian deviates by {defect:.3e}"
                    )));
                }
            }
            OperatorKind::Unitary => {
                let defect = op.unitarity_defect();
                if defect >= tol.unitarity {
                    return Err(Error::Contract(format!(
                        "operator flagged unitary deviates by {defect:.3e}"
                    )));
                }
            }
            OperatorKind::General => {}
        }
        Ok(op)
    }

    pub(crate) fn unchecked(layout: SubsystemLayout, matrix: CMatrix, kind: OperatorKind) -> Self {
        Operator {
            layout,
            matrix,
            kind,
        }
    }

    pub fn identity(layout: &SubsystemLayout) -> Self {
        let n = layout.dim();
        Operator::unchecked(layout.clone(), CMatrix::identity(n, n), OperatorKind::Unitary)
    }

    /// Lifts `local`, acting on `targets` (in the listed order), to the full layout.
    pub fn embed(
        layout: &SubsystemLayout,
        targets: &[usize],
        local: &CMatrix,
        kind: OperatorKind,
    ) -> Result<Self> {
        let mut dims = Vec::with_capacity(targets.len());
        for (k, &t) in targets.iter().enumerate() {
            dims.push(layout.entry(t)?.dim);
            if targets[..k].contains(&t) {
                return Err(Error::Shape(format!("repeated target subsystem {t}")));
            }
        }
        let local_dim: usize = dims.iter().product();
        if local.nrows() != local_dim || local.ncols() != local_dim {
            return Err(Error::Shape(format!(
                "local operator is {}x{}, targets need {local_dim}",
                local.nrows(),
                local.ncols()
            )));
        }
        let offsets: Vec<usize> = (0..local_dim)
            .map(|mut li| {
                let mut off = 0;
                for k in (0..targets.len()).rev() {
                    off += (li % dims[k]) * layout.stride(targets[k]);
                    li /= dims[k];
                }
                off
            })
            .collect();
        let n = layout.dim();
        let mut full = CMatrix::zeros(n, n);
        for base in 0..n {
            if targets.iter().any(|&t| layout.digit(base, t) != 0) {
                continue;
            }
            for (r, &ro) in offsets.iter().enumerate() {
                for (c, &co) in offsets.iter().enumerate() {
                    let v = local[(r, c)];
                    if v != C64::new(0.0, 0.0) {
                        full[(base + ro, base + co)] = v;
                    }
                }
            }
        }
        Ok(Operator::unchecked(layout.clone(), full, kind))
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// `max |U†U − I|` restricted to basis states whose qumodes all sit below
    /// the top two Fock levels.
    pub fn unitarity_defect(&self) -> f64 {
        let keep = self.non_leaking_indices();
        let utu = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for &i in &keep {
            for &j in &keep {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((utu[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub(crate) fn non_leaking_indices(&self) -> Vec<usize> {
        let modes: Vec<(usize, usize)> = self
            .layout
            .qumodes()
            .into_iter()
            .map(|m| (m, self.layout.entries()[m].dim))
            .collect();
        (0..self.layout.dim())
            .filter(|&i| modes.iter().all(|&(m, d)| self.layout.digit(i, m) + 2 < d))
            .collect()
    }

    pub fn adjoint(&self) -> Operator {
        Operator::unchecked(self.layout.clone(), self.matrix.adjoint(), self.kind)
    }

    /// `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.layout != other.layout {
            return Err(Error::Shape("operators act on different layouts".into()));
        }
        let kind = match (self.kind, other.kind) {
            (OperatorKind::Unitary, OperatorKind::Unitary) => OperatorKind::Unitary,
            _ => OperatorKind::General,
        };
        Ok(Operator::unchecked(self.layout.clone(), &self.matrix * &other.matrix, kind))
    }
}

fn single_mode(d: usize) -> Result<SubsystemLayout> {
    if d < 2 {
        return Err(Error::InvalidCutoff(d));
    }
    SubsystemLayout::single_mode(d)
}

fn annihilation_matrix(d: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Truncated annihilation operator, `⟨n−1|a|n⟩ = √n`.
pub fn annihilation(d: usize) -> Result<Operator> {
    Ok(Operator::unchecked(single_mode(d)?, annihilation_matrix(d), OperatorKind::General))
}

pub fn creation(d: usize) -> Result<Operator> {
    Ok(annihilation(d)?.adjoint())
}

pub fn number(d: usize) -> Result<Operator> {
    let layout = single_mode(d)?;
    let m = CMatrix::from_fn(d, d, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) });
    Ok(Operator::unchecked(layout, m, OperatorKind::Hermitian))
}

/// `q = (a + a†)/√2`.
pub fn position(d: usize) -> Result<Operator> {
    let a = annihilation_matrix(d);
    let q = (&a + a.adjoint()).scale(std::f64::consts::FRAC_1_SQRT_2);
    Ok(Operator::unchecked(single_mode(d)?, q, OperatorKind::Hermitian))
}

/// `p = (a − a†)/(√2 i)`.
pub fn momentum(d: usize) -> Result<Operator> {
    let a = annihilation_matrix(d);
    let p = (&a - a.adjoint()) * C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
    Ok(Operator::unchecked(single_mode(d)?, p, OperatorKind::Hermitian))
}

/// Photon-number parity `diag((−1)^n)`.
pub fn parity(d: usize) -> Result<Operator> {
    let layout = single_mode(d)?;
    let m = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(Operator::unchecked(layout, m, OperatorKind::Hermitian))
}

/// Truncated displacement `D(α) = exp(α a† − α* a)`.
pub fn displacement(alpha: C64, d: usize) -> Result<Operator> {
    let layout = single_mode(d)?;
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::Numeric(format!("displacement amplitude {alpha}")));
    }
    if alpha.norm_sqr() > d as f64 / 4.0 {
        log::warn!(
            "|alpha|^2 = {:.3} exceeds cutoff/4 = {:.2}; expect truncation leakage",
            alpha.norm_sqr(),
            d as f64 / 4.0
        );
    }
    let m = DisplacementKernel::for_cutoff(d).matrix(alpha);
    Ok(Operator::unchecked(layout, m, OperatorKind::Unitary))
}

/// `⊗_m D(x_{2m} + i x_{2m+1})` over the qumodes of `layout`, identity on qubits.
///
/// `x` stores amplitude components `(Re α, Im α)` per qumode, so a mode
/// displaced by `(q, p)` has `⟨q̂⟩` shifted by `√2 q`.
pub fn multimode_displacement(x: &[f64], layout: &SubsystemLayout) -> Result<Operator> {
    let modes = layout.qumodes();
    if x.len() != 2 * modes.len() {
        return Err(Error::Shape(format!(
            "displacement vector has length {}, layout has {} qumodes",
            x.len(),
            modes.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite displacement".into()));
    }
    let mut op = Operator::identity(layout);
    for (k, &m) in modes.iter().enumerate() {
        let alpha = C64::new(x[2 * k], x[2 * k + 1]);
        if alpha.norm() == 0.0 {
            continue;
        }
        let d = layout.entries()[m].dim;
        let local = DisplacementKernel::for_cutoff(d).matrix(alpha);
        let lifted = Operator::embed(layout, &[m], &local, OperatorKind::Unitary)?;
        op = lifted.compose(&op)?;
    }
    Ok(op)
}

/// Quadratic Gaussian gates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GaussianGate {
    /// `exp(r/2 (a² − a†²))`, squeezing `q` for `r > 0`.
    Squeezer(f64),
    /// Mixes two modes; quadratures transform as `[[cI, −sI], [sI, cI]]`.
    Beamsplitter(f64),
    /// Quadratures transform as `[[cosh r I, sinh r Z], [sinh r Z, cosh r I]]`.
    TwoModeSqueezer(f64),
    /// `exp(−i q₁ p₂)`.
    Sum,
}

impl GaussianGate {
    pub fn modes(&self) -> usize {
        match self {
            GaussianGate::Squeezer(_) => 1,
            _ => 2,
        }
    }

    /// Hermitian `H` with gate `= exp(−i H)` on the local target space.
    fn hamiltonian(&self, dims: &[usize]) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        match *self {
            GaussianGate::Squeezer(r) => {
                let a = annihilation_matrix(dims[0]);
                let a2 = &a * &a;
                (&a2 - a2.adjoint()) * (i * (r / 2.0))
            }
            GaussianGate::Beamsplitter(theta) => {
                let (a, b) = two_mode_ladders(dims);
                // exp(θ(a b† − a† b))
                let g = &a * b.adjoint() - a.adjoint() * &b;
                g * (i * theta)
            }
            GaussianGate::TwoModeSqueezer(r) => {
                let (a, b) = two_mode_ladders(dims);
                // exp(r(a† b† − a b))
                let g = a.adjoint() * b.adjoint() - &a * &b;
                g * (i * r)
            }
            GaussianGate::Sum => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let a1 = annihilation_matrix(dims[0]);
                let a2 = annihilation_matrix(dims[1]);
                let q1 = (&a1 + a1.adjoint()).scale(s);
                let p2 = (&a2 - a2.adjoint()) * C64::new(0.0, -s);
                q1.kronecker(&p2)
            }
        }
    }
}

fn two_mode_ladders(dims: &[usize]) -> (CMatrix, CMatrix) {
    let a = annihilation_matrix(dims[0]).kronecker(&CMatrix::identity(dims[1], dims[1]));
    let b = CMatrix::identity(dims[0], dims[0]).kronecker(&annihilation_matrix(dims[1]));
    (a, b)
}

/// Builds a Gaussian gate as the exponential of its quadratic generator.
pub fn gaussian_op(gate: GaussianGate, layout: &SubsystemLayout, targets: &[usize]) -> Result<Operator> {
    if targets.len() != gate.modes() {
        return Err(Error::Shape(format!(
            "{gate:?} needs {} target modes, got {}",
            gate.modes(),
            targets.len()
        )));
    }
    let dims = targets
        .iter()
        .map(|&t| layout.expect_qumode(t))
        .collect::<Result<Vec<_>>>()?;
    let local = expm_hermitian(&gate.hamiltonian(&dims));
    Operator::embed(layout, targets, &local, OperatorKind::Unitary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn annihilation_at_smallest_cutoff() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.matrix()[(0, 1)], c(1.0));
        assert_eq!(a.matrix()[(0, 0)], c(0.0));
        assert_eq!(a.matrix()[(1, 0)], c(0.0));
        assert_eq!(a.matrix()[(1, 1)], c(0.0));
        assert_eq!(annihilation(1).unwrap_err(), Error::InvalidCutoff(1));
    }

    #[test]
    fn number_operator_from_ladder() {
        for d in [2, 5, 17] {
            let a = annihilation(d).unwrap();
            let n = a.adjoint().compose(&a).unwrap();
            for i in 0..d {
                for j in 0..d {
                    let want = if i == j { i as f64 } else { 0.0 };
                    assert!((n.matrix()[(i, j)] - c(want)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn commutator_is_identity_below_top_level() {
        let d = 30;
        let a = annihilation(d).unwrap().into_matrix();
        let comm = &a * a.adjoint() - a.adjoint() * &a;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j && i < d - 1 { 1.0 } else { 0.0 };
                let got = comm[(i, j)];
                if i == d - 1 && j == d - 1 {
                    assert!((got - c(-(d as f64 - 1.0))).norm() < 1e-12);
                } else {
                    assert!((got - c(want)).norm() < 1e-12, "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn quadrature_commutator() {
        let d = 20;
        let q = position(d).unwrap().into_matrix();
        let p = momentum(d).unwrap().into_matrix();
        let comm = &q * &p - &p * &q;
        for i in 0..d - 1 {
            for j in 0..d - 1 {
                let want = if i == j { C64::new(0.0, 1.0) } else { c(0.0) };
                assert!((comm[(i, j)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn displacement_matrix_elements() {
        let d = 40;
        assert!(max_abs(&(displacement(c(0.0), d).unwrap().into_matrix() - CMatrix::identity(d, d))) < 1e-15);
        for &(re, im) in &[(0.3, 0.0), (0.7, -0.9), (1.0, 1.0), (0.0, 1.5)] {
            let alpha = C64::new(re, im);
            let x = alpha.norm_sqr();
            let dm = displacement(alpha, d).unwrap();
            let vac = dm.matrix()[(0, 0)];
            assert!((vac - c((-x / 2.0).exp())).norm() < 1e-10);
            for n in 0..=5usize {
                let laguerre = crate::analytics::laguerre(n, x);
                let want = (-x / 2.0).exp() * laguerre;
                assert!((dm.matrix()[(n, n)] - c(want)).norm() < 1e-8, "n={n} alpha={alpha}");
            }
            assert!(dm.unitarity_defect() < 1e-8);
        }
    }

    #[test]
    fn multimode_displacement_shape_errors() {
        let layout = SubsystemLayout::modes_then_qubits(2, 6, 1).unwrap();
        assert!(matches!(multimode_displacement(&[0.1, 0.2], &layout), Err(Error::Shape(_))));
        let id = multimode_displacement(&[0.0; 4], &layout).unwrap();
        assert!(max_abs(&(id.into_matrix() - CMatrix::identity(72, 72))) < 1e-15);
    }

    #[test]
    fn beamsplitter_at_zero_is_identity() {
        let layout = SubsystemLayout::modes_then_qubits(2, 5, 0).unwrap();
        let b = gaussian_op(GaussianGate::Beamsplitter(0.0), &layout, &[0, 1]).unwrap();
        assert!(max_abs(&(b.into_matrix() - CMatrix::identity(25, 25))) < 1e-14);
        assert!(matches!(
            gaussian_op(GaussianGate::Sum, &layout, &[0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn unitary_flag_is_verified() {
        let layout = SubsystemLayout::single_mode(3).unwrap();
        let m = CMatrix::identity(3, 3).scale(2.0);
        assert!(matches!(
            Operator::new(layout.clone(), m, OperatorKind::Unitary),
            Err(Error::Contract(_))
        ));
        let mut h = CMatrix::zeros(3, 3);
        h[(0, 1)] = c(1.0);
        assert!(matches!(
            Operator::new(layout, h, OperatorKind::Hermitian),
            Err(Error::Contract(_))
        ));
    }
}
