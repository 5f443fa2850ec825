use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fock::kernel::DisplacementKernel;
use crate::fock::linalg::HermitianEigen;
use crate::fock::state::{QuantumState, StateData};
use crate::{Error, Result, C64};

/// Rectangular phase-space grid in quadrature units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerSpec {
    pub q_range: (f64, f64),
    pub p_range: (f64, f64),
    pub resolution: (usize, usize),
}

impl WignerSpec {
    pub fn square(half_width: f64, points: usize) -> Self {
        WignerSpec {
            q_range: (-half_width, half_width),
            p_range: (-half_width, half_width),
            resolution: (points, points),
        }
    }
}

/// Sampled Wigner density `W(q, p)` with `∫ W dq dp = 1`.
#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub spec: WignerSpec,
    /// `values[(i, j)]` is `W(q_i, p_j)`.
    pub values: DMatrix<f64>,
    /// Grid points where the displaced state touched the cutoff.
    pub warnings: Vec<String>,
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    let step = (range.1 - range.0) / (n - 1) as f64;
    (0..n).map(|i| range.0 + step * i as f64).collect()
}

impl WignerGrid {
    pub fn q_values(&self) -> Vec<f64> {
        axis(self.spec.q_range, self.spec.resolution.0)
    }

    pub fn p_values(&self) -> Vec<f64> {
        axis(self.spec.p_range, self.spec.resolution.1)
    }

    fn steps(&self) -> (f64, f64) {
        let (nq, np) = self.spec.resolution;
        (
            (self.spec.q_range.1 - self.spec.q_range.0) / (nq.max(2) - 1) as f64,
            (self.spec.p_range.1 - self.spec.p_range.0) / (np.max(2) - 1) as f64,
        )
    }

    /// Riemann sum `Σ W Δq Δp`.
    pub fn integral(&self) -> f64 {
        let (dq, dp) = self.steps();
        self.values.sum() * dq * dp
    }

    /// `∫ W dp` sampled on the q axis.
    pub fn q_marginal(&self) -> Vec<f64> {
        let (_, dp) = self.steps();
        self.values.row_iter().map(|r| r.sum() * dp).collect()
    }

    /// `∫ W dq` sampled on the p axis.
    pub fn p_marginal(&self) -> Vec<f64> {
        let (dq, _) = self.steps();
        self.values.column_iter().map(|c| c.sum() * dq).collect()
    }

    /// Grid moment `∫ f(q, p) W dq dp`.
    pub fn moment(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let (dq, dp) = self.steps();
        let qs = self.q_values();
        let ps = self.p_values();
        let mut acc = 0.0;
        for (i, &q) in qs.iter().enumerate() {
            for (j, &p) in ps.iter().enumerate() {
                acc += f(q, p) * self.values[(i, j)];
            }
        }
        acc * dq * dp
    }

    /// `q,p,W` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "q,p,W")?;
        let ps = self.p_values();
        for (i, q) in self.q_values().into_iter().enumerate() {
            for (j, p) in ps.iter().enumerate() {
                writeln!(out, "{q},{p},{}", self.values[(i, j)])?;
            }
        }
        Ok(())
    }
}

/// Wigner function of a single-qumode state from displaced parity,
/// `W(q, p) = (1/π) Tr[ρ D(α) Π D(α)†]` with `α = (q + ip)/√2`.
///
/// The state is first embedded at a larger cutoff so the displacement does
/// not wrap population against the truncation edge.
pub fn wigner(state: &QuantumState, spec: &WignerSpec) -> Result<WignerGrid> {
    let layout = state.layout();
    if layout.len() != 1 {
        return Err(Error::Shape("wigner needs a single-qumode state".into()));
    }
    layout.expect_qumode(0)?;
    let (nq, np) = spec.resolution;
    if nq == 0 || np == 0 {
        return Err(Error::Shape("empty Wigner grid".into()));
    }
    let reach = spec
        .q_range
        .0
        .abs()
        .max(spec.q_range.1.abs())
        .hypot(spec.p_range.0.abs().max(spec.p_range.1.abs()));
    let d0 = layout.dim();
    let d = d0 + 20 + (2.0 * reach * reach).ceil() as usize;
    let big = state.embed_cutoff(d)?;

    // pure components √λ_k |v_k⟩
    let components: Vec<Vec<C64>> = match big.data() {
        StateData::Pure(v) => vec![v.iter().copied().collect()],
        StateData::Mixed(m) => {
            let eig = HermitianEigen::new(m);
            eig.values
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > 1e-14)
                .map(|(k, &l)| eig.vectors.column(k).iter().map(|z| z * l.sqrt()).collect())
                .collect()
        }
    };

    let kernel = DisplacementKernel::for_cutoff(d);
    let qs = axis(spec.q_range, nq);
    let ps = axis(spec.p_range, np);
    let mut values = DMatrix::zeros(nq, np);
    let mut buf = vec![C64::new(0.0, 0.0); d];
    let mut scratch = vec![C64::new(0.0, 0.0); d];
    let mut worst_edge: f64 = 0.0;
    for (i, &q) in qs.iter().enumerate() {
        for (j, &p) in ps.iter().enumerate() {
            let alpha = C64::new(q, p) / std::f64::consts::SQRT_2;
            let mut w = 0.0;
            for comp in &components {
                buf.copy_from_slice(comp);
                kernel.displace(-alpha, &mut buf, &mut scratch);
                for (n, z) in buf.iter().enumerate() {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    w += sign * z.norm_sqr();
                }
                worst_edge = worst_edge.max(buf[d - 1].norm_sqr() + buf[d - 2].norm_sqr());
            }
            values[(i, j)] = w / std::f64::consts::PI;
        }
    }
    let mut warnings = Vec::new();
    if worst_edge > 1e-8 {
        warnings.push(format!(
            "grid reaches the truncation edge (top-level population {worst_edge:.2e} at cutoff {d})"
        ));
    }
    Ok(WignerGrid {
        spec: *spec,
        values,
        warnings,
    })
}
