//! In-place state-vector execution of compiled ansätze and their adjoint.
//!
//! Gates act on gathered fibres rather than on dense matrices, so an ECD
//! costs two `d×d` products per fibre pair and a rotation is a 2×2 update.
//! [`Engine::backprop`] walks the program backwards, uncomputing the state
//! while pulling the cotangent through each gate.

use std::sync::Arc;

use crate::circuit::{rotation_matrix, Architecture};
use crate::fock::kernel::{gather, scatter, DisplacementKernel};
use crate::fock::layout::SubsystemLayout;
use crate::{CMatrix, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Below this amplitude the polar derivative of `D(β)` is replaced by a
/// Cartesian series.
const SMALL_BETA: f64 = 1e-5;

#[derive(Clone, Debug)]
pub enum Gate {
    Rotation {
        qubit: usize,
        xi: f64,
        phi: f64,
        offset: usize,
    },
    Ecd {
        mode: usize,
        qubit: usize,
        beta: C64,
        offset: usize,
    },
}

/// Gate list for one parameter vector.
#[derive(Clone, Debug)]
pub struct Program {
    pub gates: Vec<Gate>,
}

/// Single-mode operation inserted between probe and measurement.
#[derive(Clone, Debug)]
pub enum ModeOp {
    Displace(C64),
    Dense(CMatrix),
}

impl ModeOp {
    pub fn adjoint(&self) -> ModeOp {
        match self {
            ModeOp::Displace(b) => ModeOp::Displace(-b),
            ModeOp::Dense(m) => ModeOp::Dense(m.adjoint()),
        }
    }
}

/// Precomputed index sets for one architecture.
pub struct Engine {
    arch: Architecture,
    layout: SubsystemLayout,
    kernel: Arc<DisplacementKernel>,
    /// Fibre bases along each qubit.
    qubit_bases: Vec<Vec<usize>>,
    /// Fibre bases along each qumode.
    mode_bases: Vec<Vec<usize>>,
    /// `pair_bases[q][m]`: bases with digit zero on qubit `q` and mode `m`.
    pair_bases: Vec<Vec<Vec<usize>>>,
}

impl Engine {
    pub fn new(arch: &Architecture) -> Result<Self> {
        arch.validate()?;
        let layout = arch.layout()?;
        let modes = arch.modes();
        let qubit_bases = (0..arch.qubits)
            .map(|q| layout.fibre_bases(arch.qubit_index(q)))
            .collect();
        let mode_bases = (0..modes).map(|m| layout.fibre_bases(m)).collect();
        let pair_bases = (0..arch.qubits)
            .map(|q| (0..modes).map(|m| layout.pair_bases(arch.qubit_index(q), m)).collect())
            .collect();
        Ok(Engine {
            arch: arch.clone(),
            kernel: DisplacementKernel::for_cutoff(arch.cutoff),
            layout,
            qubit_bases,
            mode_bases,
            pair_bases,
        })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn vacuum(&self) -> Vec<C64> {
        let mut v = vec![ZERO; self.dim()];
        v[0] = C64::new(1.0, 0.0);
        v
    }

    /// Gate list for a flat ansatz vector of length `param_count()`.
    pub fn compile(&self, values: &[f64]) -> Program {
        assert_eq!(values.len(), self.arch.param_count(), "parameter length");
        let mut gates = Vec::new();
        let mut off = 0;
        for l in 0..self.arch.layers {
            for q in 0..self.arch.qubits {
                gates.push(Gate::Rotation {
                    qubit: q,
                    xi: values[off],
                    phi: values[off + 1],
                    offset: off,
                });
                off += 2;
            }
            for (q, m) in self.arch.couplings(l) {
                gates.push(Gate::Ecd {
                    mode: m,
                    qubit: q,
                    beta: C64::new(values[off], values[off + 1]),
                    offset: off,
                });
                off += 2;
            }
        }
        Program { gates }
    }

    pub fn apply(&self, program: &Program, psi: &mut [C64]) {
        let mut ws = Workspace::new(self.arch.cutoff);
        for g in &program.gates {
            self.apply_gate(g, psi, false, &mut ws);
        }
    }

    /// `psi ← U† psi`.
    pub fn apply_inverse(&self, program: &Program, psi: &mut [C64]) {
        let mut ws = Workspace::new(self.arch.cutoff);
        for g in program.gates.iter().rev() {
            self.apply_gate(g, psi, true, &mut ws);
        }
    }

    fn apply_gate(&self, gate: &Gate, psi: &mut [C64], inverse: bool, ws: &mut Workspace) {
        match *gate {
            Gate::Rotation { qubit, xi, phi, .. } => {
                let xi = if inverse { -xi } else { xi };
                self.rotate(qubit, xi, phi, psi);
            }
            // ECD is its own inverse
            Gate::Ecd { mode, qubit, beta, .. } => self.ecd(mode, qubit, beta, psi, ws),
        }
    }

    fn rotate(&self, qubit: usize, xi: f64, phi: f64, psi: &mut [C64]) {
        let r = rotation_matrix(xi, phi);
        let sq = self.layout.stride(self.arch.qubit_index(qubit));
        for &b in &self.qubit_bases[qubit] {
            let (a0, a1) = (psi[b], psi[b + sq]);
            psi[b] = r[0][0] * a0 + r[0][1] * a1;
            psi[b + sq] = r[1][0] * a0 + r[1][1] * a1;
        }
    }

    fn ecd(&self, mode: usize, qubit: usize, beta: C64, psi: &mut [C64], ws: &mut Workspace) {
        let sm = self.layout.stride(mode);
        let sq = self.layout.stride(self.arch.qubit_index(qubit));
        for &b in &self.pair_bases[qubit][mode] {
            gather(psi, b, sm, &mut ws.f0);
            gather(psi, b + sq, sm, &mut ws.f1);
            self.kernel.displace(beta, &mut ws.f0, &mut ws.scratch);
            self.kernel.displace(-beta, &mut ws.f1, &mut ws.scratch);
            // new1 = D(β) old0, new0 = D(−β) old1
            scatter(psi, b + sq, sm, &ws.f0);
            scatter(psi, b, sm, &ws.f1);
        }
    }

    /// Applies a single-mode operation to qumode `mode`.
    pub fn apply_mode_op(&self, mode: usize, op: &ModeOp, psi: &mut [C64]) {
        let d = self.arch.cutoff;
        let sm = self.layout.stride(mode);
        let mut f = vec![ZERO; d];
        let mut scratch = vec![ZERO; d];
        match op {
            ModeOp::Displace(beta) => {
                if beta.norm() == 0.0 {
                    return;
                }
                for &b in &self.mode_bases[mode] {
                    gather(psi, b, sm, &mut f);
                    self.kernel.displace(*beta, &mut f, &mut scratch);
                    scatter(psi, b, sm, &f);
                }
            }
            ModeOp::Dense(m) => {
                for &b in &self.mode_bases[mode] {
                    gather(psi, b, sm, &mut f);
                    for (r, s) in scratch.iter_mut().enumerate() {
                        *s = (0..d).map(|c| m[(r, c)] * f[c]).sum();
                    }
                    scatter(psi, b, sm, &scratch);
                }
            }
        }
    }

    /// `⟨ψ| n_m |ψ⟩` summed over `modes`.
    pub fn occupation(&self, psi: &[C64], modes: std::ops::Range<usize>) -> f64 {
        modes
            .map(|m| {
                let d = self.arch.cutoff;
                psi.iter()
                    .enumerate()
                    .map(|(i, z)| ((i / self.layout.stride(m)) % d) as f64 * z.norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }

    /// `out += c · n_m ψ` summed over `modes`.
    pub fn add_number_action(&self, psi: &[C64], modes: std::ops::Range<usize>, c: f64, out: &mut [C64]) {
        let d = self.arch.cutoff;
        for m in modes {
            let s = self.layout.stride(m);
            for (i, (o, z)) in out.iter_mut().zip(psi).enumerate() {
                *o += z * (c * ((i / s) % d) as f64);
            }
        }
    }

    /// Probability that qubit `qubit` reads `bit`.
    pub fn qubit_probability(&self, psi: &[C64], qubit: usize, bit: usize) -> f64 {
        let off = bit * self.layout.stride(self.arch.qubit_index(qubit));
        self.qubit_bases[qubit].iter().map(|&b| psi[b + off].norm_sqr()).sum()
    }

    /// `out ← c · Π_bit ψ` for the projector on `qubit = bit`.
    pub fn project_qubit(&self, psi: &[C64], qubit: usize, bit: usize, c: f64, out: &mut [C64]) {
        let sq = self.layout.stride(self.arch.qubit_index(qubit));
        out.iter_mut().for_each(|z| *z = ZERO);
        for &b in &self.qubit_bases[qubit] {
            let i = b + bit * sq;
            out[i] = psi[i] * c;
        }
    }

    /// Amplitudes with `qubit` in state `bit`, in basis order.
    pub fn qubit_component<'a>(
        &'a self,
        psi: &'a [C64],
        qubit: usize,
        bit: usize,
    ) -> impl Iterator<Item = C64> + 'a {
        let sq = self.layout.stride(self.arch.qubit_index(qubit));
        self.qubit_bases[qubit].iter().map(move |&b| psi[b + bit * sq])
    }

    /// Largest top-two-level population over all qumodes.
    pub fn leakage(&self, psi: &[C64]) -> f64 {
        let d = self.arch.cutoff;
        (0..self.arch.modes())
            .map(|m| {
                let s = self.layout.stride(m);
                psi.iter()
                    .enumerate()
                    .filter(|(i, _)| (i / s) % d >= d - 2)
                    .map(|(_, z)| z.norm_sqr())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Reverse pass through `program`.
    ///
    /// On entry `psi` is the program output and `lambda` the cotangent
    /// `∂C/∂⟨ψ_out|`; on exit `psi` is the program input and `lambda` has been
    /// pulled back to it. `grad[offset + ..]` accumulates `2 Re⟨λ|∂G|ψ⟩`.
    pub fn backprop(&self, program: &Program, psi: &mut [C64], lambda: &mut [C64], grad: &mut [f64]) {
        let mut ws = Workspace::new(self.arch.cutoff);
        for g in program.gates.iter().rev() {
            match *g {
                Gate::Rotation { qubit, xi, phi, offset } => {
                    self.rotate(qubit, -xi, phi, psi);
                    let (gx, gp) = self.rotation_grad(qubit, xi, phi, psi, lambda);
                    grad[offset] += gx;
                    grad[offset + 1] += gp;
                    self.rotate(qubit, -xi, phi, lambda);
                }
                Gate::Ecd {
                    mode,
                    qubit,
                    beta,
                    offset,
                } => {
                    let (gre, gim) = if beta.norm() >= SMALL_BETA {
                        self.ecd_grad_polar(mode, qubit, beta, psi, lambda, &mut ws)
                    } else {
                        self.ecd(mode, qubit, beta, psi, &mut ws);
                        let g = self.ecd_grad_series(mode, qubit, beta, psi, lambda, &mut ws);
                        self.ecd(mode, qubit, beta, lambda, &mut ws);
                        g
                    };
                    grad[offset] += gre;
                    grad[offset + 1] += gim;
                }
            }
        }
    }

    /// `psi` is the state before the rotation, `lambda` the cotangent after it.
    fn rotation_grad(&self, qubit: usize, xi: f64, phi: f64, psi: &[C64], lambda: &[C64]) -> (f64, f64) {
        let c = (xi / 2.0).cos();
        let s = (xi / 2.0).sin();
        let e = C64::from_polar(1.0, phi);
        let mi = C64::new(0.0, -1.0);
        let dxi = [
            [C64::new(-s / 2.0, 0.0), mi * (c / 2.0) * e.conj()],
            [mi * (c / 2.0) * e, C64::new(-s / 2.0, 0.0)],
        ];
        let dphi = [[ZERO, -e.conj() * s], [e * s, ZERO]];
        let sq = self.layout.stride(self.arch.qubit_index(qubit));
        let mut acc_x = ZERO;
        let mut acc_p = ZERO;
        for &b in &self.qubit_bases[qubit] {
            let (p0, p1) = (psi[b], psi[b + sq]);
            let (l0, l1) = (lambda[b].conj(), lambda[b + sq].conj());
            acc_x += l0 * (dxi[0][0] * p0 + dxi[0][1] * p1) + l1 * (dxi[1][0] * p0 + dxi[1][1] * p1);
            acc_p += l0 * (dphi[0][1] * p1) + l1 * (dphi[1][0] * p0);
        }
        (2.0 * acc_x.re, 2.0 * acc_p.re)
    }

    /// Polar-form derivative; uncomputes `psi` and pulls back `lambda`.
    fn ecd_grad_polar(
        &self,
        mode: usize,
        qubit: usize,
        beta: C64,
        psi: &mut [C64],
        lambda: &mut [C64],
        ws: &mut Workspace,
    ) -> (f64, f64) {
        let r = beta.norm();
        let e = beta / r;
        let sm = self.layout.stride(mode);
        let sq = self.layout.stride(self.arch.qubit_index(qubit));
        let bases = &self.pair_bases[qubit][mode];
        let mut dr = ZERO;
        let mut n_after = ZERO;
        for &b in bases {
            gather(psi, b, sm, &mut ws.f0);
            gather(psi, b + sq, sm, &mut ws.f1);
            gather(lambda, b, sm, &mut ws.l0);
            gather(lambda, b + sq, sm, &mut ws.l1);
            // ∂_r D(β) = G_e D(β) and ∂_r D(−β) = −G_e D(−β)
            dr += self.kernel.generator_inner(e, &ws.l1, &ws.f1);
            dr -= self.kernel.generator_inner(e, &ws.l0, &ws.f0);
            n_after += DisplacementKernel::number_inner(&ws.l0, &ws.f0);
            n_after += DisplacementKernel::number_inner(&ws.l1, &ws.f1);
        }
        self.ecd(mode, qubit, beta, psi, ws);
        self.ecd(mode, qubit, beta, lambda, ws);
        let mut n_before = ZERO;
        for &b in bases {
            gather(psi, b, sm, &mut ws.f0);
            gather(psi, b + sq, sm, &mut ws.f1);
            gather(lambda, b, sm, &mut ws.l0);
            gather(lambda, b + sq, sm, &mut ws.l1);
            n_before += DisplacementKernel::number_inner(&ws.l0, &ws.f0);
            n_before += DisplacementKernel::number_inner(&ws.l1, &ws.f1);
        }
        // ∂_φ D = i[n, D]
        let dphi = C64::new(0.0, 1.0) * (n_after - n_before);
        let gr = 2.0 * dr.re;
        let gp = 2.0 * dphi.re;
        let (sin, cos) = beta.arg().sin_cos();
        (cos * gr - sin / r * gp, sin * gr + cos / r * gp)
    }

    /// Second-order series `∂exp(A)[E] ≈ E + (EA + AE)/2` near `β = 0`.
    /// `psi` is the state before the gate, `lambda` the cotangent after it.
    fn ecd_grad_series(
        &self,
        mode: usize,
        qubit: usize,
        beta: C64,
        psi: &[C64],
        lambda: &[C64],
        ws: &mut Workspace,
    ) -> (f64, f64) {
        let sm = self.layout.stride(mode);
        let sq = self.layout.stride(self.arch.qubit_index(qubit));
        let mut out = [0.0; 2];
        for (k, dir) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
            let mut acc = ZERO;
            for &b in &self.pair_bases[qubit][mode] {
                gather(psi, b, sm, &mut ws.f0);
                gather(psi, b + sq, sm, &mut ws.f1);
                gather(lambda, b, sm, &mut ws.l0);
                gather(lambda, b + sq, sm, &mut ws.l1);
                // qubit 0 → 1 branch carries D(β), 1 → 0 carries D(−β)
                self.series_apply(dir, beta, &ws.f0, &mut ws.t, &mut ws.u, &mut ws.scratch);
                let sym0 = ws.scratch.clone();
                let e0 = ws.t.clone();
                self.series_apply(dir, beta, &ws.f1, &mut ws.t, &mut ws.u, &mut ws.scratch);
                for j in 0..ws.l0.len() {
                    acc += ws.l1[j].conj() * (e0[j] + sym0[j] * 0.5);
                    acc += ws.l0[j].conj() * (-ws.t[j] + ws.scratch[j] * 0.5);
                }
            }
            out[k] = 2.0 * acc.re;
        }
        (out[0], out[1])
    }

    /// `t ← E f`, `sym ← (EA + AE) f` with `E = dir a† − dir* a`, `A = β a† − β* a`.
    fn series_apply(&self, dir: C64, beta: C64, f: &[C64], t: &mut [C64], u: &mut [C64], sym: &mut [C64]) {
        let d = f.len();
        let mut tmp = vec![ZERO; d];
        self.kernel.generator(dir, f, t);
        self.kernel.generator(beta, t, sym);
        self.kernel.generator(beta, f, u);
        self.kernel.generator(dir, u, &mut tmp);
        for (s, x) in sym.iter_mut().zip(&tmp) {
            *s += x;
        }
    }
}

struct Workspace {
    f0: Vec<C64>,
    f1: Vec<C64>,
    l0: Vec<C64>,
    l1: Vec<C64>,
    t: Vec<C64>,
    u: Vec<C64>,
    scratch: Vec<C64>,
}

impl Workspace {
    fn new(d: usize) -> Self {
        let z = vec![ZERO; d];
        Workspace {
            f0: z.clone(),
            f1: z.clone(),
            l0: z.clone(),
            l1: z.clone(),
            t: z.clone(),
            u: z.clone(),
            scratch: z,
        }
    }
}
