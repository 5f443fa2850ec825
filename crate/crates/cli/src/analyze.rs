//! `analyze` subcommands: Wigner grids, photon statistics and checks of the
//! symplectic transform calculus.

use std::fs;
use std::path::Path;

use bosonet::analytics::{
    reduce_2d_real_to_1d_complex, transform_distribution, transform_energy, GaussianProbe, SymplecticMap,
};
use bosonet::circuit::probe_state;
use bosonet::fock::{wigner, QuantumState, SubsystemLayout, WignerSpec};
use bosonet::tasks::{make_task, TaskSpec};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analyze::Source::{Record, Vacuum};
use crate::record::{write_csv, ExperimentRecord};
use crate::CliError;

/// Where the analysed state comes from.
pub enum Source<'a> {
    /// Probe of a trained record, reduced to its first data mode.
    Record(&'a Path),
    Vacuum { cutoff: usize },
}

fn single_mode_state(source: &Source) -> Result<QuantumState, CliError> {
    match source {
        Record(path) => {
            let record = ExperimentRecord::load(path)?;
            let result = record.train_result()?;
            let params = result.circuit_params()?;
            let probe = probe_state(&params.probe, &result.architecture)?;
            Ok(probe.partial_trace(&[0])?)
        }
        Vacuum { cutoff } => Ok(QuantumState::vacuum(SubsystemLayout::single_mode(*cutoff)?)),
    }
}

pub fn run_wigner(source: &Source, half_width: f64, points: usize, out: &Path) -> Result<(), CliError> {
    let state = single_mode_state(source)?;
    let grid = wigner(&state, &WignerSpec::square(half_width, points))?;
    for w in &grid.warnings {
        log::warn!("{w}");
    }
    fs::create_dir_all(out)?;
    write_csv(out, "wigner.csv", |w| grid.write_csv(w))
}

pub fn run_photon_dist(source: &Source, out: &Path) -> Result<Vec<f64>, CliError> {
    let state = single_mode_state(source)?;
    let dist = state.photon_distribution(0)?;
    fs::create_dir_all(out)?;
    write_csv(out, "photon-dist.csv", |w| {
        use std::io::Write;
        writeln!(w, "n,probability")?;
        for (n, p) in dist.iter().enumerate() {
            writeln!(w, "{n},{p:e}")?;
        }
        Ok(())
    })?;
    Ok(dist)
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransformReport {
    pub theta: f64,
    pub r: f64,
    pub axes: (f64, f64),
    pub draws: usize,
    pub checks: Vec<Check>,
}

impl TransformReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// A random valid single-mode probe: rotated squeezed thermal state with a
/// random mean.
fn random_probe(rng: &mut ChaCha8Rng) -> GaussianProbe {
    let r = rng.random_range(-0.8..0.8);
    let nu = 1.0 + rng.random_range(0.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let rot = SymplecticMap::phase_rotation(phi);
    let sq = GaussianProbe::squeezed(r);
    let cov = rot.matrix() * sq.covariance * rot.matrix().transpose() * nu;
    let mean = DVector::from_vec(vec![rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)]);
    GaussianProbe::new(mean, cov).expect("thermal scaling keeps the state physical")
}

fn symplectic_defect(map: &SymplecticMap) -> f64 {
    let n = map.matrix().nrows() / 2;
    let w = bosonet::analytics::symplectic::omega(n);
    (map.matrix() * &w * map.matrix().transpose() - w).abs().max()
}

/// Verifies the energy relations of the beamsplitter, two-mode squeezer,
/// ellipse-to-circle and SUM-gate transforms on random probes, and the
/// round trip of the two-dimensional reduction.
pub fn transform_check(theta: f64, r: f64, axes: (f64, f64), draws: usize, seed: u64) -> Result<TransformReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bs = SymplecticMap::beamsplitter(theta);
    let tms = SymplecticMap::two_mode_squeezer(r);
    let ellipse = SymplecticMap::ellipse_to_circle(axes.0, axes.1)?;
    let reduction = SymplecticMap::reduction_2d();
    let mut checks = vec![
        Check::new("beamsplitter symplectic", symplectic_defect(&bs), 1e-12),
        Check::new("two-mode squeezer symplectic", symplectic_defect(&tms), 1e-12),
        Check::new("ellipse squeezer symplectic", symplectic_defect(&ellipse), 1e-12),
        Check::new("reduction symplectic", symplectic_defect(&reduction), 1e-12),
    ];
    let (mut dev_bs, mut dev_tms, mut dev_el, mut dev_sum) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (a, b) = axes;
    for _ in 0..draws {
        let p = random_probe(&mut rng);
        let e = transform_energy(&bs, &p)?;
        dev_bs = dev_bs.max((e.n_s_prime - e.n_s / theta.cos().powi(2)).abs());
        let e = transform_energy(&tms, &p)?;
        let ch2 = r.cosh().powi(2);
        dev_tms = dev_tms.max((e.n_s - (ch2 * e.n_s_prime + ch2 - 1.0)).abs());
        let second = |q: &GaussianProbe, i: usize| q.covariance[(i, i)] + q.mean[i] * q.mean[i];
        let e = transform_energy(&ellipse, &p)?;
        let shift = 0.5 * ((a / b - 1.0) * second(&p, 0) + (b / a - 1.0) * second(&p, 1));
        dev_el = dev_el.max((e.n_s_prime - (e.n_s - shift)).abs());
        let q = random_probe(&mut rng).direct_sum(&random_probe(&mut rng));
        let e = transform_energy(&reduction, &q)?;
        let m = |i: usize, j: usize| q.covariance[(i, j)] + q.mean[i] * q.mean[j];
        let extra = 0.5 * (m(0, 0) + m(3, 3) + 2.0 * m(0, 2) - 2.0 * m(1, 3));
        dev_sum = dev_sum.max((e.n_s - (e.n_s_prime + extra)).abs());
    }
    checks.push(Check::new("beamsplitter N' = N / cos²θ", dev_bs, 1e-9));
    checks.push(Check::new("two-mode squeezer N = cosh²r N' + cosh²r − 1", dev_tms, 1e-9));
    checks.push(Check::new("ellipse N' = N − ½⟨(a/b−1)q² + (b/a−1)p²⟩", dev_el, 1e-9));
    checks.push(Check::new("SUM N = N' + ½⟨q₁² + p₂² + {q₁,q₂} − {p₁,p₂}⟩", dev_sum, 1e-9));

    let task = make_task(&TaskSpec::RfCircle2d {
        epsilon: 1.0,
        aspect: 1.0,
        delta_phi: std::f64::consts::FRAC_PI_2,
        atoms: 16,
    })?;
    let red = reduce_2d_real_to_1d_complex(&task)?;
    let back = transform_distribution(&red.reduced, &red.map.inverse())?;
    let round_trip = task
        .iter()
        .zip(back.iter())
        .flat_map(|((_, _, x), (_, _, y))| x.x.iter().zip(&y.x).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max);
    checks.push(Check::new("2d reduction round trip", round_trip, 1e-10));
    let radius = red
        .effective
        .atoms(1)
        .iter()
        .map(|x| (x.x[0].hypot(x.x[1]) - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new("2d reduction effective circle radius", radius, 1e-12));
    Ok(TransformReport {
        theta,
        r,
        axes,
        draws,
        checks,
    })
}

pub fn run_transform_check(theta: f64, r: f64, axes: (f64, f64), seed: u64, out: &Path) -> Result<TransformReport, CliError> {
    let report = transform_check(theta, r, axes, 100, seed)?;
    fs::create_dir_all(out)?;
    fs::write(
        out.join("transform-check.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(report)
}
