//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.
//!
//! `ACCEPTANCE_ONLY=1,4` restricts the run to the listed criteria (criteria
//! 2, 3, 7 and 8 reuse the N_S = 1 sweep of criterion 1, which is then run
//! regardless).

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use bosonet::analytics::{
    gaussian_binary_error, generator_covariance, helstrom_ensemble, laguerre_smallest_root, number_interferometry_error,
    quadrature_covariance, reduce_2d_real_to_1d_complex, theorem2_bound, threshold_asymptotic, transform_energy,
    GaussianProbe, NumberInterferometer, SymplecticMap,
};
use bosonet::circuit::{build_unitary, probe_state, Architecture, CircuitParams};
use bosonet::fock::{multimode_displacement, Operator, OperatorKind, QuantumState};
use bosonet::tasks::{make_task, noisy_error_probability, LabeledDisplacementEnsemble, NoiseModel, Pipeline, TaskSpec};
use bosonet::Error;
use bosonet::train::{minimize, sweep_threshold, LossContext, SweepPoint, SweepResult, TrainConfig, TrainResult};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ZERO: f64 = 1e-8;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn binary_config(n_s: f64, epsilon: f64) -> TrainConfig {
    TrainConfig::new(
        Architecture::single_mode(8, 30),
        TaskSpec::BinaryPmEpsilon { epsilon },
        n_s,
    )
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| ((lo + i as f64 * step) * 1e10).round() / 1e10).collect()
}

/// With `ACCEPTANCE_CACHE=<dir>` set, sweeps are stored there and reused when
/// the grid matches.
fn sweep(n_s: f64, grid: &[f64]) -> SweepResult {
    let cache = std::env::var_os("ACCEPTANCE_CACHE").map(|d| std::path::PathBuf::from(d).join(format!("sweep-ns-{n_s}.json")));
    if let Some(Ok(text)) = cache.as_ref().map(std::fs::read_to_string) {
        if let Ok((g, r)) = serde_json::from_str::<(Vec<f64>, SweepResult)>(&text) {
            if g == grid {
                eprintln!("  sweep at N_S = {n_s}: cached");
                return r;
            }
        }
    }
    let t = Instant::now();
    let r = sweep_threshold(&binary_config(n_s, grid[0]), grid, ZERO).expect("sweep runs");
    eprintln!("  sweep at N_S = {n_s}: {:.0} s", t.elapsed().as_secs_f64());
    if let Some(path) = cache {
        let _ = std::fs::create_dir_all(path.parent().unwrap());
        let _ = std::fs::write(path, serde_json::to_string(&(grid, &r)).unwrap());
    }
    r
}

fn all_points(s: &SweepResult) -> impl Iterator<Item = &SweepPoint> {
    s.curve.iter().chain(&s.refinement)
}

fn criterion_1(s: &SweepResult) -> Outcome {
    let worst = s
        .curve
        .iter()
        .filter(|p| p.epsilon >= 0.45 - 1e-12)
        .map(|p| p.error)
        .fold(0.0, f64::max);
    let g = gaussian_binary_error(0.45, 1.0);
    // ½ erfc(√2 ε e^r) with sinh² r = N_S
    let g_ref = 0.5 * libm::erfc(2f64.sqrt() * 0.45 * 1f64.asinh().exp());
    let th = s.epsilon_th;
    let in_band = th.is_some_and(|t| (0.34..=0.44).contains(&t));
    outcome(
        worst < ZERO && in_band && (g - g_ref).abs() < 1e-15 && (g - 1.4898e-2).abs() < 1e-6,
        format!(
            "max P_E over ε ≥ 0.45 = {worst:.2e}; ε_th = {th:?} (bracket {:?}); homodyne at 0.45 = {g:.4e}",
            s.bracket
        ),
    )
}

fn criterion_2(by_budget: &[(f64, &SweepResult)]) -> Outcome {
    let mut ths = Vec::new();
    let mut ratios = Vec::new();
    for (n_s, s) in by_budget {
        let Some(t) = s.epsilon_th else {
            return outcome(false, format!("no threshold detected at N_S = {n_s}"));
        };
        ths.push(t);
        ratios.push(t / threshold_asymptotic(*n_s));
    }
    let decreasing = ths.windows(2).all(|w| w[1] < w[0]);
    let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
    let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
    let band = hi / lo;
    let table: Vec<String> = by_budget
        .iter()
        .zip(ths.iter().zip(&ratios))
        .map(|((n, _), (t, r))| format!("N_S={n}: ε_th={t:.4} ratio={r:.3}"))
        .collect();
    outcome(decreasing && band <= 2.0, format!("{}; band ×{band:.3}", table.join(", ")))
}

fn train_warm(base: TrainConfig, warm: Vec<Vec<f64>>) -> TrainResult {
    let mut cfg = base;
    cfg.restarts = warm.len().max(1);
    cfg.warm_starts = warm;
    minimize(&cfg).expect("training succeeds")
}

fn bound_for(result: &TrainResult, task: &TaskSpec, noise: &NoiseModel) -> f64 {
    let arch = &result.architecture;
    let params = result.circuit_params().unwrap();
    let probe = probe_state(&params.probe, arch).unwrap();
    let layout = probe.layout().clone();
    let states: Vec<(f64, QuantumState)> = make_task(task)
        .unwrap()
        .iter()
        .map(|(_, w, atom)| {
            let op = multimode_displacement(&atom.x, &layout).unwrap();
            (w, probe.evolve(&op).unwrap())
        })
        .collect();
    let generators: Vec<Operator> = noise
        .generators
        .iter()
        .map(|g| Operator::embed(&layout, &[g.mode()], &g.matrix(arch.cutoff).unwrap(), OperatorKind::Hermitian).unwrap())
        .collect();
    theorem2_bound(&noise.covariance_matrix(), &generator_covariance(&states, &generators).unwrap()).unwrap()
}

fn reference_at_039(s: &SweepResult) -> TrainResult {
    // continue from the passing points nearest above ε = 0.39
    let mut above: Vec<&SweepPoint> = all_points(s).filter(|p| p.epsilon >= 0.39 && p.error < ZERO).collect();
    above.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let warm = above.iter().take(2).map(|p| p.params.clone()).collect();
    train_warm(binary_config(1.0, 0.39), warm)
}

/// Noise nodes reach further than the noiseless states, so widen the cutoff
/// until the average is leakage-clean.
fn noisy_error(ens: &LabeledDisplacementEnsemble, params: &CircuitParams, arch: &Architecture, noise: &NoiseModel) -> f64 {
    let mut arch = arch.clone();
    for _ in 0..3 {
        match noisy_error_probability(ens, params, &arch, noise) {
            Err(Error::Leakage { .. }) => arch = arch.with_cutoff(arch.cutoff + 10),
            other => return other.unwrap(),
        }
    }
    noisy_error_probability(ens, params, &arch, noise).unwrap()
}

fn criterion_3(reference: &TrainResult) -> Outcome {
    let task = TaskSpec::BinaryPmEpsilon { epsilon: 0.39 };
    let ens = make_task(&task).unwrap();
    let params = reference.circuit_params().unwrap();
    let deltas = [0.001, 0.005, 0.01, 0.02];
    let mut rows = Vec::new();
    let mut bound_ok = true;
    for (i, &delta) in deltas.iter().enumerate() {
        let noise = NoiseModel::amplitude(&[0], delta).unwrap();
        let pe = noisy_error(&ens, &params, &reference.architecture, &noise);
        let bound = bound_for(reference, &task, &noise);
        let slack = if i == 0 { 1.1 } else { 1.0 };
        bound_ok &= pe <= slack * bound;
        rows.push((delta, pe, bound));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let table: Vec<String> = rows
        .iter()
        .map(|(d, p, b)| format!("δ={d}: P_E={p:.3e} bound={b:.3e}"))
        .collect();
    outcome(
        (slope - 2.0).abs() <= 0.2 && bound_ok,
        format!("noiseless P_E = {:.2e}; slope {slope:.3}; {}", reference.error, table.join(", ")),
    )
}

fn criterion_4() -> Outcome {
    let zero = number_interferometry_error(1, 1.0).abs();
    let d = 22;
    let interferometer = NumberInterferometer::new(FRAC_PI_2 / 2.0, d).unwrap();
    let mut worst = 0.0f64;
    for eps in grid(0.0, 1.5, 0.1) {
        let ens = make_task(&TaskSpec::CircleVsVacuum { epsilon: eps, atoms: 32 }).unwrap();
        let simulated = interferometer.error(1, &ens).unwrap();
        // the beamsplitter leaves amplitude ε cos θ on the probed mode
        let analytic = number_interferometry_error(1, eps * (FRAC_PI_2 / 2.0).cos());
        worst = worst.max((simulated - analytic).abs());
    }
    let t = Instant::now();
    // shallower circuits stall near P_E ≈ 1e−2 with a mixed |0⟩, |1⟩, |2⟩ probe
    let mut cfg = TrainConfig::new(
        Architecture::single_mode(24, 24),
        TaskSpec::CircleVsVacuum { epsilon: 1.0, atoms: 16 },
        1.0,
    );
    cfg.restarts = 4;
    let r = minimize(&cfg).unwrap();
    let params = r.circuit_params().unwrap();
    let probe = probe_state(&params.probe, &r.architecture).unwrap();
    let weight = probe.photon_distribution(0).unwrap()[1];
    eprintln!("  circle training: {:.0} s", t.elapsed().as_secs_f64());
    outcome(
        zero < 1e-12 && worst < 1e-8 && weight > 0.95,
        format!(
            "analytic P_E(1, 1) = {zero:.1e}; simulation vs analytic {worst:.1e}; trained P_E = {:.2e}, |1⟩ weight = {weight:.4}",
            r.error
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut bad = Vec::new();
    for n in 1..=20usize {
        let root = laguerre_smallest_root(n).unwrap();
        let (lo, hi) = (1.0 / n as f64, 2.0 / (n as f64 + 1.0));
        if !(root >= lo - 1e-14 && root <= hi + 1e-14) {
            bad.push(format!("n={n}: {root}"));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "all roots for n = 1..20 inside [1/n, 2/(n+1)]".into()
        } else {
            format!("outside: {}", bad.join(", "))
        },
    )
}

fn random_probe(rng: &mut ChaCha8Rng) -> GaussianProbe {
    let r = rng.random_range(-0.8..0.8);
    let nu = 1.0 + rng.random_range(0.0..1.0);
    let rot = SymplecticMap::phase_rotation(rng.random_range(0.0..std::f64::consts::PI));
    let sq = GaussianProbe::squeezed(r);
    let cov = rot.matrix() * sq.covariance * rot.matrix().transpose() * nu;
    let mean = DVector::from_vec(vec![rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)]);
    GaussianProbe::new(mean, cov).unwrap()
}

fn closed_form_deviation() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let theta = rng.random_range(-1.4..1.4);
        let r: f64 = rng.random_range(-1.0..1.0);
        let (a, b) = (rng.random_range(0.2..3.0), rng.random_range(0.2..3.0));
        let p = random_probe(&mut rng);
        let second = |i: usize| p.covariance[(i, i)] + p.mean[i] * p.mean[i];

        let e = transform_energy(&SymplecticMap::beamsplitter(theta), &p).unwrap();
        worst = worst.max((e.n_s_prime - e.n_s / theta.cos().powi(2)).abs());
        let e = transform_energy(&SymplecticMap::two_mode_squeezer(r), &p).unwrap();
        let ch2 = r.cosh().powi(2);
        worst = worst.max((e.n_s - (ch2 * e.n_s_prime + ch2 - 1.0)).abs());
        let e = transform_energy(&SymplecticMap::ellipse_to_circle(a, b).unwrap(), &p).unwrap();
        let shift = 0.5 * ((a / b - 1.0) * second(0) + (b / a - 1.0) * second(1));
        worst = worst.max((e.n_s_prime - (e.n_s - shift)).abs());

        let q = p.direct_sum(&random_probe(&mut rng));
        let e = transform_energy(&SymplecticMap::sum_gate(), &q).unwrap();
        let m = |i: usize, j: usize| q.covariance[(i, j)] + q.mean[i] * q.mean[j];
        let extra = 0.5 * (m(0, 0) + m(3, 3) + 2.0 * m(0, 2) - 2.0 * m(1, 3));
        worst = worst.max((e.n_s - (e.n_s_prime + extra)).abs());
    }
    worst
}

fn criterion_6() -> Outcome {
    let dev = closed_form_deviation();
    let t = Instant::now();
    let task_2d = TaskSpec::RfCircle2d {
        epsilon: 1.0,
        aspect: 1.0,
        delta_phi: FRAC_PI_2,
        atoms: 16,
    };
    let red = reduce_2d_real_to_1d_complex(&make_task(&task_2d).unwrap()).unwrap();
    let radius_ok = red
        .effective
        .atoms(1)
        .iter()
        .all(|a| (a.x[0].hypot(a.x[1]) - 1.0).abs() < 1e-12);

    // 1D circle task on the effective mode
    let mut cfg1 = TrainConfig::new(
        Architecture::single_mode(8, 20),
        TaskSpec::CircleVsVacuum { epsilon: 1.0, atoms: 16 },
        1.0,
    );
    cfg1.restarts = 4;
    let r1 = minimize(&cfg1).unwrap();
    let arch1 = &r1.architecture;
    let pipe = Pipeline::new(arch1, &red.effective).unwrap();
    let pe_effective = pipe.error_probability(&r1.params);
    let probe1 = probe_state(&r1.circuit_params().unwrap().probe, arch1).unwrap();
    let (mean, cov) = quadrature_covariance(&probe1, &[0]).unwrap();
    // energies depend on first and second moments only, so the Gaussian
    // surrogate carries the exact budget
    let budget = red.energy(&GaussianProbe { mean, covariance: cov }).unwrap();

    let mut arch2 = Architecture::single_mode(8, 16);
    arch2.data_modes = 2;
    let mut cfg2 = TrainConfig::new(arch2, task_2d, budget.n_s);
    cfg2.restarts = 4;
    let r2 = minimize(&cfg2).unwrap();
    eprintln!("  reduction trainings: {:.0} s", t.elapsed().as_secs_f64());
    let gap = (r2.error - pe_effective).abs();
    outcome(
        dev < 1e-9 && radius_ok && gap < 2e-3,
        format!(
            "closed forms max deviation {dev:.1e}; 1D P_E = {pe_effective:.2e} at N_S' = 1; 2D P_E = {:.2e} at N_S = {:.4}; gap {gap:.1e}",
            r2.error, budget.n_s
        ),
    )
}

fn helstrom_of(result: &TrainResult, task: &TaskSpec) -> f64 {
    let params = result.circuit_params().unwrap();
    let probe = probe_state(&params.probe, &result.architecture).unwrap();
    helstrom_ensemble(&make_task(task).unwrap(), &probe).unwrap()
}

fn criterion_7(binary: &[(f64, &SweepResult)]) -> Outcome {
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for (_, s) in binary {
        for p in all_points(s) {
            let arch = Architecture::single_mode(8, p.cutoff);
            let params = CircuitParams::unpack(&arch, &p.params).unwrap();
            let probe = probe_state(&params.probe, &arch).unwrap();
            let task = TaskSpec::BinaryPmEpsilon { epsilon: p.epsilon };
            let h = helstrom_ensemble(&make_task(&task).unwrap(), &probe).unwrap();
            worst = worst.min(p.error - h);
            count += 1;
        }
    }
    let consistent = worst >= -1e-6;

    let t = Instant::now();
    let arch = Architecture::single_mode(12, 30);
    let mut close = 0;
    let mut gaps = Vec::new();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let probe = CircuitParams::random(&arch, &mut rng).probe.pack();
        let task = TaskSpec::BinaryPmEpsilon { epsilon: 0.3 };
        let mut cfg = TrainConfig::new(arch.clone(), task.clone(), 1.0);
        cfg.fixed_probe = Some(probe);
        cfg.restarts = 4;
        cfg.seed = seed;
        let r = minimize(&cfg).unwrap();
        let gap = r.error - helstrom_of(&r, &task);
        if gap.abs() < 1e-3 {
            close += 1;
        }
        gaps.push(format!("{gap:.1e}"));
    }
    eprintln!("  fixed-probe trainings: {:.0} s", t.elapsed().as_secs_f64());
    outcome(
        consistent && close >= 4,
        format!(
            "min(P_E − Helstrom) over {count} trained points = {worst:.1e}; θ_m-only gaps [{}], {close}/5 within 1e-3",
            gaps.join(", ")
        ),
    )
}

fn criterion_8(binary: &[(f64, &SweepResult)], extra: &[(TaskSpec, &TrainResult)]) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let arch = Architecture::single_mode(3, 14);
    let ens = make_task(&TaskSpec::BinaryPmEpsilon { epsilon: 0.4 }).unwrap();
    let pipe = Pipeline::new(&arch, &ens).unwrap();
    let ctx = LossContext::new(&pipe, 1.0, 10.0).unwrap();
    let mut grad_rel = 0.0f64;
    for seed in 0..3 {
        let x = CircuitParams::random(&arch, &mut ChaCha8Rng::seed_from_u64(seed)).pack();
        let g = ctx.adjoint_gradient(&x).unwrap();
        let r = ctx.richardson_gradient(&x).unwrap();
        let scale = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let diff = g.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        grad_rel = grad_rel.max(diff / scale);
    }
    ok &= grad_rel < 1e-5;
    notes.push(format!("gradient rel. error {grad_rel:.1e}"));

    let arch = Architecture::single_mode(4, 20);
    let params = CircuitParams::random(&arch, &mut ChaCha8Rng::seed_from_u64(8));
    let u = build_unitary(&params.probe, &arch).unwrap();
    let unitarity = u.unitarity_defect();
    let probe = probe_state(&params.probe, &arch).unwrap();
    let norm = (probe.trace() - 1.0).abs();
    ok &= unitarity < 1e-8 && norm < 1e-9;
    notes.push(format!("unitarity {unitarity:.1e}, norm {norm:.1e}"));

    let mut leak = 0.0f64;
    let mut shift = 0.0f64;
    let mut check = |arch: &Architecture, task: &TaskSpec, params: &[f64]| {
        let ens = make_task(task).unwrap();
        let here = Pipeline::new(arch, &ens).unwrap();
        let wider = Pipeline::new(&arch.with_cutoff(arch.cutoff + 10), &ens).unwrap();
        leak = leak.max(here.leakage(params));
        shift = shift
            .max((here.error_probability(params) - wider.error_probability(params)).abs())
            .max((here.energy(params) - wider.energy(params)).abs());
    };
    for (_, s) in binary {
        for p in all_points(s) {
            check(
                &Architecture::single_mode(8, p.cutoff),
                &TaskSpec::BinaryPmEpsilon { epsilon: p.epsilon },
                &p.params,
            );
        }
    }
    for (task, r) in extra {
        check(&r.architecture, task, &r.params);
    }
    ok &= leak < 1e-8 && shift < 1e-7;
    notes.push(format!("max leakage {leak:.1e}, max d → d+10 shift {shift:.1e}"));
    outcome(ok, notes.join("; "))
}

fn record(results: &mut Vec<(u32, &'static str, Outcome)>, n: u32, name: &'static str, f: impl FnOnce() -> Outcome) {
    let t = Instant::now();
    let o = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    });
    eprintln!("  criterion {n} finished in {:.0} s", t.elapsed().as_secs_f64());
    results.push((n, name, o));
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let wanted = |c: u32| only.as_ref().is_none_or(|o| o.contains(&c));
    let mut results: Vec<(u32, &'static str, Outcome)> = Vec::new();
    let start = Instant::now();

    let needs_sweep = [1, 2, 3, 7, 8].iter().any(|&c| wanted(c));
    // fine spacing around the expected threshold, coarse up to the end of the plotted range
    let mut grid1 = grid(0.30, 0.45, 0.05);
    grid1.extend(grid(0.50, 1.20, 0.10));
    let s1 = needs_sweep.then(|| sweep(1.0, &grid1));
    let s_low = wanted(2).then(|| sweep(0.5, &grid(0.35, 0.75, 0.05)));
    let s_high = wanted(2).then(|| sweep(2.0, &grid(0.15, 0.45, 0.05)));
    let mut binary: Vec<(f64, &SweepResult)> = Vec::new();
    if let Some(s) = &s_low {
        binary.push((0.5, s));
    }
    if let Some(s) = &s1 {
        binary.push((1.0, s));
    }
    if let Some(s) = &s_high {
        binary.push((2.0, s));
    }

    if wanted(1) {
        record(&mut results, 1, "binary threshold", || criterion_1(s1.as_ref().unwrap()));
    }
    if wanted(2) {
        record(&mut results, 2, "threshold scaling", || criterion_2(&binary));
    }
    let reference = (wanted(3) || wanted(8))
        .then(|| std::panic::catch_unwind(|| reference_at_039(s1.as_ref().unwrap())).ok())
        .flatten();
    if wanted(3) {
        record(&mut results, 3, "noise quadratic law and bound", || match &reference {
            Some(r) => criterion_3(r),
            None => outcome(false, "training at ε = 0.39 failed".into()),
        });
    }
    if wanted(4) {
        record(&mut results, 4, "circle task and number interferometry", criterion_4);
    }
    if wanted(5) {
        record(&mut results, 5, "Laguerre root bracket", criterion_5);
    }
    if wanted(6) {
        record(&mut results, 6, "symplectic calculus and 2D reduction", criterion_6);
    }
    if wanted(7) {
        record(&mut results, 7, "Helstrom oracle consistency", || criterion_7(&binary));
    }
    if wanted(8) {
        let extra: Vec<(TaskSpec, &TrainResult)> = reference
            .iter()
            .map(|r| (TaskSpec::BinaryPmEpsilon { epsilon: 0.39 }, r))
            .collect();
        record(&mut results, 8, "numerics invariants", || criterion_8(&binary, &extra));
    }

    let failed = results.iter().filter(|r| !r.2.passed).count();
    for (n, name, o) in &results {
        println!("criterion {n} {}: {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "{} of {} criteria passed in {:.0} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
