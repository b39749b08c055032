//! The eleven acceptance checks, shared by `reproduce` and the test suite.
//!
//! Every check is deterministic: fixed seeds, fixed grids, ordered
//! reductions. Runtimes are measured but only reported through the log.

use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use povmqm::bounds::{self, Convention, ExperimentRecord, PhysicalConstants};
use povmqm::dynamics::{self, PotentialSpec};
use povmqm::kernels::{self, RadialKernel, SchoenbergMeasure};
use povmqm::observables;
use povmqm::reference;
use povmqm::twobody::{self, ParticlePair, TwoParticleState};
use povmqm::wavefunction::{make_gaussian_state, random_packet_state};
use povmqm::{MomentumGrid, Result};

/// Seed shared by every randomized check.
pub const SEED: u64 = 0x5eed_2024;

/// Number of criteria, determinism included.
pub const CRITERIA: u8 = 11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    /// Human-readable acceptance rule, e.g. `<= 1e-8`.
    pub rule: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { label: label.into(), value, rule: format!("<= {limit:e}"), passed: value <= limit }
    }

    pub fn at_least(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { label: label.into(), value, rule: format!(">= {limit:e}"), passed: value >= limit }
    }

    pub fn within(label: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self { label: label.into(), value, rule: format!("in [{lo:e}, {hi:e}]"), passed: (lo..=hi).contains(&value) }
    }

    pub fn flag(label: impl Into<String>, ok: bool) -> Self {
        Self { label: label.into(), value: if ok { 1.0 } else { 0.0 }, rule: "== 1".into(), passed: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Wall time in seconds; excluded from serialized output.
    #[serde(skip)]
    pub elapsed: f64,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One-line summary: `[PASS] 3 variance identity (worst: ...)`.
    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let failing: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} = {:.6e} (want {})", c.label, c.value, c.rule))
            .collect();
        if failing.is_empty() {
            format!("[{status}] {:>2} {} ({} checks)", self.id, self.title, self.checks.len())
        } else {
            format!("[{status}] {:>2} {}: {}", self.id, self.title, failing.join("; "))
        }
    }
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "oscillator spectrum",
        2 => "standard-QM reduction",
        3 => "variance identity",
        4 => "modified uncertainty relation",
        5 => "density oracle",
        6 => "continuity",
        7 => "Ehrenfest",
        8 => "hydrogen corrections",
        9 => "experimental bounds",
        10 => "kernel validity",
        11 => "determinism",
        _ => "unknown",
    }
}

/// Runs criterion `id` in `1..=10`. Determinism (11) needs two full runs
/// and is handled by the caller.
pub fn run_criterion(id: u8) -> Result<CriterionResult> {
    let start = Instant::now();
    let checks = match id {
        1 => oscillator_spectrum()?,
        2 => standard_reduction()?,
        3 => variance_identity()?,
        4 => uncertainty_relation()?,
        5 => density_oracle()?,
        6 => continuity()?,
        7 => ehrenfest()?,
        8 => hydrogen()?,
        9 => experimental_bounds()?,
        10 => kernel_validity()?,
        _ => return Err(povmqm::Error::InvalidInput(format!("no criterion {id}"))),
    };
    let elapsed = start.elapsed().as_secs_f64();
    log::info!("criterion {id} ({}) took {elapsed:.2} s", title(id));
    let mut result = CriterionResult { id, title: title(id), checks, elapsed };
    let limit = match id {
        1 => Some(30.0),
        2 => Some(60.0),
        _ => None,
    };
    if let Some(limit) = limit {
        // the value is wall time, so only the verdict is kept
        let ok = elapsed < limit;
        result.checks.push(Check { label: "runtime".into(), value: 0.0, rule: format!("< {limit} s"), passed: ok });
    }
    Ok(result)
}

fn grid1(n: usize, dx: f64) -> Result<MomentumGrid<f64>> {
    MomentumGrid::with_position_spacing(1, n, dx, 1.0)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Oscillator levels on the acceptance grid for a kernel with `l0 = 0.1`.
pub fn oscillator_rows(kernel: &RadialKernel<f64>) -> Result<Vec<dynamics::SpectrumComparison<f64>>> {
    let grid = MomentumGrid::with_momentum_extent(1, 512, 20.0, 1.0)?;
    dynamics::oscillator_spectrum_check(&grid, 1.0, 1.0, kernel, 8)
}

fn oscillator_spectrum() -> Result<Vec<Check>> {
    let gauss = oscillator_rows(&RadialKernel::gaussian(1, 0.1, 1.0)?)?;
    let schoen = oscillator_rows(&RadialKernel::schoenberg_single(1, 0.1, 1.0)?)?;
    let worst = |rows: &[dynamics::SpectrumComparison<f64>]| rows.iter().map(|r| r.diff.abs()).fold(0.0, f64::max);
    let shift_gap = gauss.iter().zip(&schoen).map(|(g, s)| (g.numeric - s.numeric).abs()).fold(0.0, f64::max);
    let shift_err = gauss.iter().map(|r| (r.numeric - (r.index as f64 + 0.5) - 0.005).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("gaussian levels vs (n+1/2)+0.005", worst(&gauss), 1e-6),
        Check::at_most("schoenberg levels vs (n+1/2)+0.005", worst(&schoen), 1e-6),
        Check::at_most("shift deviation from 0.005", shift_err, 1e-6),
        Check::at_most("gaussian vs schoenberg levels", shift_gap, 1e-6),
    ])
}

/// Attractive well used by the standard-QM comparisons.
pub const WELL: PotentialSpec<f64> = PotentialSpec::GaussianWell { depth: -4.0, width: 1.0 };

fn standard_reduction() -> Result<Vec<Check>> {
    let grid = grid1(256, 0.15)?;
    let flat = RadialKernel::constant(1, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut d_rho, mut d_free, mut d_int) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..8 {
        let s = random_packet_state(&grid, 3, (0.6, 1.2), &mut rng)?;
        let rho = observables::position_density(&s, &flat)?;
        d_rho = d_rho.max(max_abs_diff(rho.values(), &reference::standard_density(&s)?));
        let j_ref = reference::standard_current(&s, 1.0)?;
        let j_free = observables::probability_current_free(&s, &flat, 1.0)?;
        d_free = d_free.max(max_abs_diff(j_free.component(0), &j_ref));
        let j_int = observables::probability_current_interacting(&s, &flat, &WELL, 1.0)?;
        d_int = d_int.max(max_abs_diff(j_int.component(0), &j_ref));
    }

    let h = dynamics::build_hamiltonian(&grid, &WELL, &flat, 1.0)?;
    let spectrum = dynamics::eigensolve(&h, 3)?;
    let well = |x: f64| -4.0 * (-x * x / 2.0).exp();
    let fd = reference::fd_eigenvalues_extrapolated(well, 1.0, 1.0, grid.half_width(), 0.02, 3);
    let d_spec = max_abs_diff(&spectrum.energies, &fd);

    let start = make_gaussian_state(&grid, &[1.0], &[0.5], 0.7)?;
    let (dt, steps, stride) = (2.5e-5, 40_000, 4_000);
    let traj = dynamics::propagate(&start, &WELL, &flat, 1.0, dt, steps, stride)?;
    let prop = reference::PositionPropagator::new(&grid, &WELL.sample(&grid)?, 1.0)?;
    let psi0 = reference::naive_position_amplitude(&start)?;
    let mut d_traj = 0.0f64;
    for s in &traj.samples {
        let (x, p, dx, dp) = prop.moments(&prop.evolve(&psi0, s.time));
        for (a, b) in [(s.mean_x[0], x), (s.mean_p[0], p), (s.delta_x[0], dx), (s.delta_p[0], dp)] {
            d_traj = d_traj.max((a - b).abs());
        }
    }
    Ok(vec![
        Check::at_most("density", d_rho, 1e-8),
        Check::at_most("free current", d_free, 1e-8),
        Check::at_most("interacting current", d_int, 1e-8),
        Check::at_most("gaussian-well spectrum", d_spec, 1e-8),
        Check::at_most("trajectory moments", d_traj, 1e-8),
    ])
}

/// Gaussian, single-node and three-node Schoenberg kernels in one dimension.
pub fn test_kernels(l0: f64) -> Result<Vec<RadialKernel<f64>>> {
    // nodes chosen so that sum w u^2 hbar^2 matches l0^2 after normalization
    let rel = [1.0, 2.0, 1.0];
    let shape = [0.5, 1.0, 1.5];
    let s2: f64 = rel.iter().zip(&shape).map(|(w, u)| w * u * u).sum::<f64>() / rel.iter().sum::<f64>();
    let nodes: Vec<f64> = shape.iter().map(|u| u * l0 / s2.sqrt()).collect();
    Ok(vec![
        RadialKernel::gaussian(1, l0, 1.0)?,
        RadialKernel::schoenberg_single(1, l0, 1.0)?,
        RadialKernel::schoenberg(1, SchoenbergMeasure::normalized(nodes, rel.to_vec(), 1, 1.0)?, 1.0)?,
    ])
}

fn variance_identity() -> Result<Vec<Check>> {
    let grid = grid1(512, 0.05)?;
    let kernels = test_kernels(0.3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let mut worst = 0.0f64;
    let mut worst_l0 = 0.0f64;
    for k in &kernels {
        worst_l0 = worst_l0.max((k.l0() - 0.3).abs());
        for _ in 0..100 {
            let s = random_packet_state(&grid, 3, (0.4, 1.2), &mut rng)?;
            let rho = observables::position_density(&s, k)?;
            let var = rho.moment(0, 2) - rho.moment(0, 1).powi(2);
            let std = observables::standard_moments(&s, 0)?;
            let var_std = std[2] - std[1] * std[1];
            worst = worst.max((var - var_std - k.l0().powi(2)).abs());
        }
    }
    Ok(vec![
        Check::at_most("|dx^2 - var_std - l0^2| over 300 states", worst, 1e-8),
        Check::at_most("kernel l0 deviation", worst_l0, 1e-12),
    ])
}

fn uncertainty_relation() -> Result<Vec<Check>> {
    let grid = grid1(512, 0.05)?;
    let kernels = test_kernels(0.3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let mut violations = 0usize;
    let mut min_slack = f64::INFINITY;
    for i in 0..1200 {
        let k = &kernels[i % kernels.len()];
        let terms = 1 + i % 4;
        let s = random_packet_state(&grid, terms, (0.3, 1.5), &mut rng)?;
        let r = observables::uncertainty_report(&s, k)?;
        violations += usize::from(r.violated);
        min_slack = min_slack.min(r.axes[0].product - r.axes[0].bound);
    }
    let gauss = &kernels[0];
    let mut equality = 0.0f64;
    let mut sweep = Vec::new();
    for sigma in [0.25, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.2, 1.5] {
        let s = make_gaussian_state(&grid, &[0.5], &[1.0], sigma)?;
        let r = observables::uncertainty_report(&s, gauss)?;
        equality = equality.max((r.axes[0].product - r.axes[0].bound).abs());
        let rho = observables::position_density(&s, gauss)?;
        let dx = (rho.moment(0, 2) - rho.moment(0, 1).powi(2)).sqrt();
        sweep.push((sigma, dx));
    }
    let floor = observables::position_uncertainty_floor(&sweep)?;
    Ok(vec![
        Check::at_most("violations over 1200 states", violations as f64, 0.0),
        Check::at_least("smallest product - bound", min_slack, -1e-10),
        Check::at_most("minimum-uncertainty equality", equality, 1e-9),
        Check::at_most("|inf dx - l0|", (floor - gauss.l0()).abs(), 1e-6),
    ])
}

/// Two-particle acceptance setup: `m = (1, 2)`, Gaussian kernels of widths
/// 1.0 and 1.2 on 32-point grids with `dx = 0.25`, entangled state.
pub fn two_body_setup() -> Result<(ParticlePair<f64>, TwoParticleState<f64>)> {
    let g = grid1(32, 0.25)?;
    let pair = ParticlePair::new(1.0, 2.0, RadialKernel::gaussian(1, 1.0, 1.0)?, RadialKernel::gaussian(1, 1.2, 1.0)?)?;
    let a1 = make_gaussian_state(&g, &[-0.8], &[0.8], 0.75)?;
    let a2 = make_gaussian_state(&g, &[0.9], &[-0.5], 0.75)?;
    let b1 = make_gaussian_state(&g, &[0.8], &[-0.3], 0.8)?;
    let b2 = make_gaussian_state(&g, &[-0.7], &[0.6], 0.75)?;
    let state =
        TwoParticleState::superposition(&[(Complex::new(1.0, 0.0), &a1, &a2), (Complex::new(0.3, 0.6), &b1, &b2)])?
            .normalized()?;
    Ok((pair, state))
}

fn density_oracle() -> Result<Vec<Check>> {
    let grid = grid1(128, 0.1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let mut worst = 0.0f64;
    for k in test_kernels(0.5)? {
        let s = random_packet_state(&grid, 3, (0.4, 1.0), &mut rng)?;
        let fast = observables::position_density(&s, &k)?;
        worst = worst.max(max_abs_diff(fast.values(), &reference::direct_density(&s, &k)?));
    }
    let (pair, state) = two_body_setup()?;
    let fast = twobody::two_particle_density(&state, &pair)?;
    let slow = reference::direct_two_particle_density(&state, &pair)?;
    Ok(vec![
        Check::at_most("single particle, N=128", worst, 1e-8),
        Check::at_most("two particles, N=32", max_abs_diff(fast.values(), &slow), 1e-6),
    ])
}

/// Largest continuity residual of an evolution sampled every step.
pub fn continuity_run(potential: &PotentialSpec<f64>, l0: f64, dt: f64) -> Result<f64> {
    let grid = grid1(512, 0.05)?;
    let kernel = if l0 == 0.0 { RadialKernel::constant(1, 1.0)? } else { RadialKernel::gaussian(1, l0, 1.0)? };
    let (x0, p0) = match potential {
        PotentialSpec::Zero => (-2.0, 1.5),
        _ => (1.0, 0.5),
    };
    let start = make_gaussian_state(&grid, &[x0], &[p0], 0.8)?;
    let steps = (1.0 / dt).round() as usize;
    let traj = dynamics::propagate(&start, potential, &kernel, 1.0, dt, steps, 1)?;
    let pot = match potential {
        PotentialSpec::Zero => None,
        other => Some(other),
    };
    observables::continuity_residual(&traj.snapshots, &kernel, pot, 1.0, dt)
}

fn continuity() -> Result<Vec<Check>> {
    let harmonic = PotentialSpec::Harmonic { mass: 1.0, omega: 1.0 };
    let mut checks = Vec::new();
    for (name, pot) in [("free", PotentialSpec::Zero), ("harmonic", harmonic)] {
        for l0 in [0.0, 0.2] {
            let coarse = continuity_run(&pot, l0, 1e-3)?;
            let fine = continuity_run(&pot, l0, 5e-4)?;
            checks.push(Check::at_most(format!("{name} l0={l0} residual"), coarse, 1e-5));
            checks.push(Check::within(format!("{name} l0={l0} halving ratio"), coarse / fine, 3.5, 4.5));
        }
    }
    Ok(checks)
}

/// One period of a displaced packet in the `omega = m = 1` trap with
/// `l0 = 0.2`.
pub fn ehrenfest_trajectory() -> Result<(dynamics::TrajectoryRecord<f64>, PotentialSpec<f64>, RadialKernel<f64>)> {
    let grid = grid1(512, 0.05)?;
    let kernel = RadialKernel::gaussian(1, 0.2, 1.0)?;
    let trap = PotentialSpec::Harmonic { mass: 1.0, omega: 1.0 };
    let start = make_gaussian_state(&grid, &[1.0], &[0.0], std::f64::consts::FRAC_1_SQRT_2)?;
    let stride = 10;
    let steps = 6280;
    let dt = std::f64::consts::TAU / steps as f64;
    let traj = dynamics::propagate(&start, &trap, &kernel, 1.0, dt, steps, stride)?;
    Ok((traj, trap, kernel))
}

fn ehrenfest() -> Result<Vec<Check>> {
    let (traj, trap, kernel) = ehrenfest_trajectory()?;
    let report = dynamics::ehrenfest_check(&traj, &trap, &kernel)?;
    let track = traj.samples.iter().map(|s| (s.mean_x[0] - s.time.cos()).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("residual / force scale", report.max_residual / report.force_scale, 1e-4),
        Check::at_most("|<x> - x0 cos t|", track, 1e-4),
    ])
}

/// `L = (1e-3, 0)` bohr for all hydrogen rows.
pub fn hydrogen_rows() -> Result<Vec<twobody::HydrogenCorrection>> {
    (1..=5).map(|n| twobody::hydrogen_s_correction(n, 1e-3, 0.0)).collect()
}

fn hydrogen() -> Result<Vec<Check>> {
    let rows = hydrogen_rows()?;
    let scaled: Vec<f64> = rows.iter().map(|r| r.delta_e_8pi.abs() * (r.n as f64).powi(3)).collect();
    let spread = |v: &[f64]| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        (hi - lo) / hi
    };
    let coulomb_scaled: Vec<f64> = rows.iter().map(|r| r.delta_e_coulomb.abs() * (r.n as f64).powi(3)).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let quad = [1usize, 2]
        .iter()
        .map(|&n| {
            let q = reference::hydrogen_shift_quadrature(n, 1e-3, 0.0);
            let o = rows[n - 1].delta_e_coulomb;
            ((q - o) / o).abs()
        })
        .fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("8pi |dE| n^3 spread", spread(&scaled), 1e-10),
        Check::at_most("coulomb |dE| n^3 spread", spread(&coulomb_scaled), 1e-10),
        Check::at_most("delta vs quadrature (n=1,2)", quad, 1e-2),
        Check::at_most("8pi/coulomb ratio spread", spread(&ratios), 1e-12),
    ])
}

/// Reference bound values in Planck lengths.
pub const AURIGA_TARGET: f64 = 3.8e16;
pub const HYDROGEN_TARGET: f64 = 2.8e16;

pub fn bound_results(constants: &PhysicalConstants) -> Result<(bounds::BoundResult, bounds::BoundResult)> {
    let auriga = bounds::auriga_bound(&ExperimentRecord::auriga_default(constants), constants)?;
    let hydrogen = bounds::hydrogen_1s2s_bound(&ExperimentRecord::hydrogen_default(), Convention::EightPi, constants)?;
    Ok((auriga, hydrogen))
}

fn experimental_bounds() -> Result<Vec<Check>> {
    let c = PhysicalConstants::codata_2018();
    let (auriga, hydrogen) = bound_results(&c)?;
    let echoes = ["mass_kg", "omega_rad_s", "energy_j", "dimension"].iter().all(|k| auriga.inputs.contains_key(k))
        && hydrogen.inputs.contains_key("relative_uncertainty");
    Ok(vec![
        Check::at_most("AURIGA |log10(l0 / 3.8e16 l_P)|", (auriga.l0_max_planck / AURIGA_TARGET).log10().abs(), 1.0),
        Check::at_most(
            "1S-2S |log(L / 2.8e16 l_P)| / log 3",
            (hydrogen.l0_max_planck / HYDROGEN_TARGET).ln().abs() / 3f64.ln(),
            1.0,
        ),
        Check::flag("inputs echoed", echoes),
    ])
}

fn kernel_validity() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 10);
    let mut worst = f64::INFINITY;
    let mut failures = 0usize;
    for _ in 0..100 {
        let dim = rng.random_range(1..=3usize);
        let count = rng.random_range(1..=5usize);
        let mut nodes: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..5.0)).collect();
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let weights: Vec<f64> = nodes.iter().map(|_| rng.random_range(0.05..1.0)).collect();
        let kernel = RadialKernel::schoenberg(dim, SchoenbergMeasure::normalized(nodes, weights, dim, 1.0)?, 1.0)?;
        let points: Vec<Vec<f64>> = (0..64).map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let report = kernels::gram_psd_check(&kernel, &points, 1e-10)?;
        worst = worst.min(report.min_eigenvalue / report.max_eigenvalue);
        failures += usize::from(!report.positive_semidefinite);
    }
    let points: Vec<Vec<f64>> = (0..64).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let cosine = kernels::gram_psd_check_profile(|r: f64| (5.0 * r).cos(), &points, 1e-10)?;
    Ok(vec![
        Check::at_most("non-PSD random kernels", failures as f64, 0.0),
        Check::at_least("min eig / max eig", worst, -1e-10),
        Check::flag("cos(5r) in d=3 rejected", !cosine.positive_semidefinite),
    ])
}
