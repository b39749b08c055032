//! Deformed Schroedinger dynamics in the momentum representation.
//!
//! The potential enters as the convolution kernel
//! `U~(p - p') = f(|p - p'|) V~(p - p')`, which in position space is the
//! multiplication operator `V_eff = V (*) g`. Dense Hamiltonians are built
//! directly from the convolution kernel; time stepping uses the position-space
//! form.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::MomentumGrid;
use crate::kernels::{KernelFamily, RadialKernel};
use crate::observables;
use crate::scalar::Real;
use crate::wavefunction::WaveState;

/// Largest basis size assembled as a dense matrix.
pub const DENSE_LIMIT: usize = 4096;

/// Largest basis size for the dense propagation cross-check.
pub const DENSE_PROPAGATION_LIMIT: usize = 1024;

/// Bound on `dt * E_kin,max / hbar`, the largest kinetic phase per step.
pub const STEP_PHASE_LIMIT: f64 = std::f64::consts::PI;

/// Relative norm change that aborts a propagation.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Real scalar potential `V(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialSpec<T> {
    /// `V = 0`.
    Zero,
    /// `V = m omega^2 |x|^2 / 2`.
    Harmonic { mass: T, omega: T },
    /// `V = depth exp(-|x|^2 / (2 width^2))` with `depth < 0`.
    GaussianWell { depth: T, width: T },
    /// Samples on the full position lattice; `axis` holds the per-axis
    /// coordinates shared by every axis.
    Tabulated { dim: usize, axis: Vec<T>, values: Vec<T> },
}

impl<T: Real> PotentialSpec<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Harmonic { .. } => "harmonic",
            Self::GaussianWell { .. } => "gaussian_well",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Zero => Ok(()),
            Self::Harmonic { mass, omega } => {
                if !(*mass > T::zero()) || !(*omega > T::zero()) || !mass.is_finite() || !omega.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "harmonic potential needs positive mass and frequency, got {mass}, {omega}"
                    )));
                }
                Ok(())
            }
            Self::GaussianWell { depth, width } => {
                if !(*depth < T::zero()) || !depth.is_finite() {
                    return Err(Error::InvalidInput(format!("well depth must be negative, got {depth}")));
                }
                if !(*width > T::zero()) || !width.is_finite() {
                    return Err(Error::InvalidInput(format!("well width must be positive, got {width}")));
                }
                Ok(())
            }
            Self::Tabulated { dim, axis, values } => {
                if axis.is_empty() || values.len() != axis.len().pow(*dim as u32) {
                    return Err(Error::InvalidInput(format!(
                        "tabulated potential needs {}^{dim} values, got {}",
                        axis.len(),
                        values.len()
                    )));
                }
                if values.iter().chain(axis).any(|v| !v.is_finite()) {
                    return Err(Error::NonRealPotential);
                }
                Ok(())
            }
        }
    }

    /// Closed-form value, `None` for tabulated data.
    pub fn value(&self, x: &[T; 3], dim: usize) -> Option<T> {
        let r2: T = x[..dim].iter().map(|&c| c * c).sum();
        match self {
            Self::Zero => Some(T::zero()),
            Self::Harmonic { mass, omega } => Some(*mass * *omega * *omega * r2 / T::lit(2.0)),
            Self::GaussianWell { depth, width } => Some(*depth * (-r2 / (T::lit(2.0) * *width * *width)).exp()),
            Self::Tabulated { .. } => None,
        }
    }

    fn check_tabulated_grid(&self, grid: &MomentumGrid<T>) -> Result<()> {
        if let Self::Tabulated { dim, axis, .. } = self {
            if *dim != grid.dim() {
                return Err(Error::DimensionMismatch { expected: grid.dim(), found: *dim });
            }
            let tol = grid.dx() * T::lit(1e-9);
            if axis.len() != grid.n() || axis.iter().zip(grid.position_axis()).any(|(a, b)| (*a - b).abs() > tol) {
                return Err(Error::GridMismatch);
            }
        }
        Ok(())
    }

    /// `V` at every site of the position lattice.
    pub fn sample(&self, grid: &MomentumGrid<T>) -> Result<Vec<T>> {
        self.validate()?;
        self.check_tabulated_grid(grid)?;
        if let Self::Tabulated { values, .. } = self {
            return Ok(values.clone());
        }
        Ok((0..grid.len()).map(|flat| self.value(&grid.position_at(flat), grid.dim()).expect("closed form")).collect())
    }

    /// `grad V` at every site; spectral differentiation for tabulated data.
    pub fn gradient(&self, grid: &MomentumGrid<T>) -> Result<Vec<[T; 3]>> {
        self.validate()?;
        self.check_tabulated_grid(grid)?;
        let dim = grid.dim();
        let zero = [T::zero(); 3];
        match self {
            Self::Zero => Ok(vec![zero; grid.len()]),
            Self::Harmonic { mass, omega } => Ok((0..grid.len())
                .map(|flat| {
                    let x = grid.position_at(flat);
                    let mut g = zero;
                    for a in 0..dim {
                        g[a] = *mass * *omega * *omega * x[a];
                    }
                    g
                })
                .collect()),
            Self::GaussianWell { width, .. } => Ok((0..grid.len())
                .map(|flat| {
                    let x = grid.position_at(flat);
                    let v = self.value(&x, dim).expect("closed form");
                    let mut g = zero;
                    for a in 0..dim {
                        g[a] = -x[a] / (*width * *width) * v;
                    }
                    g
                })
                .collect()),
            Self::Tabulated { values, .. } => {
                let field: Vec<_> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
                let mut out = vec![zero; grid.len()];
                for a in 0..dim {
                    let d = fft::spectral_filter(&field, grid, |q| Complex::new(T::zero(), q[a] / grid.hbar()));
                    for (o, v) in out.iter_mut().zip(d) {
                        o[a] = v.re;
                    }
                }
                Ok(out)
            }
        }
    }

    /// `V~(q) = int V(x) exp(-i q x / hbar) d^d x` in closed form where one
    /// exists (zero and Gaussian well).
    pub fn analytic_transform(&self, q: &[T; 3], dim: usize, hbar: T) -> Option<T> {
        match self {
            Self::GaussianWell { depth, width } => {
                let q2: T = q[..dim].iter().map(|&c| c * c).sum();
                let w2 = *width * *width;
                Some(
                    *depth
                        * (T::TAU() * w2).powf(T::from_usize(dim) / T::lit(2.0))
                        * (-w2 * q2 / (T::lit(2.0) * hbar * hbar)).exp(),
                )
            }
            _ => None,
        }
    }

    /// Lattice transform `sum_x V(x) exp(-i q x / hbar) dx^d` at every
    /// momentum site, periodic in the site index.
    pub fn lattice_transform(&self, grid: &MomentumGrid<T>) -> Result<Vec<Complex<T>>> {
        let mut buf: Vec<_> = self.sample(grid)?.into_iter().map(|v| Complex::new(v, T::zero())).collect();
        fft::centered_dft(&mut buf, &grid.shape(), false);
        let cell = grid.position_cell();
        buf.iter_mut().for_each(|v| *v = *v * cell);
        Ok(buf)
    }
}

/// Dense momentum-space Hamiltonian over all sites of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix<T> {
    grid: MomentumGrid<T>,
    mass: T,
    kernel: RadialKernel<T>,
    potential: PotentialSpec<T>,
    entries: Vec<Complex<T>>,
}

impl<T: Real> HamiltonianMatrix<T> {
    pub fn grid(&self) -> &MomentumGrid<T> {
        &self.grid
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn kernel(&self) -> &RadialKernel<T> {
        &self.kernel
    }

    pub fn potential(&self) -> &PotentialSpec<T> {
        &self.potential
    }

    /// Number of rows.
    pub fn size(&self) -> usize {
        self.grid.len()
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.size() + col]
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// `max |H - H^dagger| / max |H|`.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.size();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        let scale = self.max_abs();
        if scale > T::zero() {
            worst / scale
        } else {
            worst
        }
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.size();
        self.entries.par_chunks(n).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Per-axis lattice index difference wrapped into `[-N/2, N/2)` and shifted
/// to a centered array index.
fn wrapped_difference(grid: &MomentumGrid<impl Real>, i: usize, j: usize) -> usize {
    let n = grid.n();
    let (a, b) = (grid.unravel(i), grid.unravel(j));
    let mut flat = 0;
    for axis in 0..grid.dim() {
        let s = (a[axis] + n - b[axis]) % n;
        let centered = (s + n / 2) % n;
        flat = flat * n + centered;
    }
    flat
}

/// `H_ij = delta_ij |p_i|^2 / 2m + f(|p_i - p_j|) V~(p_i - p_j) dp^d`.
pub fn build_hamiltonian<T: Real>(
    grid: &MomentumGrid<T>,
    potential: &PotentialSpec<T>,
    kernel: &RadialKernel<T>,
    mass: T,
) -> Result<HamiltonianMatrix<T>> {
    if grid.dim() > 2 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    if kernel.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: kernel.dim() });
    }
    if grid.len() > DENSE_LIMIT {
        return Err(Error::MemoryGuard { size: grid.len(), limit: DENSE_LIMIT });
    }
    if !(mass > T::zero()) {
        return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
    }
    let vt = potential.lattice_transform(grid)?;
    let n = grid.len();
    let cell = grid.momentum_cell();
    let dim = grid.dim();
    let mut entries = vec![Complex::new(T::zero(), T::zero()); n * n];
    entries.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let pi = grid.momentum_at(i);
        for (j, slot) in row.iter_mut().enumerate() {
            let pj = grid.momentum_at(j);
            let r2: T = (0..dim).map(|a| (pi[a] - pj[a]) * (pi[a] - pj[a])).sum();
            *slot = vt[wrapped_difference(grid, i, j)] * (kernel.eval(r2.sqrt()) * cell);
        }
        let p2: T = pi[..dim].iter().map(|&c| c * c).sum();
        row[i] = row[i] + p2 / (T::lit(2.0) * mass);
    });
    Ok(HamiltonianMatrix { grid: *grid, mass, kernel: kernel.clone(), potential: potential.clone(), entries })
}

/// Lowest eigenpairs of a dense Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult<T> {
    pub energies: Vec<T>,
    pub states: Vec<WaveState<T>>,
    /// `||H v - E v||` per pair for unit coefficient vectors.
    pub residuals: Vec<T>,
    /// Largest accepted residual.
    pub tolerance: T,
    /// Spectral norm `max |E|` used to scale the tolerance.
    pub norm: T,
}

/// Diagonalizes `h` and returns its `count` lowest eigenpairs.
pub fn eigensolve<T: Real>(h: &HamiltonianMatrix<T>, count: usize) -> Result<SpectrumResult<T>> {
    let n = h.size();
    if count == 0 || count > n {
        return Err(Error::InvalidInput(format!("requested {count} eigenpairs of a {n}-dimensional matrix")));
    }
    let (values, vectors) = T::hermitian_eigen(h.entries(), n);
    let norm = values.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    let tolerance = T::lit(1e-8).max(T::epsilon() * T::lit(1e3)) * norm.max(T::min_positive_value());
    let scale = h.grid().momentum_cell().sqrt().recip();
    let mut energies = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for k in 0..count {
        let mut v: Vec<Complex<T>> = (0..n).map(|row| vectors[row * n + k]).collect();
        // deterministic phase: largest component real and positive
        let pivot =
            v.iter().copied().fold(Complex::new(T::zero(), T::zero()), |a, b| if b.norm() > a.norm() { b } else { a });
        if pivot.norm() > T::zero() {
            let phase = pivot.conj() / pivot.norm();
            v.iter_mut().for_each(|c| *c = *c * phase);
        }
        let hv = h.apply(&v);
        let res: T = hv.iter().zip(&v).map(|(a, b)| (*a - *b * values[k]).norm_sqr()).sum::<T>().sqrt();
        residuals.push(res);
        energies.push(values[k]);
        let amps = v.into_iter().map(|c| c * scale).collect();
        states.push(WaveState::from_amplitudes(*h.grid(), amps)?);
    }
    let worst = residuals.iter().copied().fold(T::zero(), T::max);
    if worst > tolerance {
        return Err(Error::Convergence { residual: worst.as_f64(), tolerance: tolerance.as_f64() });
    }
    Ok(SpectrumResult { energies, states, residuals, tolerance, norm })
}

/// `E_n = sum_i (n_i + 1/2) hbar omega + (d/2) m l0^2 omega^2`.
pub fn oscillator_spectrum_analytic<T: Real>(dim: usize, omega: T, mass: T, l0: T, n: &[usize], hbar: T) -> T {
    let quanta: T = n.iter().map(|&k| T::from_usize(k) + T::lit(0.5)).sum();
    quanta * hbar * omega + T::from_usize(dim) / T::lit(2.0) * mass * l0 * l0 * omega * omega
}

/// The `count` lowest analytic oscillator levels, degeneracies included.
pub fn oscillator_levels<T: Real>(dim: usize, omega: T, mass: T, l0: T, hbar: T, count: usize) -> Vec<T> {
    let mut levels = Vec::new();
    let mut total = 0usize;
    while levels.len() < count {
        // all multi-indices with sum == total
        let mut stack = vec![(Vec::<usize>::new(), total)];
        while let Some((prefix, left)) = stack.pop() {
            if prefix.len() == dim - 1 {
                let mut idx = prefix.clone();
                idx.push(left);
                levels.push(oscillator_spectrum_analytic(dim, omega, mass, l0, &idx, hbar));
                continue;
            }
            for k in 0..=left {
                let mut p = prefix.clone();
                p.push(k);
                stack.push((p, left - k));
            }
        }
        total += 1;
    }
    levels.truncate(count);
    levels
}

/// One row of [`oscillator_spectrum_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumComparison<T> {
    pub index: usize,
    pub numeric: T,
    pub analytic: T,
    pub diff: T,
    pub residual: T,
}

/// Numeric harmonic spectrum against the closed form.
pub fn oscillator_spectrum_check<T: Real>(
    grid: &MomentumGrid<T>,
    omega: T,
    mass: T,
    kernel: &RadialKernel<T>,
    count: usize,
) -> Result<Vec<SpectrumComparison<T>>> {
    let potential = PotentialSpec::Harmonic { mass, omega };
    let h = build_hamiltonian(grid, &potential, kernel, mass)?;
    let spectrum = eigensolve(&h, count)?;
    let analytic = oscillator_levels(grid.dim(), omega, mass, kernel.l0(), grid.hbar(), count);
    Ok(spectrum
        .energies
        .iter()
        .zip(&analytic)
        .zip(spectrum.states.iter().zip(&spectrum.residuals))
        .enumerate()
        .map(|(index, ((&numeric, &analytic), (state, &residual)))| {
            if !state.check_boundary_decay() {
                log::warn!("eigenstate {index} is not resolved by the grid");
            }
            SpectrumComparison { index, numeric, analytic, diff: numeric - analytic, residual }
        })
        .collect())
}

/// `V_eff = V (*) g` sampled on the position lattice.
pub fn effective_potential_samples<T: Real>(
    potential: &PotentialSpec<T>,
    kernel: &RadialKernel<T>,
    grid: &MomentumGrid<T>,
) -> Result<Vec<T>> {
    kernel.check_resolved(grid)?;
    let v = potential.sample(grid)?;
    if matches!(kernel.family(), KernelFamily::Constant) || matches!(potential, PotentialSpec::Zero) {
        return Ok(v);
    }
    let field: Vec<_> = v.into_iter().map(|x| Complex::new(x, T::zero())).collect();
    Ok(fft::spectral_filter(&field, grid, |q| Complex::new(kernel.multiplier_at(q), T::zero()))
        .into_iter()
        .map(|c| c.re)
        .collect())
}

/// The position-space multiplication operator equivalent to the deformed
/// potential term, as a tabulated potential.
pub fn effective_potential<T: Real>(
    potential: &PotentialSpec<T>,
    kernel: &RadialKernel<T>,
    grid: &MomentumGrid<T>,
) -> Result<PotentialSpec<T>> {
    let values = effective_potential_samples(potential, kernel, grid)?;
    Ok(PotentialSpec::Tabulated { dim: grid.dim(), axis: grid.position_axis(), values })
}

/// Momentum amplitudes of the deformed potential applied to a state.
pub fn apply_deformed_potential<T: Real>(
    state: &WaveState<T>,
    potential: &PotentialSpec<T>,
    kernel: &RadialKernel<T>,
) -> Result<Vec<Complex<T>>> {
    let veff = effective_potential_samples(potential, kernel, state.grid())?;
    let psi: Vec<_> = state.to_position_amplitudes().into_iter().zip(&veff).map(|(a, &v)| a * v).collect();
    Ok(fft::position_to_momentum(&psi, state.grid()))
}

/// Observables recorded along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySample<T> {
    pub time: T,
    pub mean_x: Vec<T>,
    pub mean_p: Vec<T>,
    pub delta_x: Vec<T>,
    pub delta_p: Vec<T>,
    /// Fourth POVM moment per axis.
    pub x4: Vec<T>,
    pub norm: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub mass: T,
    /// Time between consecutive samples and snapshots.
    pub sample_dt: T,
    pub samples: Vec<TrajectorySample<T>>,
    pub snapshots: Vec<WaveState<T>>,
}

fn sample_of<T: Real>(state: &WaveState<T>, kernel: &RadialKernel<T>) -> Result<TrajectorySample<T>> {
    let report = observables::uncertainty_report(state, kernel)?;
    let x4 = (0..state.grid().dim()).map(|a| observables::moment(state, kernel, a, 4)).collect::<Result<_>>()?;
    Ok(TrajectorySample {
        time: state.time(),
        mean_x: report.axes.iter().map(|a| a.mean_x).collect(),
        mean_p: report.axes.iter().map(|a| a.mean_p).collect(),
        delta_x: report.axes.iter().map(|a| a.delta_x).collect(),
        delta_p: report.axes.iter().map(|a| a.delta_p).collect(),
        x4,
        norm: state.norm_squared(),
    })
}

/// Strang split-step propagation: half kinetic step in momentum space, full
/// `V_eff` phase in position space, half kinetic step.
///
/// Records a sample and a snapshot at `t = 0` and every `stride` steps.
#[allow(clippy::too_many_arguments)]
pub fn propagate<T: Real>(
    state: &WaveState<T>,
    potential: &PotentialSpec<T>,
    kernel: &RadialKernel<T>,
    mass: T,
    dt: T,
    steps: usize,
    stride: usize,
) -> Result<TrajectoryRecord<T>> {
    let grid = *state.grid();
    if kernel.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: kernel.dim() });
    }
    if !(mass > T::zero()) || !(dt > T::zero()) || stride == 0 {
        return Err(Error::InvalidInput(format!(
            "need positive mass, time step and stride, got {mass}, {dt}, {stride}"
        )));
    }
    let hbar = grid.hbar();
    let cutoff = grid.momentum_cutoff();
    let e_max = T::from_usize(grid.dim()) * cutoff * cutoff / (T::lit(2.0) * mass);
    let ratio = dt * e_max / hbar;
    if ratio > T::lit(STEP_PHASE_LIMIT) {
        return Err(Error::StepSize { ratio: ratio.as_f64(), limit: STEP_PHASE_LIMIT });
    }
    let veff = effective_potential_samples(potential, kernel, &grid)?;
    let free = matches!(potential, PotentialSpec::Zero);
    let half = dt / (T::lit(2.0) * hbar);
    let kinetic: Vec<Complex<T>> = (0..grid.len())
        .map(|flat| {
            let p = grid.momentum_at(flat);
            let p2: T = p[..grid.dim()].iter().map(|&c| c * c).sum();
            let e = p2 / (T::lit(2.0) * mass);
            Complex::from_polar(T::one(), -e * if free { dt / hbar } else { half })
        })
        .collect();
    let potential_phase: Vec<Complex<T>> =
        veff.iter().map(|&v| Complex::from_polar(T::one(), -v * dt / hbar)).collect();

    let norm0 = state.norm_squared();
    let mut current = state.clone();
    let t0 = state.time();
    let mut samples = vec![sample_of(&current, kernel)?];
    let mut snapshots = vec![current.clone()];
    for step in 1..=steps {
        {
            let amps = current.amplitudes_mut();
            amps.iter_mut().zip(&kinetic).for_each(|(a, k)| *a = *a * k);
            if !free {
                let mut psi = fft::momentum_to_position(amps, &grid);
                psi.iter_mut().zip(&potential_phase).for_each(|(a, k)| *a = *a * k);
                let back = fft::position_to_momentum(&psi, &grid);
                for ((a, b), k) in amps.iter_mut().zip(back).zip(&kinetic) {
                    *a = b * k;
                }
            }
        }
        let drift = ((current.norm_squared() - norm0) / norm0).abs();
        if drift > T::lit(NORM_DRIFT_LIMIT) {
            return Err(Error::NormDrift { step, drift: drift.as_f64() });
        }
        if step % stride == 0 {
            current = current.with_time(t0 + dt * T::from_usize(step));
            samples.push(sample_of(&current, kernel)?);
            snapshots.push(current.clone());
        }
    }
    Ok(TrajectoryRecord { mass, sample_dt: dt * T::from_usize(stride), samples, snapshots })
}

/// `exp(-i H t / hbar) psi` through a full eigendecomposition.
pub fn propagate_dense<T: Real>(state: &WaveState<T>, h: &HamiltonianMatrix<T>, t: T) -> Result<WaveState<T>> {
    if !state.grid().compatible(h.grid()) {
        return Err(Error::GridMismatch);
    }
    let n = h.size();
    if n > DENSE_PROPAGATION_LIMIT {
        return Err(Error::MemoryGuard { size: n, limit: DENSE_PROPAGATION_LIMIT });
    }
    let (values, vectors) = T::hermitian_eigen(h.entries(), n);
    let hbar = h.grid().hbar();
    let psi = state.amplitudes();
    let coeffs: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let c: Complex<T> = (0..n).map(|row| vectors[row * n + k].conj() * psi[row]).sum();
            c * Complex::from_polar(T::one(), -values[k] * t / hbar)
        })
        .collect();
    let out: Vec<Complex<T>> =
        (0..n).into_par_iter().map(|row| (0..n).map(|k| vectors[row * n + k] * coeffs[k]).sum()).collect();
    Ok(WaveState::from_amplitudes(*h.grid(), out)?.with_time(state.time() + t))
}

/// Ehrenfest residuals `|m d^2<x>/dt^2 + <grad V>_rho|` at interior snapshots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EhrenfestReport<T> {
    pub times: Vec<T>,
    pub residuals: Vec<T>,
    pub max_residual: T,
    /// Largest `|<grad V>_rho|` seen, for relative comparisons.
    pub force_scale: T,
}

/// Checks `m d^2<x>/dt^2 = -int grad V rho d^d x` with `rho` the POVM density.
pub fn ehrenfest_check<T: Real>(
    traj: &TrajectoryRecord<T>,
    potential: &PotentialSpec<T>,
    kernel: &RadialKernel<T>,
) -> Result<EhrenfestReport<T>> {
    let snaps = &traj.snapshots;
    if snaps.len() < 5 {
        return Err(Error::InsufficientSnapshots { needed: 5, found: snaps.len() });
    }
    let grid = *snaps[0].grid();
    let dim = grid.dim();
    let grad = potential.gradient(&grid)?;
    let per_snapshot: Vec<(Vec<T>, Vec<T>)> = snaps
        .par_iter()
        .map(|s| {
            let rho = observables::position_density(s, kernel)?;
            let mean: Vec<T> = (0..dim).map(|a| rho.moment(a, 1)).collect();
            let force: Vec<T> = (0..dim)
                .map(|a| rho.values().iter().zip(&grad).map(|(&r, g)| r * g[a]).sum::<T>() * grid.position_cell())
                .collect();
            Ok((mean, force))
        })
        .collect::<Result<_>>()?;
    let dt = traj.sample_dt;
    let mut times = Vec::new();
    let mut residuals = Vec::new();
    let mut force_scale = T::zero();
    for (_, f) in &per_snapshot {
        for &v in f {
            force_scale = force_scale.max(v.abs());
        }
    }
    for k in 1..snaps.len() - 1 {
        let mut worst = T::zero();
        for a in 0..dim {
            let accel =
                (per_snapshot[k + 1].0[a] - T::lit(2.0) * per_snapshot[k].0[a] + per_snapshot[k - 1].0[a]) / (dt * dt);
            worst = worst.max((traj.mass * accel + per_snapshot[k].1[a]).abs());
        }
        times.push(snaps[k].time());
        residuals.push(worst);
    }
    let max_residual = residuals.iter().copied().fold(T::zero(), T::max);
    Ok(EhrenfestReport { times, residuals, max_residual, force_scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::make_gaussian_state;

    fn grid1(n: usize, dx: f64) -> MomentumGrid<f64> {
        MomentumGrid::with_position_spacing(1, n, dx, 1.0).unwrap()
    }

    #[test]
    fn zero_potential_is_kinetic_diagonal() {
        let g = grid1(16, 0.5);
        let k = RadialKernel::gaussian(1, 0.0, 1.0).unwrap();
        let h = build_hamiltonian(&g, &PotentialSpec::Zero, &k, 2.0).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let want = if i == j { g.momentum(i).powi(2) / 4.0 } else { 0.0 };
                assert!((h.get(i, j) - Complex::new(want, 0.0)).norm() < 1e-14);
            }
        }
        let s = eigensolve(&h, 5).unwrap();
        let mut kin: Vec<f64> = (0..16).map(|i| g.momentum(i).powi(2) / 4.0).collect();
        kin.sort_by(f64::total_cmp);
        for (a, b) in s.energies.iter().zip(&kin) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn deformation_scales_off_diagonals() {
        let g = grid1(32, 0.3);
        let v = PotentialSpec::GaussianWell { depth: -2.0, width: 1.0 };
        let c = build_hamiltonian(&g, &v, &RadialKernel::constant(1, 1.0).unwrap(), 1.0).unwrap();
        let k = RadialKernel::gaussian(1, 1.2, 1.0).unwrap();
        let h = build_hamiltonian(&g, &v, &k, 1.0).unwrap();
        assert!(h.hermiticity_defect() < 1e-12);
        for i in 0..32 {
            for j in 0..32 {
                if i != j {
                    let r = (g.momentum(i) - g.momentum(j)).abs();
                    assert!((h.get(i, j) - c.get(i, j) * k.multiplier(r)).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn analytic_levels() {
        assert!((oscillator_spectrum_analytic(1, 1.0, 1.0, 0.1, &[0], 1.0) - 0.505f64).abs() < 1e-15);
        assert!((oscillator_spectrum_analytic(3, 1.0, 1.0, 0.1, &[0, 0, 0], 1.0) - 1.515f64).abs() < 1e-15);
        let lv = oscillator_levels(2, 1.0f64, 1.0, 0.0, 1.0, 6);
        assert_eq!(lv, vec![1.0, 2.0, 2.0, 3.0, 3.0, 3.0]);
    }

    #[test]
    fn oscillator_shift_on_small_grid() {
        let g = MomentumGrid::with_momentum_extent(1, 128, 10.0f64, 1.0).unwrap();
        let k = RadialKernel::gaussian(1, 0.2, 1.0).unwrap();
        let rows = oscillator_spectrum_check(&g, 1.0, 1.0, &k, 6).unwrap();
        for r in rows {
            assert!(r.diff.abs() < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn harmonic_effective_potential_adds_variance() {
        let g = grid1(512, 0.05);
        let k = RadialKernel::gaussian(1, 0.3, 1.0).unwrap();
        let v = effective_potential_samples(&PotentialSpec::Harmonic { mass: 2.0, omega: 1.5 }, &k, &g).unwrap();
        for (j, &val) in v.iter().enumerate() {
            let x: f64 = g.position(j);
            if x.abs() < 6.0 {
                let want = 0.5 * 2.0 * 2.25 * (x * x + 0.09);
                assert!((val - want).abs() < 1e-8, "{x}: {val} vs {want}");
            }
        }
    }

    #[test]
    fn gaussian_well_effective_potential() {
        let g = grid1(512, 0.05);
        let k = RadialKernel::gaussian(1, 0.4, 1.0).unwrap();
        let v = effective_potential_samples(&PotentialSpec::GaussianWell { depth: -3.0, width: 0.8 }, &k, &g).unwrap();
        let s2: f64 = 0.64 + 0.16;
        for (j, &val) in v.iter().enumerate() {
            let x = g.position(j);
            let want = -3.0 * (0.64 / s2).sqrt() * (-x * x / (2.0 * s2)).exp();
            assert!((val - want).abs() < 1e-10);
        }
    }

    #[test]
    fn free_propagation_keeps_momentum_profile() {
        let g = grid1(256, 0.1);
        let s = make_gaussian_state(&g, &[0.0], &[1.0], 1.0).unwrap();
        let k = RadialKernel::gaussian(1, 0.5, 1.0).unwrap();
        let tr = propagate(&s, &PotentialSpec::Zero, &k, 1.0, 1e-3, 200, 50).unwrap();
        let last = tr.snapshots.last().unwrap();
        for (a, b) in s.amplitudes().iter().zip(last.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
        assert!((tr.samples.last().unwrap().mean_x[0] - 0.2).abs() < 1e-9);
    }

    #[test]
    fn step_guard_rejects_large_steps() {
        let g = grid1(256, 0.01);
        let s = make_gaussian_state(&g, &[0.0], &[0.0], 0.3).unwrap();
        let k = RadialKernel::constant(1, 1.0).unwrap();
        let r = propagate(&s, &PotentialSpec::Zero, &k, 1.0, 1e-2, 1, 1);
        assert!(matches!(r, Err(Error::StepSize { .. })));
    }

    #[test]
    fn memory_guard() {
        let g = MomentumGrid::new(2, 128, 0.1f64, 1.0).unwrap();
        let k = RadialKernel::constant(2, 1.0).unwrap();
        assert!(matches!(build_hamiltonian(&g, &PotentialSpec::Zero, &k, 1.0), Err(Error::MemoryGuard { .. })));
    }
}
