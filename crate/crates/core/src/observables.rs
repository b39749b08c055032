//! POVM position observables: density, probability currents, moments and the
//! modified uncertainty relation.
//!
//! The density `rho(x) = sum_{p,k} f(|p-k|) psi~(p) psi~*(k) e^{i(p-k)x/hbar}`
//! is evaluated as `|psi|^2` filtered by the multiplier `f(q)/f(0)`. The
//! autocorrelation of a length-`N` momentum array has frequencies up to
//! `(N-1) dp`, so the auxiliary amplitude is built on the padded lattice
//! (`2N` points per axis, spacing `dx/2`) where the filter is exact; the
//! original sites are then read off the even indices. Currents use the same
//! pipeline.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{self, PotentialSpec};
use crate::error::{Error, Result};
use crate::fft;
use crate::grid::MomentumGrid;
use crate::kernels::{KernelFamily, RadialKernel};
use crate::scalar::{two_pi_hbar_pow, Real};
use crate::wavefunction::WaveState;

/// Negative density samples above `-DENSITY_FLOOR * max` are rounding noise.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Slack on the uncertainty bound before a report is flagged.
pub const UNCERTAINTY_SLACK: f64 = 1e-10;

/// Relative zero mode of the potential-current source above which a
/// warning is logged in one dimension.
pub const BETA_CONDITIONING_LIMIT: f64 = 1e-8;

/// POVM position density on the position lattice of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField<T> {
    grid: MomentumGrid<T>,
    values: Vec<T>,
    clamped: usize,
    min_raw: T,
}

impl<T: Real> DensityField<T> {
    /// Clamps negative samples to zero and records how many there were.
    pub fn from_raw(grid: MomentumGrid<T>, raw: Vec<T>) -> Self {
        let max = raw.iter().copied().fold(T::zero(), T::max);
        let min_raw = raw.iter().copied().fold(T::infinity(), T::min);
        if min_raw < -T::lit(DENSITY_FLOOR) * max {
            log::warn!("density dips to {min_raw:e} (peak {max:e}); clamped to zero");
        }
        let mut clamped = 0;
        let values = raw
            .into_iter()
            .map(|v| {
                if v < T::zero() {
                    clamped += 1;
                    T::zero()
                } else {
                    v
                }
            })
            .collect();
        Self { grid, values, clamped, min_raw }
    }

    pub fn grid(&self) -> &MomentumGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Number of negative raw samples set to zero.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }

    /// Smallest sample before clamping.
    pub fn min_raw(&self) -> T {
        self.min_raw
    }

    /// `sum rho dx^d`.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.grid.position_cell()
    }

    /// `int x_axis^n rho d^d x` by direct quadrature.
    pub fn moment(&self, axis: usize, n: i32) -> T {
        self.values.iter().enumerate().map(|(flat, &v)| v * self.grid.position_at(flat)[axis].powi(n)).sum::<T>()
            * self.grid.position_cell()
    }

    /// `int g(x) rho(x) d^d x` for a function of the position vector.
    pub fn expectation(&self, g: impl Fn(&[T; 3]) -> T) -> T {
        self.values.iter().enumerate().map(|(flat, &v)| v * g(&self.grid.position_at(flat))).sum::<T>()
            * self.grid.position_cell()
    }

    pub fn max_abs_diff(&self, other: &[T]) -> T {
        self.values.iter().zip(other).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max)
    }
}

/// Probability current and its divergence on the position lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField<T> {
    grid: MomentumGrid<T>,
    components: Vec<Vec<T>>,
    divergence: Vec<T>,
    beta_conditioning: Option<T>,
}

impl<T: Real> CurrentField<T> {
    pub fn grid(&self) -> &MomentumGrid<T> {
        &self.grid
    }

    /// Component `axis` of `J` at every site.
    pub fn component(&self, axis: usize) -> &[T] {
        &self.components[axis]
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    /// Spectral divergence `div J`.
    pub fn divergence(&self) -> &[T] {
        &self.divergence
    }

    /// For interacting currents: `|sum s| / sum 2|U||psi|`, the zero mode of
    /// the potential source `s = U psi* - psi U*` relative to its natural
    /// scale. It vanishes for a Hermitian potential; a sizable value means
    /// the `1/q` integrand is ill-posed.
    pub fn beta_conditioning(&self) -> Option<T> {
        self.beta_conditioning
    }

    /// `int J_axis d^d x`.
    pub fn total(&self, axis: usize) -> T {
        self.components[axis].iter().copied().sum::<T>() * self.grid.position_cell()
    }
}

/// Per-axis entries of an [`UncertaintyReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisUncertainty<T> {
    pub mean_x: T,
    pub mean_x2: T,
    pub delta_x: T,
    /// Variance of `|psi(x)|^2`, the standard-QM position variance.
    pub variance_std: T,
    pub mean_p: T,
    pub delta_p: T,
    /// `sqrt(hbar^2/4 + l0^2 delta_p^2)`.
    pub bound: T,
    pub product: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyReport<T> {
    pub l0: T,
    pub hbar: T,
    pub axes: Vec<AxisUncertainty<T>>,
    /// Set when `delta_x delta_p < bound - 1e-10` on some axis.
    pub violated: bool,
}

fn fine_amplitude<T: Real>(amps: &[Complex<T>], grid: &MomentumGrid<T>) -> Vec<Complex<T>> {
    fft::momentum_to_position(&fft::pad_momentum(amps, grid), &grid.padded())
}

fn forward<T: Real>(field: &[Complex<T>], grid: &MomentumGrid<T>) -> Vec<Complex<T>> {
    let mut buf = field.to_vec();
    fft::centered_dft(&mut buf, &grid.shape(), false);
    buf
}

/// Inverse of [`forward`] followed by decimation to the original sites.
fn back_to_sites<T: Real>(spectrum: Vec<Complex<T>>, padded: &MomentumGrid<T>, grid: &MomentumGrid<T>) -> Vec<T> {
    let mut buf = spectrum;
    fft::centered_dft(&mut buf, &padded.shape(), true);
    let norm = T::one() / T::from_usize(buf.len());
    fft::decimate(&buf, grid).into_iter().map(|c| c.re * norm).collect()
}

fn check_kernel<T: Real>(state: &WaveState<T>, kernel: &RadialKernel<T>) -> Result<()> {
    if kernel.dim() != state.grid().dim() {
        return Err(Error::DimensionMismatch { expected: state.grid().dim(), found: kernel.dim() });
    }
    Ok(())
}

/// POVM position density of `state` under `kernel`.
pub fn position_density<T: Real>(state: &WaveState<T>, kernel: &RadialKernel<T>) -> Result<DensityField<T>> {
    check_kernel(state, kernel)?;
    kernel.check_resolved(state.grid())?;
    let grid = state.grid();
    if matches!(kernel.family(), KernelFamily::Constant) {
        let raw = state.to_position_amplitudes().iter().map(|v| v.norm_sqr()).collect();
        return Ok(DensityField::from_raw(*grid, raw));
    }
    let padded = grid.padded();
    let sq: Vec<_> =
        fine_amplitude(state.amplitudes(), grid).iter().map(|v| Complex::new(v.norm_sqr(), T::zero())).collect();
    let mut spec = forward(&sq, &padded);
    for (flat, v) in spec.iter_mut().enumerate() {
        *v = *v * kernel.multiplier_at(&padded.momentum_at(flat));
    }
    Ok(DensityField::from_raw(*grid, back_to_sites(spec, &padded, grid)))
}

/// Kinetic (`alpha`) part of the current: `Re(phi_a psi*)/m` smoothed, with
/// `phi_a` the transform of `p_a psi~`.
fn alpha_current<T: Real>(state: &WaveState<T>, kernel: &RadialKernel<T>, mass: T) -> (Vec<Vec<T>>, Vec<T>) {
    let grid = state.grid();
    let padded = grid.padded();
    let hbar = grid.hbar();
    let psi = fine_amplitude(state.amplitudes(), grid);
    let mut components = Vec::with_capacity(grid.dim());
    let mut divergence = vec![T::zero(); grid.len()];
    for axis in 0..grid.dim() {
        let weighted: Vec<_> =
            state.amplitudes().iter().enumerate().map(|(flat, a)| *a * grid.momentum_at(flat)[axis]).collect();
        let phi = fine_amplitude(&weighted, grid);
        let h: Vec<_> = phi.iter().zip(&psi).map(|(f, s)| Complex::new((f * s.conj()).re / mass, T::zero())).collect();
        let spec = forward(&h, &padded);
        let mut smooth = spec.clone();
        let mut div = spec;
        for flat in 0..smooth.len() {
            let q = padded.momentum_at(flat);
            let m = kernel.multiplier_at(&q);
            smooth[flat] = smooth[flat] * m;
            div[flat] = div[flat] * Complex::new(T::zero(), m * q[axis] / hbar);
        }
        components.push(back_to_sites(smooth, &padded, grid));
        for (d, v) in divergence.iter_mut().zip(back_to_sites(div, &padded, grid)) {
            *d += v;
        }
    }
    (components, divergence)
}

/// Free-particle POVM current.
pub fn probability_current_free<T: Real>(
    state: &WaveState<T>,
    kernel: &RadialKernel<T>,
    mass: T,
) -> Result<CurrentField<T>> {
    check_kernel(state, kernel)?;
    kernel.check_resolved(state.grid())?;
    if !(mass > T::zero()) {
        return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
    }
    let (components, divergence) = alpha_current(state, kernel, mass);
    Ok(CurrentField { grid: *state.grid(), components, divergence, beta_conditioning: None })
}

/// POVM current in the presence of a potential.
///
/// Adds the potential (`beta`) term
/// `J_beta(x) = sum_q (q/|q|^2) (f(q)/f(0)) A(q) e^{iqx/hbar}`, where `A` is
/// the spectrum of `U psi* - psi U*` and `U` the auxiliary transform of the
/// deformed potential applied to the state. The integrand is singular at
/// `q = 0`; that cell receives the average of its `2d` lattice neighbours.
pub fn probability_current_interacting<T: Real>(
    state: &WaveState<T>,
    kernel: &RadialKernel<T>,
    potential: &PotentialSpec<T>,
    mass: T,
) -> Result<CurrentField<T>> {
    let mut field = probability_current_free(state, kernel, mass)?;
    let grid = state.grid();
    let dim = grid.dim();
    let padded = grid.padded();
    let hbar = grid.hbar();
    let u = dynamics::apply_deformed_potential(state, potential, kernel)?;
    let big_u = fine_amplitude(&u, grid);
    let psi = fine_amplitude(state.amplitudes(), grid);
    let s: Vec<_> = big_u.iter().zip(&psi).map(|(a, b)| a * b.conj() - b * a.conj()).collect();
    let spec = forward(&s, &padded);

    let n2 = padded.n();
    let center = (0..dim).fold(0usize, |acc, _| acc * n2 + n2 / 2);
    let stride = |axis: usize| n2.pow((dim - 1 - axis) as u32);
    let multipliers: Vec<T> = (0..spec.len()).map(|flat| kernel.multiplier_at(&padded.momentum_at(flat))).collect();

    let zero_mode: Complex<T> = s.iter().copied().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
    let scale: T = big_u.iter().zip(&psi).map(|(a, b)| T::lit(2.0) * a.norm() * b.norm()).sum();
    let conditioning = if scale > T::zero() { zero_mode.norm() / scale } else { T::zero() };
    for axis in 0..dim {
        let mut integrand: Vec<Complex<T>> = (0..spec.len())
            .map(|flat| {
                if flat == center {
                    return Complex::new(T::zero(), T::zero());
                }
                let q = padded.momentum_at(flat);
                let q2: T = q[..dim].iter().map(|&c| c * c).sum();
                spec[flat] * (multipliers[flat] * q[axis] / q2)
            })
            .collect();
        let mut avg = Complex::new(T::zero(), T::zero());
        for a in 0..dim {
            avg = avg + integrand[center + stride(a)] + integrand[center - stride(a)];
        }
        avg = avg / T::from_usize(2 * dim);
        integrand[center] = avg;
        // J_beta is real; the transform of an imaginary field under an odd
        // multiplier lands in the real part.
        let beta = back_to_sites(integrand, &padded, grid);
        for (j, b) in field.components[axis].iter_mut().zip(beta) {
            *j += b;
        }
    }
    let mut div_spec = spec;
    for (flat, v) in div_spec.iter_mut().enumerate() {
        *v = if flat == center {
            Complex::new(T::zero(), T::zero())
        } else {
            *v * Complex::new(T::zero(), multipliers[flat] / hbar)
        };
    }
    for (d, b) in field.divergence.iter_mut().zip(back_to_sites(div_spec, &padded, grid)) {
        *d += b;
    }
    if dim == 1 && conditioning > T::lit(BETA_CONDITIONING_LIMIT) {
        log::warn!("potential current source has a zero mode of relative size {conditioning:e}");
    }
    field.beta_conditioning = Some(conditioning);
    Ok(field)
}

/// Moments `int x^k |psi(x)|^2 d^d x` for `k = 0..=4` along one axis.
pub fn standard_moments<T: Real>(state: &WaveState<T>, axis: usize) -> Result<[T; 5]> {
    let grid = state.grid();
    if axis >= grid.dim() {
        return Err(Error::InvalidInput(format!("axis {axis} out of range for dimension {}", grid.dim())));
    }
    let psi = state.to_position_amplitudes();
    let mut m = [T::zero(); 5];
    for (flat, v) in psi.iter().enumerate() {
        let x = grid.position_at(flat)[axis];
        let w = v.norm_sqr();
        let mut xp = T::one();
        for slot in m.iter_mut() {
            *slot += w * xp;
            xp *= x;
        }
    }
    let cell = grid.position_cell();
    Ok(m.map(|v| v * cell))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `<x_axis^n>` under the POVM density via the kernel derivative expansion
/// `<x^n> = sum_j C(n,j) (i hbar)^j (2 pi hbar)^d xi_j <x^(n-j)>_std`.
pub fn moment<T: Real>(state: &WaveState<T>, kernel: &RadialKernel<T>, axis: usize, n: usize) -> Result<T> {
    if n > 4 {
        return Err(Error::UnsupportedOrder(n));
    }
    check_kernel(state, kernel)?;
    let std = standard_moments(state, axis)?;
    let hbar = state.grid().hbar();
    let scale = two_pi_hbar_pow(hbar, kernel.dim());
    let mut total = T::zero();
    for j in (0..=n).step_by(2) {
        let sign = if (j / 2) % 2 == 0 { T::one() } else { -T::one() };
        let coeff = T::from_usize(binomial(n, j)) * sign * hbar.powi(j as i32) * scale * kernel.xi(j)?;
        total += coeff * std[n - j];
    }
    Ok(total)
}

/// Position and momentum spreads together with the modified bound
/// `delta_x delta_p >= sqrt(hbar^2/4 + l0^2 delta_p^2)`.
pub fn uncertainty_report<T: Real>(state: &WaveState<T>, kernel: &RadialKernel<T>) -> Result<UncertaintyReport<T>> {
    check_kernel(state, kernel)?;
    let hbar = state.grid().hbar();
    let l0 = kernel.l0();
    let mut axes = Vec::with_capacity(kernel.dim());
    let mut violated = false;
    for axis in 0..kernel.dim() {
        let std = standard_moments(state, axis)?;
        let norm = std[0];
        let mean = std[1] / norm;
        let variance_std = (std[2] / norm - mean * mean).max(T::zero());
        let delta_x = (l0 * l0 + variance_std).sqrt();
        let mean_p = state.mean_momentum(axis) / state.norm_squared();
        let delta_p = state.momentum_spread(axis);
        let bound = (hbar * hbar / T::lit(4.0) + l0 * l0 * delta_p * delta_p).sqrt();
        let product = delta_x * delta_p;
        if product < bound - T::lit(UNCERTAINTY_SLACK) {
            violated = true;
            log::error!("uncertainty bound violated on axis {axis}: {product:e} < {bound:e}");
        }
        axes.push(AxisUncertainty {
            mean_x: mean,
            mean_x2: std[2] / norm + l0 * l0,
            delta_x,
            variance_std,
            mean_p,
            delta_p,
            bound,
            product,
        });
    }
    Ok(UncertaintyReport { l0, hbar, axes, violated })
}

/// Infimum of `delta_x` over a family of states from `(sigma_std, delta_x)`
/// samples, where `sigma_std` is the standard-QM spread of each state.
///
/// Fits `delta_x^2 = a + b sigma_std^2` by least squares and returns
/// `sqrt(a)`, the value approached as the state is squeezed to a point.
pub fn position_uncertainty_floor<T: Real>(samples: &[(T, T)]) -> Result<T> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let n = T::from_usize(samples.len());
    let xs: Vec<T> = samples.iter().map(|(s, _)| *s * *s).collect();
    let ys: Vec<T> = samples.iter().map(|(_, d)| *d * *d).collect();
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    if sxx == T::zero() {
        return Err(Error::InvalidInput("samples need distinct spreads".into()));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx).max(T::zero()).sqrt())
}

/// Per-interior-snapshot residual
/// `|| (rho_{k+1} - rho_{k-1}) / (2 dt) + div J_k ||_1 dx^d`.
///
/// `potential == None` uses the free current.
pub fn continuity_residuals<T: Real>(
    states: &[WaveState<T>],
    kernel: &RadialKernel<T>,
    potential: Option<&PotentialSpec<T>>,
    mass: T,
    dt: T,
) -> Result<Vec<T>> {
    if states.len() < 3 {
        return Err(Error::InsufficientSnapshots { needed: 3, found: states.len() });
    }
    if !(dt > T::zero()) {
        return Err(Error::InvalidInput(format!("snapshot spacing must be positive, got {dt}")));
    }
    let grid = *states[0].grid();
    if states.iter().any(|s| !s.grid().compatible(&grid)) {
        return Err(Error::GridMismatch);
    }
    let densities: Vec<DensityField<T>> =
        states.par_iter().map(|s| position_density(s, kernel)).collect::<Result<_>>()?;
    let interior: Vec<usize> = (1..states.len() - 1).collect();
    let cell = grid.position_cell();
    interior
        .par_iter()
        .map(|&k| {
            let current = match potential {
                Some(v) => probability_current_interacting(&states[k], kernel, v, mass)?,
                None => probability_current_free(&states[k], kernel, mass)?,
            };
            let next = densities[k + 1].values();
            let prev = densities[k - 1].values();
            let sum: T = (0..grid.len())
                .map(|j| ((next[j] - prev[j]) / (T::lit(2.0) * dt) + current.divergence()[j]).abs())
                .sum();
            Ok(sum * cell)
        })
        .collect()
}

/// Largest entry of [`continuity_residuals`].
pub fn continuity_residual<T: Real>(
    states: &[WaveState<T>],
    kernel: &RadialKernel<T>,
    potential: Option<&PotentialSpec<T>>,
    mass: T,
    dt: T,
) -> Result<T> {
    Ok(continuity_residuals(states, kernel, potential, mass, dt)?.into_iter().fold(T::zero(), T::max))
}
