//! Two-particle densities, center-of-mass splitting and hydrogen S-level
//! corrections.
//!
//! The joint POVM kernel of two particles factorizes, `f = f1 f2`, so the
//! two-particle density is `|Psi(x1, x2)|^2` smoothed by `g1 (x) g2` and
//! product states have product densities. In the relative coordinate the
//! potential is deformed by `(2 pi hbar)^d f1 f2`, whose width is
//! `l_eff^2 = l1^2 + l2^2`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::MomentumGrid;
use crate::kernels::RadialKernel;
use crate::observables;
use crate::scalar::{two_pi_hbar_pow, Real};
use crate::wavefunction::WaveState;

/// Largest per-axis size for two-particle grids.
pub const TWO_BODY_MAX_N: usize = 64;

/// Masses and kernels of two distinguishable particles.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticlePair<T> {
    m1: T,
    m2: T,
    kernel1: RadialKernel<T>,
    kernel2: RadialKernel<T>,
}

impl<T: Real> ParticlePair<T> {
    pub fn new(m1: T, m2: T, kernel1: RadialKernel<T>, kernel2: RadialKernel<T>) -> Result<Self> {
        if !(m1 > T::zero()) || !(m2 > T::zero()) || !m1.is_finite() || !m2.is_finite() {
            return Err(Error::InvalidInput(format!("masses must be positive, got {m1}, {m2}")));
        }
        if kernel1.dim() != kernel2.dim() {
            return Err(Error::DimensionMismatch { expected: kernel1.dim(), found: kernel2.dim() });
        }
        if kernel1.hbar() != kernel2.hbar() {
            return Err(Error::InvalidInput("kernels use different values of hbar".into()));
        }
        Ok(Self { m1, m2, kernel1, kernel2 })
    }

    pub fn m1(&self) -> T {
        self.m1
    }

    pub fn m2(&self) -> T {
        self.m2
    }

    pub fn kernel1(&self) -> &RadialKernel<T> {
        &self.kernel1
    }

    pub fn kernel2(&self) -> &RadialKernel<T> {
        &self.kernel2
    }

    pub fn dim(&self) -> usize {
        self.kernel1.dim()
    }

    pub fn total_mass(&self) -> T {
        self.m1 + self.m2
    }

    pub fn reduced_mass(&self) -> T {
        self.m1 * self.m2 / (self.m1 + self.m2)
    }

    pub fn l1(&self) -> T {
        self.kernel1.l0()
    }

    pub fn l2(&self) -> T {
        self.kernel2.l0()
    }

    /// `sqrt(l1^2 + l2^2)`.
    pub fn l_eff(&self) -> T {
        self.l1().hypot(self.l2())
    }

    /// The pair with the particles' roles exchanged.
    pub fn swapped(&self) -> Self {
        Self { m1: self.m2, m2: self.m1, kernel1: self.kernel2.clone(), kernel2: self.kernel1.clone() }
    }
}

/// Joint momentum amplitude `Psi~(p1, p2)` of two one-dimensional particles,
/// row-major with `p1` the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleState<T> {
    grid1: MomentumGrid<T>,
    grid2: MomentumGrid<T>,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> TwoParticleState<T> {
    pub fn new(grid1: MomentumGrid<T>, grid2: MomentumGrid<T>, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        for g in [&grid1, &grid2] {
            if g.dim() != 1 {
                return Err(Error::UnsupportedDimension(g.dim()));
            }
            if g.n() > TWO_BODY_MAX_N {
                return Err(Error::InvalidGrid(format!(
                    "two-particle grids are limited to {TWO_BODY_MAX_N} points per axis, got {}",
                    g.n()
                )));
            }
        }
        if grid1.hbar() != grid2.hbar() {
            return Err(Error::InvalidGrid("particle grids use different values of hbar".into()));
        }
        if amplitudes.len() != grid1.n() * grid2.n() {
            return Err(Error::InvalidInput(format!(
                "expected {} amplitudes, got {}",
                grid1.n() * grid2.n(),
                amplitudes.len()
            )));
        }
        Ok(Self { grid1, grid2, amplitudes })
    }

    /// `s1 (x) s2`.
    pub fn product(s1: &WaveState<T>, s2: &WaveState<T>) -> Result<Self> {
        let amps = s1.amplitudes().iter().flat_map(|a| s2.amplitudes().iter().map(move |b| a * b)).collect();
        Self::new(*s1.grid(), *s2.grid(), amps)
    }

    /// `sum_k c_k (a_k (x) b_k)`, normalized.
    pub fn superposition(terms: &[(Complex<T>, &WaveState<T>, &WaveState<T>)]) -> Result<Self> {
        let (_, a0, b0) = terms.first().ok_or_else(|| Error::InvalidInput("empty superposition".into()))?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); a0.grid().n() * b0.grid().n()];
        for (c, a, b) in terms {
            if !a.grid().compatible(a0.grid()) || !b.grid().compatible(b0.grid()) {
                return Err(Error::GridMismatch);
            }
            let p = Self::product(a, b)?;
            for (x, y) in amps.iter_mut().zip(p.amplitudes) {
                *x = *x + *c * y;
            }
        }
        Self::new(*a0.grid(), *b0.grid(), amps)?.normalized()
    }

    pub fn grid1(&self) -> &MomentumGrid<T> {
        &self.grid1
    }

    pub fn grid2(&self) -> &MomentumGrid<T> {
        &self.grid2
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>() * self.grid1.dp() * self.grid2.dp()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_squared();
        if !(n > T::zero()) {
            return Err(Error::InvalidInput("cannot normalize a zero state".into()));
        }
        let s = n.sqrt().recip();
        self.amplitudes.iter_mut().for_each(|a| *a = *a * s);
        Ok(self)
    }

    /// Exchanges the particle labels: `Psi~(p1, p2) -> Psi~(p2, p1)`.
    pub fn swapped(&self) -> Self {
        let (n1, n2) = (self.grid1.n(), self.grid2.n());
        let mut amps = vec![Complex::new(T::zero(), T::zero()); n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                amps[j * n1 + i] = self.amplitudes[i * n2 + j];
            }
        }
        Self { grid1: self.grid2, grid2: self.grid1, amplitudes: amps }
    }
}

/// Configuration-space density `rho(x1, x2)`, row-major with `x1` slow.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyDensity<T> {
    grid1: MomentumGrid<T>,
    grid2: MomentumGrid<T>,
    values: Vec<T>,
}

impl<T: Real> TwoBodyDensity<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn grid1(&self) -> &MomentumGrid<T> {
        &self.grid1
    }

    pub fn grid2(&self) -> &MomentumGrid<T> {
        &self.grid2
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[i * self.grid2.n() + j]
    }

    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.grid1.dx() * self.grid2.dx()
    }

    /// `int rho dx2` as a function of `x1`.
    pub fn marginal1(&self) -> Vec<T> {
        let n2 = self.grid2.n();
        self.values.chunks(n2).map(|row| row.iter().copied().sum::<T>() * self.grid2.dx()).collect()
    }

    /// `int rho dx1` as a function of `x2`.
    pub fn marginal2(&self) -> Vec<T> {
        let n2 = self.grid2.n();
        let mut out = vec![T::zero(); n2];
        for row in self.values.chunks(n2) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += *v * self.grid1.dx();
            }
        }
        out
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }
}

fn check_pair_grids<T: Real>(state: &TwoParticleState<T>, pair: &ParticlePair<T>) -> Result<()> {
    if pair.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: pair.dim() });
    }
    pair.kernel1.check_resolved(&state.grid1)?;
    pair.kernel2.check_resolved(&state.grid2)
}

/// Two-particle POVM density, evaluated exactly through the padded
/// (`2N1 x 2N2`) auxiliary lattice.
pub fn two_particle_density<T: Real>(state: &TwoParticleState<T>, pair: &ParticlePair<T>) -> Result<TwoBodyDensity<T>> {
    check_pair_grids(state, pair)?;
    let (g1, g2) = (state.grid1, state.grid2);
    let (n1, n2) = (g1.n(), g2.n());
    let (p1, p2) = (g1.padded(), g2.padded());
    let shape = [2 * n1, 2 * n2];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); shape[0] * shape[1]];
    for i in 0..n1 {
        for j in 0..n2 {
            buf[(i + n1 / 2) * shape[1] + j + n2 / 2] = state.amplitudes[i * n2 + j];
        }
    }
    fft::centered_dft(&mut buf, &shape, true);
    let scale = g1.dp() * g2.dp() / (T::TAU() * g1.hbar());
    for v in buf.iter_mut() {
        *v = Complex::new((*v * scale).norm_sqr(), T::zero());
    }
    fft::centered_dft(&mut buf, &shape, false);
    for a in 0..shape[0] {
        let m1 = pair.kernel1.multiplier(p1.momentum(a).abs());
        for b in 0..shape[1] {
            buf[a * shape[1] + b] = buf[a * shape[1] + b] * (m1 * pair.kernel2.multiplier(p2.momentum(b).abs()));
        }
    }
    fft::centered_dft(&mut buf, &shape, true);
    let norm = T::one() / T::from_usize(buf.len());
    let mut values = Vec::with_capacity(n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            values.push((buf[2 * i * shape[1] + 2 * j].re * norm).max(T::zero()));
        }
    }
    Ok(TwoBodyDensity { grid1: g1, grid2: g2, values })
}

/// `max |rho(x1, x2) - rho1(x1) rho2(x2)|` for the product state `s1 (x) s2`.
pub fn separability_check<T: Real>(s1: &WaveState<T>, s2: &WaveState<T>, pair: &ParticlePair<T>) -> Result<T> {
    let joint = two_particle_density(&TwoParticleState::product(s1, s2)?, pair)?;
    let r1 = observables::position_density(s1, pair.kernel1())?;
    let r2 = observables::position_density(s2, pair.kernel2())?;
    Ok(max_product_deviation(&joint, r1.values(), r2.values()))
}

/// `max |rho(x1, x2) - rho_1(x1) rho_2(x2)|` with `rho_i` the marginals of
/// `rho`; zero exactly when the density factorizes.
pub fn marginal_product_deviation<T: Real>(density: &TwoBodyDensity<T>) -> T {
    max_product_deviation(density, &density.marginal1(), &density.marginal2())
}

fn max_product_deviation<T: Real>(joint: &TwoBodyDensity<T>, r1: &[T], r2: &[T]) -> T {
    let n2 = joint.grid2.n();
    joint.values.iter().enumerate().map(|(k, &v)| (v - r1[k / n2] * r2[k % n2]).abs()).fold(T::zero(), T::max)
}

/// Center-of-mass and relative momenta for a particle pair:
/// `p_c = p1 + p2`, `p_r = (m1 p2 - m2 p1) / M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComSplit<T> {
    pub total_mass: T,
    pub reduced_mass: T,
    /// `(p_c, p_r) = forward * (p1, p2)`.
    pub forward: [[T; 2]; 2],
    /// `(p1, p2) = inverse * (p_c, p_r)`.
    pub inverse: [[T; 2]; 2],
}

impl<T: Real> ComSplit<T> {
    pub fn to_relative(&self, p1: T, p2: T) -> (T, T) {
        let f = self.forward;
        (f[0][0] * p1 + f[0][1] * p2, f[1][0] * p1 + f[1][1] * p2)
    }

    pub fn from_relative(&self, pc: T, pr: T) -> (T, T) {
        let b = self.inverse;
        (b[0][0] * pc + b[0][1] * pr, b[1][0] * pc + b[1][1] * pr)
    }

    /// `(p_c^2 / 2M, p_r^2 / 2 mu)`; their sum is the total kinetic energy.
    pub fn energies(&self, p1: T, p2: T) -> (T, T) {
        let (pc, pr) = self.to_relative(p1, p2);
        let two = T::lit(2.0);
        (pc * pc / (two * self.total_mass), pr * pr / (two * self.reduced_mass))
    }
}

pub fn com_split<T: Real>(pair: &ParticlePair<T>) -> ComSplit<T> {
    let (m1, m2) = (pair.m1, pair.m2);
    let total = m1 + m2;
    ComSplit {
        total_mass: total,
        reduced_mass: pair.reduced_mass(),
        forward: [[T::one(), T::one()], [-m2 / total, m1 / total]],
        inverse: [[m1 / total, -T::one()], [m2 / total, T::one()]],
    }
}

/// Kernel deforming the relative-coordinate potential,
/// `(2 pi hbar)^d f1(|q|) f2(|q|)`.
pub fn deformed_relative_kernel<T: Real>(pair: &ParticlePair<T>, q: T) -> T {
    let q = q.abs();
    two_pi_hbar_pow(pair.kernel1.hbar(), pair.dim()) * pair.kernel1.eval(q) * pair.kernel2.eval(q)
}

/// Unit conventions for the hydrogen correction (Hartree atomic units).
pub const HYDROGEN_CONVENTION: &str = "hartree_atomic_units";

/// First-order shift of a hydrogen S level from the deformed Coulomb
/// potential, in hartree with lengths in bohr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HydrogenCorrection {
    pub n: usize,
    /// `-(1 / (2 n^2)) * 16 pi L^2 / n`.
    pub delta_e_8pi: f64,
    /// `-(L^2 / 2) (e^2 / eps0) |psi_n00(0)|^2 = -2 L^2 / n^3`.
    pub delta_e_coulomb: f64,
    /// `delta_e_8pi / delta_e_coulomb` (`4 pi` when both are nonzero).
    pub ratio: f64,
    pub convention: &'static str,
}

/// `|psi_n00(0)|^2 = 1 / (pi n^3)` in bohr^-3.
pub fn hydrogen_density_at_origin(n: usize) -> f64 {
    1.0 / (std::f64::consts::PI * (n as f64).powi(3))
}

/// Level shift for principal number `n` and orbital number `ell`; only S
/// states are shifted at this order.
pub fn hydrogen_correction(n: usize, ell: usize, l1: f64, l2: f64) -> Result<HydrogenCorrection> {
    if ell > 0 {
        return Err(Error::NonSState(ell));
    }
    if !(1..=10).contains(&n) {
        return Err(Error::InvalidInput(format!("principal quantum number must be in 1..=10, got {n}")));
    }
    if !(l1 >= 0.0 && l2 >= 0.0 && l1.is_finite() && l2.is_finite()) {
        return Err(Error::InvalidInput(format!("kernel widths must be finite and >= 0, got {l1}, {l2}")));
    }
    let pi = std::f64::consts::PI;
    let l2sum = l1 * l1 + l2 * l2;
    let nf = n as f64;
    let delta_e_8pi = -(1.0 / (2.0 * nf * nf)) * 16.0 * pi * l2sum / nf;
    // e^2 / eps0 = 4 pi in atomic units
    let delta_e_coulomb = -(l2sum / 2.0) * 4.0 * pi * hydrogen_density_at_origin(n);
    let ratio = if delta_e_coulomb != 0.0 { delta_e_8pi / delta_e_coulomb } else { f64::NAN };
    if ratio.is_finite() {
        log::info!("hydrogen n = {n}: literal/perturbative correction ratio {ratio:.6}");
    }
    Ok(HydrogenCorrection { n, delta_e_8pi, delta_e_coulomb, ratio, convention: HYDROGEN_CONVENTION })
}

/// [`hydrogen_correction`] for `ell = 0`.
pub fn hydrogen_s_correction(n: usize, l1: f64, l2: f64) -> Result<HydrogenCorrection> {
    hydrogen_correction(n, 0, l1, l2)
}
