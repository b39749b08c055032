//! Momentum-space states on uniform grids.
//!
//! The momentum amplitude `psi~(p)` is the fundamental object. The position
//! amplitude produced by [`WaveState::to_position_amplitudes`] is an auxiliary
//! Fourier transform; with a non-constant kernel `|psi(x)|^2` is not the
//! position density (see [`crate::observables::position_density`]).

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::MomentumGrid;
use crate::scalar::Real;

/// Ratio of the outermost-shell amplitude to the peak amplitude above which a
/// state is considered truncated by the grid.
pub const BOUNDARY_DECAY_LIMIT: f64 = 1e-8;

/// Momentum-space wave function sampled on a [`MomentumGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState<T> {
    grid: MomentumGrid<T>,
    amplitudes: Vec<Complex<T>>,
    time: T,
}

impl<T: Real> WaveState<T> {
    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(grid: MomentumGrid<T>, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} amplitudes for the grid, got {}",
                grid.len(),
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidInput("amplitudes must be finite".into()));
        }
        Ok(Self { grid, amplitudes, time: T::zero() })
    }

    /// Builds a normalized state from position-space amplitudes.
    pub fn from_position_amplitudes(grid: MomentumGrid<T>, values: &[Complex<T>]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!("expected {} position samples, got {}", grid.len(), values.len())));
        }
        let amps = fft::position_to_momentum(values, &grid);
        Self::from_amplitudes(grid, amps)
    }

    pub fn grid(&self) -> &MomentumGrid<T> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn with_time(mut self, time: T) -> Self {
        self.time = time;
        self
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitudes
    }

    /// `sum |psi~|^2 dp^d`.
    pub fn norm_squared(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>() * self.grid.momentum_cell()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n2 = self.norm_squared();
        if !(n2 > T::zero()) {
            return Err(Error::InvalidInput("cannot normalize a zero state".into()));
        }
        let s = n2.sqrt().recip();
        self.amplitudes.iter_mut().for_each(|a| *a = *a * s);
        Ok(self)
    }

    /// `psi(x) = (2 pi hbar)^(-d/2) int psi~(p) exp(i p x / hbar) d^d p` on the
    /// dual position lattice.
    pub fn to_position_amplitudes(&self) -> Vec<Complex<T>> {
        fft::momentum_to_position(&self.amplitudes, &self.grid)
    }

    /// `sum conj(a~) b~ dp^d`.
    pub fn overlap(&self, other: &Self) -> Result<Complex<T>> {
        if !self.grid.compatible(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let s: Complex<T> = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.momentum_cell())
    }

    /// Largest `|psi~|` on the outermost grid shell relative to the peak.
    pub fn boundary_decay(&self) -> T {
        let n = self.grid.n();
        let mut peak = T::zero();
        let mut edge = T::zero();
        for (flat, a) in self.amplitudes.iter().enumerate() {
            let m = a.norm();
            peak = peak.max(m);
            let idx = self.grid.unravel(flat);
            if idx[..self.grid.dim()].iter().any(|&i| i == 0 || i == n - 1) {
                edge = edge.max(m);
            }
        }
        if peak > T::zero() {
            edge / peak
        } else {
            T::zero()
        }
    }

    /// `true` when the state has decayed below [`BOUNDARY_DECAY_LIMIT`] at the
    /// grid edge; logs a warning otherwise.
    pub fn check_boundary_decay(&self) -> bool {
        let ratio = self.boundary_decay();
        let ok = ratio < T::lit(BOUNDARY_DECAY_LIMIT);
        if !ok {
            log::warn!("momentum amplitude at the grid edge is {ratio:e} of its peak");
        }
        ok
    }

    /// `<p_axis>` from `|psi~|^2`.
    pub fn mean_momentum(&self, axis: usize) -> T {
        self.momentum_moment(axis, 1)
    }

    pub(crate) fn momentum_moment(&self, axis: usize, power: i32) -> T {
        let cell = self.grid.momentum_cell();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(flat, a)| a.norm_sqr() * self.grid.momentum_at(flat)[axis].powi(power))
            .sum::<T>()
            * cell
    }

    /// Standard deviation of `p_axis` under `|psi~|^2`.
    pub fn momentum_spread(&self, axis: usize) -> T {
        let m1 = self.momentum_moment(axis, 1);
        let m2 = self.momentum_moment(axis, 2);
        (m2 - m1 * m1).max(T::zero()).sqrt()
    }
}

/// Minimum-uncertainty packet
/// `psi~(p) ~ exp(-sigma^2 (p - p0)^2 / hbar^2) exp(-i p x0 / hbar)`.
///
/// `|psi(x)|^2` is a normal density centered at `x0` with variance
/// `sigma_x^2` per axis.
pub fn make_gaussian_state<T: Real>(grid: &MomentumGrid<T>, x0: &[T], p0: &[T], sigma_x: T) -> Result<WaveState<T>> {
    let dim = grid.dim();
    if x0.len() != dim || p0.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: x0.len().max(p0.len()) });
    }
    check_packet_resolved(grid, x0, p0, sigma_x)?;
    let hbar = grid.hbar();
    let amps = (0..grid.len())
        .map(|flat| {
            let p = grid.momentum_at(flat);
            let mut exponent = T::zero();
            let mut phase = T::zero();
            for axis in 0..dim {
                let dpv = p[axis] - p0[axis];
                exponent -= sigma_x * sigma_x * dpv * dpv / (hbar * hbar);
                phase -= p[axis] * x0[axis] / hbar;
            }
            Complex::from_polar(exponent.exp(), phase)
        })
        .collect();
    WaveState::from_amplitudes(*grid, amps)?.normalized()
}

/// Factory precondition for Gaussian packets: `dx <= sigma/3`,
/// `hbar/(2 sigma) <= cutoff/3`, and the packet must sit inside the position
/// box with four and the momentum range with ten standard deviations to
/// spare. The momentum margin keeps the edge amplitude below
/// [`BOUNDARY_DECAY_LIMIT`]; the position margin only keeps the packet away
/// from its periodic images, so moments of packets near the box edge carry
/// wrap-around error.
pub fn check_packet_resolved<T: Real>(grid: &MomentumGrid<T>, x0: &[T], p0: &[T], sigma_x: T) -> Result<()> {
    if !(sigma_x > T::zero()) {
        return Err(Error::Resolution(format!("sigma_x must be positive, got {sigma_x}")));
    }
    let dx = grid.dx();
    let sigma_p = grid.hbar() / (T::lit(2.0) * sigma_x);
    let three = T::lit(3.0);
    if dx > sigma_x / three {
        return Err(Error::Resolution(format!("dx = {dx:e} exceeds sigma_x / 3 = {:e}", sigma_x / three)));
    }
    if sigma_p > grid.momentum_cutoff() / three {
        return Err(Error::Resolution(format!(
            "momentum width {sigma_p:e} exceeds a third of the cutoff {:e}",
            grid.momentum_cutoff()
        )));
    }
    let four = T::lit(4.0);
    for axis in 0..grid.dim() {
        if x0[axis].abs() + four * sigma_x > grid.half_width() {
            return Err(Error::Resolution(format!(
                "packet at x0 = {:e} with sigma {sigma_x:e} leaves the box of half width {:e}",
                x0[axis],
                grid.half_width()
            )));
        }
        if p0[axis].abs() + T::lit(10.0) * sigma_p > grid.momentum_cutoff() {
            return Err(Error::Resolution(format!(
                "packet at p0 = {:e} with width {sigma_p:e} reaches the momentum cutoff {:e}",
                p0[axis],
                grid.momentum_cutoff()
            )));
        }
    }
    Ok(())
}

/// Random normalized superposition of `terms` resolved Gaussian packets.
///
/// Centers are drawn from the inner third of the position box and the inner
/// quarter of the momentum range, widths between `sigma_range.0` and
/// `sigma_range.1`. Used to sample "generic" states for property checks.
pub fn random_packet_state<T: Real, R: Rng + ?Sized>(
    grid: &MomentumGrid<T>,
    terms: usize,
    sigma_range: (T, T),
    rng: &mut R,
) -> Result<WaveState<T>> {
    let dim = grid.dim();
    let mut amps = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for _ in 0..terms.max(1) {
        let u: f64 = rng.random();
        let sigma = sigma_range.0 + (sigma_range.1 - sigma_range.0) * T::lit(u);
        let sigma_p = grid.hbar() / (T::lit(2.0) * sigma);
        let x_span = (grid.half_width() / T::lit(3.0)).min(grid.half_width() - T::lit(4.0) * sigma);
        let p_span = (grid.momentum_cutoff() / T::lit(4.0)).min(grid.momentum_cutoff() - T::lit(10.0) * sigma_p);
        if x_span < T::zero() || p_span < T::zero() {
            return Err(Error::Resolution(format!("packet width {sigma:e} does not fit the grid")));
        }
        let x0: Vec<T> = (0..dim).map(|_| x_span * T::lit(rng.random_range(-1.0..1.0))).collect();
        let p0: Vec<T> = (0..dim).map(|_| p_span * T::lit(rng.random_range(-1.0..1.0))).collect();
        let packet = make_gaussian_state(grid, &x0, &p0, sigma)?;
        let c = Complex::from_polar(
            T::lit(rng.random_range(0.2..1.0)),
            T::lit(rng.random_range(0.0..std::f64::consts::TAU)),
        );
        for (a, b) in amps.iter_mut().zip(packet.amplitudes()) {
            *a = *a + c * b;
        }
    }
    WaveState::from_amplitudes(*grid, amps)?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn wide_grid() -> MomentumGrid<f64> {
        MomentumGrid::with_position_spacing(1, 512, 0.1, 1.0).unwrap()
    }

    fn position_moments(state: &WaveState<f64>) -> (f64, f64) {
        let g = state.grid();
        let psi = state.to_position_amplitudes();
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (j, v) in psi.iter().enumerate() {
            let x = g.position(j);
            m1 += x * v.norm_sqr() * g.dx();
            m2 += x * x * v.norm_sqr() * g.dx();
        }
        (m1, m2 - m1 * m1)
    }

    #[test]
    fn gaussian_factory_moments() {
        let g = wide_grid();
        let s = make_gaussian_state(&g, &[0.0], &[0.0], 1.0).unwrap();
        assert!((s.norm_squared() - 1.0).abs() < 1e-12);
        let (_, var) = position_moments(&s);
        assert!((var - 1.0).abs() < 1e-8);

        let s = make_gaussian_state(&g, &[2.0], &[0.0], 1.0).unwrap();
        assert!((position_moments(&s).0 - 2.0).abs() < 1e-8);

        let s = make_gaussian_state(&g, &[0.0], &[3.0], 1.0).unwrap();
        assert!((s.mean_momentum(0) - 3.0).abs() < 1e-8);
        assert!(s.check_boundary_decay());
    }

    #[test]
    fn factory_rejects_unresolved_packets() {
        let g = wide_grid();
        assert!(matches!(make_gaussian_state(&g, &[0.0], &[0.0], 0.2), Err(Error::Resolution(_))));
        assert!(matches!(make_gaussian_state(&g, &[24.0], &[0.0], 1.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn position_round_trip_and_parseval() {
        let g = MomentumGrid::with_position_spacing(2, 32, 0.2, 1.0).unwrap();
        let s = make_gaussian_state(&g, &[0.3, -0.4], &[0.5, 1.0], 0.7).unwrap();
        let psi = s.to_position_amplitudes();
        let norm: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.position_cell();
        assert!((norm - 1.0).abs() < 1e-10);
        let back = WaveState::from_position_amplitudes(g, &psi).unwrap();
        for (a, b) in back.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_momentum_cell_is_flat_in_position() {
        let g = MomentumGrid::new(1, 64, 0.25f64, 1.0).unwrap();
        let mut amps = vec![Complex::new(0.0, 0.0); 64];
        amps[40] = Complex::new(1.0, 0.0);
        let s = WaveState::from_amplitudes(g, amps).unwrap().normalized().unwrap();
        let psi = s.to_position_amplitudes();
        let m0 = psi[0].norm();
        assert!(psi.iter().all(|v| (v.norm() - m0).abs() < 1e-12));
    }

    #[test]
    fn overlaps() {
        let g = wide_grid();
        let a = make_gaussian_state(&g, &[0.0], &[0.0], 1.0).unwrap();
        assert!((a.overlap(&a).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-12);

        // even and odd combinations of mirrored packets are orthogonal
        let l = make_gaussian_state(&g, &[-2.0], &[0.0], 1.0).unwrap();
        let r = make_gaussian_state(&g, &[2.0], &[0.0], 1.0).unwrap();
        let even: Vec<_> = l.amplitudes().iter().zip(r.amplitudes()).map(|(x, y)| x + y).collect();
        let odd: Vec<_> = l.amplitudes().iter().zip(r.amplitudes()).map(|(x, y)| x - y).collect();
        let even = WaveState::from_amplitudes(g, even).unwrap().normalized().unwrap();
        let odd = WaveState::from_amplitudes(g, odd).unwrap().normalized().unwrap();
        assert!(even.overlap(&odd).unwrap().norm() < 1e-10);

        // displaced packets: |<a|b>| = exp(-dx^2 / (8 sigma^2))
        let b = make_gaussian_state(&g, &[1.5], &[0.0], 1.0).unwrap();
        let want = (-1.5f64 * 1.5 / 8.0).exp();
        assert!((a.overlap(&b).unwrap().norm() - want).abs() < 1e-12);

        let other =
            make_gaussian_state(&MomentumGrid::with_position_spacing(1, 256, 0.1, 1.0).unwrap(), &[0.0], &[0.0], 1.0)
                .unwrap();
        assert_eq!(a.overlap(&other), Err(Error::GridMismatch));
    }

    #[test]
    fn random_states_are_normalized_and_decay() {
        let g = MomentumGrid::with_position_spacing(1, 256, 0.1f64, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = random_packet_state(&g, 3, (0.5, 1.5), &mut rng).unwrap();
            assert!((s.norm_squared() - 1.0).abs() < 1e-12);
            assert!(s.check_boundary_decay());
        }
    }

    #[test]
    fn works_in_single_precision() {
        let g = MomentumGrid::<f32>::with_position_spacing(1, 128, 0.1, 1.0).unwrap();
        let s = make_gaussian_state(&g, &[0.5], &[0.0], 1.0).unwrap();
        let psi = s.to_position_amplitudes();
        let norm: f32 = psi.iter().map(|v| v.norm_sqr()).sum::<f32>() * g.dx();
        assert!((norm - 1.0).abs() < 1e-5);
    }
}
