//! Independent reference implementations used to validate the fast paths.
//!
//! Nothing here shares code with the FFT pipeline: densities are direct sums
//! over momentum pairs, standard-QM quantities use naive Fourier sums or a
//! position-space basis, spectra come from a finite-difference discretization
//! solved by Sturm bisection, and the hydrogen contact term is checked by
//! radial quadrature of a softened Coulomb potential. These are slow by
//! design and meant for small grids.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::MomentumGrid;
use crate::kernels::RadialKernel;
use crate::scalar::Real;
use crate::twobody::{ParticlePair, TwoParticleState};
use crate::wavefunction::WaveState;

/// `rho(x) = sum_{p,k} f(|p-k|) psi~(p) psi~*(k) e^{i(p-k)x/hbar} dp^2d`,
/// summed directly at every position site.
pub fn direct_density<T: Real>(state: &WaveState<T>, kernel: &RadialKernel<T>) -> Result<Vec<T>> {
    let grid = *state.grid();
    if kernel.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: kernel.dim() });
    }
    let dim = grid.dim();
    let amps = state.amplitudes();
    let len = grid.len();
    let hbar = grid.hbar();
    let cell2 = grid.momentum_cell() * grid.momentum_cell();
    let momenta: Vec<[T; 3]> = (0..len).map(|j| grid.momentum_at(j)).collect();
    // kernel values only depend on the pair, not on x
    let weights: Vec<T> = (0..len * len)
        .into_par_iter()
        .map(|ij| {
            let (p, k) = (momenta[ij / len], momenta[ij % len]);
            let r2: T = (0..dim).map(|a| (p[a] - k[a]) * (p[a] - k[a])).sum();
            kernel.eval(r2.sqrt())
        })
        .collect();
    Ok((0..len)
        .into_par_iter()
        .map(|site| {
            let x = grid.position_at(site);
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 0..len {
                for j in 0..len {
                    let phase: T = (0..dim).map(|a| (momenta[i][a] - momenta[j][a]) * x[a]).sum::<T>() / hbar;
                    acc = acc + amps[i] * amps[j].conj() * Complex::from_polar(weights[i * len + j], phase);
                }
            }
            acc.re * cell2
        })
        .collect())
}

/// Two-particle density by the direct quadruple sum over `(p1, k1, p2, k2)`.
pub fn direct_two_particle_density<T: Real>(state: &TwoParticleState<T>, pair: &ParticlePair<T>) -> Result<Vec<T>> {
    let (g1, g2) = (*state.grid1(), *state.grid2());
    let (n1, n2) = (g1.n(), g2.n());
    let hbar = g1.hbar();
    let amps = state.amplitudes();
    let f1: Vec<T> =
        (0..n1 * n1).map(|ij| pair.kernel1().eval((g1.momentum(ij / n1) - g1.momentum(ij % n1)).abs())).collect();
    let f2: Vec<T> =
        (0..n2 * n2).map(|ij| pair.kernel2().eval((g2.momentum(ij / n2) - g2.momentum(ij % n2)).abs())).collect();
    let scale = (g1.dp() * g2.dp()).powi(2);
    Ok((0..n1 * n2)
        .into_par_iter()
        .map(|cell| {
            let (x1, x2) = (g1.position(cell / n2), g2.position(cell % n2));
            let e1: Vec<Complex<T>> = (0..n1 * n1)
                .map(|ij| Complex::from_polar(f1[ij], (g1.momentum(ij / n1) - g1.momentum(ij % n1)) * x1 / hbar))
                .collect();
            let e2: Vec<Complex<T>> = (0..n2 * n2)
                .map(|ij| Complex::from_polar(f2[ij], (g2.momentum(ij / n2) - g2.momentum(ij % n2)) * x2 / hbar))
                .collect();
            let mut acc = Complex::new(T::zero(), T::zero());
            for p1 in 0..n1 {
                for k1 in 0..n1 {
                    let w1 = e1[p1 * n1 + k1];
                    for p2 in 0..n2 {
                        let a = amps[p1 * n2 + p2];
                        for k2 in 0..n2 {
                            acc = acc + w1 * e2[p2 * n2 + k2] * a * amps[k1 * n2 + k2].conj();
                        }
                    }
                }
            }
            acc.re * scale
        })
        .collect())
}

/// `psi(x_j) = (2 pi hbar)^(-1/2) sum_p psi~(p) e^{ipx/hbar} dp` by a naive
/// sum, one dimension.
pub fn naive_position_amplitude<T: Real>(state: &WaveState<T>) -> Result<Vec<Complex<T>>> {
    naive_transform(state.amplitudes(), state.grid(), |p| Complex::new(T::one(), T::zero()) * p)
}

fn naive_transform<T: Real>(
    amps: &[Complex<T>],
    grid: &MomentumGrid<T>,
    weight: impl Fn(Complex<T>) -> Complex<T> + Sync,
) -> Result<Vec<Complex<T>>> {
    if grid.dim() != 1 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    let n = grid.n();
    let hbar = grid.hbar();
    let scale = grid.dp() / (T::TAU() * hbar).sqrt();
    Ok((0..n)
        .into_par_iter()
        .map(|l| {
            let x = grid.position(l);
            (0..n)
                .map(|j| weight(amps[j]) * Complex::from_polar(T::one(), grid.momentum(j) * x / hbar))
                .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
                * scale
        })
        .collect())
}

/// Standard-QM density `|psi(x)|^2`, one dimension.
pub fn standard_density<T: Real>(state: &WaveState<T>) -> Result<Vec<T>> {
    Ok(naive_position_amplitude(state)?.iter().map(|v| v.norm_sqr()).collect())
}

/// Standard-QM current `(hbar / m) Im(psi* d psi / dx)`, one dimension.
pub fn standard_current<T: Real>(state: &WaveState<T>, mass: T) -> Result<Vec<T>> {
    let grid = state.grid();
    let psi = naive_position_amplitude(state)?;
    let weighted: Vec<Complex<T>> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, a)| *a * Complex::new(T::zero(), grid.momentum(j) / grid.hbar()))
        .collect();
    let dpsi = naive_transform(&weighted, grid, |p| p)?;
    Ok(psi.iter().zip(&dpsi).map(|(a, b)| grid.hbar() / mass * (a.conj() * b).im).collect())
}

/// Number of eigenvalues below `lambda` of the symmetric tridiagonal matrix
/// with diagonal `diag` and constant off-diagonal `off` (Sturm sequence).
fn sturm_count(diag: &[f64], off: f64, lambda: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - lambda } else { d - lambda - off * off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + off.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `count` eigenvalues of `-hbar^2/(2m) d^2/dx^2 + V` on `[-L, L]`
/// with Dirichlet walls, three-point finite differences with spacing `h`.
pub fn fd_eigenvalues(
    potential: impl Fn(f64) -> f64,
    mass: f64,
    hbar: f64,
    half_width: f64,
    h: f64,
    count: usize,
) -> Vec<f64> {
    let points = (2.0 * half_width / h).round() as usize;
    let h = 2.0 * half_width / points as f64;
    let t = hbar * hbar / (2.0 * mass * h * h);
    let diag: Vec<f64> = (1..points).map(|i| 2.0 * t + potential(-half_width + i as f64 * h)).collect();
    let off = -t;
    let lo0 = diag.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 * t;
    let hi0 = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 * t;
    (0..count)
        .map(|k| {
            let (mut lo, mut hi) = (lo0, hi0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sturm_count(&diag, off, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// [`fd_eigenvalues`] at spacings `h`, `h/2`, `h/4` combined by Richardson
/// extrapolation (error `O(h^6)`).
pub fn fd_eigenvalues_extrapolated(
    potential: impl Fn(f64) -> f64 + Sync,
    mass: f64,
    hbar: f64,
    half_width: f64,
    h: f64,
    count: usize,
) -> Vec<f64> {
    let levels: Vec<Vec<f64>> = [h, h / 2.0, h / 4.0]
        .par_iter()
        .map(|&hh| fd_eigenvalues(&potential, mass, hbar, half_width, hh, count))
        .collect();
    (0..count)
        .map(|k| {
            let r1 = (4.0 * levels[1][k] - levels[0][k]) / 3.0;
            let r2 = (4.0 * levels[2][k] - levels[1][k]) / 3.0;
            (16.0 * r2 - r1) / 15.0
        })
        .collect()
}

/// Exact-in-time standard-QM propagator in the position basis of a 1D grid:
/// `H = T + diag(V)` with the Fourier-grid kinetic matrix
/// `T_jl = (1/N) sum_p (p^2 / 2m) e^{i p (x_j - x_l) / hbar}` built by
/// direct summation.
#[derive(Debug, Clone)]
pub struct PositionPropagator {
    grid: MomentumGrid<f64>,
    energies: Vec<f64>,
    vectors: Vec<Complex<f64>>,
}

impl PositionPropagator {
    pub fn new(grid: &MomentumGrid<f64>, potential: &[f64], mass: f64) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::UnsupportedDimension(grid.dim()));
        }
        let n = grid.n();
        if potential.len() != n {
            return Err(Error::InvalidInput(format!("expected {n} potential samples, got {}", potential.len())));
        }
        let hbar = grid.hbar();
        let kinetic: Vec<Complex<f64>> = (0..n)
            .map(|s| {
                // depends on j - l only
                let dxv = (s as f64) * grid.dx();
                (0..n)
                    .map(|m| {
                        let p = grid.momentum(m);
                        Complex::from_polar(p * p / (2.0 * mass) / n as f64, p * dxv / hbar)
                    })
                    .sum()
            })
            .collect();
        let mut h = vec![Complex::new(0.0, 0.0); n * n];
        for j in 0..n {
            for l in 0..n {
                let t = if j >= l { kinetic[j - l] } else { kinetic[l - j].conj() };
                h[j * n + l] = t + if j == l { Complex::new(potential[j], 0.0) } else { Complex::new(0.0, 0.0) };
            }
        }
        let (energies, vectors) = f64::hermitian_eigen(&h, n);
        Ok(Self { grid: *grid, energies, vectors })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `e^{-iHt/hbar} psi` for position amplitudes `psi`.
    pub fn evolve(&self, psi: &[Complex<f64>], t: f64) -> Vec<Complex<f64>> {
        let n = self.grid.n();
        let hbar = self.grid.hbar();
        let coeffs: Vec<Complex<f64>> = (0..n)
            .map(|k| {
                let c: Complex<f64> = (0..n).map(|j| self.vectors[j * n + k].conj() * psi[j]).sum();
                c * Complex::from_polar(1.0, -self.energies[k] * t / hbar)
            })
            .collect();
        (0..n).map(|j| (0..n).map(|k| self.vectors[j * n + k] * coeffs[k]).sum()).collect()
    }

    /// `(<x>, <p>, delta_x, delta_p)` of position amplitudes, with `p`
    /// obtained from a naive transform back to momentum space.
    pub fn moments(&self, psi: &[Complex<f64>]) -> (f64, f64, f64, f64) {
        let g = &self.grid;
        let n = g.n();
        let norm: f64 = psi.iter().map(|v| v.norm_sqr()).sum();
        let (mut x1, mut x2) = (0.0, 0.0);
        for (j, v) in psi.iter().enumerate() {
            let x = g.position(j);
            x1 += x * v.norm_sqr();
            x2 += x * x * v.norm_sqr();
        }
        let (mut p1, mut p2, mut pn) = (0.0, 0.0, 0.0);
        for m in 0..n {
            let p = g.momentum(m);
            let a: Complex<f64> =
                (0..n).map(|j| psi[j] * Complex::from_polar(1.0, -p * g.position(j) / g.hbar())).sum();
            let w = a.norm_sqr();
            pn += w;
            p1 += p * w;
            p2 += p * p * w;
        }
        let (mx, mp) = (x1 / norm, p1 / pn);
        (mx, mp, (x2 / norm - mx * mx).max(0.0).sqrt(), (p2 / pn - mp * mp).max(0.0).sqrt())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Generalized Laguerre polynomial `L_k^(alpha)(x)` by recurrence.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (mut l0, mut l1) = (1.0, 1.0 + alpha - x);
    for j in 1..k {
        let j = j as f64;
        let l2 = ((2.0 * j + 1.0 + alpha - x) * l1 - (j + alpha) * l0) / (j + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Hydrogen radial function `R_n0(r)` in bohr units.
pub fn hydrogen_radial_s(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    2.0 / nf.powf(2.5) * (-r / nf).exp() * laguerre(n - 1, 1.0, 2.0 * r / nf)
}

/// `<psi_n00| lap V_a |psi_n00>` for the softened Coulomb potential
/// `V_a = -1/sqrt(r^2 + a^2)`, whose Laplacian is `3 a^2 / (r^2 + a^2)^(5/2)`.
///
/// Integrates in `t = r/a` over geometrically growing panels.
pub fn softened_laplacian_expectation(n: usize, a: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(32);
    let r_max = 60.0 * n as f64 + 40.0;
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = 0.25;
    while lo * a < r_max {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, w) in nodes.iter().zip(&weights) {
            let t = mid + half * x;
            let r = a * t;
            let rad = hydrogen_radial_s(n, r);
            total += w * half * rad * rad * 3.0 * t * t / (t * t + 1.0).powf(2.5);
        }
        lo = hi;
        hi *= 2.0;
    }
    total
}

/// Softening lengths used for the extrapolation, in bohr.
pub const SOFTENING_LENGTHS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// [`softened_laplacian_expectation`] extrapolated to `a -> 0` by two
/// Richardson steps assuming an error series in powers of `a`.
pub fn laplacian_expectation_extrapolated(n: usize) -> f64 {
    let v: Vec<f64> = SOFTENING_LENGTHS.iter().map(|&a| softened_laplacian_expectation(n, a)).collect();
    let r1 = 2.0 * v[1] - v[0];
    let r2 = 2.0 * v[2] - v[1];
    (4.0 * r2 - r1) / 3.0
}

/// First-order S-level shift `-(L^2 / 2) <lap V>` from the quadrature oracle.
pub fn hydrogen_shift_quadrature(n: usize, l1: f64, l2: f64) -> f64 {
    -(l1 * l1 + l2 * l2) / 2.0 * laplacian_expectation_extrapolated(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn radial_functions_are_normalized() {
        let (x, w) = gauss_legendre(64);
        for n in 1..=4 {
            let mut s = 0.0;
            for panel in 0..40 {
                let (a, b) = (panel as f64 * 4.0, panel as f64 * 4.0 + 4.0);
                for (xi, wi) in x.iter().zip(&w) {
                    let r = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                    s += wi * 0.5 * (b - a) * (hydrogen_radial_s(n, r) * r).powi(2);
                }
            }
            assert!((s - 1.0).abs() < 1e-12, "n={n}: {s}");
            assert!((hydrogen_radial_s(n, 0.0).powi(2) - 4.0 / (n as f64).powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_fd_levels() {
        let e = fd_eigenvalues_extrapolated(|x| 0.5 * x * x, 1.0, 1.0, 12.0, 0.04, 4);
        for (k, v) in e.iter().enumerate() {
            assert!((v - (k as f64 + 0.5)).abs() < 1e-9, "{k}: {v}");
        }
    }
}
