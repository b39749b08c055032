//! Radial positive-definite kernels `f(|p - k|)`.
//!
//! A kernel fixes how sharply a state can be localized: its curvature at the
//! origin sets the minimal position uncertainty `l0`, and its Fourier
//! transform is the smoothing profile `g` that turns `|psi|^2` into the
//! measured position density. Three families are provided:
//!
//! * [`KernelFamily::Constant`], the standard-QM limit (`l0 = 0`);
//! * [`KernelFamily::Gaussian`], positive definite in every dimension;
//! * [`KernelFamily::SchoenbergDiscrete`], finite mixtures of the profiles
//!   [`omega`], which span the radial positive-definite class on `R^d`.
//!
//! All kernels are normalized so that `f(0) = (2 pi hbar)^-d`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::MomentumGrid;
use crate::scalar::{two_pi_hbar_pow, Real};

/// Below this argument [`omega`] switches to its power series.
const OMEGA_SERIES_CUTOFF: f64 = 1e-4;

/// Relative tolerance on `sum_k w_k = (2 pi hbar)^-d`.
const MEASURE_NORMALIZATION_TOL: f64 = 1e-10;

/// `Omega_d(r) = Gamma(d/2) (2/r)^((d-2)/2) J_((d-2)/2)(r)`:
/// `cos r`, `J_0(r)` and `sin(r)/r` for `d = 1, 2, 3`.
pub fn omega<T: Real>(dim: usize, r: T) -> Result<T> {
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let r = r.abs();
    if r < T::lit(OMEGA_SERIES_CUTOFF) {
        let d = T::from_usize(dim);
        let r2 = r * r;
        return Ok(T::one() - r2 / (T::lit(2.0) * d) + r2 * r2 / (T::lit(8.0) * d * (d + T::lit(2.0))));
    }
    Ok(match dim {
        1 => r.cos(),
        2 => r.bessel_j0(),
        _ => r.sin() / r,
    })
}

/// Finite positive measure on the half line, `sum_k w_k delta(u - u_k)`.
///
/// Nodes carry inverse-momentum units so that `r * u` is dimensionless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchoenbergMeasure<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> SchoenbergMeasure<T> {
    /// Validates an already normalized measure: `sum w = (2 pi hbar)^-d`.
    pub fn new(nodes: Vec<T>, weights: Vec<T>, dim: usize, hbar: T) -> Result<Self> {
        let m = Self::unchecked(nodes, weights)?;
        let target = two_pi_hbar_pow(hbar, dim).recip();
        let total: T = m.weights.iter().copied().sum();
        if ((total - target) / target).abs() > T::lit(MEASURE_NORMALIZATION_TOL) {
            return Err(Error::InvalidKernel(format!(
                "Schoenberg weights sum to {total}, expected (2 pi hbar)^-{dim} = {target}"
            )));
        }
        Ok(m)
    }

    /// Rescales positive relative weights so the measure is normalized.
    pub fn normalized(nodes: Vec<T>, relative_weights: Vec<T>, dim: usize, hbar: T) -> Result<Self> {
        let mut m = Self::unchecked(nodes, relative_weights)?;
        let total: T = m.weights.iter().copied().sum();
        let target = two_pi_hbar_pow(hbar, dim).recip();
        m.weights.iter_mut().for_each(|w| *w = *w / total * target);
        Ok(m)
    }

    fn unchecked(nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidKernel(format!(
                "need matching non-empty nodes and weights, got {} and {}",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().any(|u| !(*u >= T::zero()) || !u.is_finite()) {
            return Err(Error::InvalidKernel("nodes must be finite and >= 0".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidKernel("nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidKernel("weights must be finite and > 0".into()));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    fn total(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// `sum_k w_k u_k^power`.
    fn moment(&self, power: i32) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * u.powi(power)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelFamily<T> {
    Constant,
    Gaussian { l0: T },
    SchoenbergDiscrete(SchoenbergMeasure<T>),
}

/// Isotropic positive-definite kernel in `d` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialKernel<T> {
    dim: usize,
    family: KernelFamily<T>,
    hbar: T,
}

impl<T: Real> RadialKernel<T> {
    pub fn constant(dim: usize, hbar: T) -> Result<Self> {
        Self::new(dim, KernelFamily::Constant, hbar)
    }

    pub fn gaussian(dim: usize, l0: T, hbar: T) -> Result<Self> {
        Self::new(dim, KernelFamily::Gaussian { l0 }, hbar)
    }

    pub fn schoenberg(dim: usize, measure: SchoenbergMeasure<T>, hbar: T) -> Result<Self> {
        Self::new(dim, KernelFamily::SchoenbergDiscrete(measure), hbar)
    }

    /// Single-node Schoenberg kernel with the given `l0` (`u = sqrt(d) l0 / hbar`).
    pub fn schoenberg_single(dim: usize, l0: T, hbar: T) -> Result<Self> {
        let u = T::from_usize(dim).sqrt() * l0 / hbar;
        let measure = SchoenbergMeasure::normalized(vec![u], vec![T::one()], dim, hbar)?;
        Self::schoenberg(dim, measure, hbar)
    }

    pub fn new(dim: usize, family: KernelFamily<T>, hbar: T) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(hbar > T::zero()) || !hbar.is_finite() {
            return Err(Error::InvalidKernel(format!("hbar must be positive, got {hbar}")));
        }
        match &family {
            KernelFamily::Gaussian { l0 } if !(*l0 >= T::zero()) || !l0.is_finite() => {
                return Err(Error::InvalidKernel(format!("l0 must be finite and >= 0, got {l0}")));
            }
            KernelFamily::SchoenbergDiscrete(m) => {
                // re-validate normalization against this dimension and hbar
                SchoenbergMeasure::new(m.nodes.clone(), m.weights.clone(), dim, hbar)?;
            }
            _ => {}
        }
        Ok(Self { dim, family, hbar })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn family(&self) -> &KernelFamily<T> {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            KernelFamily::Constant => "constant",
            KernelFamily::Gaussian { .. } => "gaussian",
            KernelFamily::SchoenbergDiscrete(_) => "schoenberg",
        }
    }

    /// `f(0) = (2 pi hbar)^-d`.
    pub fn peak(&self) -> T {
        two_pi_hbar_pow(self.hbar, self.dim).recip()
    }

    /// `f(r)` for a momentum separation `r >= 0`.
    pub fn eval(&self, r: T) -> T {
        let f0 = self.peak();
        match &self.family {
            KernelFamily::Constant => f0,
            KernelFamily::Gaussian { l0 } => {
                let a = *l0 * r / self.hbar;
                f0 * (-(a * a) / T::lit(2.0)).exp()
            }
            KernelFamily::SchoenbergDiscrete(m) => m
                .nodes
                .iter()
                .zip(&m.weights)
                .map(|(&u, &w)| w * omega(self.dim, r * u).expect("dimension validated"))
                .sum(),
        }
    }

    /// `f(r) / f(0)`, the Fourier multiplier of the smoothing profile.
    pub fn multiplier(&self, r: T) -> T {
        self.eval(r) / self.peak()
    }

    pub(crate) fn multiplier_at(&self, q: &[T; 3]) -> T {
        let r2: T = q[..self.dim].iter().map(|&c| c * c).sum();
        self.multiplier(r2.sqrt())
    }

    /// Axis derivative `xi_j = d^j f / dp_i^j` at zero separation, `j <= 4`.
    ///
    /// Odd orders vanish for every radial kernel.
    pub fn xi(&self, order: usize) -> Result<T> {
        if order > 4 {
            return Err(Error::UnsupportedOrder(order));
        }
        if order == 0 {
            return Ok(self.peak());
        }
        if order % 2 == 1 {
            return Ok(T::zero());
        }
        let f0 = self.peak();
        let d = T::from_usize(self.dim);
        Ok(match &self.family {
            KernelFamily::Constant => T::zero(),
            KernelFamily::Gaussian { l0 } => {
                let a = *l0 * *l0 / (self.hbar * self.hbar);
                if order == 2 {
                    -f0 * a
                } else {
                    T::lit(3.0) * f0 * a * a
                }
            }
            // Omega_d(r) = 1 - r^2/(2d) + r^4/(8 d (d+2)) - ...
            KernelFamily::SchoenbergDiscrete(m) => {
                if order == 2 {
                    -m.moment(2) / d
                } else {
                    T::lit(3.0) * m.moment(4) / (d * (d + T::lit(2.0)))
                }
            }
        })
    }

    /// Minimal position uncertainty `l0 = sqrt(-xi_2 (2 pi hbar)^d hbar^2)`.
    pub fn l0(&self) -> T {
        match &self.family {
            KernelFamily::Constant => T::zero(),
            KernelFamily::Gaussian { l0 } => *l0,
            KernelFamily::SchoenbergDiscrete(m) => {
                self.hbar * (m.moment(2) / (T::from_usize(self.dim) * m.total())).sqrt()
            }
        }
    }

    /// Fails when a nonzero `l0` is narrower than four position cells.
    pub fn check_resolved(&self, grid: &MomentumGrid<T>) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: grid.dim(), found: self.dim });
        }
        let l0 = self.l0();
        let dx = grid.dx();
        if l0 > T::zero() && l0 < T::lit(4.0) * dx {
            return Err(Error::Resolution(format!(
                "kernel width l0 = {l0:e} is below four position cells (dx = {dx:e})"
            )));
        }
        Ok(())
    }
}

/// `l0` of an arbitrary radial profile from a 5-point central difference of
/// its second axis derivative at the origin, `step` in momentum units.
///
/// The profile must be normalized like a kernel, `profile(0) = (2 pi hbar)^-d`.
pub fn finite_difference_l0<T: Real>(profile: impl Fn(T) -> T, dim: usize, hbar: T, step: T) -> T {
    let h = step;
    let f0 = profile(T::zero());
    let f1 = profile(h);
    let f2 = profile(T::lit(2.0) * h);
    let xi2 = (T::lit(32.0) * f1 - T::lit(2.0) * f2 - T::lit(30.0) * f0) / (T::lit(12.0) * h * h);
    (-xi2 * two_pi_hbar_pow(hbar, dim) * hbar * hbar).max(T::zero()).sqrt()
}

/// Finite-difference step matched to a kernel of width `l0`: one percent of
/// the momentum scale `hbar / l0`.
pub fn finite_difference_step<T: Real>(l0: T, hbar: T) -> T {
    if l0 > T::zero() {
        T::lit(0.01) * hbar / l0
    } else {
        T::lit(1e-3)
    }
}

/// Outcome of a Gram-matrix positivity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramReport<T> {
    pub positive_semidefinite: bool,
    pub min_eigenvalue: T,
    pub max_eigenvalue: T,
    /// All points coincide, so the Gram matrix has rank one.
    pub degenerate: bool,
}

/// Positive semi-definiteness of `[f(|p_i - p_j|)]` for a kernel.
pub fn gram_psd_check<T: Real>(kernel: &RadialKernel<T>, points: &[Vec<T>], tol: T) -> Result<GramReport<T>> {
    if points.iter().any(|p| p.len() != kernel.dim()) {
        let bad = points.iter().find(|p| p.len() != kernel.dim()).map_or(0, |p| p.len());
        return Err(Error::DimensionMismatch { expected: kernel.dim(), found: bad });
    }
    gram_psd_check_profile(|r| kernel.eval(r), points, tol)
}

/// Same test for an arbitrary radial profile, e.g. a candidate that is not
/// positive definite.
pub fn gram_psd_check_profile<T: Real>(profile: impl Fn(T) -> T, points: &[Vec<T>], tol: T) -> Result<GramReport<T>> {
    if points.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 points, got {}", points.len())));
    }
    let n = points.len();
    let degenerate = points.iter().all(|p| p == &points[0]);
    if degenerate {
        log::warn!("Gram check on {n} identical points");
    }
    let mut gram = vec![Complex::new(T::zero(), T::zero()); n * n];
    for i in 0..n {
        for j in 0..n {
            let r2: T = points[i].iter().zip(&points[j]).map(|(&a, &b)| (a - b) * (a - b)).sum();
            gram[i * n + j] = Complex::new(profile(r2.sqrt()), T::zero());
        }
    }
    let (values, _) = T::hermitian_eigen(&gram, n);
    let min = values[0];
    let max = values[n - 1];
    Ok(GramReport {
        positive_semidefinite: min >= -tol * max.abs(),
        min_eigenvalue: min,
        max_eigenvalue: max,
        degenerate,
    })
}

/// Smoothing profile `g(x) = int f(|q|) exp(i q x / hbar) d^d q` sampled on
/// the position lattice of `grid`, as a density (mass per cell / dx^d).
///
/// Singular profiles are represented by cell masses: the constant kernel is a
/// unit mass at the origin cell, and each Schoenberg node deposits a uniform
/// shell of radius `hbar u` with multilinear (cloud-in-cell) weights.
pub fn smoothing_profile<T: Real>(kernel: &RadialKernel<T>, grid: &MomentumGrid<T>) -> Result<Vec<T>> {
    kernel.check_resolved(grid)?;
    let dim = grid.dim();
    let cell = grid.position_cell();
    let mut g = vec![T::zero(); grid.len()];
    match kernel.family() {
        KernelFamily::Constant => {
            let center = (0..dim).fold(0usize, |acc, _| acc * grid.n() + grid.n() / 2);
            g[center] = cell.recip();
        }
        KernelFamily::Gaussian { l0 } if *l0 == T::zero() => {
            let center = (0..dim).fold(0usize, |acc, _| acc * grid.n() + grid.n() / 2);
            g[center] = cell.recip();
        }
        KernelFamily::Gaussian { l0 } => {
            let var = *l0 * *l0;
            let norm = (T::TAU() * var).powf(-T::from_usize(dim) / T::lit(2.0));
            for (flat, v) in g.iter_mut().enumerate() {
                let x = grid.position_at(flat);
                let r2: T = x[..dim].iter().map(|&c| c * c).sum();
                *v = norm * (-r2 / (T::lit(2.0) * var)).exp();
            }
        }
        KernelFamily::SchoenbergDiscrete(m) => {
            let total = m.total();
            for (&u, &w) in m.nodes().iter().zip(m.weights()) {
                let radius = kernel.hbar() * u;
                let points = shell_points(dim, radius, grid.dx());
                let mass = w / total / T::from_usize(points.len());
                for p in &points {
                    deposit(&mut g, grid, p, mass)?;
                }
            }
            g.iter_mut().for_each(|v| *v /= cell);
        }
    }
    Ok(g)
}

/// Quadrature points uniformly covering a sphere of the given radius.
fn shell_points<T: Real>(dim: usize, radius: T, dx: T) -> Vec<[T; 3]> {
    let zero = T::zero();
    if radius == zero {
        return vec![[zero; 3]];
    }
    let ratio = (radius / dx).to_f64().unwrap_or(1.0);
    match dim {
        1 => vec![[radius, zero, zero], [-radius, zero, zero]],
        2 => {
            let count = ((std::f64::consts::TAU * ratio * 8.0).ceil() as usize).max(64);
            (0..count)
                .map(|k| {
                    let phi = T::TAU() * T::from_usize(k) / T::from_usize(count);
                    [radius * phi.cos(), radius * phi.sin(), zero]
                })
                .collect()
        }
        _ => {
            // Fibonacci lattice on the unit sphere
            let count = ((4.0 * std::f64::consts::PI * ratio * ratio * 8.0).ceil() as usize).max(512);
            let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
            (0..count)
                .map(|k| {
                    let z = T::one() - T::lit(2.0) * (T::from_usize(k) + T::lit(0.5)) / T::from_usize(count);
                    let rho = (T::one() - z * z).sqrt();
                    let phi = golden * T::from_usize(k);
                    [radius * rho * phi.cos(), radius * rho * phi.sin(), radius * z]
                })
                .collect()
        }
    }
}

/// Cloud-in-cell deposit of `mass` at `point` onto the position lattice.
fn deposit<T: Real>(g: &mut [T], grid: &MomentumGrid<T>, point: &[T; 3], mass: T) -> Result<()> {
    let dim = grid.dim();
    let n = grid.n();
    let dx = grid.dx();
    let mut lower = [0usize; 3];
    let mut frac = [T::zero(); 3];
    for axis in 0..dim {
        let s = point[axis] / dx + T::from_usize(n / 2);
        let fl = s.floor();
        if fl < T::zero() || fl >= T::from_usize(n - 1) {
            return Err(Error::Resolution(format!(
                "smoothing shell at {:e} leaves the position box (half width {:e})",
                point[axis],
                grid.half_width()
            )));
        }
        lower[axis] = fl.to_usize().expect("non-negative");
        frac[axis] = s - fl;
    }
    for corner in 0..(1usize << dim) {
        let mut flat = 0usize;
        let mut weight = mass;
        for axis in 0..dim {
            let hi = (corner >> axis) & 1 == 1;
            let idx = lower[axis] + usize::from(hi);
            flat = flat * n + idx;
            weight *= if hi { frac[axis] } else { T::one() - frac[axis] };
        }
        g[flat] += weight;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    /// Power series of `J_nu(r)` with `nu` possibly half-integer.
    fn bessel_series(nu: f64, r: f64) -> f64 {
        let mut sum = 0.0;
        for k in 0..60 {
            let term = (-1.0f64).powi(k) * (r / 2.0).powf(2.0 * k as f64 + nu)
                / (libm::tgamma(k as f64 + 1.0) * libm::tgamma(k as f64 + nu + 1.0));
            sum += term;
        }
        sum
    }

    fn omega_oracle(d: usize, r: f64) -> f64 {
        let nu = (d as f64 - 2.0) / 2.0;
        libm::tgamma(d as f64 / 2.0) * (2.0 / r).powf(nu) * bessel_series(nu, r)
    }

    #[test]
    fn omega_at_zero_is_one() {
        for d in 1..=3 {
            assert_eq!(omega(d, 0.0f64).unwrap(), 1.0);
        }
        assert!(omega(4, 0.0f64).is_err());
    }

    #[test]
    fn omega_matches_bessel_series() {
        for d in 1..=3 {
            for &r in &[1e-5, 3e-4, 0.1, 0.7, 1.3, 2.9, 5.0, 8.4] {
                let got = omega(d, r).unwrap();
                let want = omega_oracle(d, r);
                assert!((got - want).abs() < 1e-12, "d={d} r={r}: {got} vs {want}");
            }
        }
        for &r in &[0.2, 1.0, 4.0] {
            assert!((omega(1, r).unwrap() - f64::cos(r)).abs() < 1e-15);
        }
        assert!(omega(3, PI).unwrap().abs() < 1e-15);
    }

    #[test]
    fn eval_examples() {
        let c = RadialKernel::constant(1, 1.0f64).unwrap();
        assert!((c.eval(3.7) - 1.0 / TAU).abs() < 1e-15);
        let g = RadialKernel::gaussian(1, 1.0f64, 1.0).unwrap();
        assert!((g.eval(1.0) - (-0.5f64).exp() / TAU).abs() < 1e-15);
        let m = SchoenbergMeasure::new(vec![1.0], vec![TAU.powi(-3)], 3, 1.0f64).unwrap();
        let s = RadialKernel::schoenberg(3, m, 1.0).unwrap();
        assert!(s.eval(PI).abs() < 1e-17);
    }

    #[test]
    fn l0_examples() {
        assert_eq!(RadialKernel::constant(2, 1.0f64).unwrap().l0(), 0.0);
        assert_eq!(RadialKernel::gaussian(3, 0.1f64, 1.0).unwrap().l0(), 0.1);
        for d in 1..=3 {
            let hbar = 0.7;
            let w = (TAU * hbar).powi(-(d as i32));
            let m = SchoenbergMeasure::new(vec![1.5], vec![w], d, hbar).unwrap();
            let k = RadialKernel::schoenberg(d, m, hbar).unwrap();
            assert!((k.l0() - hbar * 1.5 / (d as f64).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn measure_validation() {
        assert!(SchoenbergMeasure::new(vec![1.0], vec![0.5], 1, 1.0f64).is_err());
        assert!(SchoenbergMeasure::normalized(vec![2.0, 1.0], vec![1.0, 1.0], 1, 1.0f64).is_err());
        assert!(SchoenbergMeasure::normalized(vec![1.0, 2.0], vec![1.0, -1.0], 1, 1.0f64).is_err());
        assert!(SchoenbergMeasure::normalized(vec![0.0, 2.0], vec![1.0, 3.0], 2, 1.0f64).is_ok());
    }

    #[test]
    fn gram_constant_and_degenerate() {
        let c = RadialKernel::constant(1, 1.0f64).unwrap();
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.3]).collect();
        assert!(gram_psd_check(&c, &pts, 1e-10).unwrap().positive_semidefinite);
        let same = vec![vec![1.0]; 4];
        let rep = gram_psd_check(&c, &same, 1e-10).unwrap();
        assert!(rep.degenerate && rep.positive_semidefinite);
        assert!(gram_psd_check(&c, &same[..1], 1e-10).is_err());
        assert!(gram_psd_check(&c, &[vec![0.0, 1.0], vec![1.0, 0.0]], 1e-10).is_err());
    }

    #[test]
    fn cosine_is_not_positive_definite_in_three_dimensions() {
        // points on a small cubic lattice; the profile cos(5 r) fails there
        let mut pts = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    pts.push(vec![i as f64 * 0.45, j as f64 * 0.45, k as f64 * 0.45]);
                }
            }
        }
        let f0 = TAU.powi(-3);
        let rep = gram_psd_check_profile(|r: f64| f0 * (5.0 * r).cos(), &pts, 1e-10).unwrap();
        assert!(!rep.positive_semidefinite, "{rep:?}");
    }

    #[test]
    fn profile_of_gaussian_is_normal_density() {
        let grid = MomentumGrid::with_position_spacing(1, 256, 0.05f64, 1.0).unwrap();
        let k = RadialKernel::gaussian(1, 0.5, 1.0).unwrap();
        let g = smoothing_profile(&k, &grid).unwrap();
        let total: f64 = g.iter().sum::<f64>() * grid.dx();
        assert!((total - 1.0).abs() < 1e-10);
        for (j, &v) in g.iter().enumerate() {
            let x = grid.position(j);
            let want = (-x * x / 0.5).exp() / (TAU * 0.25).sqrt();
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn profile_of_constant_is_a_delta() {
        let grid = MomentumGrid::with_position_spacing(2, 16, 0.1f64, 1.0).unwrap();
        let g = smoothing_profile(&RadialKernel::constant(2, 1.0).unwrap(), &grid).unwrap();
        let centre = 8 * 16 + 8;
        assert!((g[centre] * 0.01 - 1.0).abs() < 1e-12);
        assert_eq!(g.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn profile_of_single_node_is_two_half_masses() {
        let grid = MomentumGrid::with_position_spacing(1, 64, 0.1f64, 1.0).unwrap();
        let k = RadialKernel::schoenberg_single(1, 0.8, 1.0).unwrap();
        let g = smoothing_profile(&k, &grid).unwrap();
        let hits: Vec<(f64, f64)> =
            g.iter().enumerate().filter(|(_, v)| **v > 1e-12).map(|(j, v)| (grid.position(j), v * grid.dx())).collect();
        assert_eq!(hits.len(), 2);
        assert!((hits[0].0 + 0.8).abs() < 1e-12 && (hits[0].1 - 0.5).abs() < 1e-12);
        assert!((hits[1].0 - 0.8).abs() < 1e-12 && (hits[1].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unresolved_profile_is_rejected() {
        let grid = MomentumGrid::with_position_spacing(1, 64, 0.1f64, 1.0).unwrap();
        let k = RadialKernel::gaussian(1, 0.3, 1.0).unwrap();
        assert!(matches!(smoothing_profile(&k, &grid), Err(Error::Resolution(_))));
    }

    #[test]
    fn shells_integrate_to_one_in_higher_dimensions() {
        for d in 2..=3 {
            let grid = MomentumGrid::with_position_spacing(d, 32, 0.1f64, 1.0).unwrap();
            let k = RadialKernel::schoenberg_single(d, 0.5, 1.0).unwrap();
            let g = smoothing_profile(&k, &grid).unwrap();
            let total: f64 = g.iter().sum::<f64>() * grid.position_cell();
            assert!((total - 1.0).abs() < 1e-10);
            assert!(g.iter().all(|&v| v >= 0.0));
        }
    }
}
