//! Uniform, centered momentum grids and their dual position grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Momentum lattice `p_j = (j - N/2) dp` per axis, `N` a power of two.
///
/// The dual position lattice has spacing `dx = 2 pi hbar / (N dp)` and is
/// centered the same way, so `dx * dp * N = 2 pi hbar` by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid<T> {
    dim: usize,
    n: usize,
    dp: T,
    hbar: T,
}

impl<T: Real> MomentumGrid<T> {
    pub fn new(dim: usize, n: usize, dp: T, hbar: T) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("points per axis must be a power of two >= 4, got {n}")));
        }
        if !(dp > T::zero()) || !dp.is_finite() {
            return Err(Error::InvalidGrid(format!("momentum spacing must be positive, got {dp}")));
        }
        if !(hbar > T::zero()) || !hbar.is_finite() {
            return Err(Error::InvalidGrid(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { dim, n, dp, hbar })
    }

    /// Grid covering `[-p_max, p_max)` per axis.
    pub fn with_momentum_extent(dim: usize, n: usize, p_max: T, hbar: T) -> Result<Self> {
        Self::new(dim, n, T::lit(2.0) * p_max / T::from_usize(n), hbar)
    }

    /// Grid whose dual position lattice has spacing `dx`.
    pub fn with_position_spacing(dim: usize, n: usize, dx: T, hbar: T) -> Result<Self> {
        if !(dx > T::zero()) {
            return Err(Error::InvalidGrid(format!("position spacing must be positive, got {dx}")));
        }
        Self::new(dim, n, T::TAU() * hbar / (T::from_usize(n) * dx), hbar)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dp(&self) -> T {
        self.dp
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn dx(&self) -> T {
        T::TAU() * self.hbar / (T::from_usize(self.n) * self.dp)
    }

    /// Total number of lattice sites, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.dim]
    }

    /// `N dp / 2`.
    pub fn momentum_cutoff(&self) -> T {
        T::from_usize(self.n) * self.dp / T::lit(2.0)
    }

    /// `N dx / 2`.
    pub fn half_width(&self) -> T {
        T::from_usize(self.n) * self.dx() / T::lit(2.0)
    }

    pub fn momentum(&self, j: usize) -> T {
        T::from_isize(j as isize - (self.n / 2) as isize) * self.dp
    }

    pub fn position(&self, j: usize) -> T {
        T::from_isize(j as isize - (self.n / 2) as isize) * self.dx()
    }

    pub fn momentum_axis(&self) -> Vec<T> {
        (0..self.n).map(|j| self.momentum(j)).collect()
    }

    pub fn position_axis(&self) -> Vec<T> {
        (0..self.n).map(|j| self.position(j)).collect()
    }

    /// `dp^d`.
    pub fn momentum_cell(&self) -> T {
        self.dp.powi(self.dim as i32)
    }

    /// `dx^d`.
    pub fn position_cell(&self) -> T {
        self.dx().powi(self.dim as i32)
    }

    /// Per-axis indices of a flat row-major site index (last axis fastest).
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    /// Momentum vector at a flat site index.
    pub fn momentum_at(&self, flat: usize) -> [T; 3] {
        let idx = self.unravel(flat);
        let mut p = [T::zero(); 3];
        for axis in 0..self.dim {
            p[axis] = self.momentum(idx[axis]);
        }
        p
    }

    /// Position vector at a flat site index.
    pub fn position_at(&self, flat: usize) -> [T; 3] {
        let idx = self.unravel(flat);
        let mut x = [T::zero(); 3];
        for axis in 0..self.dim {
            x[axis] = self.position(idx[axis]);
        }
        x
    }

    /// Same spacing with twice the points per axis. The padded position
    /// lattice has spacing `dx / 2` over the same box, and the original
    /// position sites are its even-indexed sites.
    pub fn padded(&self) -> Self {
        Self { n: 2 * self.n, ..*self }
    }

    pub(crate) fn compatible(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.dp == other.dp && self.hbar == other.hbar
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duality_holds() {
        let g = MomentumGrid::with_momentum_extent(1, 512, 20.0f64, 1.0).unwrap();
        let prod = g.dx() * g.dp() * 512.0;
        assert!((prod - std::f64::consts::TAU).abs() <= 4.0 * f64::EPSILON * prod);
        assert_eq!(g.momentum(0), -20.0);
        assert_eq!(g.momentum(256), 0.0);
        assert!((g.momentum_cutoff() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(MomentumGrid::new(1, 6, 0.1f64, 1.0).is_err());
        assert!(MomentumGrid::new(1, 2, 0.1f64, 1.0).is_err());
        assert!(MomentumGrid::new(4, 8, 0.1f64, 1.0).is_err());
        assert!(MomentumGrid::new(2, 8, -0.1f64, 1.0).is_err());
    }

    #[test]
    fn unravel_is_row_major() {
        let g = MomentumGrid::new(3, 4, 1.0f64, 1.0).unwrap();
        assert_eq!(g.unravel(0), [0, 0, 0]);
        assert_eq!(g.unravel(1), [0, 0, 1]);
        assert_eq!(g.unravel(4), [0, 1, 0]);
        assert_eq!(g.unravel(16 + 8 + 3), [1, 2, 3]);
    }

    #[test]
    fn padded_grid_contains_original_sites() {
        let g = MomentumGrid::new(1, 16, 0.3f64, 1.0).unwrap();
        let p = g.padded();
        for l in 0..16 {
            assert!((p.position(2 * l) - g.position(l)).abs() < 1e-12);
        }
        for j in 0..16 {
            assert_eq!(p.momentum(j + 8), g.momentum(j));
        }
    }
}
