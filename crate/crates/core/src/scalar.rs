//! Scalar abstraction shared by every numerical module.
//!
//! All physics code is written against [`Real`], which is implemented for
//! `f32` and `f64`. Backend work that needs concrete types (FFT plans, dense
//! Hermitian eigensolves, Bessel functions) is dispatched through the trait so
//! generic code never names `rustfft` or `nalgebra` bounds directly.

use std::cell::RefCell;
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, ToPrimitive};
use rustfft::{FftDirection, FftPlanner};

/// Floating point scalar used throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every constant in the crate goes through here.
    fn lit(v: f64) -> Self;

    fn as_f64(self) -> f64;

    /// Bessel function of the first kind, order zero.
    fn bessel_j0(self) -> Self;

    /// Unnormalized in-place FFT over consecutive blocks of length `len`.
    ///
    /// `inverse == false` computes `sum_j x_j exp(-2 pi i j k / len)`,
    /// `inverse == true` the same with `+`.
    fn fft_blocks(buf: &mut [Complex<Self>], len: usize, inverse: bool);

    /// Eigen-decomposition of a dense Hermitian matrix given row-major.
    ///
    /// Returns eigenvalues ascending and the eigenvectors as the columns of a
    /// row-major `n x n` matrix, in the same order.
    fn hermitian_eigen(matrix: &[Complex<Self>], n: usize) -> (Vec<Self>, Vec<Complex<Self>>);

    fn from_usize(v: usize) -> Self {
        Self::lit(v as f64)
    }

    fn from_isize(v: isize) -> Self {
        Self::lit(v as f64)
    }
}

thread_local! {
    static PLANNER_F64: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static PLANNER_F32: RefCell<FftPlanner<f32>> = RefCell::new(FftPlanner::new());
}

fn direction(inverse: bool) -> FftDirection {
    if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    }
}

macro_rules! sorted_eigen {
    ($t:ty, $matrix:expr, $n:expr) => {{
        let n = $n;
        let m = nalgebra::DMatrix::<Complex<$t>>::from_row_slice(n, n, $matrix);
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<$t> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = vec![Complex::<$t>::new(0.0, 0.0); n * n];
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                vectors[row * n + col] = eig.eigenvectors[(row, src)];
            }
        }
        (values, vectors)
    }};
}

impl Real for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }

    fn bessel_j0(self) -> Self {
        libm::j0(self)
    }

    fn fft_blocks(buf: &mut [Complex<Self>], len: usize, inverse: bool) {
        PLANNER_F64.with(|p| {
            let plan = p.borrow_mut().plan_fft(len, direction(inverse));
            plan.process(buf);
        });
    }

    fn hermitian_eigen(matrix: &[Complex<Self>], n: usize) -> (Vec<Self>, Vec<Complex<Self>>) {
        sorted_eigen!(f64, matrix, n)
    }
}

impl Real for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }

    fn bessel_j0(self) -> Self {
        libm::j0f(self)
    }

    fn fft_blocks(buf: &mut [Complex<Self>], len: usize, inverse: bool) {
        PLANNER_F32.with(|p| {
            let plan = p.borrow_mut().plan_fft(len, direction(inverse));
            plan.process(buf);
        });
    }

    fn hermitian_eigen(matrix: &[Complex<Self>], n: usize) -> (Vec<Self>, Vec<Complex<Self>>) {
        sorted_eigen!(f32, matrix, n)
    }
}

/// `(2 pi hbar)^d`.
pub fn two_pi_hbar_pow<T: Real>(hbar: T, dim: usize) -> T {
    (T::TAU() * hbar).powi(dim as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_matches_naive_dft() {
        let n = 8;
        let data: Vec<Complex<f64>> = (0..n).map(|j| Complex::new((j as f64).sin(), (j as f64 * 0.3).cos())).collect();
        let mut fast = data.clone();
        f64::fft_blocks(&mut fast, n, true);
        for (k, got) in fast.iter().enumerate() {
            let want: Complex<f64> = data
                .iter()
                .enumerate()
                .map(|(j, x)| x * Complex::from_polar(1.0, std::f64::consts::TAU * (j * k) as f64 / n as f64))
                .sum();
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn eigen_of_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = [Complex::new(2.0, 0.0), Complex::new(0.0, 1.0), Complex::new(0.0, -1.0), Complex::new(2.0, 0.0)];
        let (vals, _) = f64::hermitian_eigen(&m, 2);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        let (vals32, _) = f32::hermitian_eigen(&m.map(|c| Complex::new(c.re as f32, c.im as f32)), 2);
        assert!((vals32[1] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn j0_small_argument() {
        assert!((0.0f64.bessel_j0() - 1.0).abs() < 1e-15);
        assert!((2.404825557695773f64.bessel_j0()).abs() < 1e-12);
    }
}
