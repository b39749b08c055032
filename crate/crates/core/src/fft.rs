//! Centered multi-dimensional discrete Fourier transforms.
//!
//! On a centered lattice with `N % 4 == 0` the kernel
//! `exp(+-2 pi i (j - N/2)(l - N/2) / N)` factors into a plain DFT sandwiched
//! between two checkerboard sign flips, which is what everything here relies on.

use num_complex::Complex;

use crate::grid::MomentumGrid;
use crate::scalar::Real;

fn checkerboard<T: Real>(data: &mut [Complex<T>], shape: &[usize]) {
    let total: usize = shape.iter().product();
    debug_assert_eq!(total, data.len());
    for (flat, v) in data.iter_mut().enumerate() {
        let mut rem = flat;
        let mut parity = 0usize;
        for &n in shape.iter().rev() {
            parity += rem % n;
            rem /= n;
        }
        if parity % 2 == 1 {
            *v = -*v;
        }
    }
}

fn transform_axis<T: Real>(data: &mut [Complex<T>], shape: &[usize], axis: usize, inverse: bool) {
    let len = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    if stride == 1 {
        T::fft_blocks(data, len, inverse);
        return;
    }
    let mut lines = vec![Complex::new(T::zero(), T::zero()); data.len()];
    for o in 0..outer {
        for s in 0..stride {
            let line = o * stride + s;
            let base = o * len * stride + s;
            for k in 0..len {
                lines[line * len + k] = data[base + k * stride];
            }
        }
    }
    T::fft_blocks(&mut lines, len, inverse);
    for o in 0..outer {
        for s in 0..stride {
            let line = o * stride + s;
            let base = o * len * stride + s;
            for k in 0..len {
                data[base + k * stride] = lines[line * len + k];
            }
        }
    }
}

/// Unnormalized centered DFT over every axis of a row-major array.
///
/// `inverse == true` uses the `+i` kernel (momentum to position).
pub(crate) fn centered_dft<T: Real>(data: &mut [Complex<T>], shape: &[usize], inverse: bool) {
    debug_assert!(shape.iter().all(|&n| n % 4 == 0));
    checkerboard(data, shape);
    for axis in 0..shape.len() {
        transform_axis(data, shape, axis, inverse);
    }
    checkerboard(data, shape);
}

/// `psi(x) = (2 pi hbar)^(-d/2) sum_p psi~(p) exp(i p x / hbar) dp^d`.
pub(crate) fn momentum_to_position<T: Real>(amps: &[Complex<T>], grid: &MomentumGrid<T>) -> Vec<Complex<T>> {
    let mut out = amps.to_vec();
    centered_dft(&mut out, &grid.shape(), true);
    let scale = grid.momentum_cell() / (T::TAU() * grid.hbar()).powf(T::from_usize(grid.dim()) / T::lit(2.0));
    out.iter_mut().for_each(|v| *v = *v * scale);
    out
}

/// Inverse of [`momentum_to_position`].
pub(crate) fn position_to_momentum<T: Real>(values: &[Complex<T>], grid: &MomentumGrid<T>) -> Vec<Complex<T>> {
    let mut out = values.to_vec();
    centered_dft(&mut out, &grid.shape(), false);
    let scale = grid.position_cell() / (T::TAU() * grid.hbar()).powf(T::from_usize(grid.dim()) / T::lit(2.0));
    out.iter_mut().for_each(|v| *v = *v * scale);
    out
}

/// Applies a Fourier multiplier to a position-space field on `grid`:
/// `h -> F^-1[ M(q) F[h](q) ]` with `q` running over the momentum lattice.
pub(crate) fn spectral_filter<T: Real>(
    field: &[Complex<T>],
    grid: &MomentumGrid<T>,
    multiplier: impl Fn(&[T; 3]) -> Complex<T>,
) -> Vec<Complex<T>> {
    let shape = grid.shape();
    let mut buf = field.to_vec();
    centered_dft(&mut buf, &shape, false);
    for (flat, v) in buf.iter_mut().enumerate() {
        *v = *v * multiplier(&grid.momentum_at(flat));
    }
    centered_dft(&mut buf, &shape, true);
    let norm = T::one() / T::from_usize(buf.len());
    buf.iter_mut().for_each(|v| *v = *v * norm);
    buf
}

/// Embeds momentum amplitudes into the padded (`2N` per axis) lattice.
pub(crate) fn pad_momentum<T: Real>(amps: &[Complex<T>], grid: &MomentumGrid<T>) -> Vec<Complex<T>> {
    let padded = grid.padded();
    let n = grid.n();
    let offset = n / 2;
    let mut out = vec![Complex::new(T::zero(), T::zero()); padded.len()];
    for (flat, &a) in amps.iter().enumerate() {
        let idx = grid.unravel(flat);
        let target = idx[..grid.dim()].iter().fold(0usize, |t, &i| t * (2 * n) + i + offset);
        out[target] = a;
    }
    out
}

/// Picks the original position sites (even indices) out of a padded field.
pub(crate) fn decimate<V: Copy>(field: &[V], grid: &MomentumGrid<impl Real>) -> Vec<V> {
    let n = grid.n();
    let mut out = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        let idx = grid.unravel(flat);
        let source = idx[..grid.dim()].iter().fold(0usize, |s, &i| s * (2 * n) + 2 * i);
        out.push(field[source]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(data: &[Complex<f64>], n: usize, sign: f64) -> Vec<Complex<f64>> {
        (0..n)
            .map(|l| {
                data.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let phase =
                            sign * std::f64::consts::TAU * (j as f64 - n as f64 / 2.0) * (l as f64 - n as f64 / 2.0)
                                / n as f64;
                        v * Complex::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn centered_matches_naive_1d() {
        let n = 16;
        let data: Vec<_> = (0..n).map(|j| Complex::new((j as f64 * 0.7).sin(), j as f64 * 0.1)).collect();
        for inverse in [false, true] {
            let mut fast = data.clone();
            centered_dft(&mut fast, &[n], inverse);
            let slow = naive(&data, n, if inverse { 1.0 } else { -1.0 });
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn centered_2d_is_separable() {
        let shape = [8, 4];
        let data: Vec<_> = (0..32).map(|j| Complex::new((j as f64).cos(), (j as f64 * 0.3).sin())).collect();
        let mut fast = data.clone();
        centered_dft(&mut fast, &shape, true);
        // rows first then columns, naively
        let mut slow = data.clone();
        for r in 0..8 {
            let row: Vec<_> = slow[r * 4..r * 4 + 4].to_vec();
            slow[r * 4..r * 4 + 4].copy_from_slice(&naive(&row, 4, 1.0));
        }
        for c in 0..4 {
            let col: Vec<_> = (0..8).map(|r| slow[r * 4 + c]).collect();
            let t = naive(&col, 8, 1.0);
            for r in 0..8 {
                slow[r * 4 + c] = t[r];
            }
        }
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn position_round_trip() {
        let grid = MomentumGrid::new(2, 8, 0.4f64, 1.3).unwrap();
        let data: Vec<_> = (0..64).map(|j| Complex::new((j as f64).sin(), 0.2 * j as f64)).collect();
        let back = position_to_momentum(&momentum_to_position(&data, &grid), &grid);
        for (a, b) in data.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
