//! Position measurement without a position operator.
//!
//! Position probabilities come from a translation-, rotation- and
//! boost-covariant POVM, which leaves a single free ingredient: a radial
//! positive-definite kernel `f(|p - k|)` on momentum space. A constant kernel
//! reproduces standard quantum mechanics; any other kernel introduces a
//! minimal position uncertainty `l0` and deforms the potential term of the
//! Schroedinger equation.
//!
//! The crate is generic over the scalar type ([`Real`], implemented for `f32`
//! and `f64`). The `*64` aliases below are the double-precision types used by
//! the CLI and validation suite.
//!
//! Module map:
//! * [`kernels`]: kernel families, `l0`, Gram positivity, smoothing profiles
//! * [`grid`], [`wavefunction`]: momentum grids and states
//! * [`observables`]: POVM densities, currents, moments, uncertainty relation
//! * [`dynamics`]: deformed Hamiltonians, spectra, propagation, Ehrenfest
//! * [`twobody`]: two-particle densities, center-of-mass split, hydrogen
//! * [`bounds`]: SI constants and experimental bounds on `l0`
//! * [`reference`]: independent standard-QM and brute-force oracles
//! * [`io`]: CSV/JSON serialization

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dynamics;
pub mod error;
mod fft;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod observables;
pub mod reference;
pub mod scalar;
pub mod twobody;
pub mod wavefunction;

pub use error::{Error, Result};
pub use grid::MomentumGrid;
pub use kernels::{RadialKernel, SchoenbergMeasure};
pub use scalar::Real;
pub use wavefunction::WaveState;

pub type MomentumGrid64 = grid::MomentumGrid<f64>;
pub type MomentumGrid32 = grid::MomentumGrid<f32>;
pub type RadialKernel64 = kernels::RadialKernel<f64>;
pub type RadialKernel32 = kernels::RadialKernel<f32>;
pub type WaveState64 = wavefunction::WaveState<f64>;
pub type WaveState32 = wavefunction::WaveState<f32>;
pub type DensityField64 = observables::DensityField<f64>;
pub type CurrentField64 = observables::CurrentField<f64>;
pub type PotentialSpec64 = dynamics::PotentialSpec<f64>;
pub type HamiltonianMatrix64 = dynamics::HamiltonianMatrix<f64>;
pub type SpectrumResult64 = dynamics::SpectrumResult<f64>;
pub type TrajectoryRecord64 = dynamics::TrajectoryRecord<f64>;
pub type ParticlePair64 = twobody::ParticlePair<f64>;
pub type TwoParticleState64 = twobody::TwoParticleState<f64>;
