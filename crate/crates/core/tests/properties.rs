//! Property tests over randomized kernels, states and inputs.

use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use povmqm::bounds::{self, ExperimentRecord, PhysicalConstants};
use povmqm::dynamics::{self, PotentialSpec};
use povmqm::kernels::{self, RadialKernel, SchoenbergMeasure};
use povmqm::observables;
use povmqm::reference;
use povmqm::twobody::{self, ParticlePair, TwoParticleState};
use povmqm::wavefunction::{make_gaussian_state, random_packet_state, WaveState};
use povmqm::{io, MomentumGrid};

fn grid1(n: usize, dx: f64) -> MomentumGrid<f64> {
    MomentumGrid::with_position_spacing(1, n, dx, 1.0).unwrap()
}

fn random_state(grid: &MomentumGrid<f64>, seed: u64, sigma: (f64, f64)) -> WaveState<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_packet_state(grid, 1 + (seed % 4) as usize, sigma, &mut rng).unwrap()
}

/// Gaussian, single-node or multi-node Schoenberg kernel of width about `l0`.
fn kernel_strategy(dim: usize) -> impl Strategy<Value = RadialKernel<f64>> {
    (0usize..3, 0.2f64..1.0, proptest::collection::vec((0.1f64..3.0, 0.1f64..1.0), 1..5)).prop_map(
        move |(family, l0, nodes)| match family {
            0 => RadialKernel::gaussian(dim, l0, 1.0).unwrap(),
            1 => RadialKernel::schoenberg_single(dim, l0, 1.0).unwrap(),
            _ => {
                let mut nodes = nodes;
                nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
                nodes.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3);
                let (u, w): (Vec<f64>, Vec<f64>) = nodes.into_iter().unzip();
                RadialKernel::schoenberg(dim, SchoenbergMeasure::normalized(u, w, dim, 1.0).unwrap(), 1.0).unwrap()
            }
        },
    )
}

fn points_strategy(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, dim), 2..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_matrices_are_positive_semidefinite(
        (kernel, points) in (1usize..=3).prop_flat_map(|d| (kernel_strategy(d), points_strategy(d)))
    ) {
        let r = kernels::gram_psd_check(&kernel, &points, 1e-10).unwrap();
        prop_assert!(r.positive_semidefinite, "min {} max {}", r.min_eigenvalue, r.max_eigenvalue);
    }

    #[test]
    fn kernel_peaks_at_zero(kernel in (1usize..=3).prop_flat_map(kernel_strategy), r in 0.0f64..50.0) {
        prop_assert!(kernel.eval(r) <= kernel.eval(0.0));
    }

    #[test]
    fn analytic_l0_matches_finite_differences(kernel in (1usize..=3).prop_flat_map(kernel_strategy)) {
        let l0 = kernel.l0();
        let h = kernels::finite_difference_step(l0, 1.0);
        let fd = kernels::finite_difference_l0(|r| kernel.eval(r), kernel.dim(), 1.0, h);
        prop_assert!(((fd - l0) / l0).abs() < 1e-6, "fd {fd} analytic {l0}");
    }

    #[test]
    fn gaussian_l0_round_trips(l0 in 1e-3f64..10.0, dim in 1usize..=3, hbar in 0.1f64..3.0) {
        let k = RadialKernel::gaussian(dim, l0, hbar).unwrap();
        prop_assert!(((k.l0() - l0) / l0).abs() < 1e-12);
    }

    #[test]
    fn smoothing_profiles_are_probability_densities(kernel in kernel_strategy(1)) {
        let grid = grid1(512, 0.04);
        let g = kernels::smoothing_profile(&kernel, &grid).unwrap();
        let total: f64 = g.iter().sum::<f64>() * grid.dx();
        let max = g.iter().copied().fold(0.0, f64::max);
        prop_assert!((total - 1.0).abs() < 1e-8, "integral {total}");
        prop_assert!(g.iter().all(|&v| v >= -1e-10 * max));
    }

    #[test]
    fn position_transform_preserves_norm(seed in any::<u64>()) {
        let grid = grid1(256, 0.1);
        let s = random_state(&grid, seed, (0.4, 1.5));
        let psi = s.to_position_amplitudes();
        let norm_x: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dx();
        prop_assert!((norm_x - s.norm_squared()).abs() < 1e-12);
        let back = WaveState::from_position_amplitudes(grid, &psi).unwrap();
        prop_assert!((back.norm_squared() - s.norm_squared()).abs() < 1e-12);
        for (a, b) in back.amplitudes().iter().zip(s.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn grid_duality(dim in 1usize..=3, log_n in 2u32..10, dx in 0.01f64..1.0, hbar in 0.1f64..3.0) {
        let n = 1usize << log_n;
        let g = MomentumGrid::with_position_spacing(dim, n, dx, hbar).unwrap();
        let lhs = g.dx() * g.dp() * n as f64;
        prop_assert!((lhs - std::f64::consts::TAU * hbar).abs() <= 4.0 * f64::EPSILON * lhs);
    }

    #[test]
    fn factories_decay_at_the_boundary(seed in any::<u64>(), sigma in 0.3f64..1.5, x0 in -3.0f64..3.0, p0 in -5.0f64..5.0) {
        let grid = grid1(256, 0.1);
        prop_assert!(random_state(&grid, seed, (0.4, 1.5)).check_boundary_decay());
        prop_assert!(make_gaussian_state(&grid, &[x0], &[p0], sigma).unwrap().check_boundary_decay());
    }

    #[test]
    fn density_is_normalized_and_variance_shifts_by_l0(seed in any::<u64>(), kernel in kernel_strategy(1)) {
        let grid = grid1(1024, 0.05);
        let s = random_state(&grid, seed, (0.4, 1.5));
        let rho = observables::position_density(&s, &kernel).unwrap();
        let flat = observables::position_density(&s, &RadialKernel::constant(1, 1.0).unwrap()).unwrap();
        prop_assert!((rho.integral() - 1.0).abs() < 1e-8);
        let var = |r: &observables::DensityField<f64>| r.moment(0, 2) - r.moment(0, 1).powi(2);
        prop_assert!((var(&rho) - var(&flat) - kernel.l0().powi(2)).abs() < 1e-8);
    }

    #[test]
    fn uncertainty_bound_holds(seed in any::<u64>(), kernel in kernel_strategy(1)) {
        let grid = grid1(512, 0.05);
        let s = random_state(&grid, seed, (0.3, 1.5));
        prop_assert!(!observables::uncertainty_report(&s, &kernel).unwrap().violated);
    }

    #[test]
    fn fft_density_matches_double_sum(seed in any::<u64>(), kernel in kernel_strategy(1), log_n in 7u32..=8) {
        let n = 1usize << log_n;
        let grid = grid1(n, 0.05);
        prop_assume!(kernel.l0() >= 4.0 * grid.dx());
        let s = random_state(&grid, seed, (0.4, 0.6));
        let fast = observables::position_density(&s, &kernel).unwrap();
        let slow = reference::direct_density(&s, &kernel).unwrap();
        prop_assert!(fast.max_abs_diff(&slow) < 1e-8);
    }

    #[test]
    fn free_current_integrates_to_mean_velocity(seed in any::<u64>(), kernel in kernel_strategy(1), mass in 0.5f64..3.0) {
        let grid = grid1(512, 0.05);
        let s = random_state(&grid, seed, (0.4, 1.5));
        let j = observables::probability_current_free(&s, &kernel, mass).unwrap();
        prop_assert!((j.total(0) - s.mean_momentum(0) / mass).abs() < 1e-8);
    }

    #[test]
    fn io_round_trip_is_exact(seed in any::<u64>()) {
        let grid = grid1(64, 0.2);
        let s = random_state(&grid, seed, (0.7, 1.5)).with_time(seed as f64 * 1e-9);
        let mut buf = Vec::new();
        io::write_state_csv(&s, &mut buf).unwrap();
        prop_assert_eq!(io::read_state_csv(buf.as_slice()).unwrap(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hamiltonians_are_hermitian(kernel in kernel_strategy(1), depth in -5.0f64..-0.1, width in 0.3f64..2.0) {
        let grid = grid1(64, 0.25);
        let h = dynamics::build_hamiltonian(&grid, &PotentialSpec::GaussianWell { depth, width }, &kernel, 1.0).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs());
    }

    #[test]
    fn spectra_are_bounded_below(kernel in kernel_strategy(1), depth in -5.0f64..-0.1, omega in 0.5f64..2.0) {
        let grid = grid1(64, 0.25);
        let well = dynamics::build_hamiltonian(&grid, &PotentialSpec::GaussianWell { depth, width: 1.0 }, &kernel, 1.0).unwrap();
        let s = dynamics::eigensolve(&well, 1).unwrap();
        prop_assert!(s.energies[0] >= depth - s.tolerance);
        let trap = dynamics::build_hamiltonian(&grid, &PotentialSpec::Harmonic { mass: 1.0, omega }, &kernel, 1.0).unwrap();
        let s = dynamics::eigensolve(&trap, 1).unwrap();
        prop_assert!(s.energies[0] >= -s.tolerance);
    }

    #[test]
    fn propagation_conserves_norm(seed in any::<u64>(), kernel in kernel_strategy(1)) {
        let grid = grid1(512, 0.04);
        prop_assume!(kernel.l0() >= 4.0 * grid.dx());
        let s = random_state(&grid, seed, (0.5, 1.2));
        let well = PotentialSpec::GaussianWell { depth: -2.0, width: 1.0 };
        let t = dynamics::propagate(&s, &well, &kernel, 1.0, 1e-3, 1000, 1000).unwrap();
        let last = t.samples.last().unwrap();
        prop_assert!((last.norm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_particle_marginals_and_normalization(seed in any::<u64>(), l1 in 1.0f64..1.5, l2 in 1.0f64..1.5) {
        let grid = grid1(32, 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_packet_state(&grid, 1, (0.75, 0.9), &mut rng).unwrap();
        let b = random_packet_state(&grid, 1, (0.75, 0.9), &mut rng).unwrap();
        let k1 = RadialKernel::gaussian(1, l1, 1.0).unwrap();
        let pair = ParticlePair::new(1.0, 1.5, k1.clone(), RadialKernel::gaussian(1, l2, 1.0).unwrap()).unwrap();
        let rho = twobody::two_particle_density(&TwoParticleState::product(&a, &b).unwrap(), &pair).unwrap();
        prop_assert!((rho.integral() - 1.0).abs() < 1e-7);
        let single = observables::position_density(&a, &k1).unwrap();
        for (m, s) in rho.marginal1().iter().zip(single.values()) {
            prop_assert!((m - s).abs() < 1e-7);
        }
    }

    #[test]
    fn equal_mass_swap_transposes_density(seed in any::<u64>(), l1 in 1.0f64..1.5, l2 in 1.0f64..1.5) {
        let grid = grid1(32, 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_packet_state(&grid, 1, (0.75, 0.9), &mut rng).unwrap();
        let b = random_packet_state(&grid, 1, (0.75, 0.9), &mut rng).unwrap();
        let c = random_packet_state(&grid, 1, (0.75, 0.9), &mut rng).unwrap();
        let state = TwoParticleState::superposition(&[(Complex::new(1.0, 0.0), &a, &b), (Complex::new(0.0, 0.5), &c, &a)])
            .unwrap()
            .normalized()
            .unwrap();
        let pair = ParticlePair::new(1.0, 1.0, RadialKernel::gaussian(1, l1, 1.0).unwrap(), RadialKernel::gaussian(1, l2, 1.0).unwrap()).unwrap();
        let rho = twobody::two_particle_density(&state, &pair).unwrap();
        let swapped = twobody::two_particle_density(&state.swapped(), &pair.swapped()).unwrap();
        let peak = rho.values().iter().copied().fold(0.0, f64::max);
        for i in 0..32 {
            for j in 0..32 {
                prop_assert!((rho.at(i, j) - swapped.at(j, i)).abs() <= 1e-12 * peak);
            }
        }
    }

    #[test]
    fn relative_kernel_width_adds_in_quadrature(k1 in kernel_strategy(1), k2 in kernel_strategy(1)) {
        let pair = ParticlePair::new(1.0, 2.0, k1, k2).unwrap();
        let expect = pair.l1().hypot(pair.l2());
        let h = kernels::finite_difference_step(expect, 1.0);
        let fd = kernels::finite_difference_l0(|q| twobody::deformed_relative_kernel(&pair, q), 1, 1.0, h);
        prop_assert!(((fd - expect) / expect).abs() < 1e-6, "fd {fd} expected {expect}");
    }
}

proptest! {
    #[test]
    fn hydrogen_shifts_follow_inverse_cube(l1 in 1e-6f64..1e-2, l2 in 0.0f64..1e-2) {
        let base = twobody::hydrogen_s_correction(1, l1, l2).unwrap();
        prop_assert!(base.delta_e_8pi < 0.0 && base.delta_e_coulomb < 0.0);
        for n in 2..=10 {
            let c = twobody::hydrogen_s_correction(n, l1, l2).unwrap();
            prop_assert!(c.delta_e_8pi < 0.0 && c.delta_e_coulomb < 0.0);
            let n3 = (n as f64).powi(3);
            prop_assert!(((c.delta_e_8pi * n3 - base.delta_e_8pi) / base.delta_e_8pi).abs() < 1e-10);
            prop_assert!(((c.delta_e_coulomb * n3 - base.delta_e_coulomb) / base.delta_e_coulomb).abs() < 1e-10);
        }
    }

    #[test]
    fn auriga_bound_is_monotone(log_m in 3.0f64..8.0, omega in 100.0f64..1e4, energy in 1e-27f64..1e-24) {
        let c = PhysicalConstants::codata_2018();
        let rec = |mass: f64, omega: f64, energy: f64| ExperimentRecord::Auriga { mass, omega, energy, dim: 1 };
        let m = 10f64.powf(log_m);
        let base = bounds::auriga_bound(&rec(m, omega, energy), &c).unwrap().l0_max_m;
        prop_assert!(bounds::auriga_bound(&rec(m, omega, energy * 1.5), &c).unwrap().l0_max_m > base);
        prop_assert!(bounds::auriga_bound(&rec(m * 1.5, omega, energy), &c).unwrap().l0_max_m < base);
        prop_assert!(bounds::auriga_bound(&rec(m, omega * 1.5, energy), &c).unwrap().l0_max_m < base);
    }

    #[test]
    fn bound_units_are_consistent(log_m in 3.0f64..8.0, energy in 1e-27f64..1e-24, rel in 1e-18f64..1e-10) {
        let c = PhysicalConstants::codata_2018();
        let lp = c.planck_length.value;
        let a = bounds::auriga_bound(&ExperimentRecord::Auriga { mass: 10f64.powf(log_m), omega: 5000.0, energy, dim: 1 }, &c).unwrap();
        prop_assert!((a.l0_max_planck * lp / a.l0_max_m - 1.0).abs() < 1e-12);
        let h = bounds::hydrogen_1s2s_bound(&ExperimentRecord::Hydrogen1S2S { relative_uncertainty: rel }, bounds::Convention::Coulomb, &c).unwrap();
        prop_assert!((h.l0_max_planck * lp / h.l0_max_m - 1.0).abs() < 1e-12);
        let h4 = bounds::hydrogen_1s2s_bound(&ExperimentRecord::Hydrogen1S2S { relative_uncertainty: 4.0 * rel }, bounds::Convention::Coulomb, &c).unwrap();
        prop_assert!((h4.l0_max_m / h.l0_max_m - 2.0).abs() < 1e-12);
    }
}

#[test]
fn density_converges_to_born_rule_as_l0_shrinks() {
    // dx small enough that l0 = 1e-3 is still resolved
    let grid = grid1(4096, 2.5e-4);
    let s = make_gaussian_state(&grid, &[0.05], &[3.0], 0.1).unwrap();
    let born: Vec<f64> = s.to_position_amplitudes().iter().map(|v| v.norm_sqr()).collect();
    let mut last = f64::INFINITY;
    for l0 in [0.1, 0.01, 0.001] {
        let rho = observables::position_density(&s, &RadialKernel::gaussian(1, l0, 1.0).unwrap()).unwrap();
        let dev = rho.max_abs_diff(&born);
        assert!(dev < last, "l0 = {l0}: {dev} vs {last}");
        last = dev;
    }
    assert!(last < 1e-1);
}
