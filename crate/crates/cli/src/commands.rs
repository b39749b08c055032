//! Subcommand implementations. Each returns its files in memory; nothing is
//! written until the whole command has succeeded.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use povmqm::bounds::{self, ExperimentRecord, PhysicalConstants};
use povmqm::dynamics::{self, PotentialSpec, SpectrumComparison};
use povmqm::io;
use povmqm::kernels;
use povmqm::observables;
use povmqm::twobody;

use crate::acceptance::{self, CriterionResult};
use crate::config::RunConfig;
use crate::{CliError, Outputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Auriga,
    Hydrogen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    KernelCheck,
    Density,
    Uncertainty,
    Spectrum,
    Evolve,
    Hydrogen,
    Bounds(Experiment),
    Reproduce,
}

/// Files plus lines for the terminal.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub outputs: Outputs,
    pub lines: Vec<String>,
    /// Separate log carrying wall-clock data, never part of the payload.
    pub log: Option<String>,
    /// False when `reproduce` found failing criteria.
    pub all_passed: bool,
}

fn json_bytes(value: &Value) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    io::write_json(value, &mut buf)?;
    Ok(buf)
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> povmqm::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut out = CommandOutput { all_passed: true, ..Default::default() };
    match command {
        Command::KernelCheck => kernel_check(cfg, &mut out)?,
        Command::Density => density(cfg, &mut out)?,
        Command::Uncertainty => uncertainty(cfg, &mut out)?,
        Command::Spectrum => spectrum(cfg, &mut out)?,
        Command::Evolve => evolve(cfg, &mut out)?,
        Command::Hydrogen => hydrogen(cfg, &mut out)?,
        Command::Bounds(e) => bound(cfg, e, &mut out)?,
        Command::Reproduce => reproduce(&mut out)?,
    }
    Ok(out)
}

fn kernel_check(cfg: &RunConfig, out: &mut CommandOutput) -> Result<(), CliError> {
    let k = &cfg.kernel;
    let dim = k.dim();
    let hbar = k.hbar();
    let cutoff = cfg.grid.momentum_cutoff();
    let mut rng = ChaCha8Rng::seed_from_u64(acceptance::SEED);
    let points: Vec<Vec<f64>> =
        (0..64).map(|_| (0..dim).map(|_| rng.random_range(-cutoff..cutoff)).collect()).collect();
    let gram = kernels::gram_psd_check(k, &points, 1e-10)?;
    let l0 = k.l0();
    let fd = kernels::finite_difference_l0(|r| k.eval(r), dim, hbar, kernels::finite_difference_step(l0, hbar));
    let resolved = k.check_resolved(&cfg.grid).is_ok();
    out.lines.push(format!(
        "{} kernel, d = {dim}: l0 = {l0:.6e} (finite difference {fd:.6e}), PSD {}",
        k.family_name(),
        if gram.positive_semidefinite { "pass" } else { "FAIL" }
    ));
    if cfg.format.json() {
        out.outputs.add(
            "kernel_check.json",
            json_bytes(&json!({
                "kernel": io::kernel_json(k),
                "l0": l0,
                "l0_finite_difference": fd,
                "xi2": k.xi(2)?,
                "xi4": k.xi(4)?,
                "gram": {
                    "points": points.len(),
                    "positive_semidefinite": gram.positive_semidefinite,
                    "min_eigenvalue": gram.min_eigenvalue,
                    "max_eigenvalue": gram.max_eigenvalue,
                },
                "resolved_on_grid": resolved,
            }))?,
        );
    }
    if cfg.format.csv() {
        out.outputs.add(
            "kernel_profile.csv",
            csv_bytes(|buf| {
                use std::io::Write;
                writeln!(buf, "r,f,multiplier")?;
                for i in 0..=200 {
                    let r = cutoff * i as f64 / 200.0;
                    writeln!(
                        buf,
                        "{},{},{}",
                        io::format_f64(r),
                        io::format_f64(k.eval(r)),
                        io::format_f64(k.multiplier(r))
                    )?;
                }
                Ok(())
            })?,
        );
    }
    Ok(())
}

fn density(cfg: &RunConfig, out: &mut CommandOutput) -> Result<(), CliError> {
    let state = cfg.initial_state()?;
    let rho = observables::position_density(&state, &cfg.kernel)?;
    let current = match cfg.potential {
        PotentialSpec::Zero => observables::probability_current_free(&state, &cfg.kernel, cfg.mass)?,
        ref v => observables::probability_current_interacting(&state, &cfg.kernel, v, cfg.mass)?,
    };
    out.lines.push(format!("density integral {:.12}, total current {:.6e}", rho.integral(), current.total(0)));
    if cfg.format.csv() {
        out.outputs.add("density.csv", csv_bytes(|b| io::write_density_csv(&rho, b))?);
        out.outputs.add("current.csv", csv_bytes(|b| io::write_current_csv(&current, b))?);
    }
    if cfg.format.json() {
        let mut residuals = vec![("clamped_cells", rho.clamped_count() as f64), ("min_raw_density", rho.min_raw())];
        if let Some(c) = current.beta_conditioning() {
            residuals.push(("beta_conditioning", c));
        }
        let mut meta = io::field_metadata(
            &cfg.kernel,
            &cfg.grid,
            &[("state", state.norm_squared()), ("density", rho.integral())],
            &residuals,
        );
        meta["potential"] = json!(cfg.potential.name());
        out.outputs.add("density.json", json_bytes(&meta)?);
    }
    Ok(())
}

fn uncertainty(cfg: &RunConfig, out: &mut CommandOutput) -> Result<(), CliError> {
    let state = cfg.initial_state()?;
    let report = observables::uncertainty_report(&state, &cfg.kernel)?;
    for (a, ax) in report.axes.iter().enumerate() {
        out.lines.push(format!(
            "axis {a}: dx = {:.9}, dp = {:.9}, dx*dp = {:.9} >= {:.9}",
            ax.delta_x, ax.delta_p, ax.product, ax.bound
        ));
    }
    if cfg.format.csv() {
        out.outputs.add(
            "uncertainty.csv",
            csv_bytes(|buf| {
                use std::io::Write;
                writeln!(buf, "axis,mean_x,delta_x,variance_std,mean_p,delta_p,product,bound")?;
                for (a, ax) in report.axes.iter().enumerate() {
                    let vals = [ax.mean_x, ax.delta_x, ax.variance_std, ax.mean_p, ax.delta_p, ax.product, ax.bound];
                    let cols: Vec<String> = vals.iter().map(|v| io::format_f64(*v)).collect();
                    writeln!(buf, "{a},{}", cols.join(","))?;
                }
                Ok(())
            })?,
        );
    }
    if cfg.format.json() {
        out.outputs
            .add("uncertainty.json", json_bytes(&json!({ "kernel": io::kernel_json(&cfg.kernel), "report": report }))?);
    }
    Ok(())
}

fn spectrum(cfg: &RunConfig, out: &mut CommandOutput) -> Result<(), CliError> {
    let h = dynamics::build_hamiltonian(&cfg.grid, &cfg.potential, &cfg.kernel, cfg.mass)?;
    let spec = dynamics::eigensolve(&h, cfg.spectrum_count)?;
    let hbar = cfg.grid.hbar();
    let dim = cfg.grid.dim();
    let analytic = match cfg.potential {
        PotentialSpec::Harmonic { omega, .. } => Some((
            dynamics::oscillator_levels(dim, omega, cfg.mass, cfg.kernel.l0(), hbar, spec.energies.len()),
            dynamics::oscillator_levels(dim, omega, cfg.mass, 0.0, hbar, spec.energies.len()),
        )),
        _ => None,
    };
    for (k, e) in spec.energies.iter().enumerate() {
        let line = match &analytic {
            Some((a, base)) => format!("E_{k} = {e:.10}  analytic {:.10}  shift {:.6}", a[k], e - base[k]),
            None => format!("E_{k} = {e:.10}"),
        };
        out.lines.push(line);
    }
    if cfg.format.csv() {
        let bytes = match &analytic {
            Some((a, base)) => {
                let rows: Vec<SpectrumComparison<f64>> = spec
                    .energies
                    .iter()
                    .enumerate()
                    .map(|(index, &numeric)| SpectrumComparison {
                        index,
                        numeric,
                        analytic: a[index],
                        diff: numeric - a[index],
                        residual: spec.residuals[index],
                    })
                    .collect();
                csv_bytes(|b| io::write_oscillator_csv(&rows, base, b))?
            }
            None => csv_bytes(|b| io::write_spectrum_csv(&spec, None, b))?,
        };
        out.outputs.add("spectrum.csv", bytes);
    }
    if cfg.format.json() {
        out.outputs.add(
            "spectrum.json",
            json_bytes(&json!({
                "kernel": io::kernel_json(&cfg.kernel),
                "grid": { "dim": dim, "n": cfg.grid.n(), "dp": cfg.grid.dp(), "dx": cfg.grid.dx(), "hbar": hbar },
                "potential": cfg.potential,
                "mass": cfg.mass,
                "energies": spec.energies,
                "analytic": analytic.as_ref().map(|(a, _)| a.clone()),
                "residuals": spec.residuals,
                "tolerance": spec.tolerance,
                "hermiticity_defect": h.hermiticity_defect(),
            }))?,
        );
    }
    Ok(())
}

fn evolve(cfg: &RunConfig, out: &mut CommandOutput) -> Result<(), CliError> {
    let state = cfg.initial_state()?;
    let it = cfg.integrator;
    let traj = dynamics::propagate(&state, &cfg.potential, &cfg.kernel, cfg.mass, it.dt, it.steps, it.stride)?;
    let ehrenfest = match cfg.potential {
        PotentialSpec::Zero => None,
        ref v if traj.snapshots.len() >= 5 => Some(dynamics::ehrenfest_check(&traj, v, &cfg.kernel)?),
        _ => None,
    };
    let last = traj.samples.last().expect("propagate records the initial sample");
    out.lines.push(format!(
        "t = {:.6}: <x> = {:.9}, <p> = {:.9}, norm = {:.12}",
        last.time, last.mean_x[0], last.mean_p[0], last.norm
    ));
    if let Some(e) = &ehrenfest {
        out.lines.push(format!("Ehrenfest residual {:.3e} (force scale {:.3e})", e.max_residual, e.force_scale));
    }
    if cfg.format.csv() {
        out.outputs.add("trajectory.csv", csv_bytes(|b| io::write_trajectory_csv(&traj, b))?);
        let final_state = traj.snapshots.last().expect("propagate records snapshots");
        out.outputs.add("final_state.csv", csv_bytes(|b| io::write_state_csv(final_state, b))?);
    }
    if cfg.format.json() {
        out.outputs.add(
            "evolve.json",
            json_bytes(&json!({
                "kernel": io::kernel_json(&cfg.kernel),
                "potential": cfg.potential,
                "mass": cfg.mass,
                "dt": it.dt,
                "steps": it.steps,
                "stride": it.stride,
                "final": last,
                "ehrenfest": ehrenfest.as_ref().map(|e| json!({
                    "max_residual": e.max_residual,
                    "force_scale": e.force_scale,
                })),
            }))?,
        );
    }
    Ok(())
}

fn hydrogen(cfg: &RunConfig, out: &mut CommandOutput) -> Result<(), CliError> {
    let h = &cfg.hydrogen;
    let rows: Vec<twobody::HydrogenCorrection> =
        (1..=h.n_max).map(|n| twobody::hydrogen_s_correction(n, h.l1, h.l2)).collect::<povmqm::Result<_>>()?;
    for r in &rows {
        out.lines.push(format!(
            "n = {}: 8pi {:.6e}, coulomb {:.6e}, ratio {:.6}",
            r.n, r.delta_e_8pi, r.delta_e_coulomb, r.ratio
        ));
    }
    if cfg.format.csv() {
        out.outputs.add("hydrogen.csv", csv_bytes(|b| io::write_hydrogen_csv(&rows, b))?);
    }
    if cfg.format.json() {
        out.outputs.add("hydrogen.json", json_bytes(&io::hydrogen_json(&rows, h.l1, h.l2))?);
    }
    Ok(())
}

fn bound(cfg: &RunConfig, experiment: Experiment, out: &mut CommandOutput) -> Result<(), CliError> {
    let constants = PhysicalConstants::codata_2018();
    let (name, result) = match experiment {
        Experiment::Auriga => ("auriga", bounds::auriga_bound(&cfg.auriga, &constants)?),
        Experiment::Hydrogen => {
            let rec = ExperimentRecord::Hydrogen1S2S { relative_uncertainty: cfg.hydrogen.relative_uncertainty };
            ("hydrogen", bounds::hydrogen_1s2s_bound(&rec, cfg.hydrogen.convention, &constants)?)
        }
    };
    out.lines.push(format!(
        "{name}: l0_max = {:.6e} m = {:.6e} l_P ({})",
        result.l0_max_m, result.l0_max_planck, result.formula
    ));
    if cfg.format.json() {
        out.outputs.add(format!("bounds_{name}.json"), json_bytes(&io::bound_json(&result, &constants))?);
    }
    if cfg.format.csv() {
        out.outputs.add(
            format!("bounds_{name}.csv"),
            csv_bytes(|buf| {
                use std::io::Write;
                writeln!(buf, "key,value")?;
                for (k, v) in &result.inputs {
                    writeln!(buf, "{k},{}", io::format_f64(*v))?;
                }
                writeln!(buf, "l0_max_m,{}", io::format_f64(result.l0_max_m))?;
                writeln!(buf, "l0_max_planck,{}", io::format_f64(result.l0_max_planck))?;
                Ok(())
            })?,
        );
    }
    Ok(())
}

/// Runs criteria 1-10 and renders every result file.
fn reproduce_pass() -> Result<(Vec<CriterionResult>, Outputs), CliError> {
    let results: Vec<CriterionResult> =
        (1..acceptance::CRITERIA).map(acceptance::run_criterion).collect::<povmqm::Result<_>>()?;
    let mut files = Outputs::default();

    let gauss = povmqm::RadialKernel::gaussian(1, 0.1, 1.0)?;
    let rows = acceptance::oscillator_rows(&gauss)?;
    let base: Vec<f64> = (0..rows.len()).map(|n| n as f64 + 0.5).collect();
    files.add("oscillator_spectrum.csv", csv_bytes(|b| io::write_oscillator_csv(&rows, &base, b))?);

    let (traj, _, _) = acceptance::ehrenfest_trajectory()?;
    files.add("ehrenfest_trajectory.csv", csv_bytes(|b| io::write_trajectory_csv(&traj, b))?);

    let hydrogen = acceptance::hydrogen_rows()?;
    files.add("hydrogen.csv", csv_bytes(|b| io::write_hydrogen_csv(&hydrogen, b))?);
    files.add("hydrogen.json", json_bytes(&io::hydrogen_json(&hydrogen, 1e-3, 0.0))?);

    let constants = PhysicalConstants::codata_2018();
    let (auriga, h1s2s) = acceptance::bound_results(&constants)?;
    files.add("bounds_auriga.json", json_bytes(&io::bound_json(&auriga, &constants))?);
    files.add("bounds_hydrogen.json", json_bytes(&io::bound_json(&h1s2s, &constants))?);
    Ok((results, files))
}

fn summary_csv(results: &[CriterionResult]) -> Result<Vec<u8>, CliError> {
    csv_bytes(|buf| {
        use std::io::Write;
        writeln!(buf, "id,criterion,check,value,rule,status")?;
        for r in results {
            for c in &r.checks {
                let status = if c.passed { "pass" } else { "fail" };
                writeln!(
                    buf,
                    "{},{},{},{},{},{}",
                    r.id,
                    r.title,
                    c.label.replace(',', ";"),
                    io::format_f64(c.value),
                    c.rule.replace(',', ";"),
                    status
                )?;
            }
        }
        Ok(())
    })
}

fn reproduce(out: &mut CommandOutput) -> Result<(), CliError> {
    let mut log = String::new();
    let started = std::time::Instant::now();
    let (mut results, files) = reproduce_pass()?;
    let (_, again) = reproduce_pass()?;
    let identical = files == again;
    results.push(CriterionResult {
        id: 11,
        title: acceptance::title(11),
        checks: vec![acceptance::Check::flag("second run byte-identical", identical)],
        elapsed: 0.0,
    });
    for r in &results {
        log.push_str(&format!("criterion {:>2} {:<32} {:>8.3} s\n", r.id, r.title, r.elapsed));
        out.lines.push(r.line());
    }
    log.push_str(&format!("total {:.3} s\n", started.elapsed().as_secs_f64()));
    out.all_passed = results.iter().all(CriterionResult::passed);
    out.outputs = files;
    out.outputs.add("summary.csv", summary_csv(&results)?);
    out.outputs.add("summary.json", json_bytes(&json!({ "seed": acceptance::SEED, "criteria": results }))?);
    out.log = Some(log);
    Ok(())
}
