//! Text serialization of states, fields, spectra, trajectories and reports.
//!
//! Every CSV value is written with 17 significant digits so double-precision
//! data round-trips bit-exactly. Metadata travels either as `# key = value`
//! comment lines ahead of the CSV header or as a JSON sidecar.

use std::io::{BufRead, Write};

use num_complex::Complex;
use serde_json::{json, Value};

use crate::bounds::{BoundResult, PhysicalConstants};
use crate::dynamics::{SpectrumComparison, SpectrumResult, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::grid::MomentumGrid;
use crate::kernels::RadialKernel;
use crate::observables::{CurrentField, DensityField};
use crate::scalar::Real;
use crate::twobody::HydrogenCorrection;
use crate::wavefunction::WaveState;

/// Fixed 17-significant-digit scientific notation.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_row<W: Write>(w: &mut csv::Writer<W>, row: &[f64]) -> Result<()> {
    w.write_record(row.iter().map(|v| format_f64(*v))).map_err(csv_err)
}

fn grid_header<T: Real>(out: &mut impl Write, grid: &MomentumGrid<T>) -> Result<()> {
    writeln!(out, "# dim = {}", grid.dim())?;
    writeln!(out, "# n = {}", grid.n())?;
    writeln!(out, "# dp = {}", format_f64(grid.dp().as_f64()))?;
    writeln!(out, "# hbar = {}", format_f64(grid.hbar().as_f64()))?;
    Ok(())
}

/// Momentum amplitudes as `re,im` rows in flat (row-major) order, preceded by
/// the grid parameters and the state time.
pub fn write_state_csv<T: Real>(state: &WaveState<T>, mut out: impl Write) -> Result<()> {
    grid_header(&mut out, state.grid())?;
    writeln!(out, "# time = {}", format_f64(state.time().as_f64()))?;
    let mut w = csv_writer(&mut out);
    w.write_record(["re", "im"]).map_err(csv_err)?;
    for a in state.amplitudes() {
        write_row(&mut w, &[a.re.as_f64(), a.im.as_f64()])?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_state_csv`].
pub fn read_state_csv(input: impl BufRead) -> Result<WaveState<f64>> {
    let mut meta = std::collections::BTreeMap::new();
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest.split_once('=').ok_or_else(|| Error::Parse(format!("bad header line `{line}`")))?;
            meta.insert(k.trim().to_string(), v.trim().to_string());
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let field = |key: &str| meta.get(key).ok_or_else(|| Error::Parse(format!("missing header `{key}`")));
    let num = |key: &str| -> Result<f64> { field(key)?.parse().map_err(|_| Error::Parse(format!("bad `{key}`"))) };
    let dim: usize = field("dim")?.parse().map_err(|_| Error::Parse("bad `dim`".into()))?;
    let n: usize = field("n")?.parse().map_err(|_| Error::Parse("bad `n`".into()))?;
    let grid = MomentumGrid::new(dim, n, num("dp")?, num("hbar")?)?;
    let time = meta.get("time").map(|_| num("time")).transpose()?.unwrap_or(0.0);
    let mut amps = Vec::with_capacity(grid.len());
    for rec in csv::Reader::from_reader(body.as_bytes()).records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad amplitude row {rec:?}")))
        };
        amps.push(Complex::new(parse(0)?, parse(1)?));
    }
    Ok(WaveState::from_amplitudes(grid, amps)?.with_time(time))
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn position_columns<T: Real>(grid: &MomentumGrid<T>, site: usize) -> Vec<f64> {
    let x = grid.position_at(site);
    (0..grid.dim()).map(|a| x[a].as_f64()).collect()
}

/// Density as `x[,y[,z]],rho` rows.
pub fn write_density_csv<T: Real>(field: &DensityField<T>, out: impl Write) -> Result<()> {
    let grid = field.grid();
    let mut w = csv_writer(out);
    let mut header: Vec<&str> = AXES[..grid.dim()].to_vec();
    header.push("rho");
    w.write_record(&header).map_err(csv_err)?;
    for (site, v) in field.values().iter().enumerate() {
        let mut row = position_columns(grid, site);
        row.push(v.as_f64());
        write_row(&mut w, &row)?;
    }
    w.flush()?;
    Ok(())
}

/// Current as `x..,j_x..,div_j` rows.
pub fn write_current_csv<T: Real>(field: &CurrentField<T>, out: impl Write) -> Result<()> {
    let grid = field.grid();
    let dim = grid.dim();
    let mut w = csv_writer(out);
    let mut header: Vec<String> = AXES[..dim].iter().map(|s| s.to_string()).collect();
    header.extend(AXES[..dim].iter().map(|a| format!("j_{a}")));
    header.push("div_j".into());
    w.write_record(&header).map_err(csv_err)?;
    for site in 0..grid.len() {
        let mut row = position_columns(grid, site);
        row.extend((0..dim).map(|a| field.component(a)[site].as_f64()));
        row.push(field.divergence()[site].as_f64());
        write_row(&mut w, &row)?;
    }
    w.flush()?;
    Ok(())
}

fn grid_json<T: Real>(grid: &MomentumGrid<T>) -> Value {
    json!({
        "dim": grid.dim(),
        "n": grid.n(),
        "dp": grid.dp().as_f64(),
        "dx": grid.dx().as_f64(),
        "hbar": grid.hbar().as_f64(),
    })
}

/// Kernel description: family, parameters, `l0`.
pub fn kernel_json<T: Real>(kernel: &RadialKernel<T>) -> Value {
    use crate::kernels::KernelFamily;
    let params = match kernel.family() {
        KernelFamily::Constant => json!({}),
        KernelFamily::Gaussian { l0 } => json!({ "l0": l0.as_f64() }),
        KernelFamily::SchoenbergDiscrete(m) => json!({
            "nodes": m.nodes().iter().map(|v| v.as_f64()).collect::<Vec<_>>(),
            "weights": m.weights().iter().map(|v| v.as_f64()).collect::<Vec<_>>(),
        }),
    };
    json!({
        "family": kernel.family_name(),
        "dimension": kernel.dim(),
        "parameters": params,
        "l0": kernel.l0().as_f64(),
    })
}

/// Sidecar for a density or current file: kernel, grid, norms and any
/// residuals supplied by the caller.
pub fn field_metadata<T: Real>(
    kernel: &RadialKernel<T>,
    grid: &MomentumGrid<T>,
    norms: &[(&str, f64)],
    residuals: &[(&str, f64)],
) -> Value {
    let map = |items: &[(&str, f64)]| -> Value {
        Value::Object(items.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
    };
    json!({
        "kernel": kernel_json(kernel),
        "grid": grid_json(grid),
        "norms": map(norms),
        "residuals": map(residuals),
    })
}

/// Pretty JSON with a trailing newline.
pub fn write_json(value: &Value, mut out: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// `index,numeric,analytic,residual`; `analytic` is empty where undefined.
pub fn write_spectrum_csv<T: Real>(
    spectrum: &SpectrumResult<T>,
    analytic: Option<&[T]>,
    out: impl Write,
) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["index", "numeric", "analytic", "residual"]).map_err(csv_err)?;
    for (k, e) in spectrum.energies.iter().enumerate() {
        let exact = analytic.and_then(|a| a.get(k)).map(|v| format_f64(v.as_f64())).unwrap_or_default();
        w.write_record([k.to_string(), format_f64(e.as_f64()), exact, format_f64(spectrum.residuals[k].as_f64())])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `index,numeric,analytic,shift,diff,residual` for an oscillator check,
/// where `shift` is the level minus the undeformed `(n + 1/2) hbar omega`.
pub fn write_oscillator_csv<T: Real>(rows: &[SpectrumComparison<T>], undeformed: &[T], out: impl Write) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["index", "numeric", "analytic", "shift", "diff", "residual"]).map_err(csv_err)?;
    for (r, base) in rows.iter().zip(undeformed) {
        w.write_record([
            r.index.to_string(),
            format_f64(r.numeric.as_f64()),
            format_f64(r.analytic.as_f64()),
            format_f64((r.numeric - *base).as_f64()),
            format_f64(r.diff.as_f64()),
            format_f64(r.residual.as_f64()),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,<x>,<p>,dx,dp,norm` (first axis) plus `x4`, one row per sample.
pub fn write_trajectory_csv<T: Real>(record: &TrajectoryRecord<T>, out: impl Write) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["t", "mean_x", "mean_p", "delta_x", "delta_p", "norm", "x4"]).map_err(csv_err)?;
    for s in &record.samples {
        write_row(
            &mut w,
            &[
                s.time.as_f64(),
                s.mean_x[0].as_f64(),
                s.mean_p[0].as_f64(),
                s.delta_x[0].as_f64(),
                s.delta_p[0].as_f64(),
                s.norm.as_f64(),
                s.x4[0].as_f64(),
            ],
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `n,delta_e_8pi,delta_e_coulomb,ratio,units`.
pub fn write_hydrogen_csv(rows: &[HydrogenCorrection], out: impl Write) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["n", "delta_e_8pi", "delta_e_coulomb", "ratio", "units"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            format_f64(r.delta_e_8pi),
            format_f64(r.delta_e_coulomb),
            format_f64(r.ratio),
            r.convention.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn hydrogen_json(rows: &[HydrogenCorrection], l1: f64, l2: f64) -> Value {
    json!({
        "unit_convention": crate::twobody::HYDROGEN_CONVENTION,
        "energy_unit": "hartree",
        "length_unit": "bohr",
        "l1": l1,
        "l2": l2,
        "rows": rows,
    })
}

/// Bound report: formula, convention, inputs, constants with citations and
/// the result in meters and Planck lengths.
pub fn bound_json(result: &BoundResult, constants: &PhysicalConstants) -> Value {
    json!({
        "formula": result.formula,
        "convention": result.convention,
        "inputs": result.inputs,
        "constants": constants,
        "l0_max_m": result.l0_max_m,
        "l0_max_planck": result.l0_max_planck,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::make_gaussian_state;

    #[test]
    fn state_round_trip_is_bit_exact() {
        let grid = MomentumGrid::with_position_spacing(1, 64, 0.2, 1.0).unwrap();
        let state = make_gaussian_state(&grid, &[0.3], &[1.1], 0.7).unwrap().with_time(0.125);
        let mut buf = Vec::new();
        write_state_csv(&state, &mut buf).unwrap();
        let back = read_state_csv(buf.as_slice()).unwrap();
        assert_eq!(back.grid(), state.grid());
        assert_eq!(back.time(), 0.125);
        for (a, b) in back.amplitudes().iter().zip(state.amplitudes()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn malformed_header_is_rejected() {
        let text = "# dim = 1\n# n = 4\nre,im\n1,0\n";
        assert!(matches!(read_state_csv(text.as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn seventeen_digits() {
        let s = format_f64(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
    }
}
