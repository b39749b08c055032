//! SI constants and experimental upper bounds on the minimal position
//! uncertainty `l0`.
//!
//! Everything here is plain `f64` arithmetic in SI units.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

const CODATA: &str = "CODATA 2018 recommended values (Tiesinga et al., Rev. Mod. Phys. 93, 025010 (2021))";

/// A physical constant with its source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constant {
    pub value: f64,
    pub unit: &'static str,
    pub citation: &'static str,
}

const fn codata(value: f64, unit: &'static str) -> Constant {
    Constant { value, unit, citation: CODATA }
}

/// SI constants used by the bound calculations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub hbar: Constant,
    pub c: Constant,
    pub g: Constant,
    pub e: Constant,
    pub epsilon0: Constant,
    pub electron_mass: Constant,
    pub proton_mass: Constant,
    pub planck_length: Constant,
    pub planck_mass: Constant,
    /// Bohr radius for an infinitely heavy nucleus.
    pub bohr_radius: Constant,
    pub hartree: Constant,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata_2018()
    }
}

impl PhysicalConstants {
    pub fn codata_2018() -> Self {
        Self {
            hbar: codata(1.054_571_817e-34, "J s"),
            c: codata(299_792_458.0, "m s^-1"),
            g: codata(6.674_30e-11, "m^3 kg^-1 s^-2"),
            e: codata(1.602_176_634e-19, "C"),
            epsilon0: codata(8.854_187_812_8e-12, "F m^-1"),
            electron_mass: codata(9.109_383_701_5e-31, "kg"),
            proton_mass: codata(1.672_621_923_69e-27, "kg"),
            planck_length: codata(1.616_255e-35, "m"),
            planck_mass: codata(2.176_434e-8, "kg"),
            bohr_radius: codata(5.291_772_109_03e-11, "m"),
            hartree: codata(4.359_744_722_207_1e-18, "J"),
        }
    }

    /// `m_e m_p / (m_e + m_p)`.
    pub fn hydrogen_reduced_mass(&self) -> f64 {
        let (me, mp) = (self.electron_mass.value, self.proton_mass.value);
        me * mp / (me + mp)
    }

    /// `4 pi eps0 hbar^2 / (mu e^2)` with the hydrogen reduced mass.
    pub fn reduced_bohr_radius(&self) -> f64 {
        self.bohr_radius.value * self.electron_mass.value / self.hydrogen_reduced_mass()
    }

    /// Relative deviations of the derived constants from their defining
    /// relations: `l_P = sqrt(hbar G / c^3)`, `M_p = sqrt(hbar c / G)`,
    /// `a0 = 4 pi eps0 hbar^2 / (m_e e^2)`, `E_h = hbar^2 / (m_e a0^2)`.
    pub fn consistency(&self) -> BTreeMap<&'static str, f64> {
        let (hbar, c, g) = (self.hbar.value, self.c.value, self.g.value);
        let rel = |stored: f64, derived: f64| ((stored - derived) / derived).abs();
        let a0 = 4.0 * std::f64::consts::PI * self.epsilon0.value * hbar * hbar
            / (self.electron_mass.value * self.e.value * self.e.value);
        let mut out = BTreeMap::new();
        out.insert("planck_length", rel(self.planck_length.value, (hbar * g / c.powi(3)).sqrt()));
        out.insert("planck_mass", rel(self.planck_mass.value, (hbar * c / g).sqrt()));
        out.insert("bohr_radius", rel(self.bohr_radius.value, a0));
        out.insert(
            "hartree",
            rel(self.hartree.value, hbar * hbar / (self.electron_mass.value * self.bohr_radius.value.powi(2))),
        );
        out
    }
}

/// Inputs of an experimental bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentRecord {
    /// Oscillator mode with mass `mass` (kg), angular frequency `omega`
    /// (rad/s) and measured residual energy `energy` (J) in `dim` dimensions.
    Auriga { mass: f64, omega: f64, energy: f64, dim: usize },
    /// Relative uncertainty of the hydrogen 1S-2S interval.
    Hydrogen1S2S { relative_uncertainty: f64 },
}

/// Default bar-mode frequency, rad/s.
pub const AURIGA_DEFAULT_OMEGA: f64 = 2.0 * std::f64::consts::PI * 900.0;
/// Default residual mode energy, J.
pub const AURIGA_DEFAULT_ENERGY: f64 = 1.3e-26;
/// Default mode mass in Planck masses.
pub const AURIGA_DEFAULT_MASS_PLANCK: f64 = 1e13;
pub const HYDROGEN_1S2S_DEFAULT_UNCERTAINTY: f64 = 4.5e-15;

impl ExperimentRecord {
    /// `m = 1e13 M_p`, `E = 1.3e-26 J`, `omega = 2 pi 900 Hz`, `d = 1`.
    pub fn auriga_default(constants: &PhysicalConstants) -> Self {
        Self::Auriga {
            mass: AURIGA_DEFAULT_MASS_PLANCK * constants.planck_mass.value,
            omega: AURIGA_DEFAULT_OMEGA,
            energy: AURIGA_DEFAULT_ENERGY,
            dim: 1,
        }
    }

    pub fn hydrogen_default() -> Self {
        Self::Hydrogen1S2S { relative_uncertainty: HYDROGEN_1S2S_DEFAULT_UNCERTAINTY }
    }
}

/// Which closed form supplies the hydrogen S-level shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `dE_n = -(E_h / (2 n^2)) 16 pi L^2 / (n a0^2) = -8 pi E_h L^2 / (n^3 a0^2)`.
    #[serde(rename = "8pi")]
    EightPi,
    /// `dE_n = -(L^2 / 2) (e^2 / eps0) |psi_n00(0)|^2 = -2 E_h L^2 / (n^3 a0^2)`,
    /// from the delta-function Laplacian of the Coulomb potential.
    Coulomb,
}

impl Convention {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::EightPi => "8pi",
            Self::Coulomb => "coulomb",
        }
    }

    /// `|dE_n| n^3 a0^2 / (E_h L^2)`.
    pub fn coefficient(&self) -> f64 {
        match self {
            Self::EightPi => 8.0 * std::f64::consts::PI,
            Self::Coulomb => 2.0,
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "8pi" => Ok(Self::EightPi),
            "coulomb" => Ok(Self::Coulomb),
            other => Err(Error::UnknownConvention(other.to_string())),
        }
    }
}

/// Upper bound on `l0` (or `sqrt(l1^2 + l2^2)`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub formula: &'static str,
    pub convention: Option<&'static str>,
    pub l0_max_m: f64,
    pub l0_max_planck: f64,
    pub inputs: BTreeMap<&'static str, f64>,
}

impl BoundResult {
    fn new(
        formula: &'static str,
        convention: Option<&'static str>,
        l0_max_m: f64,
        inputs: BTreeMap<&'static str, f64>,
        constants: &PhysicalConstants,
    ) -> Self {
        Self { formula, convention, l0_max_m, l0_max_planck: l0_max_m / constants.planck_length.value, inputs }
    }
}

/// Oscillator ground-state bound: `E_min = (d/2) hbar omega + (d/2) m l0^2
/// omega^2 < E_exp`, i.e. `l0_max = sqrt((2 E_exp / d - hbar omega) / (m omega^2))`.
pub fn auriga_bound(record: &ExperimentRecord, constants: &PhysicalConstants) -> Result<BoundResult> {
    let ExperimentRecord::Auriga { mass, omega, energy, dim } = *record else {
        return Err(Error::InvalidInput("expected an oscillator experiment record".into()));
    };
    if !(mass > 0.0 && omega > 0.0 && energy > 0.0 && dim >= 1) {
        return Err(Error::InvalidInput(format!(
            "mass, frequency and energy must be positive and d >= 1, got {mass}, {omega}, {energy}, {dim}"
        )));
    }
    let hbar = constants.hbar.value;
    let d = dim as f64;
    let floor = d * hbar * omega / 2.0;
    let mut excess = 2.0 * energy / d - hbar * omega;
    if excess < 0.0 {
        if (energy - floor).abs() <= 1e-12 * floor {
            excess = 0.0;
        } else {
            return Err(Error::Precondition(format!(
                "measured energy {energy:e} J is below the zero-point floor d hbar omega / 2 = {floor:e} J"
            )));
        }
    }
    let l0 = (excess / (mass * omega * omega)).sqrt();
    let mut inputs = BTreeMap::new();
    inputs.insert("mass_kg", mass);
    inputs.insert("mass_planck", mass / constants.planck_mass.value);
    inputs.insert("omega_rad_s", omega);
    inputs.insert("energy_j", energy);
    inputs.insert("dimension", d);
    inputs.insert("zero_point_floor_j", floor);
    Ok(BoundResult::new("sqrt((2 E / d - hbar omega) / (m omega^2))", None, l0, inputs, constants))
}

/// 1S-2S bound: `|dE_2 - dE_1| <= delta * (E_2S - E_1S)` solved for
/// `L = sqrt(l1^2 + l2^2)`.
///
/// With `|dE_n| = k E_h L^2 / (n^3 a^2)` and `E_2S - E_1S = (3/8) E_h`
/// (both with the reduced-mass Bohr radius `a` and hartree), the energy
/// scale cancels and `L = a sqrt(3 delta / (7 k))`.
pub fn hydrogen_1s2s_bound(
    record: &ExperimentRecord,
    convention: Convention,
    constants: &PhysicalConstants,
) -> Result<BoundResult> {
    let ExperimentRecord::Hydrogen1S2S { relative_uncertainty } = *record else {
        return Err(Error::InvalidInput("expected a 1S-2S experiment record".into()));
    };
    if !(relative_uncertainty > 0.0 && relative_uncertainty < 1.0) {
        return Err(Error::InvalidInput(format!(
            "relative uncertainty must lie in (0, 1), got {relative_uncertainty}"
        )));
    }
    let a = constants.reduced_bohr_radius();
    let k = convention.coefficient();
    // |1/1^3 - 1/2^3| = 7/8
    let l = a * (3.0 * relative_uncertainty / (7.0 * k)).sqrt();
    let hartree_mu = constants.hartree.value * constants.hydrogen_reduced_mass() / constants.electron_mass.value;
    let mut inputs = BTreeMap::new();
    inputs.insert("relative_uncertainty", relative_uncertainty);
    inputs.insert("reduced_bohr_radius_m", a);
    inputs.insert("transition_energy_j", 0.375 * hartree_mu);
    inputs.insert("shift_coefficient", k);
    Ok(BoundResult::new("|dE_2 - dE_1| <= delta (3/8) E_h", Some(convention.as_str()), l, inputs, constants))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_consistent() {
        for (name, dev) in PhysicalConstants::default().consistency() {
            assert!(dev < 1e-6, "{name}: {dev:e}");
        }
    }

    #[test]
    fn saturated_zero_point_gives_zero() {
        let c = PhysicalConstants::default();
        let omega = 1000.0;
        let rec = ExperimentRecord::Auriga { mass: 1.0, omega, energy: c.hbar.value * omega / 2.0, dim: 1 };
        assert_eq!(auriga_bound(&rec, &c).unwrap().l0_max_m, 0.0);
        let rec = ExperimentRecord::Auriga { mass: 1.0, omega, energy: c.hbar.value * omega / 4.0, dim: 1 };
        assert!(matches!(auriga_bound(&rec, &c), Err(Error::Precondition(_))));
    }

    #[test]
    fn hydrogen_bound_scales_with_sqrt_uncertainty() {
        let c = PhysicalConstants::default();
        let a = hydrogen_1s2s_bound(
            &ExperimentRecord::Hydrogen1S2S { relative_uncertainty: 1e-14 },
            Convention::EightPi,
            &c,
        )
        .unwrap();
        let b = hydrogen_1s2s_bound(
            &ExperimentRecord::Hydrogen1S2S { relative_uncertainty: 4e-14 },
            Convention::EightPi,
            &c,
        )
        .unwrap();
        assert!((b.l0_max_m / a.l0_max_m - 2.0).abs() < 1e-12);
        assert!("other".parse::<Convention>().is_err());
    }
}
