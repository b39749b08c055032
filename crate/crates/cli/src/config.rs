//! Line-based `key = value` configuration.
//!
//! Keys are dotted (`kernel.l0`), arrays are comma lists, `#` starts a
//! comment. Later assignments win, so `--override` flags are applied after
//! the file.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use povmqm::bounds::{
    Convention, ExperimentRecord, PhysicalConstants, AURIGA_DEFAULT_ENERGY, AURIGA_DEFAULT_MASS_PLANCK,
    AURIGA_DEFAULT_OMEGA, HYDROGEN_1S2S_DEFAULT_UNCERTAINTY,
};
use povmqm::dynamics::PotentialSpec;
use povmqm::kernels::{RadialKernel, SchoenbergMeasure};
use povmqm::wavefunction::{make_gaussian_state, WaveState};
use povmqm::MomentumGrid;

use crate::CliError;

/// Every key the tool understands, with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("kernel.family", "constant | gaussian | schoenberg"),
    ("kernel.l0", "minimal length of a gaussian kernel, or of a single-node schoenberg kernel"),
    ("kernel.nodes", "schoenberg nodes u_k (inverse momentum units, so r*u is dimensionless)"),
    ("kernel.weights", "relative schoenberg weights, normalized automatically"),
    ("kernel.dimension", "spatial dimension d (1..3)"),
    ("grid.n", "points per axis"),
    ("grid.dx", "position spacing (alternative to grid.p_max)"),
    ("grid.p_max", "momentum half-extent (alternative to grid.dx)"),
    ("grid.hbar", "reduced Planck constant in model units"),
    ("state.x0", "packet center, one value per axis"),
    ("state.p0", "packet mean momentum, one value per axis"),
    ("state.sigma", "packet position width"),
    ("state.file", "momentum-amplitude CSV to load instead of a packet"),
    ("potential.kind", "zero | harmonic | gaussian_well"),
    ("potential.omega", "harmonic angular frequency"),
    ("potential.depth", "gaussian well depth (negative)"),
    ("potential.width", "gaussian well width"),
    ("particle.mass", "particle mass"),
    ("integrator.dt", "time step"),
    ("integrator.steps", "number of steps"),
    ("integrator.stride", "steps between recorded samples"),
    ("spectrum.count", "number of eigenvalues"),
    ("hydrogen.n_max", "largest principal quantum number"),
    ("hydrogen.l1", "electron kernel length in bohr"),
    ("hydrogen.l2", "proton kernel length in bohr"),
    ("hydrogen.relative_uncertainty", "1S-2S relative uncertainty for the bound"),
    ("hydrogen.convention", "8pi | coulomb"),
    ("auriga.mass_planck", "mode mass in Planck masses"),
    ("auriga.omega", "mode angular frequency in rad/s"),
    ("auriga.energy", "measured residual energy in J"),
    ("auriga.dimension", "oscillator dimension"),
];

/// Raw key/value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = Self::default();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("config line {}: expected `key = value`", number + 1)))?;
            map.set(k.trim(), v.trim())?;
        }
        Ok(map)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let (k, v) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("override `{spec}` is not `key=value`")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(CliError::Validation(format!("unknown config key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| CliError::Validation(format!("`{key}`: cannot parse `{v}`"))))
            .transpose()
    }

    fn number(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.parse_value(key)?.unwrap_or(default);
        if !f64::is_finite(v) {
            return Err(CliError::Validation(format!("`{key}` must be finite")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.parse_value(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| CliError::Validation(format!("`{key}`: bad list entry `{s}`")))
                    })
                    .collect()
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Self::Json | Self::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "both" => Ok(Self::Both),
            other => Err(CliError::Validation(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub x0: Vec<f64>,
    pub p0: Vec<f64>,
    pub sigma: f64,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydrogenSpec {
    pub n_max: usize,
    pub l1: f64,
    pub l2: f64,
    pub relative_uncertainty: f64,
    pub convention: Convention,
}

/// Fully validated run configuration. Building one constructs every library
/// object up front, so a bad value fails before any output is produced.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kernel: RadialKernel<f64>,
    pub grid: MomentumGrid<f64>,
    pub state: StateSpec,
    pub potential: PotentialSpec<f64>,
    pub mass: f64,
    pub integrator: Integrator,
    pub spectrum_count: usize,
    pub hydrogen: HydrogenSpec,
    pub auriga: ExperimentRecord,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap, out_dir: PathBuf, format: OutputFormat) -> Result<Self, CliError> {
        let dim = map.count("kernel.dimension", 1)?;
        let hbar = map.number("grid.hbar", 1.0)?;
        let kernel = match map.get("kernel.family").unwrap_or("gaussian") {
            "constant" => RadialKernel::constant(dim, hbar)?,
            "gaussian" => RadialKernel::gaussian(dim, map.number("kernel.l0", 0.2)?, hbar)?,
            "schoenberg" => match map.list("kernel.nodes")? {
                Some(nodes) => {
                    let weights = map.list("kernel.weights")?.unwrap_or_else(|| vec![1.0; nodes.len()]);
                    RadialKernel::schoenberg(dim, SchoenbergMeasure::normalized(nodes, weights, dim, hbar)?, hbar)?
                }
                None => RadialKernel::schoenberg_single(dim, map.number("kernel.l0", 0.2)?, hbar)?,
            },
            other => return Err(CliError::Validation(format!("unknown kernel family `{other}`"))),
        };

        let n = map.count("grid.n", 512)?;
        let grid = match (map.get("grid.dx"), map.get("grid.p_max")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation("set either grid.dx or grid.p_max, not both".into()))
            }
            (_, Some(_)) => MomentumGrid::with_momentum_extent(dim, n, map.number("grid.p_max", 0.0)?, hbar)?,
            _ => MomentumGrid::with_position_spacing(dim, n, map.number("grid.dx", 0.05)?, hbar)?,
        };

        let axis_list = |key: &str| -> Result<Vec<f64>, CliError> {
            let v = map.list(key)?.unwrap_or_else(|| vec![0.0; dim]);
            if v.len() != dim {
                return Err(CliError::Validation(format!("`{key}` needs {dim} entries, got {}", v.len())));
            }
            Ok(v)
        };
        let state = StateSpec {
            x0: axis_list("state.x0")?,
            p0: axis_list("state.p0")?,
            sigma: map.number("state.sigma", 1.0)?,
            file: map.get("state.file").map(PathBuf::from),
        };

        let mass = map.number("particle.mass", 1.0)?;
        if !(mass > 0.0) {
            return Err(CliError::Validation("particle.mass must be positive".into()));
        }
        let potential = match map.get("potential.kind").unwrap_or("zero") {
            "zero" => PotentialSpec::Zero,
            "harmonic" => PotentialSpec::Harmonic { mass, omega: map.number("potential.omega", 1.0)? },
            "gaussian_well" => PotentialSpec::GaussianWell {
                depth: map.number("potential.depth", -1.0)?,
                width: map.number("potential.width", 1.0)?,
            },
            other => return Err(CliError::Validation(format!("unknown potential kind `{other}`"))),
        };
        potential.validate()?;

        let integrator = Integrator {
            dt: map.number("integrator.dt", 1e-3)?,
            steps: map.count("integrator.steps", 1000)?,
            stride: map.count("integrator.stride", 10)?,
        };
        if !(integrator.dt > 0.0) || integrator.stride == 0 {
            return Err(CliError::Validation("integrator.dt and integrator.stride must be positive".into()));
        }

        let convention: Convention = map.get("hydrogen.convention").unwrap_or("8pi").parse()?;
        let hydrogen = HydrogenSpec {
            n_max: map.count("hydrogen.n_max", 5)?,
            l1: map.number("hydrogen.l1", 1e-3)?,
            l2: map.number("hydrogen.l2", 0.0)?,
            relative_uncertainty: map.number("hydrogen.relative_uncertainty", HYDROGEN_1S2S_DEFAULT_UNCERTAINTY)?,
            convention,
        };
        if !(1..=10).contains(&hydrogen.n_max) {
            return Err(CliError::Validation("hydrogen.n_max must be in 1..=10".into()));
        }

        let constants = PhysicalConstants::codata_2018();
        let auriga = ExperimentRecord::Auriga {
            mass: map.number("auriga.mass_planck", AURIGA_DEFAULT_MASS_PLANCK)? * constants.planck_mass.value,
            omega: map.number("auriga.omega", AURIGA_DEFAULT_OMEGA)?,
            energy: map.number("auriga.energy", AURIGA_DEFAULT_ENERGY)?,
            dim: map.count("auriga.dimension", 1)?,
        };

        Ok(Self {
            kernel,
            grid,
            state,
            potential,
            mass,
            integrator,
            spectrum_count: map.count("spectrum.count", 8)?,
            hydrogen,
            auriga,
            out_dir,
            format,
        })
    }

    /// Initial state: the configured file, or a Gaussian packet.
    pub fn initial_state(&self) -> Result<WaveState<f64>, CliError> {
        match &self.state.file {
            Some(path) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| CliError::Validation(format!("cannot open {}: {e}", path.display())))?;
                let state = povmqm::io::read_state_csv(std::io::BufReader::new(file))?;
                if state.grid() != &self.grid {
                    return Err(CliError::Validation("state file grid differs from the configured grid".into()));
                }
                Ok(state)
            }
            None => Ok(make_gaussian_state(&self.grid, &self.state.x0, &self.state.p0, self.state.sigma)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_lists_and_overrides() {
        let mut m = ConfigMap::parse("# header\nkernel.l0 = 0.3  # trailing\n\nkernel.nodes = 1, 2.5\n").unwrap();
        assert_eq!(m.get("kernel.l0"), Some("0.3"));
        assert_eq!(m.list("kernel.nodes").unwrap(), Some(vec![1.0, 2.5]));
        m.apply_override("kernel.l0=0.4").unwrap();
        assert_eq!(m.get("kernel.l0"), Some("0.4"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(matches!(ConfigMap::parse("kernel.width = 1"), Err(CliError::Validation(_))));
        assert!(matches!(ConfigMap::parse("kernel.l0 0.1"), Err(CliError::Validation(_))));
    }

    #[test]
    fn builds_defaults() {
        let cfg = RunConfig::from_map(&ConfigMap::default(), "out".into(), OutputFormat::Both).unwrap();
        assert_eq!(cfg.grid.n(), 512);
        assert!((cfg.kernel.l0() - 0.2).abs() < 1e-15);
        assert!(cfg.initial_state().is_ok());
    }
}
