//! Flat `key = value` run configuration.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use freelunch_core::{Error as CoreError, InitialCondition, QuantumStateSpec, ScenarioFlags, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    MonteCarlo,
    Sweep,
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::MonteCarlo => "montecarlo",
            Mode::Sweep => "sweep",
            Mode::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Tau,
    N,
    R,
    Theta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Tau => "tau",
            Axis::N => "n",
            Axis::R => "r",
            Axis::Theta => "theta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub variable: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let u = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * u,
                    Scale::Log => self.min * (self.max / self.min).powf(u),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: SystemParams,
    pub state: QuantumStateSpec,
    pub flags: ScenarioFlags,
    /// Protocol duration for single-point modes [s].
    pub tau: f64,
    pub sweep: SweepAxis,
    /// Adds Monte Carlo columns to sweeps.
    pub monte_carlo: bool,
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Golden-section refinement of P extrema in τ sweeps.
    pub refine: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Analytic,
            params: SystemParams::default(),
            state: QuantumStateSpec::squeezed(1.0, 0.0, 0.0),
            flags: ScenarioFlags::hybrid(),
            tau: 1e-4,
            sweep: SweepAxis {
                variable: Axis::Tau,
                min: 1e-5,
                max: 1e-3,
                points: 400,
                scale: Scale::Log,
            },
            monte_carlo: false,
            samples: 20_000,
            seed: 0,
            out: PathBuf::from("out"),
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

pub const KEYS: &[&str] = &[
    "mode",
    "m",
    "M",
    "Gamma",
    "omega_x",
    "omega_y",
    "zpf_y",
    "zpf_noise",
    "g",
    "T",
    "hbar",
    "k_B",
    "n",
    "theta",
    "r",
    "phi",
    "thermal_noise",
    "quantum_noise",
    "initial_condition",
    "tau",
    "sweep_variable",
    "sweep_min",
    "sweep_max",
    "sweep_points",
    "sweep_scale",
    "montecarlo",
    "samples",
    "seed",
    "out",
    "refine",
];

fn number(value: &str) -> Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("expected a number, got {value:?}"))
}

fn boolean(value: &str) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got {value:?}")),
    }
}

fn integer<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("expected a non-negative integer, got {value:?}"))
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let p = &mut self.params;
        match key {
            "mode" => {
                self.mode = match value {
                    "analytic" => Mode::Analytic,
                    "montecarlo" => Mode::MonteCarlo,
                    "sweep" => Mode::Sweep,
                    "validate" => Mode::Validate,
                    _ => return Err(format!("unknown mode {value:?}")),
                }
            }
            "m" => p.mass = number(value)?,
            "M" => p.quantum_mass = number(value)?,
            "Gamma" => p.damping = number(value)?,
            "omega_x" => p.omega_x = number(value)?,
            "omega_y" => p.omega_y = number(value)?,
            "zpf_y" => p.zpf_y = number(value)?,
            "zpf_noise" => {
                p.noise_zpf = match value {
                    "none" => None,
                    _ => Some(number(value)?),
                }
            }
            "g" => p.coupling = number(value)?,
            "T" => p.temperature = number(value)?,
            "hbar" => p.hbar = number(value)?,
            "k_B" => p.k_b = number(value)?,
            "n" => self.state.n = number(value)?,
            "theta" => self.state.theta = number(value)?,
            "r" => self.state.r = number(value)?,
            "phi" => self.state.phi = number(value)?,
            "thermal_noise" => self.flags.thermal_noise = boolean(value)?,
            "quantum_noise" => self.flags.quantum_noise = boolean(value)?,
            "initial_condition" => {
                self.flags.initial_condition = match value {
                    "thermal" => InitialCondition::ThermalEquilibrium,
                    "zero" => InitialCondition::DeterministicZero,
                    _ => return Err(format!("expected thermal or zero, got {value:?}")),
                }
            }
            "tau" => self.tau = number(value)?,
            "sweep_variable" => {
                self.sweep.variable = match value {
                    "tau" => Axis::Tau,
                    "n" => Axis::N,
                    "r" => Axis::R,
                    "theta" => Axis::Theta,
                    _ => return Err(format!("expected tau, n, r or theta, got {value:?}")),
                }
            }
            "sweep_min" => self.sweep.min = number(value)?,
            "sweep_max" => self.sweep.max = number(value)?,
            "sweep_points" => self.sweep.points = integer(value)?,
            "sweep_scale" => {
                self.sweep.scale = match value {
                    "linear" => Scale::Linear,
                    "log" => Scale::Log,
                    _ => return Err(format!("expected linear or log, got {value:?}")),
                }
            }
            "montecarlo" => self.monte_carlo = boolean(value)?,
            "samples" => self.samples = integer(value)?,
            "seed" => self.seed = integer(value)?,
            "out" => {
                if value.is_empty() {
                    return Err("output directory must not be empty".into());
                }
                self.out = PathBuf::from(value)
            }
            "refine" => self.refine = boolean(value)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Checks cross-field invariants. `lines` maps keys to where they were set.
    fn check(&self, lines: &HashMap<String, usize>) -> Result<(), ConfigError> {
        let error = |key: &str, message: String| ConfigError {
            line: lines.get(key).copied(),
            key: key.to_string(),
            message,
        };
        let violations = |e: CoreError| match e {
            CoreError::InvalidParams(v) => {
                let first = &v[0];
                error(first.field, first.message.clone())
            }
            other => error("params", other.to_string()),
        };
        self.params.validate().map_err(violations)?;
        self.state.validate().map_err(violations)?;
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(error("tau", format!("must be finite and > 0, got {:e}", self.tau)));
        }
        let s = &self.sweep;
        if s.points == 0 {
            return Err(error("sweep_points", "must be at least 1".into()));
        }
        if !(s.min.is_finite() && s.max.is_finite()) || s.min > s.max {
            return Err(error(
                "sweep_max",
                format!("sweep range must satisfy min <= max, got [{:e}, {:e}]", s.min, s.max),
            ));
        }
        if s.scale == Scale::Log && s.min <= 0.0 {
            return Err(error("sweep_min", "a log sweep needs min > 0".into()));
        }
        let floor_ok = match s.variable {
            Axis::Tau => s.min > 0.0,
            Axis::N | Axis::R => s.min >= 0.0,
            Axis::Theta => true,
        };
        if !floor_ok {
            return Err(error(
                "sweep_min",
                format!("out of range for {}: {:e}", s.variable.name(), s.min),
            ));
        }
        if self.samples < freelunch_core::montecarlo::MIN_SAMPLES {
            return Err(error(
                "samples",
                format!("need at least {}", freelunch_core::montecarlo::MIN_SAMPLES),
            ));
        }
        Ok(())
    }

    /// Writes every key, so re-parsing the echo reproduces this config exactly.
    pub fn echo(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut line = |key: &str, value: String| {
            let _ = writeln!(s, "{key} = {value}");
        };
        line("mode", self.mode.name().into());
        line("m", format!("{:e}", p.mass));
        line("M", format!("{:e}", p.quantum_mass));
        line("Gamma", format!("{:e}", p.damping));
        line("omega_x", format!("{:e}", p.omega_x));
        line("omega_y", format!("{:e}", p.omega_y));
        line("zpf_y", format!("{:e}", p.zpf_y));
        line(
            "zpf_noise",
            p.noise_zpf.map_or("none".into(), |z| format!("{z:e}")),
        );
        line("g", format!("{:e}", p.coupling));
        line("T", format!("{:e}", p.temperature));
        line("hbar", format!("{:e}", p.hbar));
        line("k_B", format!("{:e}", p.k_b));
        line("n", format!("{:e}", self.state.n));
        line("theta", format!("{:e}", self.state.theta));
        line("r", format!("{:e}", self.state.r));
        line("phi", format!("{:e}", self.state.phi));
        line("thermal_noise", self.flags.thermal_noise.to_string());
        line("quantum_noise", self.flags.quantum_noise.to_string());
        line(
            "initial_condition",
            match self.flags.initial_condition {
                InitialCondition::ThermalEquilibrium => "thermal",
                InitialCondition::DeterministicZero => "zero",
            }
            .into(),
        );
        line("tau", format!("{:e}", self.tau));
        line("sweep_variable", self.sweep.variable.name().into());
        line("sweep_min", format!("{:e}", self.sweep.min));
        line("sweep_max", format!("{:e}", self.sweep.max));
        line("sweep_points", self.sweep.points.to_string());
        line(
            "sweep_scale",
            match self.sweep.scale {
                Scale::Linear => "linear",
                Scale::Log => "log",
            }
            .into(),
        );
        line("montecarlo", self.monte_carlo.to_string());
        line("samples", self.samples.to_string());
        line("seed", self.seed.to_string());
        line("out", self.out.display().to_string());
        line("refine", self.refine.to_string());
        s
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    let mut lines: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError {
                line: Some(number),
                key: content.to_string(),
                message: "expected key = value".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if let Some(first) = lines.get(key) {
            return Err(ConfigError {
                line: Some(number),
                key: key.to_string(),
                message: format!("duplicate key, first set on line {first}"),
            });
        }
        config.set(key, value).map_err(|message| ConfigError {
            line: Some(number),
            key: key.to_string(),
            message,
        })?;
        lines.insert(key.to_string(), number);
    }
    config.check(&lines)?;
    Ok(config)
}
