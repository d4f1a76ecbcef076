//! Physical parameters, quantum-state descriptors, scenario switches and the
//! Coulomb-interaction relations that produce the coupling rate and the
//! shifted trap frequencies.

use std::f64::consts::PI;

use crate::error::{Error, ParamViolation, Result};

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Vacuum permittivity [F/m], CODATA 2018.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Physical constants of the two-particle system.
///
/// Frequencies are angular and are taken as the effective (already
/// Coulomb-shifted) trap frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Mass of the classical particle `m` [kg].
    pub mass: f64,
    /// Mass of the quantum particle `M` [kg].
    pub quantum_mass: f64,
    /// Damping rate `Γ` [1/s].
    pub damping: f64,
    /// Classical trap frequency `ω_x` [rad/s].
    pub omega_x: f64,
    /// Quantum trap frequency `ω_y` [rad/s]; also the drive and noise carrier.
    pub omega_y: f64,
    /// Zero-point fluctuation entering the force amplitude `ħg/zpf` [m].
    pub zpf_y: f64,
    /// Optional separate zero-point scale for the noise amplitude [m].
    /// `None` uses `zpf_y`.
    pub noise_zpf: Option<f64>,
    /// Coupling rate `g` [rad/s]; negative for like charges.
    pub coupling: f64,
    /// Bath temperature `T` [K].
    pub temperature: f64,
    pub hbar: f64,
    pub k_b: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        let omega_y = 2.0 * PI * 147.0e3;
        let zpf_y = 4.1e-12;
        Self {
            mass: 1.0e-18,
            // Consistent with zpf_y = sqrt(ħ / 2Mω_y); M enters nothing else.
            quantum_mass: HBAR / (2.0 * omega_y * zpf_y * zpf_y),
            damping: 1.0e-20,
            omega_x: 2.0 * PI * 134.0e3,
            omega_y,
            zpf_y,
            noise_zpf: None,
            coupling: 2.0 * PI * 51.0e3,
            temperature: 60.0,
            hbar: HBAR,
            k_b: BOLTZMANN,
        }
    }
}

impl SystemParams {
    /// Checks every invariant and returns the normalized record.
    ///
    /// All violations are collected, not just the first.
    pub fn validate(&self) -> Result<System> {
        let mut violations = Vec::new();
        let mut positive = |field: &'static str, value: f64| {
            if !(value.is_finite() && value > 0.0) {
                violations.push(ParamViolation::new(
                    field,
                    format!("must be finite and > 0, got {value:e}"),
                ));
            }
        };
        positive("m", self.mass);
        positive("M", self.quantum_mass);
        positive("omega_x", self.omega_x);
        positive("omega_y", self.omega_y);
        positive("zpf_y", self.zpf_y);
        positive("T", self.temperature);
        positive("hbar", self.hbar);
        positive("k_B", self.k_b);
        if let Some(zpf) = self.noise_zpf {
            positive("zpf_noise", zpf);
        }
        if !(self.damping.is_finite() && self.damping >= 0.0) {
            violations.push(ParamViolation::new(
                "Gamma",
                format!("must be finite and >= 0, got {:e}", self.damping),
            ));
        }
        if !self.coupling.is_finite() {
            violations.push(ParamViolation::new("g", "must be finite"));
        }
        if violations.is_empty() {
            let radicand = 4.0 * self.omega_x * self.omega_x - self.damping * self.damping;
            if radicand <= 0.0 {
                violations.push(ParamViolation::new(
                    "Gamma",
                    format!(
                        "overdamped: requires 4*omega_x^2 > Gamma^2 (Gamma = {:e}, omega_x = {:e})",
                        self.damping, self.omega_x
                    ),
                ));
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidParams(violations));
        }
        let big_omega = (4.0 * self.omega_x * self.omega_x - self.damping * self.damping).sqrt();
        Ok(System {
            params: *self,
            beta: 1.0 / (self.k_b * self.temperature),
            big_omega,
        })
    }
}

/// Free-function form of [`SystemParams::validate`].
pub fn validate_params(params: &SystemParams) -> Result<System> {
    params.validate()
}

/// A validated parameter set with the derived `β` and `Ω = √(4ω_x² − Γ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct System {
    params: SystemParams,
    beta: f64,
    big_omega: f64,
}

impl System {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Inverse temperature `1/(k_B T)` [1/J].
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Damped oscillation scale `Ω` [rad/s]; the trajectory oscillates at `Ω/2`.
    pub fn big_omega(&self) -> f64 {
        self.big_omega
    }

    pub fn mass(&self) -> f64 {
        self.params.mass
    }

    pub fn damping(&self) -> f64 {
        self.params.damping
    }

    pub fn omega_x(&self) -> f64 {
        self.params.omega_x
    }

    pub fn omega_y(&self) -> f64 {
        self.params.omega_y
    }

    /// Force amplitude scale `ħg/zpf_y` [N].
    pub fn force_scale(&self) -> f64 {
        self.params.hbar * self.params.coupling / self.params.zpf_y
    }

    /// Noise amplitude scale `κ = ħg/zpf` [N], using the noise override if set.
    pub fn noise_scale(&self) -> f64 {
        let zpf = self.params.noise_zpf.unwrap_or(self.params.zpf_y);
        self.params.hbar * self.params.coupling / zpf
    }

    /// Strength of the white thermal force, `2mΓk_BT` [N² s].
    pub fn white_noise_strength(&self) -> f64 {
        let p = &self.params;
        2.0 * p.mass * p.damping * p.k_b * p.temperature
    }

    /// Equilibrium position variance `k_BT/(mω_x²)` [m²].
    pub fn thermal_position_variance(&self) -> f64 {
        1.0 / (self.beta * self.params.mass * self.params.omega_x * self.params.omega_x)
    }

    /// Equilibrium velocity variance `k_BT/m` [m²/s²].
    pub fn thermal_velocity_variance(&self) -> f64 {
        1.0 / (self.beta * self.params.mass)
    }

    /// Fastest angular frequency present in the dynamics.
    pub fn fastest_frequency(&self) -> f64 {
        self.params.omega_x.max(self.params.omega_y)
    }
}

/// Coherent or squeezed-coherent state of the quantum particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumStateSpec {
    /// Mean phonon number `n = |α|²`.
    pub n: f64,
    /// Coherent phase `θ` [rad].
    pub theta: f64,
    /// Squeezing parameter `r`; zero is the plain coherent state.
    pub r: f64,
    /// Squeezing phase; only 0 is supported.
    pub phi: f64,
}

impl Default for QuantumStateSpec {
    fn default() -> Self {
        Self::coherent(1.0, 0.0)
    }
}

impl QuantumStateSpec {
    pub fn coherent(n: f64, theta: f64) -> Self {
        Self {
            n,
            theta,
            r: 0.0,
            phi: 0.0,
        }
    }

    pub fn squeezed(n: f64, theta: f64, r: f64) -> Self {
        Self {
            n,
            theta,
            r,
            phi: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if !(self.n.is_finite() && self.n >= 0.0) {
            violations.push(ParamViolation::new("n", format!("must be >= 0, got {}", self.n)));
        }
        if !self.theta.is_finite() {
            violations.push(ParamViolation::new("theta", "must be finite"));
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            violations.push(ParamViolation::new("r", format!("must be >= 0, got {}", self.r)));
        }
        if self.phi != 0.0 {
            violations.push(ParamViolation::new(
                "phi",
                format!("only a zero squeezing phase is supported, got {}", self.phi),
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(violations))
        }
    }
}

/// Initial distribution of the classical particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialCondition {
    /// Zero-mean Gaussian with equipartition variances at the bath temperature.
    ThermalEquilibrium,
    /// `x(0) = v(0) = 0` exactly.
    DeterministicZero,
}

/// Which fluctuation sources act on the classical particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScenarioFlags {
    pub thermal_noise: bool,
    pub quantum_noise: bool,
    pub initial_condition: InitialCondition,
}

impl Default for ScenarioFlags {
    fn default() -> Self {
        Self::hybrid()
    }
}

impl ScenarioFlags {
    /// Thermal bath and equilibrium start, no quantum noise.
    pub fn classical() -> Self {
        Self {
            thermal_noise: true,
            quantum_noise: false,
            initial_condition: InitialCondition::ThermalEquilibrium,
        }
    }

    /// Quantum noise only, starting from rest at the origin.
    pub fn quantum_only() -> Self {
        Self {
            thermal_noise: false,
            quantum_noise: true,
            initial_condition: InitialCondition::DeterministicZero,
        }
    }

    /// Every source switched on.
    pub fn hybrid() -> Self {
        Self {
            thermal_noise: true,
            quantum_noise: true,
            initial_condition: InitialCondition::ThermalEquilibrium,
        }
    }
}

/// Charges and trap separation of the Coulomb-coupled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombGeometry {
    pub q_x: f64,
    pub q_y: f64,
    /// Trap separation `d` [m].
    pub separation: f64,
}

impl CoulombGeometry {
    fn check_separation(&self) -> Result<()> {
        if self.separation.is_finite() && self.separation > 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "trap separation must be > 0, got {:e} m",
                self.separation
            )))
        }
    }

    /// `q_x q_y / (4π ε₀ d³)` [N/m].
    fn spring_shift(&self) -> f64 {
        self.q_x * self.q_y / (4.0 * PI * VACUUM_PERMITTIVITY * self.separation.powi(3))
    }
}

/// Coupling rate `g = −q_x q_y x₀ y₀ / (4π ε₀ ħ d³)` [rad/s], sign preserved.
pub fn coulomb_coupling(geometry: &CoulombGeometry, zpf_x: f64, zpf_y: f64) -> Result<f64> {
    geometry.check_separation()?;
    Ok(-geometry.spring_shift() * zpf_x * zpf_y / HBAR)
}

/// Trap frequency after the quadratic Coulomb correction,
/// `√(ω² − q_x q_y/(4π ε₀ m d³))`.
pub fn shifted_frequency(omega: f64, geometry: &CoulombGeometry, mass: f64) -> Result<f64> {
    geometry.check_separation()?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::domain(format!("mass must be > 0, got {mass:e}")));
    }
    let shift = geometry.spring_shift() / mass;
    let radicand = omega * omega - shift;
    if radicand <= 0.0 {
        return Err(Error::domain(format!(
            "destabilizing coupling: omega^2 = {:e} must exceed q_x q_y/(4 pi eps0 m d^3) = {shift:e}",
            omega * omega
        )));
    }
    Ok(radicand.sqrt())
}

/// One fully specified protocol: system, quantum state, scenario and duration `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experiment {
    system: System,
    state: QuantumStateSpec,
    flags: ScenarioFlags,
    duration: f64,
}

impl Experiment {
    pub fn new(
        params: &SystemParams,
        state: QuantumStateSpec,
        flags: ScenarioFlags,
        duration: f64,
    ) -> Result<Self> {
        let system = params.validate()?;
        Self::from_system(system, state, flags, duration)
    }

    pub fn from_system(
        system: System,
        state: QuantumStateSpec,
        flags: ScenarioFlags,
        duration: f64,
    ) -> Result<Self> {
        state.validate()?;
        check_duration(duration)?;
        Ok(Self {
            system,
            state,
            flags,
            duration,
        })
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn state(&self) -> &QuantumStateSpec {
        &self.state
    }

    pub fn flags(&self) -> &ScenarioFlags {
        &self.flags
    }

    /// Protocol duration `τ` [s].
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        check_duration(duration)?;
        Ok(Self { duration, ..*self })
    }
}

pub(crate) fn check_duration(duration: f64) -> Result<()> {
    if duration.is_finite() && duration > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("duration must be > 0, got {duration:e} s")))
    }
}
