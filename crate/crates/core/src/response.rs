//! Linear response of the damped classical oscillator: Green's function,
//! homogeneous solution, mean trajectory and position covariance.
//!
//! The Green's function `G(Δ) = (2/mΩ) e^{−ΓΔ/2} sin(ΩΔ/2)` is the imaginary
//! part of `(2/mΩ) e^{λΔ}` with `λ = −Γ/2 + iΩ/2`, so a causal convolution
//! `∫₀ᵗ G(t−s) u(s) ds` is carried panel by panel as a complex state
//! `Z(t) = ∫₀ᵗ e^{λ(t−s)} u(s) ds` that only ever decays between panels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::System;
use crate::noise::NoiseModel;
use crate::quadrature::{converge, rule, Panels, NODES_PER_PANEL};

/// Green's function of `m ẍ + mΓẋ + mω_x² x = F(t)`.
#[derive(Debug, Clone, Copy)]
pub struct ImpulseResponse {
    system: System,
}

impl ImpulseResponse {
    pub fn new(system: System) -> Self {
        Self { system }
    }

    /// `G(Δt)` [m/(N s)] for `Δt ≥ 0`.
    pub fn eval(&self, dt: f64) -> Result<f64> {
        if dt.is_nan() || dt < 0.0 {
            return Err(Error::domain(format!(
                "impulse response needs dt >= 0, got {dt:e}"
            )));
        }
        Ok(self.at(dt))
    }

    pub(crate) fn at(&self, dt: f64) -> f64 {
        let s = &self.system;
        let omega = s.big_omega();
        2.0 / (s.mass() * omega) * (-0.5 * s.damping() * dt).exp() * (0.5 * omega * dt).sin()
    }
}

pub fn impulse_response(system: &System, dt: f64) -> Result<f64> {
    ImpulseResponse::new(*system).eval(dt)
}

/// Free motion from `(x0, v0)`:
/// `e^{−Γt/2}[x0 cos(Ωt/2) + ((2v0 + Γx0)/Ω) sin(Ωt/2)]`.
pub fn homogeneous_solution(system: &System, x0: f64, v0: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain(format!("time must be >= 0, got {t:e}")));
    }
    let (h1, h2) = homogeneous_basis(system, t);
    Ok(x0 * h1 + v0 * h2)
}

/// Basis `(h1, h2)` of free solutions with `h1(0)=1, ḣ1(0)=0` and
/// `h2(0)=0, ḣ2(0)=1`.
pub(crate) fn homogeneous_basis(system: &System, t: f64) -> (f64, f64) {
    let omega = system.big_omega();
    let gamma = system.damping();
    let decay = (-0.5 * gamma * t).exp();
    let (sin, cos) = (0.5 * omega * t).sin_cos();
    (
        decay * (cos + gamma / omega * sin),
        decay * 2.0 / omega * sin,
    )
}

/// Mean and second moments of `(x(0), v(0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub mean_x0: f64,
    pub mean_v0: f64,
    pub var_x0: f64,
    pub var_v0: f64,
    pub cov_x0v0: f64,
}

impl InitialState {
    /// Equipartition at the bath temperature, zero mean.
    pub fn thermal(system: &System) -> Self {
        Self {
            mean_x0: 0.0,
            mean_v0: 0.0,
            var_x0: system.thermal_position_variance(),
            var_v0: system.thermal_velocity_variance(),
            cov_x0v0: 0.0,
        }
    }

    pub fn zero() -> Self {
        Self {
            mean_x0: 0.0,
            mean_v0: 0.0,
            var_x0: 0.0,
            var_v0: 0.0,
            cov_x0v0: 0.0,
        }
    }

    pub fn for_condition(system: &System, condition: crate::model::InitialCondition) -> Self {
        match condition {
            crate::model::InitialCondition::ThermalEquilibrium => Self::thermal(system),
            crate::model::InitialCondition::DeterministicZero => Self::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mean_x0,
            self.mean_v0,
            self.var_x0,
            self.var_v0,
            self.cov_x0v0,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("initial state moments must be finite"));
        }
        if self.var_x0 < 0.0 || self.var_v0 < 0.0 {
            return Err(Error::domain("initial variances must be >= 0"));
        }
        if self.cov_x0v0 * self.cov_x0v0 > self.var_x0 * self.var_v0 * (1.0 + 1e-12) {
            return Err(Error::domain(
                "initial covariance matrix is not positive semidefinite",
            ));
        }
        Ok(())
    }

    /// `Cov[x_h(t), x_h(t')]` of the free motion started from this distribution.
    pub(crate) fn homogeneous_covariance(&self, system: &System, t: f64, t2: f64) -> f64 {
        let (a1, a2) = homogeneous_basis(system, t);
        let (b1, b2) = homogeneous_basis(system, t2);
        self.var_x0 * a1 * b1 + self.var_v0 * a2 * b2 + self.cov_x0v0 * (a1 * b2 + a2 * b1)
    }
}

/// Panel width: half a period of the fastest frequency in the system.
pub(crate) fn base_panel_width(system: &System) -> f64 {
    std::f64::consts::PI / system.fastest_frequency()
}

pub(crate) enum FilterEvent<'a> {
    /// A quadrature node with its weight and the filtered responses there.
    Node {
        t: f64,
        weight: f64,
        response: &'a [f64],
    },
    /// The panel edge with this index has been reached.
    Edge(usize),
}

/// Causal convolution with the Green's function, evaluated at every
/// quadrature node of a panel partition.
pub(crate) struct CausalFilter {
    lambda: Complex64,
    gain: f64,
}

impl CausalFilter {
    pub fn new(system: &System) -> Self {
        Self {
            lambda: Complex64::new(-0.5 * system.damping(), 0.5 * system.big_omega()),
            gain: 2.0 / (system.mass() * system.big_omega()),
        }
    }

    /// Filters `channels` forcings at once. `forcing(t, out)` writes each
    /// channel's forcing value at `t`.
    pub fn run<F, V>(&self, panels: &Panels, channels: usize, mut forcing: F, mut visit: V)
    where
        F: FnMut(f64, &mut [f64]),
        V: FnMut(FilterEvent<'_>),
    {
        const N: usize = NODES_PER_PANEL;
        let gl = rule();
        let mut state = vec![Complex64::new(0.0, 0.0); channels];
        let mut scratch = vec![Complex64::new(0.0, 0.0); N * channels];
        let mut rotations = [Complex64::new(0.0, 0.0); N];
        let mut times = [0.0; N];
        let mut values = vec![0.0; channels];
        let mut response = vec![0.0; channels];

        visit(FilterEvent::Edge(0));
        for (p, w) in panels.edges.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            for k in 0..N {
                let d = half * (gl.nodes[k] + 1.0);
                times[k] = a + d;
                rotations[k] = (self.lambda * d).exp();
                let inverse = rotations[k].inv();
                forcing(times[k], &mut values);
                for c in 0..channels {
                    scratch[k * channels + c] = inverse * values[c];
                }
            }
            for j in 0..N {
                for c in 0..channels {
                    let mut partial = Complex64::new(0.0, 0.0);
                    for k in 0..N {
                        partial += scratch[k * channels + c] * gl.cumulative[j][k];
                    }
                    let z = rotations[j] * (state[c] + partial * half);
                    response[c] = self.gain * z.im;
                }
                visit(FilterEvent::Node {
                    t: times[j],
                    weight: gl.weights[j] * half,
                    response: &response,
                });
            }
            let end_rotation = (self.lambda * (b - a)).exp();
            for c in 0..channels {
                let mut full = Complex64::new(0.0, 0.0);
                for k in 0..N {
                    full += scratch[k * channels + c] * gl.weights[k];
                }
                state[c] = end_rotation * (state[c] + full * half);
            }
            visit(FilterEvent::Edge(p + 1));
        }
    }

    /// `∫₀ᵗ G(t−s) u(s) ds` at the final edge only, with the integral of
    /// `|G u|` alongside.
    pub fn endpoint(&self, panels: &Panels, mut forcing: impl FnMut(f64) -> f64) -> (f64, f64) {
        let gl = rule();
        let end = *panels.edges.last().expect("non-empty partition");
        let mut z = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        for w in panels.edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mut sum = Complex64::new(0.0, 0.0);
            for k in 0..NODES_PER_PANEL {
                let s = a + half * (gl.nodes[k] + 1.0);
                let u = forcing(s) * gl.weights[k] * half;
                sum += (self.lambda * (b - s)).exp() * u;
                magnitude += u.abs() * (self.lambda.re * (end - s)).exp();
            }
            z = (self.lambda * (b - a)).exp() * z + sum;
        }
        (self.gain * z.im, self.gain * magnitude)
    }
}

/// Driven response `∫₀ᵗ G(t−s) u(s) ds`, refined until converged.
pub(crate) fn driven_response(
    system: &System,
    t: f64,
    quantity: &'static str,
    forcing: impl Fn(f64) -> f64,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let filter = CausalFilter::new(system);
    let width = base_panel_width(system);
    let v = converge(quantity, |level| {
        let panels = Panels::uniform(0.0, t, width, level);
        let (value, magnitude) = filter.endpoint(&panels, &forcing);
        (vec![value], vec![magnitude])
    })?;
    Ok(v[0])
}

/// `⟨x(t)⟩` under a deterministic force `f`, from the mean initial state.
pub fn mean_position(
    system: &System,
    force: impl Fn(f64) -> f64,
    init: &InitialState,
    t: f64,
) -> Result<f64> {
    let free = homogeneous_solution(system, init.mean_x0, init.mean_v0, t)?;
    Ok(free + driven_response(system, t, "mean position", force)?)
}

/// `Cov[x(t), x(t')]` from the initial distribution plus every noise component.
pub fn position_covariance(
    system: &System,
    noise: &NoiseModel,
    init: &InitialState,
    t: f64,
    t2: f64,
) -> Result<f64> {
    for time in [t, t2] {
        if time.is_nan() || time < 0.0 {
            return Err(Error::domain(format!("time must be >= 0, got {time:e}")));
        }
    }
    init.validate()?;
    let mut total = init.homogeneous_covariance(system, t, t2);

    for q in noise.quadratures() {
        let carrier = q.carrier;
        let xc = |time: f64| {
            driven_response(system, time, "quadrature response", |s| (carrier * s).cos())
        };
        let xs = |time: f64| {
            driven_response(system, time, "quadrature response", |s| (carrier * s).sin())
        };
        total += q.cos_variance * xc(t)? * xc(t2)? + q.sin_variance * xs(t)? * xs(t2)?;
    }

    let strength = noise.white_strength();
    let overlap = t.min(t2);
    if strength > 0.0 && overlap > 0.0 {
        let g = ImpulseResponse::new(*system);
        let width = base_panel_width(system);
        let v = converge("white-noise covariance", |level| {
            let panels = Panels::uniform(0.0, overlap, width, level);
            let (value, magnitude) = panels.integrate(|s| g.at(t - s) * g.at(t2 - s));
            (vec![value], vec![magnitude])
        })?;
        total += strength * v[0];
    }
    Ok(total)
}
