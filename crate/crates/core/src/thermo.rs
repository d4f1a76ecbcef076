//! Work statistics of the driven particle: deterministic force, mean work,
//! variance budget, free energy and the Gaussian free-lunch probability.
//!
//! Every cumulative quantity (`W(τ)`, `∫₀^τ ḟ h`, `∫₀^τ ḟ X_q`) is causal, so a
//! single filter pass over a partition whose edges include every requested
//! `τ` yields a whole duration series. Only the white-noise term needs a
//! per-duration pass, because its inner integral runs backwards from `τ`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{check_duration, Experiment, QuantumStateSpec, System};
use crate::noise::{build_noise_model, NoiseModel, QuadratureNoise};
use crate::quadrature::{converge, converge_with_magnitude, Panels};
use crate::response::{base_panel_width, homogeneous_basis, CausalFilter, FilterEvent, InitialState};

/// Relative slack allowed on `W − ΔF ≥ 0` before the mean is declared broken.
pub const SECOND_LAW_TOLERANCE: f64 = 1e-6;

/// Energy floor [J] for the second-law slack when `ΔF` vanishes.
pub const ENERGY_FLOOR: f64 = 1e-35;

/// Rounding floor on `W − ΔF`, relative to `∫|ḟ⟨x⟩|`.
pub const ROUNDING_SLACK: f64 = 64.0 * f64::EPSILON;

/// Scan density for reversible points, per drive period.
pub const SCAN_POINTS_PER_PERIOD: usize = 64;

/// Bisection stops once the bracket is this narrow [s].
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Deterministic force of a coherent or squeezed-coherent state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    omega: f64,
    theta: f64,
    /// `−2√n κ cosh r`
    cos_amplitude: f64,
    /// `−2√n κ sinh r`
    sin_amplitude: f64,
}

impl Drive {
    pub fn new(system: &System, state: &QuantumStateSpec) -> Self {
        let amplitude = -2.0 * state.n.sqrt() * system.force_scale();
        Self {
            omega: system.omega_y(),
            theta: state.theta,
            cos_amplitude: amplitude * state.r.cosh(),
            sin_amplitude: amplitude * state.r.sinh(),
        }
    }

    pub fn force(&self, t: f64) -> f64 {
        let w = self.omega * t;
        self.cos_amplitude * (w + self.theta).cos() + self.sin_amplitude * (w - self.theta).sin()
    }

    pub fn force_rate(&self, t: f64) -> f64 {
        let w = self.omega * t;
        self.omega
            * (-self.cos_amplitude * (w + self.theta).sin()
                + self.sin_amplitude * (w - self.theta).cos())
    }
}

/// The drive restricted to `[0, τ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceProtocol {
    system: System,
    state: QuantumStateSpec,
    drive: Drive,
    duration: f64,
}

impl ForceProtocol {
    pub fn new(system: &System, state: QuantumStateSpec, duration: f64) -> Result<Self> {
        state.validate()?;
        check_duration(duration)?;
        Ok(Self {
            system: *system,
            state,
            drive: Drive::new(system, &state),
            duration,
        })
    }

    pub fn from_experiment(experiment: &Experiment) -> Self {
        Self {
            system: *experiment.system(),
            state: *experiment.state(),
            drive: Drive::new(experiment.system(), experiment.state()),
            duration: experiment.duration(),
        }
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn state(&self) -> &QuantumStateSpec {
        &self.state
    }

    pub fn drive(&self) -> &Drive {
        &self.drive
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t.is_finite() && (0.0..=self.duration).contains(&t) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "time {t:e} s outside the protocol [0, {:e}] s",
                self.duration
            )))
        }
    }

    /// `f(t)` [N].
    pub fn force(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.drive.force(t))
    }

    /// `ḟ(t)` [N/s], analytic.
    pub fn force_rate(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.drive.force_rate(t))
    }

    pub fn final_force(&self) -> f64 {
        self.drive.force(self.duration)
    }
}

pub fn deterministic_force(protocol: &ForceProtocol, t: f64) -> Result<f64> {
    protocol.force(t)
}

pub fn force_rate(protocol: &ForceProtocol, t: f64) -> Result<f64> {
    protocol.force_rate(t)
}

/// `ΔF = −f(τ)²/(2mω_x²)`.
pub fn free_energy_difference(protocol: &ForceProtocol) -> f64 {
    free_energy_at(&protocol.system, protocol.final_force())
}

fn free_energy_at(system: &System, final_force: f64) -> f64 {
    let stiffness = system.mass() * system.omega_x() * system.omega_x();
    -final_force * final_force / (2.0 * stiffness)
}

/// Energy, entropy and free-energy differences between the initial and final
/// equilibrium distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumDeltas {
    /// `ΔU` [J]
    pub du: f64,
    /// Shannon entropy difference `ΔS` [nats].
    pub ds: f64,
    /// `ΔF = ΔU − ΔS/β` [J]
    pub df: f64,
}

pub fn equilibrium_deltas(protocol: &ForceProtocol, beta: f64) -> Result<EquilibriumDeltas> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::domain(format!("beta must be > 0, got {beta:e}")));
    }
    let sys = &protocol.system;
    let stiffness = sys.mass() * sys.omega_x() * sys.omega_x();
    let f = protocol.final_force();
    // Both distributions are Gaussian with variance 1/(βmω²); the final one is
    // centered on f/(mω²).
    let var_initial = 1.0 / (beta * stiffness);
    let var_final = 1.0 / (beta * stiffness);
    let mean_final = f / stiffness;
    let entropy = |var: f64| 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * var).ln();
    let ds = entropy(var_final) - entropy(var_initial);
    // ⟨u_τ⟩ − ⟨u_0⟩ with u_τ = ½mω²x² − f x and u_0 = ½mω²x²,
    // grouped so the k_BT/2 terms cancel exactly.
    let du = 0.5 * stiffness * (var_final - var_initial) + 0.5 * stiffness * mean_final * mean_final
        - f * mean_final;
    let df = du - ds / beta;
    let expected = free_energy_at(sys, f);
    if (df - expected).abs() > 1e-12 * expected.abs() + f64::MIN_POSITIVE {
        return Err(Error::Mismatch(format!(
            "equilibrium free energy {df:e} J disagrees with -f^2/(2 m omega_x^2) = {expected:e} J"
        )));
    }
    Ok(EquilibriumDeltas { du, ds, df })
}

/// Cumulative projections of the drive rate up to one duration.
#[derive(Debug, Clone, PartialEq)]
struct Projections {
    /// `−∫ ḟ x_f` with `x_f` the response to the deterministic force.
    driven_work: f64,
    /// `∫ ḟ h1`, `∫ ḟ h2`
    homogeneous: [f64; 2],
    /// `(∫ ḟ X_c, ∫ ḟ X_s)` per quadrature component.
    quadratures: Vec<[f64; 2]>,
    /// `∫ |ḟ x_f|`, `∫ |ḟ h1|`, `∫ |ḟ h2|`
    scales: [f64; 3],
}

impl Projections {
    fn mean_work(&self, init: &InitialState) -> f64 {
        self.driven_work - init.mean_x0 * self.homogeneous[0] - init.mean_v0 * self.homogeneous[1]
    }

    /// Size of the mean-work integrand, which bounds its rounding error.
    fn work_scale(&self, init: &InitialState) -> f64 {
        self.scales[0] + init.mean_x0.abs() * self.scales[1] + init.mean_v0.abs() * self.scales[2]
    }
}

/// One filter pass giving [`Projections`] at every duration in `taus`.
fn projection_series(
    system: &System,
    drive: &Drive,
    quadratures: &[QuadratureNoise],
    taus: &[f64],
) -> Result<Vec<Projections>> {
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&a, &b| taus[a].total_cmp(&taus[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| taus[i]).collect();

    let width_per = 3 + 2 * quadratures.len();
    let channels = 1 + 2 * quadratures.len();
    let filter = CausalFilter::new(system);
    let width = base_panel_width(system);

    let (flat, flat_magnitudes) = converge_with_magnitude("work moments", |level| {
        let panels = Panels::with_breaks(0.0, &sorted, width, level);
        let mut values = vec![0.0; width_per * sorted.len()];
        let mut magnitudes = vec![0.0; width_per * sorted.len()];
        let mut acc = vec![0.0; width_per];
        let mut mag = vec![0.0; width_per];
        let mut next = 0;
        filter.run(
            &panels,
            channels,
            |t, out| {
                out[0] = drive.force(t);
                for (q, noise) in quadratures.iter().enumerate() {
                    let (s, c) = (noise.carrier * t).sin_cos();
                    out[1 + 2 * q] = c;
                    out[2 + 2 * q] = s;
                }
            },
            |event| match event {
                FilterEvent::Node { t, weight, response } => {
                    let rate = drive.force_rate(t) * weight;
                    let (h1, h2) = homogeneous_basis(system, t);
                    let mut add = |k: usize, v: f64| {
                        acc[k] += v;
                        mag[k] += v.abs();
                    };
                    add(0, -rate * response[0]);
                    add(1, rate * h1);
                    add(2, rate * h2);
                    for (k, r) in response.iter().enumerate().take(channels).skip(1) {
                        add(2 + k, rate * r);
                    }
                }
                FilterEvent::Edge(e) => {
                    while next < sorted.len() && panels.break_edges[next] == e {
                        let base = next * width_per;
                        values[base..base + width_per].copy_from_slice(&acc);
                        magnitudes[base..base + width_per].copy_from_slice(&mag);
                        next += 1;
                    }
                }
            },
        );
        (values, magnitudes)
    })?;

    let mut out = vec![
        Projections {
            driven_work: 0.0,
            homogeneous: [0.0; 2],
            quadratures: Vec::new(),
            scales: [0.0; 3],
        };
        taus.len()
    ];
    for (k, &i) in order.iter().enumerate() {
        let v = &flat[k * width_per..(k + 1) * width_per];
        let m = &flat_magnitudes[k * width_per..(k + 1) * width_per];
        out[i] = Projections {
            scales: [m[0], m[1], m[2]],
            driven_work: v[0],
            homogeneous: [v[1], v[2]],
            quadratures: (0..quadratures.len())
                .map(|q| [v[3 + 2 * q], v[4 + 2 * q]])
                .collect(),
        };
    }
    Ok(out)
}

/// `∫₀^τ (∫_s^τ ḟ(t) G(t−s) dt)² ds`, the white-noise work variance per unit strength.
fn white_work_variance(system: &System, drive: &Drive, tau: f64) -> Result<f64> {
    let filter = CausalFilter::new(system);
    let width = base_panel_width(system);
    // In reversed time u = τ − s the inner integral is an ordinary causal filter.
    let v = converge("white-noise work variance", |level| {
        let panels = Panels::uniform(0.0, tau, width, level);
        let mut total = 0.0;
        filter.run(
            &panels,
            1,
            |u, out| out[0] = drive.force_rate(tau - u),
            |event| {
                if let FilterEvent::Node { weight, response, .. } = event {
                    total += weight * response[0] * response[0];
                }
            },
        );
        (vec![total], vec![total])
    })?;
    Ok(v[0])
}

fn check_durations(taus: &[f64]) -> Result<()> {
    taus.iter().try_for_each(|&t| check_duration(t))
}

/// `W = −∫₀^τ ḟ(t)⟨x(t)⟩ dt`.
pub fn mean_work(protocol: &ForceProtocol, init: &InitialState) -> Result<f64> {
    init.validate()?;
    let p = &projection_series(&protocol.system, &protocol.drive, &[], &[protocol.duration])?[0];
    Ok(p.mean_work(init))
}

/// Work variance split by source.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VarianceBudget {
    /// Initial-condition plus white thermal noise, `σ_β²` [J²].
    pub thermal: f64,
    /// Quantum stationary part [J²].
    pub quantum_stationary: f64,
    /// Quantum non-stationary part [J²]; may be negative.
    pub quantum_nonstationary: f64,
}

impl VarianceBudget {
    pub fn quantum(&self) -> f64 {
        self.quantum_stationary + self.quantum_nonstationary
    }

    pub fn total(&self) -> f64 {
        self.thermal + self.quantum()
    }
}

fn budget_from(
    p: &Projections,
    init: &InitialState,
    quadratures: &[QuadratureNoise],
    white: f64,
) -> VarianceBudget {
    let [a, b] = p.homogeneous;
    let mut budget = VarianceBudget {
        thermal: init.var_x0 * a * a + init.var_v0 * b * b + 2.0 * init.cov_x0v0 * a * b + white,
        ..Default::default()
    };
    for (q, [jc, js]) in quadratures.iter().zip(&p.quadratures) {
        // v_c jc² + v_s js² split along cos ω(t−t') and cos ω(t+t').
        budget.quantum_stationary += 0.5 * (q.cos_variance + q.sin_variance) * (jc * jc + js * js);
        budget.quantum_nonstationary += 0.5 * (q.cos_variance - q.sin_variance) * (jc * jc - js * js);
    }
    budget
}

pub fn work_variance(
    protocol: &ForceProtocol,
    init: &InitialState,
    noise: &NoiseModel,
) -> Result<VarianceBudget> {
    init.validate()?;
    let quadratures: Vec<QuadratureNoise> = noise.quadratures().copied().collect();
    let p = &projection_series(
        &protocol.system,
        &protocol.drive,
        &quadratures,
        &[protocol.duration],
    )?[0];
    let strength = noise.white_strength();
    let white = if strength > 0.0 {
        strength * white_work_variance(&protocol.system, &protocol.drive, protocol.duration)?
    } else {
        0.0
    };
    Ok(budget_from(p, init, &quadratures, white))
}

/// Significance ratio and Gaussian free-lunch probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeLunch {
    /// `I = (W − ΔF)/σ_W`
    pub significance: f64,
    /// `P(w < ΔF) = ½ erfc(I/√2)`
    pub probability: f64,
}

/// Second-law slack for a given free-energy change.
pub fn second_law_tolerance(free_energy: f64) -> f64 {
    SECOND_LAW_TOLERANCE * free_energy.abs().max(ENERGY_FLOOR)
}

/// Slack on `W − ΔF`: [`second_law_tolerance`], widened to the rounding
/// floor of a work integral of size `work_scale`.
pub fn dissipation_slack(free_energy: f64, work_scale: f64) -> f64 {
    second_law_tolerance(free_energy).max(ROUNDING_SLACK * work_scale)
}

/// Free-lunch probability of a Gaussian work distribution.
///
/// A mean dissipation that is negative but within [`second_law_tolerance`] is
/// quadrature noise and treated as zero.
pub fn free_lunch_probability(mean_work: f64, sigma: f64, free_energy: f64) -> Result<FreeLunch> {
    free_lunch_with_slack(mean_work, sigma, free_energy, second_law_tolerance(free_energy))
}

fn free_lunch_with_slack(
    mean_work: f64,
    sigma: f64,
    free_energy: f64,
    tolerance: f64,
) -> Result<FreeLunch> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::domain(format!("sigma_W must be >= 0, got {sigma:e}")));
    }
    if !mean_work.is_finite() || !free_energy.is_finite() {
        return Err(Error::domain("work and free energy must be finite"));
    }
    let irreversible = mean_work - free_energy;
    if irreversible < -tolerance {
        return Err(Error::SecondLaw {
            irreversible_work: irreversible,
            tolerance,
        });
    }
    let irreversible = irreversible.max(0.0);
    if sigma == 0.0 {
        // Delta-function limit.
        return Ok(if irreversible <= tolerance {
            FreeLunch {
                significance: 0.0,
                probability: 0.5,
            }
        } else {
            FreeLunch {
                significance: f64::INFINITY,
                probability: 0.0,
            }
        });
    }
    let significance = irreversible / sigma;
    Ok(FreeLunch {
        significance,
        probability: 0.5 * libm::erfc(significance / std::f64::consts::SQRT_2),
    })
}

/// Everything the analytic pipeline reports for one duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkStatistics {
    /// `τ` [s]
    pub duration: f64,
    /// Mean phonon number, kept for per-phonon normalization.
    pub phonons: f64,
    /// `W` [J]
    pub mean_work: f64,
    pub budget: VarianceBudget,
    /// `ΔF` [J]
    pub free_energy: f64,
    /// `W_irr = W − ΔF` [J]
    pub irreversible_work: f64,
    pub significance: f64,
    pub probability: f64,
    /// `∫₀^τ |ḟ⟨x⟩| dt` [J], the scale of the mean-work rounding error.
    pub work_scale: f64,
}

impl WorkStatistics {
    pub fn variance(&self) -> f64 {
        self.budget.total()
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().max(0.0).sqrt()
    }

    /// `x / n`, or `x` itself when `n = 0`.
    pub fn per_phonon(&self, x: f64) -> f64 {
        if self.phonons > 0.0 {
            x / self.phonons
        } else {
            x
        }
    }
}

/// Analytic statistics of one experiment.
pub fn analyze(experiment: &Experiment) -> Result<WorkStatistics> {
    Ok(analyze_durations(experiment, &[experiment.duration()])?.remove(0))
}

/// Analytic statistics at each duration, in input order; the experiment's own
/// duration is ignored.
pub fn analyze_durations(experiment: &Experiment, taus: &[f64]) -> Result<Vec<WorkStatistics>> {
    check_durations(taus)?;
    if taus.is_empty() {
        return Ok(Vec::new());
    }
    let system = experiment.system();
    let drive = Drive::new(system, experiment.state());
    let noise = build_noise_model(system, experiment.state(), experiment.flags());
    let init = InitialState::for_condition(system, experiment.flags().initial_condition);
    let quadratures: Vec<QuadratureNoise> = noise.quadratures().copied().collect();
    let series = projection_series(system, &drive, &quadratures, taus)?;
    let strength = noise.white_strength();

    taus.par_iter()
        .zip(series.par_iter())
        .map(|(&tau, p)| {
            let white = if strength > 0.0 {
                strength * white_work_variance(system, &drive, tau)?
            } else {
                0.0
            };
            let budget = budget_from(p, &init, &quadratures, white);
            let mean_work = p.mean_work(&init);
            let work_scale = p.work_scale(&init);
            let free_energy = free_energy_at(system, drive.force(tau));
            let lunch = free_lunch_with_slack(
                mean_work,
                budget.total().max(0.0).sqrt(),
                free_energy,
                dissipation_slack(free_energy, work_scale),
            )?;
            Ok(WorkStatistics {
                duration: tau,
                phonons: experiment.state().n,
                mean_work,
                budget,
                free_energy,
                irreversible_work: mean_work - free_energy,
                significance: lunch.significance,
                probability: lunch.probability,
                work_scale,
            })
        })
        .collect()
}

/// `W_irr(τ)` at each duration, without the variance machinery.
pub fn irreversible_work_series(experiment: &Experiment, taus: &[f64]) -> Result<Vec<f64>> {
    Ok(dissipation_series(experiment, taus)?
        .into_iter()
        .map(|(w, _)| w)
        .collect())
}

/// `(W_irr, slack)` at each duration.
fn dissipation_series(experiment: &Experiment, taus: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_durations(taus)?;
    if taus.is_empty() {
        return Ok(Vec::new());
    }
    let system = experiment.system();
    let drive = Drive::new(system, experiment.state());
    let init = InitialState::for_condition(system, experiment.flags().initial_condition);
    let series = projection_series(system, &drive, &[], taus)?;
    Ok(taus
        .iter()
        .zip(&series)
        .map(|(&tau, p)| {
            let free_energy = free_energy_at(system, drive.force(tau));
            (
                p.mean_work(&init) - free_energy,
                dissipation_slack(free_energy, p.work_scale(&init)),
            )
        })
        .collect())
}

/// Zeros of `W_irr(τ)` on an interval.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReversibleScan {
    /// Sign changes refined by bisection [s].
    pub roots: Vec<f64>,
    /// Grid local minima with `|W_irr|` within [`dissipation_slack`] of zero;
    /// reported, not refined [s].
    pub tangential: Vec<f64>,
    /// Smallest `W_irr` seen on the scan grid, `(τ, W_irr)`.
    pub deepest: (f64, f64),
    /// Largest `W_irr` seen on the scan grid [J].
    pub largest: f64,
    pub grid_points: usize,
}

/// Roots of `f` on a grid: sign changes bisected to `tolerance`, exact grid
/// zeros kept as they are.
pub fn bracket_roots<F>(f: F, grid: &[f64], values: &[f64], tolerance: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut roots = Vec::new();
    for i in 0..grid.len() {
        if values[i] == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() && values[i + 1] != 0.0 && (values[i] < 0.0) != (values[i + 1] < 0.0) {
            let (mut a, mut b) = (grid[i], grid[i + 1]);
            let negative_left = values[i] < 0.0;
            while b - a > tolerance {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let v = f(mid)?;
                if v == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if (v < 0.0) == negative_left {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    Ok(roots)
}

/// Scans `W_irr` on `[lo, hi]` at [`SCAN_POINTS_PER_PERIOD`] points per drive
/// period and refines every sign change.
pub fn reversible_points(experiment: &Experiment, lo: f64, hi: f64) -> Result<ReversibleScan> {
    check_duration(lo)?;
    if !(hi.is_finite() && hi > lo) {
        return Err(Error::domain(format!("scan needs hi > lo, got [{lo:e}, {hi:e}]")));
    }
    let period = 2.0 * std::f64::consts::PI / experiment.system().omega_y();
    let intervals = ((hi - lo) / period * SCAN_POINTS_PER_PERIOD as f64).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=intervals)
        .map(|i| lo + (hi - lo) * i as f64 / intervals as f64)
        .collect();
    let series = dissipation_series(experiment, &grid)?;
    let values: Vec<f64> = series.iter().map(|&(w, _)| w).collect();
    let single = |tau: f64| Ok(irreversible_work_series(experiment, &[tau])?[0]);
    let roots = bracket_roots(single, &grid, &values, ROOT_TOLERANCE)?;

    let mut scan = ReversibleScan {
        roots,
        grid_points: grid.len(),
        deepest: (grid[0], values[0]),
        largest: values[0],
        ..Default::default()
    };
    for (i, &(value, slack)) in series.iter().enumerate() {
        if value < scan.deepest.1 {
            scan.deepest = (grid[i], value);
        }
        scan.largest = scan.largest.max(value);
        let left = if i > 0 { values[i - 1].abs() } else { f64::INFINITY };
        let right = values.get(i + 1).map_or(f64::INFINITY, |v| v.abs());
        if value != 0.0 && value.abs() <= slack && value.abs() <= left && value.abs() <= right {
            scan.tangential.push(grid[i]);
        }
    }
    Ok(scan)
}

/// Indices of strict-left, weak-right local minima of a sequence.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] < values[i - 1] && values[i] <= values[i + 1])
        .collect()
}

/// Which extremum of the free-lunch probability to look for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Minimum,
    Maximum,
}

/// Golden-section search for an extremum of `P` in `[a, b]`, carried out on
/// `I` so it still works where `P` underflows.
pub fn refine_probability(
    experiment: &Experiment,
    a: f64,
    b: f64,
    seek: Extremum,
) -> Result<WorkStatistics> {
    check_duration(a)?;
    if !(b.is_finite() && b >= a) {
        return Err(Error::domain(format!("bracket needs b >= a, got [{a:e}, {b:e}]")));
    }
    let eval = |tau: f64| Ok::<_, Error>(analyze_durations(experiment, &[tau])?.remove(0));
    let score = |s: &WorkStatistics| match seek {
        Extremum::Minimum => -s.significance,
        Extremum::Maximum => s.significance,
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut s1 = eval(x1)?;
    let mut s2 = eval(x2)?;
    while hi - lo > ROOT_TOLERANCE.max(1e-10 * hi) {
        if score(&s1) <= score(&s2) {
            hi = x2;
            x2 = x1;
            s2 = s1;
            x1 = hi - ratio * (hi - lo);
            s1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            s1 = s2;
            x2 = lo + ratio * (hi - lo);
            s2 = eval(x2)?;
        }
    }
    let mut best = if score(&s1) <= score(&s2) { s1 } else { s2 };
    for end in [a, b] {
        let s = eval(end)?;
        if score(&s) < score(&best) {
            best = s;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ScenarioFlags, SystemParams};
    use proptest::prelude::*;

    fn table() -> System {
        SystemParams::default().validate().unwrap()
    }

    fn undamped() -> System {
        SystemParams {
            damping: 0.0,
            ..Default::default()
        }
        .validate()
        .unwrap()
    }

    fn experiment(state: QuantumStateSpec, flags: ScenarioFlags, tau: f64) -> Experiment {
        Experiment::from_system(table(), state, flags, tau).unwrap()
    }

    /// Undamped response to `cos(ω_y t + φ)` from rest, closed form.
    fn closed_response(sys: &System, t: f64, phase: f64) -> f64 {
        let (wx, wy) = (sys.omega_x(), sys.omega_y());
        let d = sys.mass() * (wx * wx - wy * wy);
        ((wy * t + phase).cos() - phase.cos() * (wx * t).cos()
            + wy / wx * phase.sin() * (wx * t).sin())
            / d
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn zero_phonons_no_force() {
        let p = ForceProtocol::new(&table(), QuantumStateSpec::squeezed(0.0, 1.0, 0.5), 1e-4).unwrap();
        for &t in &[0.0, 3e-5, 1e-4] {
            assert_eq!(p.force(t).unwrap(), 0.0);
            assert_eq!(p.force_rate(t).unwrap(), 0.0);
        }
        assert_eq!(mean_work(&p, &InitialState::zero()).unwrap(), 0.0);
        assert_eq!(free_energy_difference(&p), 0.0);
    }

    #[test]
    fn initial_force_value() {
        let sys = table();
        let p = ForceProtocol::new(&sys, QuantumStateSpec::coherent(1.0, 0.0), 1e-4).unwrap();
        let kappa = 1.054_571_817e-34 * 2.0 * std::f64::consts::PI * 51e3 / 4.1e-12;
        assert_eq!(p.force(0.0).unwrap(), -2.0 * kappa);
        assert!((p.force(0.0).unwrap() / -1.648e-17 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn force_outside_protocol_is_rejected() {
        let p = ForceProtocol::new(&table(), QuantumStateSpec::default(), 1e-4).unwrap();
        assert!(p.force(-1e-9).is_err());
        assert!(p.force(1.1e-4).is_err());
        assert!(p.force_rate(f64::NAN).is_err());
        assert!(ForceProtocol::new(&table(), QuantumStateSpec::default(), 0.0).is_err());
    }

    #[test]
    fn squeezed_form_reduces_to_coherent() {
        let sys = table();
        let kappa = sys.force_scale();
        let mut seed = 0x9e37_79b9_7f4a_7c15_u64;
        let mut uniform = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let theta = 2.0 * std::f64::consts::PI * uniform();
            let t = 1e-3 * uniform();
            let drive = Drive::new(&sys, &QuantumStateSpec::squeezed(3.0, theta, 0.0));
            let coherent = -2.0 * 3f64.sqrt() * kappa * (sys.omega_y() * t + theta).cos();
            assert_eq!(drive.force(t), coherent);
        }
    }

    #[test]
    fn force_rate_matches_finite_difference() {
        let sys = table();
        let drive = Drive::new(&sys, &QuantumStateSpec::squeezed(2.0, 0.7, 0.6));
        for &t in &[1e-6, 4.2e-5, 3e-4] {
            let h = 1e-11;
            let fd = (drive.force(t + h) - drive.force(t - h)) / (2.0 * h);
            assert!((drive.force_rate(t) / fd - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn free_energy_full_period() {
        let sys = table();
        let period = 2.0 * std::f64::consts::PI / sys.omega_y();
        let p = ForceProtocol::new(&sys, QuantumStateSpec::coherent(1.0, 0.0), period).unwrap();
        let kappa = sys.force_scale();
        let expected = -(2.0 * kappa).powi(2) / (2.0 * 1e-18 * sys.omega_x().powi(2));
        let df = free_energy_difference(&p);
        assert!((df / expected - 1.0).abs() < 1e-12);
        assert!((df / -1.9e-28 - 1.0).abs() < 0.02, "{df:e}");

        let p10 = ForceProtocol::new(&sys, QuantumStateSpec::coherent(10.0, 0.0), period).unwrap();
        assert!((free_energy_difference(&p10) / df - 10.0).abs() < 1e-12);

        // f(τ) = 0 at a quarter period with θ = 0.
        let q = ForceProtocol::new(&sys, QuantumStateSpec::coherent(1.0, 0.0), period / 4.0).unwrap();
        assert!(free_energy_difference(&q).abs() < 1e-30 * df.abs());
    }

    #[test]
    fn equilibrium_deltas_without_final_force() {
        let sys = table();
        let period = 2.0 * std::f64::consts::PI / sys.omega_y();
        let p = ForceProtocol::new(&sys, QuantumStateSpec::coherent(0.0, 0.0), period).unwrap();
        let d = equilibrium_deltas(&p, sys.beta()).unwrap();
        assert_eq!((d.du, d.ds, d.df), (0.0, 0.0, 0.0));
        assert!(equilibrium_deltas(&p, -1.0).is_err());
    }

    #[test]
    fn shifted_gaussian_entropy_is_unchanged() {
        // Numerical −∫ p ln p for the initial and final densities.
        let sys = table();
        let beta = sys.beta();
        let stiffness = sys.mass() * sys.omega_x().powi(2);
        let p = ForceProtocol::new(&sys, QuantumStateSpec::coherent(1e10, 0.3), 2.1e-5).unwrap();
        let mean = p.final_force() / stiffness;
        let sd = (1.0 / (beta * stiffness)).sqrt();
        let entropy = |mu: f64| {
            let density = |x: f64| {
                (-0.5 * ((x - mu) / sd).powi(2)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            };
            simpson(
                |x| {
                    let q = density(x);
                    if q > 0.0 { -q * q.ln() } else { 0.0 }
                },
                mu - 12.0 * sd,
                mu + 12.0 * sd,
                20_000,
            )
        };
        let numeric = entropy(mean) - entropy(0.0);
        let d = equilibrium_deltas(&p, beta).unwrap();
        assert!(mean.abs() > 0.1 * sd, "shift must be visible");
        assert!(numeric.abs() < 1e-9);
        assert_eq!(d.ds, 0.0);
        assert_eq!(d.df, d.du);
    }

    #[test]
    fn mean_work_matches_closed_form_response() {
        let sys = undamped();
        let state = QuantumStateSpec::coherent(4.0, 0.4);
        let tau = 3.7e-5;
        let p = ForceProtocol::new(&sys, state, tau).unwrap();
        let drive = *p.drive();
        let amplitude = -2.0 * 2.0 * sys.force_scale();
        let oracle = -simpson(
            |t| drive.force_rate(t) * amplitude * closed_response(&sys, t, 0.4),
            0.0,
            tau,
            200_000,
        );
        let w = mean_work(&p, &InitialState::zero()).unwrap();
        assert!((w / oracle - 1.0).abs() < 1e-8, "{w:e} vs {oracle:e}");
    }

    #[test]
    fn mean_work_per_phonon_is_constant() {
        let sys = table();
        let per: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&n| {
                let p = ForceProtocol::new(&sys, QuantumStateSpec::coherent(n, 0.0), 6.3e-5).unwrap();
                mean_work(&p, &InitialState::thermal(&sys)).unwrap() / n
            })
            .collect();
        for v in &per[1..] {
            assert!((v / per[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_work_from_nonzero_mean_start() {
        // Free motion x0 cos ωt against ḟ, added to the driven part.
        let sys = undamped();
        let tau = 2e-5;
        let p = ForceProtocol::new(&sys, QuantumStateSpec::coherent(1.0, 0.0), tau).unwrap();
        let x0 = 3e-10;
        let init = InitialState {
            mean_x0: x0,
            ..InitialState::zero()
        };
        let drive = *p.drive();
        let extra = -simpson(
            |t| drive.force_rate(t) * x0 * (sys.omega_x() * t).cos(),
            0.0,
            tau,
            100_000,
        );
        let w0 = mean_work(&p, &InitialState::zero()).unwrap();
        let w = mean_work(&p, &init).unwrap();
        assert!(((w - w0) / extra - 1.0).abs() < 1e-8);
    }

    #[test]
    fn silent_budget_is_zero() {
        let p = ForceProtocol::new(&table(), QuantumStateSpec::coherent(5.0, 0.2), 4e-5).unwrap();
        let b = work_variance(&p, &InitialState::zero(), &NoiseModel::silent()).unwrap();
        assert_eq!(b, VarianceBudget::default());
    }

    #[test]
    fn quantum_variance_matches_closed_form() {
        let sys = undamped();
        let r = 0.5;
        let state = QuantumStateSpec::squeezed(1.0, 0.0, r);
        let tau = 2.9e-5;
        let p = ForceProtocol::new(&sys, state, tau).unwrap();
        let noise = build_noise_model(&sys, &state, &ScenarioFlags::quantum_only());
        let budget = work_variance(&p, &InitialState::zero(), &noise).unwrap();
        let drive = *p.drive();
        let project = |phase: f64| {
            simpson(
                |t| drive.force_rate(t) * closed_response(&sys, t, phase),
                0.0,
                tau,
                200_000,
            )
        };
        let (jc, js) = (project(0.0), project(-std::f64::consts::FRAC_PI_2));
        let kappa2 = sys.noise_scale().powi(2);
        let oracle = (2.0 * r).exp() * kappa2 * jc * jc + (-2.0 * r).exp() * kappa2 * js * js;
        assert!((budget.quantum() / oracle - 1.0).abs() < 1e-7);
        assert_eq!(budget.thermal, 0.0);
    }

    #[test]
    fn thermal_variance_with_damping_matches_direct_sum() {
        // Enough damping that the white term matters; oracle assembles
        // ∫∫ ḟ ḟ Cov from response::position_covariance on a coarse grid.
        let sys = SystemParams {
            damping: 4e4,
            ..Default::default()
        }
        .validate()
        .unwrap();
        let state = QuantumStateSpec::coherent(1.0, 0.3);
        let tau = 6e-6;
        let p = ForceProtocol::new(&sys, state, tau).unwrap();
        let noise = build_noise_model(&sys, &state, &ScenarioFlags::classical());
        let init = InitialState::thermal(&sys);
        let budget = work_variance(&p, &init, &noise).unwrap();

        let n = 48;
        let gl_h = tau / n as f64;
        let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * gl_h).collect();
        let drive = *p.drive();
        let mut oracle = 0.0;
        for &t in &nodes {
            for &t2 in &nodes {
                let c = crate::response::position_covariance(&sys, &noise, &init, t, t2).unwrap();
                oracle += drive.force_rate(t) * drive.force_rate(t2) * c;
            }
        }
        oracle *= gl_h * gl_h;
        assert!((budget.thermal / oracle - 1.0).abs() < 2e-3, "{:e} vs {oracle:e}", budget.thermal);
        let ic_only = work_variance(&p, &init, &NoiseModel::silent()).unwrap().thermal;
        assert!(budget.thermal > ic_only);
    }

    #[test]
    fn variance_per_phonon_is_constant() {
        let sys = table();
        let taus = [1.3e-5, 4.4e-5, 8.1e-5];
        let base: Vec<WorkStatistics> = analyze_durations(
            &Experiment::from_system(sys, QuantumStateSpec::coherent(1.0, 0.0), ScenarioFlags::quantum_only(), 1e-5).unwrap(),
            &taus,
        )
        .unwrap();
        for n in [10.0, 100.0] {
            let e = Experiment::from_system(sys, QuantumStateSpec::coherent(n, 0.0), ScenarioFlags::quantum_only(), 1e-5).unwrap();
            for (s, b) in analyze_durations(&e, &taus).unwrap().iter().zip(&base) {
                assert!((s.budget.quantum() / n / b.budget.quantum() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn nonstationary_part_goes_negative() {
        let e = experiment(
            QuantumStateSpec::squeezed(1.0, 0.0, 0.8),
            ScenarioFlags::quantum_only(),
            1e-5,
        );
        let taus: Vec<f64> = (0..200).map(|i| 1e-5 + i as f64 * 4.5e-7).collect();
        let stats = analyze_durations(&e, &taus).unwrap();
        assert!(stats.iter().any(|s| s.budget.quantum_nonstationary < 0.0));
        assert!(stats.iter().all(|s| s.variance() >= 0.0));
    }

    /// Maclaurin series of erf, adequate for small arguments.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for k in 1..60 {
            term *= -x * x / k as f64;
            sum += term / (2 * k + 1) as f64;
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    }

    #[test]
    fn free_lunch_values() {
        let p = free_lunch_probability(-1e-28, 1e-29, -1e-28).unwrap();
        assert_eq!(p.probability, 0.5);
        assert_eq!(p.significance, 0.0);

        let one = free_lunch_probability(2e-28, 1e-28, 1e-28).unwrap();
        let oracle = 0.5 * (1.0 - erf_series(std::f64::consts::FRAC_1_SQRT_2));
        assert!((one.significance - 1.0).abs() < 1e-15);
        assert!((one.probability - oracle).abs() < 1e-12);
        assert!((one.probability - 0.158_655).abs() < 1e-6);

        let far = free_lunch_probability(40e-28, 1e-28, 0.0).unwrap();
        assert!(far.probability >= 0.0 && far.probability < 1e-300);
    }

    #[test]
    fn delta_limit() {
        assert_eq!(free_lunch_probability(1.0, 0.0, 1.0).unwrap().probability, 0.5);
        assert_eq!(free_lunch_probability(2.0, 0.0, 1.0).unwrap().probability, 0.0);
        assert!(free_lunch_probability(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn second_law_violation_is_an_integrity_error() {
        let err = free_lunch_probability(-2e-28, 1e-29, -1e-28).unwrap_err();
        assert!(matches!(err, Error::SecondLaw { .. }));
        assert!(err.is_numerical());
        // Inside the slack: treated as reversible.
        let p = free_lunch_probability(-1e-28 - 1e-36, 1e-29, -1e-28).unwrap();
        assert_eq!(p.probability, 0.5);
    }

    #[test]
    fn jarzynski_at_quarter_phase() {
        let e = experiment(
            QuantumStateSpec::coherent(100.0, std::f64::consts::FRAC_PI_2),
            ScenarioFlags::classical(),
            1e-5,
        );
        let beta = e.system().beta();
        let taus = [1e-5, 3.3e-5, 1.17e-4, 5e-4, 1e-3];
        for s in analyze_durations(&e, &taus).unwrap() {
            let predicted = beta * s.budget.thermal / 2.0;
            // At 1 ms both trap periods close and both sides vanish to rounding.
            let allowed = 1e-4 * predicted.max(s.irreversible_work) + ROUNDING_SLACK * s.work_scale;
            assert!((s.irreversible_work - predicted).abs() <= allowed);
        }
        let s = analyze(&e.with_duration(1e-3).unwrap()).unwrap();
        assert_eq!(s.probability, 0.5);
    }

    #[test]
    fn series_equals_single_evaluations() {
        let e = experiment(
            QuantumStateSpec::squeezed(3.0, 1.1, 0.4),
            ScenarioFlags::hybrid(),
            1e-5,
        );
        let taus = [7.7e-5, 1.2e-5, 4.1e-5, 1.2e-5];
        let series = analyze_durations(&e, &taus).unwrap();
        for (s, &tau) in series.iter().zip(&taus) {
            let single = analyze(&e.with_duration(tau).unwrap()).unwrap();
            assert_eq!(s.duration, tau);
            assert!((s.mean_work / single.mean_work - 1.0).abs() < 1e-8);
            assert!((s.variance() / single.variance() - 1.0).abs() < 1e-8);
        }
        assert_eq!(series[1], series[3]);
    }

    #[test]
    fn bisection_on_a_known_function() {
        let f = |x: f64| Ok((x * 1e5).sin());
        let grid: Vec<f64> = (0..=100).map(|i| 1e-5 + i as f64 * 1e-6).collect();
        let values: Vec<f64> = grid.iter().map(|&x| f(x).unwrap()).collect();
        let roots = bracket_roots(f, &grid, &values, 1e-15).unwrap();
        let expected: Vec<f64> = (1..=3).map(|k| k as f64 * std::f64::consts::PI * 1e-5).collect();
        assert_eq!(roots.len(), expected.len());
        for (r, e) in roots.iter().zip(&expected) {
            assert!((r - e).abs() < 1e-14);
        }
        // A tangential zero has no sign change.
        let g = |x: f64| Ok((x * 1e5).sin().powi(2));
        let values: Vec<f64> = grid.iter().map(|&x| g(x).unwrap()).collect();
        assert!(bracket_roots(g, &grid, &values, 1e-15).unwrap().is_empty());
    }

    #[test]
    fn classical_scan_reports_without_sign_changes() {
        let e = experiment(QuantumStateSpec::coherent(100.0, 0.0), ScenarioFlags::classical(), 1e-5);
        let scan = reversible_points(&e, 1e-5, 1e-4).unwrap();
        assert!(scan.grid_points > 64 * 13);
        // Mean dissipation never changes sign.
        assert!(scan.roots.is_empty());
        assert!(scan.deepest.1 > 0.0 && scan.deepest.1 < scan.largest);
    }

    #[test]
    fn local_minima_indices() {
        assert_eq!(local_minima(&[3.0, 1.0, 2.0, 0.5, 0.5, 4.0]), vec![1, 3]);
        assert!(local_minima(&[1.0]).is_empty());
    }

    #[test]
    fn golden_section_beats_the_grid() {
        let e = experiment(QuantumStateSpec::coherent(1.0, 0.0), ScenarioFlags::quantum_only(), 1e-5);
        let taus: Vec<f64> = (0..40).map(|i| 1e-5 + i as f64 * 5e-7).collect();
        let stats = analyze_durations(&e, &taus).unwrap();
        let k = (0..stats.len())
            .min_by(|&a, &b| stats[a].probability.total_cmp(&stats[b].probability))
            .unwrap();
        let (a, b) = (taus[k.saturating_sub(1)], taus[(k + 1).min(taus.len() - 1)]);
        let best = refine_probability(&e, a, b, Extremum::Minimum).unwrap();
        assert!(best.probability <= stats[k].probability);
        assert!(best.duration >= a && best.duration <= b);

        let k = (0..stats.len())
            .max_by(|&a, &b| stats[a].probability.total_cmp(&stats[b].probability))
            .unwrap();
        let (a, b) = (taus[k.saturating_sub(1)], taus[(k + 1).min(taus.len() - 1)]);
        let top = refine_probability(&e, a, b, Extremum::Maximum).unwrap();
        assert!(top.probability >= stats[k].probability);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn second_law_and_bound_hold(
            n in 0.0f64..100.0,
            r in 0.0f64..1.0,
            theta in 0.0f64..std::f64::consts::TAU,
            log_tau in -5.0f64..-3.5,
            scenario in 0usize..3,
        ) {
            let flags = [ScenarioFlags::classical(), ScenarioFlags::quantum_only(), ScenarioFlags::hybrid()][scenario];
            let e = experiment(QuantumStateSpec::squeezed(n, theta, r), flags, 10f64.powf(log_tau));
            let s = analyze(&e).unwrap();
            prop_assert!(s.irreversible_work >= -second_law_tolerance(s.free_energy));
            prop_assert!(s.probability <= 0.5 + 1e-9);
            prop_assert!(s.free_energy <= 0.0);
        }
    }
}
