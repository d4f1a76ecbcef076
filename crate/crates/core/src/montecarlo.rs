//! Trajectory-level sampling of the Langevin dynamics and the work functional
//! `w[x] = −∫₀^τ ḟ(t) x(t) dt`, as an oracle for the analytic pipeline.
//!
//! Paths are propagated with the exact damped-oscillator flow. The deterministic
//! force and the colored quadrature noise are held at their mid-step values;
//! white noise enters as a momentum kick of variance `2mΓk_BT·dt`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Experiment, ScenarioFlags, System};
use crate::noise::{build_noise_model, path_rng, NoiseModel};
use crate::response::{homogeneous_basis, InitialState};
use crate::thermo::{free_energy_difference, ForceProtocol, WorkStatistics};

/// Steps per period of the fastest oscillation, at least.
pub const STEPS_PER_PERIOD: usize = 64;

/// Smallest ensemble accepted.
pub const MIN_SAMPLES: usize = 100;

/// Ensembles smaller than this are flagged as low-power in comparisons.
pub const LOW_POWER_SAMPLES: usize = 1000;

/// Two-sided 99% standard-normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Uniform time grid `t_i = i·dt`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGrid {
    dt: f64,
    steps: usize,
}

impl SimGrid {
    /// Largest admissible step: `min(2π/ω_x, 2π/ω_y)/64`.
    pub fn max_step(system: &System) -> f64 {
        2.0 * std::f64::consts::PI / system.fastest_frequency() / STEPS_PER_PERIOD as f64
    }

    /// The coarsest admissible grid on `[0, τ]`.
    pub fn new(system: &System, duration: f64) -> Result<Self> {
        crate::model::check_duration(duration)?;
        let steps = (duration / Self::max_step(system)).ceil().max(1.0) as usize;
        Self::with_steps(system, duration, steps)
    }

    pub fn with_steps(system: &System, duration: f64, steps: usize) -> Result<Self> {
        crate::model::check_duration(duration)?;
        if steps == 0 {
            return Err(Error::domain("grid needs at least one step"));
        }
        let dt = duration / steps as f64;
        if dt > Self::max_step(system) * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "step {dt:e} s exceeds the bound {:e} s",
                Self::max_step(system)
            )));
        }
        Ok(Self { dt, steps })
    }

    /// Same span with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        Self {
            dt: self.dt / factor as f64,
            steps: self.steps * factor,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.steps as f64 * self.dt
    }
}

/// Exact one-step flow of `ẍ + Γẋ + ω_x²x = F/m` for a step of fixed length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPropagator {
    /// Phase-space transition matrix `exp(A dt)`.
    flow: [[f64; 2]; 2],
    /// Response of `(x, v)` to a unit force held over the step.
    force_gain: [f64; 2],
    inverse_mass: f64,
}

impl StepPropagator {
    pub fn new(system: &System, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::domain(format!("step must be > 0, got {dt:e}")));
        }
        let w2 = system.omega_x() * system.omega_x();
        let gamma = system.damping();
        let omega = system.big_omega();
        let (h1, h2) = homogeneous_basis(system, dt);
        let decay = (-0.5 * gamma * dt).exp();
        let (sin, cos) = (0.5 * omega * dt).sin_cos();
        let dh2 = decay * (cos - gamma / omega * sin);
        let m = system.mass();
        Ok(Self {
            flow: [[h1, h2], [-w2 * h2, dh2]],
            force_gain: [(1.0 - h1) / (w2 * m), h2 / m],
            inverse_mass: 1.0 / m,
        })
    }

    /// Advances `(x, v)` by one step under a constant `force` and a white-noise
    /// momentum `impulse`.
    #[inline]
    pub fn step(&self, (x, v): (f64, f64), force: f64, impulse: f64) -> (f64, f64) {
        let [[a, b], [c, d]] = self.flow;
        (
            a * x + b * v + self.force_gain[0] * force,
            c * x + d * v + self.force_gain[1] * force + impulse * self.inverse_mass,
        )
    }
}

pub fn propagate_step(
    system: &System,
    state: (f64, f64),
    dt: f64,
    force: f64,
    impulse: f64,
) -> Result<(f64, f64)> {
    Ok(StepPropagator::new(system, dt)?.step(state, force, impulse))
}

fn draw_initial<R: Rng + ?Sized>(init: &InitialState, rng: &mut R) -> (f64, f64) {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    // Cholesky factor of the 2×2 initial covariance.
    let sx = init.var_x0.sqrt();
    let (c, sv) = if sx > 0.0 {
        let c = init.cov_x0v0 / sx;
        (c, (init.var_v0 - c * c).max(0.0).sqrt())
    } else {
        (0.0, init.var_v0.sqrt())
    };
    (init.mean_x0 + sx * z1, init.mean_v0 + c * z1 + sv * z2)
}

/// One work sample `w[x]` for path `path` of the stream family `seed`.
pub fn simulate_work_sample(
    protocol: &ForceProtocol,
    noise: &NoiseModel,
    flags: &ScenarioFlags,
    grid: &SimGrid,
    seed: u64,
    path: u64,
) -> Result<f64> {
    let system = protocol.system();
    if (grid.duration() - protocol.duration()).abs() > 1e-12 * protocol.duration() {
        return Err(Error::Mismatch(format!(
            "grid spans {:e} s but the protocol lasts {:e} s",
            grid.duration(),
            protocol.duration()
        )));
    }
    let propagator = StepPropagator::new(system, grid.dt())?;
    let drive = *protocol.drive();
    let init = InitialState::for_condition(system, flags.initial_condition);
    let mut rng = path_rng(seed, path);

    let mut state = draw_initial(&init, &mut rng);
    let amplitudes: Vec<(f64, f64, f64)> = noise
        .quadratures()
        .map(|q| {
            let (a, b) = q.draw_amplitudes(&mut rng);
            (q.carrier, a, b)
        })
        .collect();
    let kick = (noise.white_strength() * grid.dt()).sqrt();

    let dt = grid.dt();
    let mut rate_x = drive.force_rate(0.0) * state.0;
    let mut work = 0.0;
    for i in 0..grid.steps() {
        let mid = (i as f64 + 0.5) * dt;
        let mut force = drive.force(mid);
        for &(carrier, a, b) in &amplitudes {
            let (s, c) = (carrier * mid).sin_cos();
            force += a * c + b * s;
        }
        let impulse = if kick > 0.0 {
            kick * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        state = propagator.step(state, force, impulse);
        let next = drive.force_rate(grid.time(i + 1)) * state.0;
        work -= 0.5 * dt * (rate_x + next);
        rate_x = next;
    }
    Ok(work)
}

/// Sum of a slice by recursive halving; the split points depend only on the
/// length, so the result is reproducible.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub start: f64,
    pub bin_width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    const MAX_BINS: usize = 4096;

    /// Freedman–Diaconis binning.
    pub fn freedman_diaconis(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        if n == 0 {
            return Self {
                start: 0.0,
                bin_width: 0.0,
                counts: Vec::new(),
            };
        }
        let quantile = |q: f64| sorted[((n - 1) as f64 * q).round() as usize];
        let (lo, hi) = (sorted[0], sorted[n - 1]);
        let iqr = quantile(0.75) - quantile(0.25);
        let mut width = 2.0 * iqr / (n as f64).cbrt();
        if width.is_nan() || width <= 0.0 || hi == lo {
            return Self {
                start: lo,
                bin_width: 0.0,
                counts: vec![n],
            };
        }
        let mut bins = ((hi - lo) / width).ceil() as usize;
        if bins > Self::MAX_BINS {
            bins = Self::MAX_BINS;
            width = (hi - lo) / bins as f64;
        }
        let bins = bins.max(1);
        let mut counts = vec![0; bins];
        for &x in &sorted {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Self {
            start: lo,
            bin_width: width,
            counts,
        }
    }
}

/// Empirical moments of a work ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleStats {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `#{w_i < ΔF}`
    pub free_lunches: usize,
    pub free_lunch_frequency: f64,
    /// 99% Wilson interval of the free-lunch frequency.
    pub wilson: (f64, f64),
}

impl EnsembleStats {
    pub fn from_samples(samples: &[f64], free_energy: f64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::domain("at least two samples are needed"));
        }
        let nf = n as f64;
        let mean = pairwise_sum(samples) / nf;
        let dev: Vec<f64> = samples.iter().map(|x| x - mean).collect();
        let m2 = pairwise_sum(&dev.iter().map(|d| d * d).collect::<Vec<_>>());
        let m3 = pairwise_sum(&dev.iter().map(|d| d * d * d).collect::<Vec<_>>());
        let m4 = pairwise_sum(&dev.iter().map(|d| (d * d) * (d * d)).collect::<Vec<_>>());
        let (skewness, excess_kurtosis) = if m2 > 0.0 {
            let v = m2 / nf;
            ((m3 / nf) / v.powf(1.5), (m4 / nf) / (v * v) - 3.0)
        } else {
            (0.0, 0.0)
        };
        let free_lunches = samples.iter().filter(|&&w| w < free_energy).count();
        Ok(Self {
            mean,
            variance: m2 / (nf - 1.0),
            skewness,
            excess_kurtosis,
            free_lunches,
            free_lunch_frequency: free_lunches as f64 / nf,
            wilson: wilson_interval(free_lunches, n, Z_99),
        })
    }
}

/// Work samples with their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub experiment: Experiment,
    pub grid: SimGrid,
    pub seed: u64,
    pub free_energy: f64,
    pub samples: Vec<f64>,
    pub stats: EnsembleStats,
    pub histogram: Histogram,
}

impl TrajectoryEnsemble {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `samples` work values on the default grid.
pub fn run_ensemble(experiment: &Experiment, samples: usize, seed: u64) -> Result<TrajectoryEnsemble> {
    let grid = SimGrid::new(experiment.system(), experiment.duration())?;
    run_ensemble_on(experiment, grid, samples, seed)
}

pub fn run_ensemble_on(
    experiment: &Experiment,
    grid: SimGrid,
    samples: usize,
    seed: u64,
) -> Result<TrajectoryEnsemble> {
    if samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "ensemble needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let protocol = ForceProtocol::from_experiment(experiment);
    let noise = build_noise_model(experiment.system(), experiment.state(), experiment.flags());
    let flags = *experiment.flags();
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|path| simulate_work_sample(&protocol, &noise, &flags, &grid, seed, path))
        .collect::<Result<_>>()?;
    let free_energy = free_energy_difference(&protocol);
    Ok(TrajectoryEnsemble {
        experiment: *experiment,
        grid,
        seed,
        free_energy,
        stats: EnsembleStats::from_samples(&values, free_energy)?,
        histogram: Histogram::freedman_diaconis(&values),
        samples: values,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    /// What `value` must satisfy, e.g. `<= 4`.
    pub criterion: String,
    pub passed: bool,
}

/// Empirical ensemble against the analytic statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub samples: usize,
    /// `(Ŵ − W)/(σ_W/√N)`
    pub mean_z: f64,
    pub variance_ratio: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub free_lunch_frequency: f64,
    pub wilson: (f64, f64),
    pub analytic_probability: f64,
    pub low_power: bool,
    pub checks: Vec<Check>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn compare_to_analytic(
    ensemble: &TrajectoryEnsemble,
    analytic: &WorkStatistics,
) -> Result<ComparisonReport> {
    let tau = ensemble.experiment.duration();
    let same_free_energy = (analytic.free_energy - ensemble.free_energy).abs()
        <= 1e-12 * analytic.free_energy.abs().max(ensemble.free_energy.abs());
    if (analytic.duration - tau).abs() > 1e-12 * tau
        || analytic.phonons != ensemble.experiment.state().n
        || !same_free_energy
    {
        return Err(Error::Mismatch(format!(
            "analytic statistics (tau = {:e} s, n = {}) do not describe the ensemble (tau = {tau:e} s, n = {})",
            analytic.duration,
            analytic.phonons,
            ensemble.experiment.state().n
        )));
    }
    let s = &ensemble.stats;
    let n = ensemble.len();
    let nf = n as f64;
    let sigma = analytic.std_dev();
    let mean_z = if sigma > 0.0 {
        (s.mean - analytic.mean_work) / (sigma / nf.sqrt())
    } else if (s.mean - analytic.mean_work).abs() <= 1e-9 * analytic.mean_work.abs() {
        0.0
    } else {
        f64::INFINITY
    };
    let variance_ratio = if analytic.variance() > 0.0 {
        s.variance / analytic.variance()
    } else if s.variance == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    let skew_limit = 5.0 * (6.0 / nf).sqrt();
    let kurt_limit = 5.0 * (24.0 / nf).sqrt();
    let p = analytic.probability;
    let checks = vec![
        Check {
            name: "mean |z|",
            value: mean_z.abs(),
            criterion: "<= 4".into(),
            passed: mean_z.abs() <= 4.0,
        },
        Check {
            name: "variance ratio",
            value: variance_ratio,
            criterion: "in [0.9, 1.1]".into(),
            passed: (0.9..=1.1).contains(&variance_ratio),
        },
        Check {
            name: "skewness",
            value: s.skewness.abs(),
            criterion: format!("<= {skew_limit:.4e}"),
            passed: s.skewness.abs() <= skew_limit,
        },
        Check {
            name: "excess kurtosis",
            value: s.excess_kurtosis.abs(),
            criterion: format!("<= {kurt_limit:.4e}"),
            passed: s.excess_kurtosis.abs() <= kurt_limit,
        },
        Check {
            name: "analytic P",
            value: p,
            criterion: format!("in Wilson 99% [{:.6}, {:.6}]", s.wilson.0, s.wilson.1),
            passed: s.wilson.0 <= p && p <= s.wilson.1,
        },
    ];
    Ok(ComparisonReport {
        samples: n,
        mean_z,
        variance_ratio,
        skewness: s.skewness,
        excess_kurtosis: s.excess_kurtosis,
        free_lunch_frequency: s.free_lunch_frequency,
        wilson: s.wilson,
        analytic_probability: p,
        low_power: n < LOW_POWER_SAMPLES,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{QuantumStateSpec, SystemParams};
    use crate::thermo::{analyze, mean_work};

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

    #[test]
    fn quarter_period_rotation() {
        let sys = undamped();
        let w = sys.omega_x();
        let x0 = 1e-9;
        let quarter = 0.5 * std::f64::consts::PI / w;
        let (x, v) = propagate_step(&sys, (x0, 0.0), quarter, 0.0, 0.0).unwrap();
        assert!(x.abs() < 1e-10 * x0);
        assert!((v / (-w * x0) - 1.0).abs() < 1e-10);
        assert!(propagate_step(&sys, (x0, 0.0), 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn exact_flow_conserves_energy() {
        let sys = undamped();
        let w = sys.omega_x();
        let p = StepPropagator::new(&sys, SimGrid::max_step(&sys)).unwrap();
        let energy = |(x, v): (f64, f64)| 0.5 * v * v + 0.5 * w * w * x * x;
        let mut s = (1e-9, 2e-4);
        let e0 = energy(s);
        for _ in 0..100_000 {
            s = p.step(s, 0.0, 0.0);
        }
        assert!((energy(s) / e0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_force_closed_form() {
        let sys = undamped();
        let w = sys.omega_x();
        let f0 = 1e-17;
        let dt = SimGrid::max_step(&sys);
        let p = StepPropagator::new(&sys, dt).unwrap();
        let mut s = (0.0, 0.0);
        for _ in 0..1000 {
            s = p.step(s, f0, 0.0);
        }
        let t = 1000.0 * dt;
        let expected = f0 / (sys.mass() * w * w) * (1.0 - (w * t).cos());
        let scale = f0 / (sys.mass() * w * w);
        assert!((s.0 - expected).abs() < 1e-6 * scale);
    }

    #[test]
    fn damped_step_matches_homogeneous_solution() {
        let sys = SystemParams {
            damping: 3e5,
            ..Default::default()
        }
        .validate()
        .unwrap();
        let (x0, v0) = (2e-9, -1e-3);
        let dt = 1.3e-7;
        let (x, _) = propagate_step(&sys, (x0, v0), dt, 0.0, 0.0).unwrap();
        let exact = crate::response::homogeneous_solution(&sys, x0, v0, dt).unwrap();
        assert!((x - exact).abs() < 1e-14 * x0);
    }

    #[test]
    fn grid_bounds() {
        let sys = table();
        let g = SimGrid::new(&sys, 1e-4).unwrap();
        assert!(g.dt() <= SimGrid::max_step(&sys));
        assert!((g.duration() - 1e-4).abs() < g.dt());
        assert!(SimGrid::with_steps(&sys, 1e-4, 3).is_err());
        assert_eq!(g.refined(2).steps(), 2 * g.steps());
    }

    #[test]
    fn no_phonons_no_work() {
        let sys = table();
        let e = Experiment::from_system(sys, QuantumStateSpec::coherent(0.0, 0.0), ScenarioFlags::hybrid(), 3e-5).unwrap();
        let proto = ForceProtocol::from_experiment(&e);
        let noise = build_noise_model(&sys, e.state(), e.flags());
        let grid = SimGrid::new(&sys, 3e-5).unwrap();
        assert_eq!(simulate_work_sample(&proto, &noise, e.flags(), &grid, 1, 2).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_run_reproduces_mean_work() {
        let sys = table();
        let flags = ScenarioFlags {
            thermal_noise: false,
            quantum_noise: false,
            initial_condition: crate::model::InitialCondition::DeterministicZero,
        };
        let tau = 4.3e-5;
        let e = Experiment::from_system(sys, QuantumStateSpec::coherent(3.0, 0.5), flags, tau).unwrap();
        let proto = ForceProtocol::from_experiment(&e);
        let noise = build_noise_model(&sys, e.state(), &flags);
        let grid = SimGrid::new(&sys, tau).unwrap().refined(4);
        let w = simulate_work_sample(&proto, &noise, &flags, &grid, 0, 0).unwrap();
        let exact = mean_work(&proto, &InitialState::zero()).unwrap();
        assert!((w / exact - 1.0).abs() < 1e-4, "{w:e} vs {exact:e}");
    }

    #[test]
    fn same_stream_same_sample() {
        let sys = table();
        let e = Experiment::from_system(sys, QuantumStateSpec::squeezed(2.0, 0.3, 0.5), ScenarioFlags::hybrid(), 2e-5).unwrap();
        let proto = ForceProtocol::from_experiment(&e);
        let noise = build_noise_model(&sys, e.state(), e.flags());
        let grid = SimGrid::new(&sys, 2e-5).unwrap();
        let a = simulate_work_sample(&proto, &noise, e.flags(), &grid, 42, 7).unwrap();
        let b = simulate_work_sample(&proto, &noise, e.flags(), &grid, 42, 7).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn ensembles_ignore_thread_count() {
        let e = Experiment::new(
            &SystemParams::default(),
            QuantumStateSpec::squeezed(5.0, 0.0, 0.5),
            ScenarioFlags::hybrid(),
            2e-5,
        )
        .unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_ensemble(&e, 500, 99).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        assert!(a.samples.iter().zip(&b.samples).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn small_ensembles_are_rejected() {
        let e = Experiment::new(&SystemParams::default(), QuantumStateSpec::default(), ScenarioFlags::classical(), 1e-5).unwrap();
        assert!(run_ensemble(&e, 99, 0).is_err());
    }

    #[test]
    fn wilson_interval_cases() {
        let (lo, hi) = wilson_interval(0, 100, Z_99);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
        let (lo, hi) = wilson_interval(50, 100, Z_99);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        // Against the direct formula at p = 0.3, n = 1000.
        let (lo, _) = wilson_interval(300, 1000, 1.96);
        let (p, n, z): (f64, f64, f64) = (0.3, 1000.0, 1.96);
        let direct = (p + z * z / (2.0 * n) - z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt())
            / (1.0 + z * z / n);
        assert!((lo - direct).abs() < 1e-15);
    }

    #[test]
    fn moments_of_a_known_sample() {
        let s = EnsembleStats::from_samples(&[1.0, 2.0, 3.0, 4.0], 2.5).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.skewness, 0.0);
        assert!((s.excess_kurtosis - (-1.36)).abs() < 1e-12);
        assert_eq!(s.free_lunches, 2);
        assert!(EnsembleStats::from_samples(&[1.0], 0.0).is_err());
    }

    #[test]
    fn pairwise_sum_matches_naive_sum_on_integers() {
        let v: Vec<f64> = (0..1001).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn histogram_counts_every_sample() {
        let v: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64).collect();
        let h = Histogram::freedman_diaconis(&v);
        assert_eq!(h.counts.iter().sum::<usize>(), 1000);
        assert!(h.bin_width > 0.0);
        let flat = Histogram::freedman_diaconis(&[2.0; 10]);
        assert_eq!(flat.counts, vec![10]);
    }

    fn classical(tau: f64) -> Experiment {
        Experiment::new(
            &SystemParams::default(),
            QuantumStateSpec::coherent(100.0, 0.0),
            ScenarioFlags::classical(),
            tau,
        )
        .unwrap()
    }

    #[test]
    fn comparison_passes_and_detects_injected_fault() {
        let e = classical(3.1e-5);
        let ens = run_ensemble(&e, 5000, 3).unwrap();
        let stats = analyze(&e).unwrap();
        let report = compare_to_analytic(&ens, &stats).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(!report.low_power);

        let mut doubled = stats;
        doubled.budget.thermal *= 2.0;
        let bad = compare_to_analytic(&ens, &doubled).unwrap();
        assert!(!bad.checks.iter().find(|c| c.name == "variance ratio").unwrap().passed);
    }

    #[test]
    fn comparison_flags_low_power_and_mismatch() {
        let e = classical(2e-5);
        let ens = run_ensemble(&e, 100, 5).unwrap();
        let stats = analyze(&e).unwrap();
        assert!(compare_to_analytic(&ens, &stats).unwrap().low_power);
        let other = analyze(&e.with_duration(3e-5).unwrap()).unwrap();
        assert!(matches!(compare_to_analytic(&ens, &other), Err(Error::Mismatch(_))));
    }

    #[test]
    fn halving_the_step_moves_the_mean_less_than_one_standard_error() {
        let e = Experiment::new(
            &SystemParams::default(),
            QuantumStateSpec::squeezed(10.0, 0.4, 0.5),
            ScenarioFlags::hybrid(),
            4e-5,
        )
        .unwrap();
        let grid = SimGrid::new(e.system(), 4e-5).unwrap();
        let coarse = run_ensemble_on(&e, grid, 10_000, 8).unwrap();
        let fine = run_ensemble_on(&e, grid.refined(2), 10_000, 8).unwrap();
        let se = (coarse.stats.variance / 10_000.0).sqrt();
        assert!((coarse.stats.mean - fine.stats.mean).abs() < se);
    }
}
