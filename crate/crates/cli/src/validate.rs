//! Built-in validation suite behind `freelunch validate`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;
use std::time::Instant;

use freelunch_core::montecarlo::EnsembleStats;
use freelunch_core::noise::{path_rng, OracleSampler};
use freelunch_core::thermo::{
    equilibrium_deltas, free_lunch_probability, local_minima, refine_probability, reversible_points,
    Extremum, ROUNDING_SLACK,
};
use freelunch_core::{
    analyze, analyze_durations, build_noise_model, free_energy_difference, homogeneous_solution,
    position_covariance, run_ensemble, Error as CoreError, Experiment, ForceProtocol, InitialCondition,
    InitialState, NoiseModel, QuantumStateSpec, ScenarioFlags, SystemParams, WorkStatistics,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_config, Mode, RunConfig};
use crate::plot::Table;
use crate::run::{sweep_rows, write_echo, write_results, RunError};

/// Settings shared by every check.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub seed: u64,
    /// Doubles every analytic variance, which the suite must catch.
    pub inject_fault: bool,
}

impl Context {
    fn tamper(&self, mut s: WorkStatistics) -> WorkStatistics {
        if !self.inject_fault || s.variance() <= 0.0 {
            return s;
        }
        let sigma = s.std_dev();
        s.budget.thermal *= 2.0;
        s.budget.quantum_stationary *= 2.0;
        s.budget.quantum_nonstationary *= 2.0;
        // Same clamped mean, wider distribution.
        let lunch = free_lunch_probability(s.free_energy + s.significance * sigma, s.std_dev(), s.free_energy)
            .expect("clamped mean cannot violate the second law");
        s.significance = lunch.significance;
        s.probability = lunch.probability;
        s
    }

    fn analyze(&self, e: &Experiment) -> Result<WorkStatistics, CoreError> {
        Ok(self.tamper(analyze(e)?))
    }

    fn series(&self, e: &Experiment, taus: &[f64]) -> Result<Vec<WorkStatistics>, CoreError> {
        Ok(analyze_durations(e, taus)?.into_iter().map(|s| self.tamper(s)).collect())
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Verdict = Result<(bool, String), RunError>;
type CheckFn = fn(&Context) -> Verdict;

pub const CHECKS: &[(&str, CheckFn)] = &[
    ("model.table_defaults", table_defaults),
    ("response.initial_conditions", initial_conditions),
    ("response.thermal_variance", thermal_variance),
    ("noise.kernel_psd", kernel_psd),
    ("noise.identity", noise_identity),
    ("noise.sampler_equivalence", sampler_equivalence),
    ("thermo.free_energy_consistency", free_energy_consistency),
    ("thermo.gaussian_bound", gaussian_bound),
    ("thermo.reversible_maxima", reversible_maxima),
    ("thermo.classical_minima", classical_minima),
    ("thermo.quantum_only_minima", quantum_only_minima),
    ("thermo.squeezed_dead_zone", squeezed_dead_zone),
    ("thermo.scaling_laws", scaling_laws),
    ("thermo.jarzynski", jarzynski),
    ("montecarlo.equivalence", monte_carlo_equivalence),
    ("cli.config_echo", config_echo),
    ("cli.csv_round_trip", csv_round_trip),
];

/// Runs the named checks in suite order, reporting each as it finishes.
pub fn run_suite(ctx: &Context, names: &[&str], mut report: impl FnMut(&Outcome)) -> Result<Vec<Outcome>, RunError> {
    let mut outcomes = Vec::new();
    for (name, check) in CHECKS.iter().filter(|(name, _)| names.contains(name)) {
        let start = Instant::now();
        let (passed, detail) = check(ctx)?;
        let outcome = Outcome {
            name,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        };
        report(&outcome);
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

fn experiment(n: f64, theta: f64, r: f64, flags: ScenarioFlags, tau: f64) -> Result<Experiment, RunError> {
    Ok(Experiment::new(
        &SystemParams::default(),
        QuantumStateSpec::squeezed(n, theta, r),
        flags,
        tau,
    )?)
}

fn dense_grid(lo: f64, hi: f64) -> Vec<f64> {
    let period = 2.0 * PI / SystemParams::default().omega_y;
    let intervals = ((hi - lo) / period * 64.0).ceil() as usize;
    (0..=intervals)
        .map(|i| lo + (hi - lo) * i as f64 / intervals as f64)
        .collect()
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect()
}

/// Golden-section refinement around grid point `k`, keeping whichever is more extreme.
fn refined(
    ctx: &Context,
    e: &Experiment,
    grid: &[f64],
    stats: &[WorkStatistics],
    k: usize,
    seek: Extremum,
) -> Result<WorkStatistics, RunError> {
    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(grid.len() - 1)];
    let s = ctx.tamper(refine_probability(e, a, b, seek)?);
    let better = match seek {
        Extremum::Minimum => s.probability < stats[k].probability,
        Extremum::Maximum => s.probability > stats[k].probability,
    };
    Ok(if better { s } else { stats[k] })
}

fn minimum_probability(ctx: &Context, e: &Experiment, lo: f64, hi: f64) -> Result<WorkStatistics, RunError> {
    let grid = dense_grid(lo, hi);
    let stats = ctx.series(e, &grid)?;
    let k = (0..stats.len())
        .min_by(|&a, &b| stats[a].probability.total_cmp(&stats[b].probability))
        .unwrap_or(0);
    refined(ctx, e, &grid, &stats, k, Extremum::Minimum)
}

fn table_defaults(_: &Context) -> Verdict {
    let s = SystemParams::default().validate()?;
    let omega = (s.big_omega() / (2.0 * s.omega_x()) - 1.0).abs();
    let kappa = s.noise_scale();
    let expected = 1.054_571_817e-34 * 2.0 * PI * 51e3 / 4.1e-12;
    let kappa_rel = (kappa / expected - 1.0).abs();
    Ok((
        omega < 1e-15 && kappa_rel < 1e-9,
        format!("Omega/(2 omega_x) - 1 = {omega:.1e}, kappa = {kappa:.4e} N (rel. dev. {kappa_rel:.1e})"),
    ))
}

fn initial_conditions(_: &Context) -> Verdict {
    let s = SystemParams::default().validate()?;
    let (x0, v0, h) = (3e-9, -2e-4, 1e-11);
    let at0 = homogeneous_solution(&s, x0, v0, 0.0)?;
    let slope = (homogeneous_solution(&s, x0, v0, h)? - at0) / h;
    let slope_err = ((slope - v0) / v0).abs();
    Ok((
        at0 == x0 && slope_err < 1e-3,
        format!("x(0) = {at0:e} (x0 = {x0:e}), forward-difference v(0) relative error {slope_err:.1e}"),
    ))
}

fn thermal_variance(_: &Context) -> Verdict {
    let params = SystemParams {
        damping: 0.0,
        ..SystemParams::default()
    };
    let s = params.validate()?;
    let init = InitialState::thermal(&s);
    let expected = s.thermal_position_variance();
    let mut worst: f64 = 0.0;
    for t in [0.0, 1.3e-6, 7.7e-5, 4.4e-4] {
        let v = position_covariance(&s, &NoiseModel::silent(), &init, t, t)?;
        worst = worst.max((v / expected - 1.0).abs());
    }
    Ok((
        worst < 1e-12,
        format!("undamped thermal Var[x(t)] vs k_BT/(m omega_x^2): max relative deviation {worst:.1e}"),
    ))
}

fn kernel_psd(_: &Context) -> Verdict {
    let s = SystemParams::default().validate()?;
    let grid: Vec<f64> = (0..256).map(|i| i as f64 * 4.1e-7).collect();
    let mut worst: f64 = 0.0;
    for r in [0.0, 0.5, 1.0, 2.0] {
        let model = build_noise_model(&s, &QuantumStateSpec::squeezed(1.0, 0.0, r), &ScenarioFlags::quantum_only());
        let oracle = OracleSampler::new(&model, &grid)?;
        worst = worst.min(oracle.min_eigenvalue() / oracle.trace());
    }
    Ok((
        worst >= -1e-12,
        format!("256-point grids, r in {{0, 0.5, 1, 2}}: min eigenvalue / trace = {worst:.2e}"),
    ))
}

fn noise_identity(ctx: &Context) -> Verdict {
    let s = SystemParams::default().validate()?;
    let kappa2 = s.noise_scale().powi(2);
    let w = s.omega_y();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let r: f64 = rng.random_range(0.0..2.0);
        let (t, t2): (f64, f64) = (rng.random_range(0.0..1e-3), rng.random_range(0.0..1e-3));
        let model = build_noise_model(&s, &QuantumStateSpec::squeezed(1.0, 0.0, r), &ScenarioFlags::quantum_only());
        let k = model.kernel_value(t, t2)?.smooth;
        let direct = (2.0 * r).cosh() * kappa2 * (w * (t - t2)).cos() + (2.0 * r).sinh() * kappa2 * (w * (t + t2)).cos();
        worst = worst.max((k - direct).abs() / ((2.0 * r).cosh() * kappa2));
    }
    Ok((worst <= 1e-12, format!("1000 random points: max relative error {worst:.2e}")))
}

fn sampler_equivalence(ctx: &Context) -> Verdict {
    let s = SystemParams::default().validate()?;
    let model = build_noise_model(&s, &QuantumStateSpec::squeezed(1.0, 0.0, 0.5), &ScenarioFlags::quantum_only());
    let grid: Vec<f64> = (0..64).map(|i| i as f64 * 3.1e-7).collect();
    let oracle = OracleSampler::new(&model, &grid)?;
    let draws = 100_000u64;
    let m = grid.len();
    let mut sums = [vec![0.0; m], vec![0.0; m]];
    let mut prods = [vec![0.0; m * m], vec![0.0; m * m]];
    for i in 0..draws {
        let paths = [
            model.sample_quadrature_path(&grid, &mut path_rng(ctx.seed, i))?,
            oracle.sample(&mut path_rng(ctx.seed.wrapping_add(1), i)),
        ];
        for (k, path) in paths.iter().enumerate() {
            for a in 0..m {
                sums[k][a] += path[a];
                for b in a..m {
                    prods[k][a * m + b] += path[a] * path[b];
                }
            }
        }
    }
    let nf = draws as f64;
    let mut kernel = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            kernel[a * m + b] = model.kernel_value(grid[a], grid[b])?.smooth;
        }
    }
    let (mut outside, mut worst) = (0, 0.0f64);
    for a in 0..m {
        let z = (sums[0][a] - sums[1][a]) / nf / (2.0 * kernel[a * m + a] / nf).sqrt();
        worst = worst.max(z.abs());
        outside += usize::from(z.abs() > 4.0);
        for b in a..m {
            let se = (2.0 * (kernel[a * m + a] * kernel[b * m + b] + kernel[a * m + b].powi(2)) / nf).sqrt();
            let z = (prods[0][a * m + b] - prods[1][a * m + b]) / nf / se;
            worst = worst.max(z.abs());
            outside += usize::from(z.abs() > 4.0);
        }
    }
    Ok((
        outside == 0,
        format!("1e5 draws on 64 points: {outside} moments beyond 4 SE, max |z| = {worst:.2}"),
    ))
}

fn free_energy_consistency(ctx: &Context) -> Verdict {
    let s = SystemParams::default().validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (mut worst, mut max_ds) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let state = QuantumStateSpec::squeezed(
            rng.random_range(0.5..100.0),
            rng.random_range(0.0..2.0 * PI),
            rng.random_range(0.0..1.0),
        );
        let p = ForceProtocol::new(&s, state, 10f64.powf(rng.random_range(-5.0..-3.0)))?;
        let d = equilibrium_deltas(&p, s.beta())?;
        let direct = free_energy_difference(&p);
        worst = worst.max((d.df - direct).abs() / direct.abs());
        max_ds = max_ds.max(d.ds.abs());
    }
    Ok((
        worst <= 1e-12 && max_ds == 0.0,
        format!("10 protocols: max relative dF mismatch {worst:.2e}, max |dS| = {max_ds:e}"),
    ))
}

fn gaussian_bound(ctx: &Context) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (mut violations, mut max_p) = (0, 0.0f64);
    for i in 0..200 {
        let flags = ScenarioFlags {
            thermal_noise: i & 1 == 1,
            quantum_noise: i & 2 == 2,
            initial_condition: if i & 4 == 4 {
                InitialCondition::ThermalEquilibrium
            } else {
                InitialCondition::DeterministicZero
            },
        };
        let e = experiment(
            rng.random_range(0.0..=100.0),
            rng.random_range(0.0..2.0 * PI),
            rng.random_range(0.0..=1.0),
            flags,
            10f64.powf(rng.random_range(-5.0..=-3.0)),
        )?;
        let s = ctx.analyze(&e)?;
        let floor = 1e-6 * s.free_energy.abs().max(1e-35);
        max_p = max_p.max(s.probability);
        violations += usize::from(s.irreversible_work < -floor || s.probability > 0.5 + 1e-9);
    }
    Ok((violations == 0, format!("200 configs: {violations} violations, max P = {max_p:.9}")))
}

fn reversible_maxima(ctx: &Context) -> Verdict {
    let e = experiment(100.0, 0.0, 0.0, ScenarioFlags::classical(), 1e-5)?;
    let scan = reversible_points(&e, 1e-5, 1e-3)?;
    let points: Vec<f64> = scan.roots.iter().chain(&scan.tangential).copied().collect();
    let sweep = log_grid(1e-5, 1e-3, 400);
    let mut passed = !points.is_empty();
    let mut detail = format!("{} roots, {} touch zeros", scan.roots.len(), scan.tangential.len());
    for &tau in &points {
        let s = ctx.analyze(&e.with_duration(tau)?)?;
        let nearest = sweep
            .iter()
            .copied()
            .min_by(|a, b| (a - tau).abs().total_cmp(&(b - tau).abs()))
            .unwrap_or(tau);
        let ens = run_ensemble(&e.with_duration(nearest)?, 20_000, ctx.seed)?;
        let (lo, hi) = ens.stats.wilson;
        passed &= (s.probability - 0.5).abs() <= 1e-6 && lo <= 0.5 && 0.5 <= hi;
        detail += &format!("; tau*={tau:.6e}: P={:.9}, MC [{lo:.4}, {hi:.4}]", s.probability);
    }
    detail += &format!("; smallest W_irr/max = {:.3e} at {:.4e} s", scan.deepest.1 / scan.largest, scan.deepest.0);
    Ok((passed, detail))
}

fn classical_minima(ctx: &Context) -> Verdict {
    let quarter = minimum_probability(ctx, &experiment(100.0, FRAC_PI_2, 0.0, ScenarioFlags::classical(), 1e-5)?, 1e-5, 1e-3)?;
    let zero = minimum_probability(ctx, &experiment(100.0, 0.0, 0.0, ScenarioFlags::classical(), 1e-5)?, 1e-5, 1e-3)?;
    Ok((
        (quarter.probability - 0.15).abs() <= 0.05 && (zero.probability - 0.20).abs() <= 0.05,
        format!(
            "min P: theta=pi/2 {:.4} at {:.4e} s (target 0.15), theta=0 {:.4} at {:.4e} s (target 0.20)",
            quarter.probability, quarter.duration, zero.probability, zero.duration
        ),
    ))
}

fn quantum_only_minima(ctx: &Context) -> Verdict {
    let many = minimum_probability(ctx, &experiment(100.0, 0.0, 0.0, ScenarioFlags::quantum_only(), 1e-5)?, 1e-5, 1e-4)?;
    let e = experiment(1.0, 0.0, 0.0, ScenarioFlags::quantum_only(), 1e-5)?;
    let single = minimum_probability(ctx, &e, 1e-5, 1e-4)?;
    let grid = dense_grid(1e-5, 1e-3);
    let stats = ctx.series(&e, &grid)?;
    let p: Vec<f64> = stats.iter().map(|s| s.probability).collect();
    let minima = local_minima(&p)
        .into_iter()
        .map(|k| refined(ctx, &e, &grid, &stats, k, Extremum::Minimum))
        .collect::<Result<Vec<_>, _>>()?;
    let drops = minima.windows(2).filter(|w| w[1].probability < w[0].probability).count();
    Ok((
        many.probability < 0.01 && (single.probability - 0.10).abs() <= 0.05 && drops == 0,
        format!(
            "min P: n=100 {:.3e}, n=1 {:.4} (target 0.10); {} local minima, {drops} decreases",
            many.probability,
            single.probability,
            minima.len()
        ),
    ))
}

fn squeezed_dead_zone(ctx: &Context) -> Verdict {
    let e = experiment(100.0, 0.0, 0.5, ScenarioFlags::quantum_only(), 1e-5)?;
    let zone = dense_grid(1e-5, 5e-5);
    let stats = ctx.series(&e, &zone)?;
    let k = (0..stats.len())
        .max_by(|&a, &b| stats[a].probability.total_cmp(&stats[b].probability))
        .unwrap_or(0);
    let top = refined(ctx, &e, &zone, &stats, k, Extremum::Maximum)?.probability;
    let later = ctx.series(&e, &dense_grid(5e-5, 1e-3))?;
    let first = later.iter().find(|s| s.probability > 0.01);
    Ok((
        top < 0.01 && first.is_some(),
        format!(
            "max P on [1e-5, 5e-5] s = {top:.3e}; first P > 1% at {}",
            first.map_or("never".into(), |s| format!("{:.4e} s", s.duration))
        ),
    ))
}

fn scaling_laws(ctx: &Context) -> Verdict {
    let taus = log_grid(1e-5, 9e-4, 20);
    let base = ctx.series(&experiment(1.0, 0.3, 0.2, ScenarioFlags::hybrid(), 1e-5)?, &taus)?;
    let mut worst: f64 = 0.0;
    for n in [4.0, 16.0, 100.0] {
        let stats = ctx.series(&experiment(n, 0.3, 0.2, ScenarioFlags::hybrid(), 1e-5)?, &taus)?;
        for (s, b) in stats.iter().zip(&base) {
            worst = worst
                .max((s.irreversible_work / n / b.irreversible_work - 1.0).abs())
                .max((s.variance() / n / b.variance() - 1.0).abs())
                .max((s.significance / n.sqrt() / b.significance - 1.0).abs());
        }
    }
    let grid = dense_grid(1e-5, 1e-3);
    let amplitude = |r: f64| -> Result<f64, RunError> {
        let e = experiment(1.0, 0.0, r, ScenarioFlags::quantum_only(), 1e-5)?;
        Ok(ctx.series(&e, &grid)?.iter().map(|s| s.irreversible_work).fold(0.0, f64::max))
    };
    let (a5, a8) = (amplitude(0.5)?, amplitude(0.8)?);
    Ok((
        worst <= 1e-9 && a8 > a5,
        format!("max relative deviation {worst:.2e}; max W_irr r=0.8 {a8:.4e} J vs r=0.5 {a5:.4e} J"),
    ))
}

fn jarzynski(ctx: &Context) -> Verdict {
    let e = experiment(100.0, FRAC_PI_2, 0.0, ScenarioFlags::classical(), 1e-5)?;
    let beta = e.system().beta();
    let mut worst: f64 = 0.0;
    for s in ctx.series(&e, &log_grid(1e-5, 1e-3, 20))? {
        let predicted = beta * s.budget.thermal / 2.0;
        let allowed = 1e-4 * predicted.max(s.irreversible_work) + ROUNDING_SLACK * s.work_scale;
        worst = worst.max((s.irreversible_work - predicted).abs() / allowed);
    }
    Ok((
        worst <= 1.0,
        format!("theta=pi/2, 20 durations: max |W_irr - beta sigma^2/2| / allowed = {worst:.3}"),
    ))
}

fn monte_carlo_equivalence(ctx: &Context) -> Verdict {
    let configs = [
        ("classical", experiment(100.0, 0.0, 0.0, ScenarioFlags::classical(), 3.3e-5)?),
        ("coherent", experiment(1.0, 0.0, 0.0, ScenarioFlags::quantum_only(), 4.7e-5)?),
        ("squeezed", experiment(1.0, 0.0, 0.5, ScenarioFlags::quantum_only(), 2.9e-5)?),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, (name, e)) in configs.iter().enumerate() {
        let start = Instant::now();
        let s = ctx.analyze(e)?;
        let stats: EnsembleStats = run_ensemble(e, 20_000, ctx.seed.wrapping_add(i as u64))?.stats;
        let secs = start.elapsed().as_secs_f64();
        let n = 20_000f64;
        let z = (stats.mean - s.mean_work) / (s.std_dev() / n.sqrt());
        let ratio = stats.variance / s.variance();
        let ok = z.abs() <= 4.0
            && (0.9..=1.1).contains(&ratio)
            && stats.skewness.abs() <= 5.0 * (6.0 / n).sqrt()
            && stats.wilson.0 <= s.probability
            && s.probability <= stats.wilson.1
            && secs < 60.0;
        passed &= ok;
        parts.push(format!("{name}: z={z:.2} var ratio={ratio:.4} P={:.4} {secs:.1} s", s.probability));
    }
    Ok((passed, parts.join("; ")))
}

fn scratch_dir(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("freelunch-validate-{}-{tag}", std::process::id()))
}

fn small_sweep(ctx: &Context) -> Result<RunConfig, RunError> {
    let text = format!(
        "mode = sweep\nn = 4\ntheta = 0.7\nr = 0.3\nsweep_min = 2e-5\nsweep_max = 8e-5\n\
         sweep_points = 5\nmontecarlo = true\nsamples = 200\nseed = {}\n",
        ctx.seed
    );
    Ok(parse_config(&text)?)
}

fn config_echo(ctx: &Context) -> Verdict {
    let config = small_sweep(ctx)?;
    let reparsed = parse_config(&config.echo())?;
    let defaults = parse_config(&RunConfig::default().echo())? == RunConfig::default();
    let dirs = [scratch_dir("a"), scratch_dir("b")];
    let mut bytes = Vec::new();
    for (dir, c) in dirs.iter().zip([&config, &reparsed]) {
        std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        let path = write_results(dir, c.sweep.variable, &sweep_rows(c)?)?;
        write_echo(dir, c)?;
        bytes.push(std::fs::read(&path).map_err(|e| RunError::io(&path, e))?);
    }
    for dir in &dirs {
        let _ = std::fs::remove_dir_all(dir);
    }
    let identical = bytes[0] == bytes[1];
    Ok((
        reparsed == config && defaults && identical && config.mode == Mode::Sweep,
        format!("echo re-parses to the same config; rerun CSV byte-identical: {identical}"),
    ))
}

fn csv_round_trip(ctx: &Context) -> Verdict {
    let config = small_sweep(ctx)?;
    let rows = sweep_rows(&config)?;
    let dir = scratch_dir("csv");
    std::fs::create_dir_all(&dir).map_err(|e| RunError::io(&dir, e))?;
    let path = write_results(&dir, config.sweep.variable, &rows)?;
    let table = Table::read(&path)?;
    let _ = std::fs::remove_dir_all(&dir);
    let expected: Vec<&str> = ["tau"]
        .into_iter()
        .chain(crate::run::COLUMNS)
        .chain(crate::run::MC_COLUMNS)
        .collect();
    let schema = table.header == expected;
    let exact = rows.iter().enumerate().all(|(i, r)| {
        table.columns[0][i] == r.value
            && table.column("P").is_some_and(|p| p[i] == r.stats.probability)
            && table.column("W_irr").is_some_and(|w| w[i] == r.stats.irreversible_work)
    });
    Ok((
        schema && exact,
        format!("header matches the documented schema: {schema}; values bit-exact after reading back: {exact}"),
    ))
}
