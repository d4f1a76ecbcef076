//! Analytic, Monte Carlo and sweep runners, and their CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use freelunch_core::montecarlo::{EnsembleStats, Histogram};
use freelunch_core::thermo::{local_minima, refine_probability, reversible_points, Extremum};
use freelunch_core::{
    analyze, analyze_durations, compare_to_analytic, run_ensemble, ComparisonReport, Error as CoreError,
    Experiment, WorkStatistics,
};
use rayon::prelude::*;

use crate::config::{Axis, ConfigError, RunConfig};

pub const COLUMNS: [&str; 10] = [
    "W",
    "W_irr",
    "W_irr_per_n",
    "sigma2_thermal",
    "sigma2_quantum_stationary",
    "sigma2_quantum_nonstationary",
    "sigma2_total",
    "dF",
    "I",
    "P",
];

pub const MC_COLUMNS: [&str; 5] = ["W_mc", "var_mc", "freq_mc", "wilson_lo", "wilson_hi"];

pub const EXTREMA_COLUMNS: [&str; 5] = ["kind", "tau", "W_irr", "I", "P"];

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Data { path: PathBuf, message: String },
}

impl RunError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn data(path: &Path, message: impl ToString) -> Self {
        RunError::Data {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Core(e) if e.is_numerical() || matches!(e, CoreError::Mismatch(_)) => 3,
            _ => 2,
        }
    }
}

/// Full-precision scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct Row {
    pub value: f64,
    pub stats: WorkStatistics,
    pub mc: Option<EnsembleStats>,
}

impl Row {
    fn record(&self) -> Vec<String> {
        let s = &self.stats;
        let mut fields = vec![
            sci(self.value),
            sci(s.mean_work),
            sci(s.irreversible_work),
            sci(s.per_phonon(s.irreversible_work)),
            sci(s.budget.thermal),
            sci(s.budget.quantum_stationary),
            sci(s.budget.quantum_nonstationary),
            sci(s.variance()),
            sci(s.free_energy),
            sci(s.significance),
            sci(s.probability),
        ];
        if let Some(mc) = &self.mc {
            fields.extend([mc.mean, mc.variance, mc.free_lunch_frequency, mc.wilson.0, mc.wilson.1].map(sci));
        }
        fields
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExtremumRow {
    pub kind: &'static str,
    pub stats: WorkStatistics,
}

pub fn base_experiment(config: &RunConfig) -> Result<Experiment, RunError> {
    Ok(Experiment::new(&config.params, config.state, config.flags, config.tau)?)
}

fn experiment_at(config: &RunConfig, axis: Axis, value: f64) -> Result<Experiment, RunError> {
    let mut state = config.state;
    let mut tau = config.tau;
    match axis {
        Axis::Tau => tau = value,
        Axis::N => state.n = value,
        Axis::R => state.r = value,
        Axis::Theta => state.theta = value,
    }
    Ok(Experiment::new(&config.params, state, config.flags, tau)?)
}

pub fn analytic_row(config: &RunConfig) -> Result<Row, RunError> {
    let e = base_experiment(config)?;
    Ok(Row {
        value: config.tau,
        stats: analyze(&e)?,
        mc: None,
    })
}

pub fn sweep_rows(config: &RunConfig) -> Result<Vec<Row>, RunError> {
    let axis = config.sweep.variable;
    let values = config.sweep.values();
    let stats = match axis {
        Axis::Tau => analyze_durations(&experiment_at(config, axis, values[0])?, &values)?,
        _ => values
            .par_iter()
            .map(|&v| Ok(analyze(&experiment_at(config, axis, v)?)?))
            .collect::<Result<Vec<_>, RunError>>()?,
    };
    let mut rows: Vec<Row> = values
        .iter()
        .zip(stats)
        .map(|(&value, stats)| Row { value, stats, mc: None })
        .collect();
    if config.monte_carlo {
        // Every point reuses the seed (common random numbers across the sweep).
        for row in &mut rows {
            let e = experiment_at(config, axis, row.value)?;
            row.mc = Some(run_ensemble(&e, config.samples, config.seed)?.stats);
        }
    }
    Ok(rows)
}

/// Refined minima and maxima of P and the reversible points of a τ sweep.
pub fn sweep_extrema(config: &RunConfig, rows: &[Row]) -> Result<Vec<ExtremumRow>, RunError> {
    if config.sweep.variable != Axis::Tau || rows.len() < 3 {
        return Ok(Vec::new());
    }
    let base = experiment_at(config, Axis::Tau, rows[0].value)?;
    let p: Vec<f64> = rows.iter().map(|r| r.stats.probability).collect();
    let negated: Vec<f64> = p.iter().map(|x| -x).collect();
    let mut found = Vec::new();
    for (kind, seek, indices) in [
        ("min_P", Extremum::Minimum, local_minima(&p)),
        ("max_P", Extremum::Maximum, local_minima(&negated)),
    ] {
        let refined = indices
            .par_iter()
            .map(|&k| {
                let s = refine_probability(&base, rows[k - 1].value, rows[k + 1].value, seek)?;
                let better = match seek {
                    Extremum::Minimum => s.probability < rows[k].stats.probability,
                    Extremum::Maximum => s.probability > rows[k].stats.probability,
                };
                Ok(ExtremumRow {
                    kind,
                    stats: if better { s } else { rows[k].stats },
                })
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        found.extend(refined);
    }
    let scan = reversible_points(&base, config.sweep.min, config.sweep.max)?;
    for (kind, taus) in [("reversible", &scan.roots), ("reversible_tangential", &scan.tangential)] {
        for &tau in taus {
            found.push(ExtremumRow {
                kind,
                stats: analyze(&base.with_duration(tau)?)?,
            });
        }
    }
    found.sort_by(|a, b| a.stats.duration.total_cmp(&b.stats.duration));
    Ok(found)
}

pub struct MonteCarloRun {
    pub row: Row,
    pub histogram: Histogram,
    pub report: ComparisonReport,
}

pub fn monte_carlo(config: &RunConfig) -> Result<MonteCarloRun, RunError> {
    let e = base_experiment(config)?;
    let stats = analyze(&e)?;
    let ensemble = run_ensemble(&e, config.samples, config.seed)?;
    let report = compare_to_analytic(&ensemble, &stats)?;
    Ok(MonteCarloRun {
        row: Row {
            value: config.tau,
            stats,
            mc: Some(ensemble.stats),
        },
        histogram: ensemble.histogram,
        report,
    })
}

pub fn prepare_out(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, RunError> {
    csv::Writer::from_path(path).map_err(|e| RunError::data(path, e))
}

pub fn write_results(dir: &Path, axis: Axis, rows: &[Row]) -> Result<PathBuf, RunError> {
    let path = dir.join("results.csv");
    let mut w = writer(&path)?;
    let mut header = vec![axis.name()];
    header.extend(COLUMNS);
    if rows.first().is_some_and(|r| r.mc.is_some()) {
        header.extend(MC_COLUMNS);
    }
    w.write_record(&header).map_err(|e| RunError::data(&path, e))?;
    for row in rows {
        w.write_record(row.record()).map_err(|e| RunError::data(&path, e))?;
    }
    w.flush().map_err(|e| RunError::io(&path, e))?;
    Ok(path)
}

pub fn write_extrema(dir: &Path, extrema: &[ExtremumRow]) -> Result<PathBuf, RunError> {
    let path = dir.join("extrema.csv");
    let mut w = writer(&path)?;
    w.write_record(EXTREMA_COLUMNS).map_err(|e| RunError::data(&path, e))?;
    for x in extrema {
        let s = &x.stats;
        let record = [
            x.kind.to_string(),
            sci(s.duration),
            sci(s.irreversible_work),
            sci(s.significance),
            sci(s.probability),
        ];
        w.write_record(&record).map_err(|e| RunError::data(&path, e))?;
    }
    w.flush().map_err(|e| RunError::io(&path, e))?;
    Ok(path)
}

pub fn write_histogram(dir: &Path, h: &Histogram) -> Result<PathBuf, RunError> {
    let path = dir.join("histogram.csv");
    let mut w = writer(&path)?;
    w.write_record(["bin_start", "bin_end", "count"])
        .map_err(|e| RunError::data(&path, e))?;
    for (i, count) in h.counts.iter().enumerate() {
        let start = h.start + i as f64 * h.bin_width;
        w.write_record([sci(start), sci(start + h.bin_width), count.to_string()])
            .map_err(|e| RunError::data(&path, e))?;
    }
    w.flush().map_err(|e| RunError::io(&path, e))?;
    Ok(path)
}

pub fn write_echo(dir: &Path, config: &RunConfig) -> Result<PathBuf, RunError> {
    let path = dir.join("config.echo");
    fs::write(&path, config.echo()).map_err(|e| RunError::io(&path, e))?;
    Ok(path)
}
