use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use freelunch_cli::config::{parse_config, Mode, RunConfig};
use freelunch_cli::plot::{plot_histogram, plot_results};
use freelunch_cli::run::{
    analytic_row, monte_carlo, prepare_out, sweep_extrema, sweep_rows, write_echo, write_extrema,
    write_histogram, write_results, RunError,
};
use freelunch_cli::validate::{run_suite, Context, CHECKS};

/// Free-lunch statistics of a levitated particle driven by a quantum oscillator.
#[derive(Parser)]
#[command(name = "freelunch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic work statistics at the configured duration.
    Analytic(Common),
    /// Monte Carlo ensemble at the configured duration, compared to the analytic result.
    Montecarlo(Common),
    /// Analytic (and optional Monte Carlo) sweep over one variable.
    Sweep(Common),
    /// Run the built-in check suite.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Print check names without running them.
        #[arg(long)]
        list: bool,
        /// Double every analytic variance; the suite must then fail.
        #[arg(long)]
        inject_fault: bool,
        /// Run only checks whose name starts with this prefix (repeatable).
        #[arg(long, value_name = "PREFIX")]
        only: Vec<String>,
    },
    /// Regenerate SVG plots from results.csv (and histogram.csv if present).
    Plot {
        #[command(flatten)]
        common: Common,
        /// CSV to plot instead of <out>/results.csv.
        csv: Option<PathBuf>,
    },
}

fn load(common: &Common, mode: Mode) -> Result<RunConfig, RunError> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    config.mode = mode;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out = out.clone();
    }
    Ok(config)
}

fn summary(label: &str, value: f64) {
    println!("{label:<24}{value:.10e}");
}

fn plot_all(dir: &Path, csv: &Path) -> Result<(), RunError> {
    let plots = plot_results(csv, dir)?;
    if plots.is_empty() {
        println!("single point, no plot");
    }
    for p in plots {
        println!("wrote {}", p.display());
    }
    let histogram = dir.join("histogram.csv");
    if histogram.exists() {
        println!("wrote {}", plot_histogram(&histogram, dir)?.display());
    }
    Ok(())
}

fn selected(only: &[String]) -> Vec<&'static str> {
    CHECKS
        .iter()
        .map(|(name, _)| *name)
        .filter(|name| only.is_empty() || only.iter().any(|p| name.starts_with(p.as_str())))
        .collect()
}

fn execute(command: Command) -> Result<ExitCode, RunError> {
    match command {
        Command::Analytic(common) => {
            let config = load(&common, Mode::Analytic)?;
            let row = analytic_row(&config)?;
            prepare_out(&config.out)?;
            let csv = write_results(&config.out, freelunch_cli::config::Axis::Tau, std::slice::from_ref(&row))?;
            write_echo(&config.out, &config)?;
            let s = &row.stats;
            summary("tau [s]", s.duration);
            summary("W [J]", s.mean_work);
            summary("dF [J]", s.free_energy);
            summary("W_irr [J]", s.irreversible_work);
            summary("sigma2_thermal [J^2]", s.budget.thermal);
            summary("sigma2_q_st [J^2]", s.budget.quantum_stationary);
            summary("sigma2_q_nst [J^2]", s.budget.quantum_nonstationary);
            summary("I", s.significance);
            summary("P", s.probability);
            println!("wrote {}", csv.display());
        }
        Command::Montecarlo(common) => {
            let config = load(&common, Mode::MonteCarlo)?;
            let run = monte_carlo(&config)?;
            prepare_out(&config.out)?;
            let csv = write_results(&config.out, freelunch_cli::config::Axis::Tau, std::slice::from_ref(&run.row))?;
            write_histogram(&config.out, &run.histogram)?;
            write_echo(&config.out, &config)?;
            let r = &run.report;
            println!("samples {}  P analytic {:.6}  frequency {:.6}  Wilson 99% [{:.6}, {:.6}]", r.samples, r.analytic_probability, r.free_lunch_frequency, r.wilson.0, r.wilson.1);
            for c in &r.checks {
                println!("{:<6}{:<18}{:>14.6e}  {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.value, c.criterion);
            }
            if r.low_power {
                println!("note: fewer samples than recommended for these checks");
            }
            println!("wrote {}", csv.display());
            if common.svg {
                plot_histogram(&config.out.join("histogram.csv"), &config.out)?;
            }
        }
        Command::Sweep(common) => {
            let config = load(&common, Mode::Sweep)?;
            let rows = sweep_rows(&config)?;
            let extrema = if config.refine { sweep_extrema(&config, &rows)? } else { Vec::new() };
            prepare_out(&config.out)?;
            let csv = write_results(&config.out, config.sweep.variable, &rows)?;
            if !extrema.is_empty() {
                write_extrema(&config.out, &extrema)?;
                for x in &extrema {
                    println!("{:<22} tau {:.10e}  P {:.6}", x.kind, x.stats.duration, x.stats.probability);
                }
            }
            write_echo(&config.out, &config)?;
            println!("{} rows -> {}", rows.len(), csv.display());
            if common.svg {
                plot_all(&config.out, &csv)?;
            }
        }
        Command::Validate {
            common,
            list,
            inject_fault,
            only,
        } => {
            if list {
                for name in selected(&only) {
                    println!("{name}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            let config = load(&common, Mode::Validate)?;
            let ctx = Context { seed: config.seed, inject_fault };
            let outcomes = run_suite(&ctx, &selected(&only), |o| {
                println!("{} {:<34} {:>7.1} s  {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.seconds, o.detail);
            })?;
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Plot { common, csv } => {
            let config = load(&common, Mode::Sweep)?;
            let csv = csv.unwrap_or_else(|| config.out.join("results.csv"));
            let dir = csv.parent().map(Path::to_path_buf).unwrap_or_default();
            plot_all(&dir, &csv)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
