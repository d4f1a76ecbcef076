use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn freelunch(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freelunch"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn analytic_writes_csv_and_echo() {
    let dir = TempDir::new().unwrap();
    let o = freelunch(&["analytic", "--out", "run"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("run/results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tau,W,W_irr,W_irr_per_n,sigma2_thermal,sigma2_quantum_stationary,\
         sigma2_quantum_nonstationary,sigma2_total,dF,I,P"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 11);
    assert!(row.iter().all(|f| f.contains('e')), "scientific notation: {row:?}");
    assert!(lines.next().is_none());
    let echo = fs::read_to_string(dir.path().join("run/config.echo")).unwrap();
    assert!(echo.contains("mode = analytic"));
    assert!(echo.contains("T = 6e1"));
}

#[test]
fn config_errors_exit_2_naming_line_and_key() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.cfg"), "# comment\nn = 3\nomega_x = -1\n").unwrap();
    let o = freelunch(&["analytic", "--config", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3: omega_x"), "{}", stderr(&o));

    fs::write(dir.path().join("unknown.cfg"), "colour = blue\n").unwrap();
    let o = freelunch(&["sweep", "--config", "unknown.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1: colour: unknown key"), "{}", stderr(&o));

    let o = freelunch(&["analytic", "--config", "missing.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.cfg"));
}

#[test]
fn echoed_config_reproduces_identical_csv() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("mc.cfg"),
        "n = 10\ntheta = 0.4\nr = 0.5\nsweep_min = 2e-5\nsweep_max = 6e-5\nsweep_points = 4\n\
         montecarlo = true\nsamples = 500\nseed = 11\nout = first\n",
    )
    .unwrap();
    let o = freelunch(&["sweep", "--config", "mc.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo = fs::read_to_string(dir.path().join("first/config.echo")).unwrap();
    fs::write(dir.path().join("echo.cfg"), echo).unwrap();
    let o = freelunch(&["sweep", "--config", "echo.cfg", "--out", "second"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = fs::read(dir.path().join("first/results.csv")).unwrap();
    let b = fs::read(dir.path().join("second/results.csv")).unwrap();
    assert_eq!(a, b);
    let header = String::from_utf8(a).unwrap();
    assert!(header
        .lines()
        .next()
        .unwrap()
        .ends_with(",P,W_mc,var_mc,freq_mc,wilson_lo,wilson_hi"));

    let o = freelunch(&["sweep", "--config", "mc.cfg", "--seed", "12", "--out", "third"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let c = fs::read(dir.path().join("third/results.csv")).unwrap();
    assert_ne!(fs::read(dir.path().join("first/results.csv")).unwrap(), c);
}

#[test]
fn single_point_sweep_has_one_row_and_no_plot() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("one.cfg"), "sweep_points = 1\n").unwrap();
    let o = freelunch(&["sweep", "--config", "one.cfg", "--out", "one", "--svg"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("one/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(!dir.path().join("one/probability.svg").exists());
    assert!(stdout(&o).contains("no plot"));
}

#[test]
fn plots_regenerate_identically_from_csv() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("theta.cfg"),
        "sweep_variable = theta\nsweep_min = 0\nsweep_max = 3.141592653589793\n\
         sweep_scale = linear\nsweep_points = 9\ntau = 5e-5\n",
    )
    .unwrap();
    let o = freelunch(&["sweep", "--config", "theta.cfg", "--out", "p", "--svg"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let names = ["probability.svg", "irreversible_work.svg", "variance.svg"];
    let before: Vec<Vec<u8>> = names
        .iter()
        .map(|n| fs::read(dir.path().join("p").join(n)).unwrap())
        .collect();
    for n in names {
        fs::remove_file(dir.path().join("p").join(n)).unwrap();
    }
    let o = freelunch(&["plot", "--out", "p"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for (n, b) in names.iter().zip(&before) {
        assert_eq!(&fs::read(dir.path().join("p").join(n)).unwrap(), b, "{n}");
    }
    assert!(!dir.path().join("p/extrema.csv").exists(), "extrema only for tau sweeps");
}

#[test]
fn tau_sweep_reports_refined_extrema() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("c.cfg"),
        "n = 100\ntheta = 1.5707963267948966\nquantum_noise = false\nsweep_points = 60\n",
    )
    .unwrap();
    let o = freelunch(&["sweep", "--config", "c.cfg", "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let extrema = fs::read_to_string(dir.path().join("x/extrema.csv")).unwrap();
    let mut lines = extrema.lines();
    assert_eq!(lines.next().unwrap(), "kind,tau,W_irr,I,P");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().any(|r| r[0] == "min_P"));
    let touch = rows.iter().find(|r| r[0] == "reversible_tangential").expect("touch zero at 1 ms");
    assert_eq!(touch[4].parse::<f64>().unwrap(), 0.5);
    let taus: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(taus.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn montecarlo_writes_histogram() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("m.cfg"), "samples = 2000\ntau = 3e-5\n").unwrap();
    let o = freelunch(&["montecarlo", "--config", "m.cfg", "--out", "m", "--svg"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["results.csv", "histogram.csv", "histogram.svg", "config.echo"] {
        assert!(dir.path().join("m").join(f).exists(), "{f}");
    }
    let counts: usize = fs::read_to_string(dir.path().join("m/histogram.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(counts, 2000);
    assert!(stdout(&o).contains("analytic P"));
}

#[test]
fn validate_list_prints_names_only() {
    let dir = TempDir::new().unwrap();
    let o = freelunch(&["validate", "--list"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert!(names.len() >= 15);
    assert!(names.iter().all(|n| n.contains('.') && !n.contains(' ')));
    assert!(names.contains(&"thermo.jarzynski".to_string()));
}

#[test]
fn injected_fault_is_caught() {
    let dir = TempDir::new().unwrap();
    let args = ["validate", "--only", "thermo.jarzynski", "--only", "montecarlo", "--only", "noise.identity"];
    let clean = freelunch(&args, dir.path());
    assert_eq!(clean.status.code(), Some(0), "{}", stdout(&clean));
    let mut faulty = args.to_vec();
    faulty.push("--inject-fault");
    let o = freelunch(&faulty, dir.path());
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL thermo.jarzynski"), "{out}");
    assert!(out.contains("FAIL montecarlo.equivalence"), "{out}");
    assert!(out.contains("PASS noise.identity"), "{out}");
}
