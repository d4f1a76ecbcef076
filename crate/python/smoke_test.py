"""Smoke test for the freelunch extension.

Build and install first:
    pip install maturin
    pip install --no-build-isolation -e crates/py
then run `python python/smoke_test.py` (or `pytest python/smoke_test.py`).
"""

import math
import random

import freelunch

HBAR = 1.054571817e-34
HALF_PI = math.pi / 2


def test_defaults():
    p = freelunch.SystemParams()
    assert p.T == 60.0
    assert math.isclose(p.omega_x, 2 * math.pi * 134e3)
    assert math.isclose(p.noise_scale, HBAR * 2 * math.pi * 51e3 / 4.1e-12, rel_tol=1e-12)
    assert math.isclose(p.beta, 1 / (1.380649e-23 * 60.0), rel_tol=1e-12)


def test_invalid_input_raises_value_error():
    for build in (
        lambda: freelunch.SystemParams(omega_x=-1.0),
        lambda: freelunch.Experiment(n=-1.0),
        lambda: freelunch.Experiment(tau=0.0),
        lambda: freelunch.Scenario(initial_condition="hot"),
    ):
        try:
            build()
        except ValueError:
            continue
        raise AssertionError("expected ValueError")
    assert issubclass(freelunch.NumericalError, ArithmeticError)


def test_kernel_identity():
    kappa2 = freelunch.SystemParams().noise_scale ** 2
    w = freelunch.SystemParams().omega_y
    rng = random.Random(3)
    for _ in range(200):
        r, t, t2 = rng.uniform(0, 1.5), rng.uniform(0, 1e-3), rng.uniform(0, 1e-3)
        direct = kappa2 * (math.cosh(2 * r) * math.cos(w * (t - t2)) + math.sinh(2 * r) * math.cos(w * (t + t2)))
        k = freelunch.noise_kernel(t, t2, r=r)
        assert abs(k - direct) <= 1e-11 * math.cosh(2 * r) * kappa2


def test_analytic_pipeline():
    e = freelunch.Experiment(n=100, theta=HALF_PI, scenario=freelunch.Scenario.classical(), tau=3e-4)
    s = e.analyze()
    assert s.irreversible_work >= 0
    assert 0 <= s.probability <= 0.5
    assert math.isclose(s.irreversible_work, s.mean_work - s.free_energy, rel_tol=1e-12, abs_tol=1e-40)
    # Gaussian Jarzynski relation for a force starting at zero
    assert math.isclose(s.irreversible_work, freelunch.SystemParams().beta * s.sigma2_thermal / 2, rel_tol=1e-4)
    assert math.isclose(s.probability, 0.5 * math.erfc(s.significance / math.sqrt(2)), rel_tol=1e-12)
    d = s.as_dict()
    assert d["P"] == s.probability and d["sigma2_total"] == s.variance

    taus = [1e-5 * 1.5**k for k in range(10)]
    series = e.analyze_durations(taus)
    assert [x.duration for x in series] == taus
    single = [e.with_duration(t).analyze() for t in taus]
    for a, b in zip(series, single):
        assert math.isclose(a.irreversible_work, b.irreversible_work, rel_tol=1e-9)


def test_phonon_scaling():
    taus = [2.3e-5, 7.1e-5, 4.4e-4]
    base = freelunch.Experiment(n=1, theta=0.4, r=0.2).analyze_durations(taus)
    many = freelunch.Experiment(n=16, theta=0.4, r=0.2).analyze_durations(taus)
    for a, b in zip(base, many):
        assert math.isclose(b.irreversible_work / 16, a.irreversible_work, rel_tol=1e-9)
        assert math.isclose(b.significance / 4, a.significance, rel_tol=1e-9)


def test_reversible_point():
    e = freelunch.Experiment(n=100, theta=HALF_PI, scenario=freelunch.Scenario.classical())
    roots, tangential = e.reversible_points(1e-5, 1e-3)
    assert not roots
    assert len(tangential) == 1 and math.isclose(tangential[0], 1e-3, rel_tol=1e-9)
    assert e.with_duration(tangential[0]).analyze().probability == 0.5


def test_monte_carlo_matches_analytic():
    e = freelunch.Experiment(n=1, r=0.5, scenario=freelunch.Scenario.quantum_only(), tau=2.9e-5)
    ens = e.run_ensemble(samples=5000, seed=4)
    assert len(ens) == 5000 and len(ens.samples) == 5000
    report = ens.compare(e.analyze())
    failed = [name for name, (_, _, ok) in report.items() if not ok]
    assert not failed, report
    again = e.run_ensemble(samples=5000, seed=4)
    assert again.samples == ens.samples


def test_free_lunch_probability():
    i, p = freelunch.free_lunch_probability(2.0, 1.0, 1.0)
    assert i == 1.0 and math.isclose(p, 0.5 * math.erfc(1 / math.sqrt(2)), rel_tol=1e-14)
    assert freelunch.free_lunch_probability(1.0, 0.0, 1.0) == (0.0, 0.5)


if __name__ == "__main__":
    tests = [(k, v) for k, v in sorted(globals().items()) if k.startswith("test_")]
    for name, fn in tests:
        fn()
        print(f"ok  {name}")
    print(f"{len(tests)} passed")
