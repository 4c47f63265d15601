import json
import math
import os

import jsonschema
import pytest

erwlab = pytest.importorskip("erwlab")


def test_step_probabilities():
    p = erwlab.step_probabilities(d=2, m=1, beta=0.5, excited=True)
    assert p == pytest.approx([0.375, 0.125, 0.25, 0.25])
    assert sum(p) == pytest.approx(1.0)


def test_simulate_reproducible():
    a = erwlab.simulate(d=2, m=1, beta=0.5, steps=200, seed=11)
    b = erwlab.simulate(d=2, m=1, beta=0.5, steps=200, seed=11)
    assert a.xs == b.xs
    assert a.novelty == b.novelty
    c = erwlab.simulate(d=2, m=1, beta=0.5, steps=200, seed=12)
    assert a.xs != c.xs
    assert a.steps == 200
    assert len(a.xs) == 201
    assert a.novelty[0] == 1 and a.novelty[1] == 1


def test_infinite_m_is_biased_srw():
    t = erwlab.simulate(d=2, m=None, beta=0.8, steps=100, seed=5)
    assert all(f == 1 for f in t.excited)


def test_window_novelty_dominates():
    t = erwlab.simulate(d=2, m=1, beta=0.2, steps=500, seed=3)
    w8 = erwlab.window_novelty(t, 8)
    assert all(wf >= nf for wf, nf in zip(w8, t.novelty))


def test_detectors_agree():
    t = erwlab.simulate(d=2, m=1, beta=0.6, steps=5000, seed=21)
    a = erwlab.detect_direct(t.xs)
    b = erwlab.detect_sd(t.xs)
    assert a["taus"] == b["taus"]
    assert a["censored_tail"] == b["censored_tail"]
    assert len(a["taus"]) > 10


def test_cycles_and_weights():
    t = erwlab.simulate(d=2, m=1, beta=0.5, steps=20000, seed=8)
    cycles = erwlab.extract_cycles(t, beta0=0.5)
    assert len(cycles) > 100
    assert all(c["dt"] >= 1 and c["dx"] >= 1 for c in cycles)
    logm, score = erwlab.path_weight(t.eps, t.novelty, 0.6, 0.5)
    assert math.isfinite(logm) and math.isfinite(score)


def test_girsanov_exact():
    assert erwlab.girsanov_check(d=2, m=1, beta=0.5, beta0=0.0, n=4) <= 1e-12
    assert erwlab.girsanov_check(d=2, m=2, beta=0.7, beta0=0.2, n=5) <= 1e-12


def test_oracle_values():
    assert erwlab.exact_expectation(d=2, m=1, beta=0.5, n=2, obs="x") == pytest.approx(0.5)
    assert erwlab.exact_expectation(d=2, m=1, beta=0.5, n=3, obs="n") == pytest.approx(2.78125)
    sd = erwlab.exact_speed_and_derivative(d=2, m=1, beta=0.5, n=4)
    assert sd["dv_formula"] == pytest.approx(sd["dv_fd"], abs=1e-6)


def test_reweighted_mean():
    r = erwlab.reweighted_mean([1.0, 2.0, 3.0], [-1.0, -1.0, -1.0])
    assert r["mean"] == pytest.approx(2.0)
    assert r["ess"] == pytest.approx(3.0)


def test_coupling_check():
    rep = erwlab.coupled_pair_check(d=4, beta0=0.3, beta=0.5, m=4, horizon=2000, seed=17)
    assert rep["dominance_ok"]
    assert rep["shared_renewals_ok"]
    assert rep["xbar_final"] <= rep["x_final"]


def test_run_experiment_and_schema():
    config = {
        "d": 2,
        "m": 1,
        "beta_grid": [0.3, 0.6],
        "n": 500,
        "replicates": 50,
        "seed": 4,
        "estimators": ["speed_finite", "derivative_finite"],
    }
    out = json.loads(erwlab.run_experiment(json.dumps(config)))
    schema_path = os.path.join(
        os.environ.get("ERWLAB_SCHEMAS", os.path.join(os.path.dirname(__file__), "../../schemas")),
        "results.schema.json",
    )
    with open(schema_path) as f:
        schema = json.load(f)
    jsonschema.validate(out, schema)
    assert len(out["results"]) == 6  # 2 betas x (2 speed estimates + 1 derivative)
    speeds = [r for r in out["results"] if r["observable"] == "speed"]
    assert all(math.isfinite(r["stderr"]) for r in speeds)


def test_error_type():
    with pytest.raises(erwlab.ErwlabError):
        erwlab.simulate(d=1, m=1, beta=0.5, steps=10, seed=1)
