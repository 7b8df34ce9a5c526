import json
import math

import numpy as np
import pytest

import fracsing as fs


def test_interval_grid():
    d = fs.interval(-1.0, 1.0, 9, 0.0)
    assert d.dim == 1
    assert d.interior_count == 7
    assert d.nodes.shape == (9, 1)


def test_kernel_weight_and_gradient_shape():
    d = fs.interval(-1.0, 1.0, 33, 1.0)
    w = fs.KernelWeights.assemble(d, 0.5, 2.0)
    x = np.linspace(0.0, 1.0, w.unknowns)
    g = w.gradient(x)
    assert g.shape == x.shape
    assert w.energy(x) > 0.0


def test_solve_constant_source():
    d = fs.interval(-1.0, 1.0, 65, 1.0)
    f = fs.Field.from_function(d, lambda x: 1.0)
    prob = fs.ProblemSpec.make(2.0, 0.5, 1.0, f)
    w = fs.KernelWeights.assemble(d, 0.5, 2.0)
    cfg = fs.SolverConfig()
    cfg.n_schedule = [1, 2, 4, 8]
    rep = fs.solve(prob, w, cfg)
    assert rep.converged
    u = rep.solution.interior_values
    assert u.min() > 0.0
    assert np.allclose(u, u[::-1], atol=1e-7)
    assert [s["n"] for s in rep.stages] == [1, 2, 4, 8]
    assert json.loads(rep.to_json())["converged"] is True


def test_exponents_example():
    t = fs.exponents(2.0, 0.5, 2, 0.5)
    assert t.m == pytest.approx(8.0 / 7.0)
    assert t.m_prime == pytest.approx(8.0)


def test_power_gap_check():
    rep = fs.power_gap_check(2.0, 0.5, 10000)
    assert rep.samples == 10000
    assert rep.violations == 0


def test_config_round_trip_and_error():
    c = fs.parse_config('{"problem": {"p": 2, "s": 0.3, "gamma": 1}}')
    assert fs.parse_config(c.to_json()) == c
    with pytest.raises(fs.ConfigError, match="problem.s"):
        fs.parse_config('{"problem": {"p": 2, "s": 0.9, "gamma": 1}}')


def test_verify_selected_checks():
    c = fs.parse_config(
        '{"problem": {"p": 2, "s": 0.3, "gamma": 1, "domain": {"M": 65}},'
        ' "verify": {"checks": ["monotonicity", "symmetry"]}}'
    )
    results = fs.verify(c)
    assert [r.name for r in results] == ["monotonicity", "symmetry"]
    assert all(r.status == "pass" for r in results)
    assert all(math.isfinite(r.margin) for r in results)
