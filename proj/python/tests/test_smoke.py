import math

import numpy as np
import pytest

import fdspde


def test_grid():
    g = fdspde.Grid(8, 0.25)
    assert g.num_space == 16
    assert g.h == pytest.approx(0.25 / 256)
    with pytest.raises(fdspde.CflViolation):
        fdspde.Grid(8, 0.6)


def test_semigroups_agree():
    g = fdspde.Grid(4)
    f = np.cos(np.arange(8) * 1.3)
    t = 10 * g.h
    np.testing.assert_allclose(fdspde.apply_semigroup(g, f, t), fdspde.random_walk_semigroup(g, f, t), atol=1e-12)


def test_heat_kernel_mass():
    xs = (np.arange(4096) + 0.5) / 4096
    assert np.mean([fdspde.heat_kernel(0.01, x) for x in xs]) == pytest.approx(1.0, rel=1e-10)


def test_q_functions():
    g = fdspde.Grid(2)
    assert fdspde.q_disc(g, 1 / 64) == 1 / 16
    assert fdspde.q_cont(0.0) == 0.0
    assert 0 < fdspde.ou_coupling_error_sq(fdspde.Grid(8), 0.25) < 0.05


def test_noise_and_simulate():
    g = fdspde.Grid(4)
    cells = fdspde.noise_cells(g, 0.25, seed=3)
    assert cells.shape == (64, 8)
    assert np.var(cells) == pytest.approx(g.h / 8, rel=0.3)
    np.testing.assert_array_equal(cells, fdspde.noise_cells(g, 0.25, seed=3))
    traj = fdspde.simulate(g, "sign", "sine", 0.25, seed=3)
    assert traj.shape == (65, 8)
    assert np.all(np.isfinite(traj))


def test_rates_and_verify():
    r = fdspde.estimate_rates(levels=[4, 8], reference_n=16, horizon=0.0625, samples=16, workers=1)
    assert len(r["per_level"]) == 2
    assert r["per_level"][1]["error"] < r["per_level"][0]["error"]
    d = fdspde.deterministic_rate()
    assert d["slope"] <= -0.9
    v = fdspde.verify(only=["cfl", "summation"])
    assert v["pass"]
    with pytest.raises(fdspde.ConfigError):
        fdspde.verify(bogus=1)


def test_cli_help():
    code, out, _ = fdspde.run_cli(["--help"])
    assert code == 0
    assert "converge" in out
