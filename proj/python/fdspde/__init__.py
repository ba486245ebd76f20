"""Finite-difference solver for the stochastic heat equation with bounded drift on the circle."""

import json

from ._core import (
    CflViolation,
    ConfigError,
    FdspdeError,
    Grid,
    GridError,
    NestingError,
    NoiseExhausted,
    apply_semigroup,
    build_id,
    discrete_heat_kernel,
    heat_kernel,
    kernel_distance_sq,
    lambda_disc,
    noise_cells,
    ou_coupling_error_sq,
    q_cont,
    q_disc,
    random_walk_semigroup,
    run_cli,
    simulate,
)
from . import _core


def default_plan():
    return json.loads(_core._default_plan())


def estimate_rates(**overrides):
    """Monte Carlo strong-error experiment; keyword arguments override plan fields."""
    plan = default_plan()
    plan.update(overrides)
    return json.loads(_core._estimate_rates(json.dumps(plan)))


def deterministic_rate(initial="sine", levels=(8, 16, 32, 64), t=0.25, c=0.25):
    return json.loads(_core._deterministic_rate(initial, list(levels), t, c))


def verify(**config):
    return json.loads(_core._verify(json.dumps(config)))


__all__ = [name for name in dir() if not name.startswith("_")]
