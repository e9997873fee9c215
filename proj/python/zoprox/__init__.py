"""Zeroth-order proximal stochastic solvers (ZO-ProxSVRG, ZO-ProxSAGA and baselines)."""

from ._zoprox import *  # noqa: F401,F403
from ._zoprox import Algorithm, ComponentOracle, EstimatorKind, SolverConfig, solve

__all__ = [name for name in dir() if not name.startswith("_")]


def minimize(fn, n, dim, x0, reg, algorithm=Algorithm.ProxSVRG, **config):
    """Run a solver on fn(i, x) -> float with SolverConfig fields given as keywords."""
    from ._zoprox import FunctionOracle

    oracle = fn if isinstance(fn, ComponentOracle) else FunctionOracle(n, dim, fn)
    budget = config.pop("budget", None)
    grad_map_every = config.pop("grad_map_every", 0)
    cfg = SolverConfig()
    for key, value in config.items():
        if not hasattr(cfg, key):
            raise TypeError(f"unknown solver option {key!r}")
        setattr(cfg, key, value)
    return solve(algorithm, oracle, reg, x0, cfg, grad_map_every=grad_map_every, budget=budget)
