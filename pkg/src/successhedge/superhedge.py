"""Optimal hedge: replicate the market-path envelope of ``min(D, Gamma)``."""
from __future__ import annotations

import csv
import math

import numpy as np

from .claims import Claim
from .errors import DomainError
from .lattice import Lattice, Strategy, replicate
from .scenarios import ScenarioSpace
from .solver import SolverResult, clip_unit, ratio_table

VALUE_TOL = 1e-12


def upper_envelope(space: ScenarioSpace, M) -> np.ndarray:
    """Per market path maximum of ``M`` over positive-probability signal paths.

    Zero-probability scenarios never enter the space, so they are ignored
    automatically.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (space.size,):
        raise DomainError(f"random variable needs shape ({space.size},), got {M.shape}")
    out = np.full(space.n_market, -np.inf)
    np.maximum.at(out, space.market, M)
    return out


def hedge_target(space: ScenarioSpace, claim: Claim, result: SolverResult) -> np.ndarray:
    return np.minimum(upper_envelope(space, claim.values), result.gamma.gamma)


def build_optimal_strategy(
    space: ScenarioSpace, claim: Claim, result: SolverResult, lattice: Lattice | None = None
) -> Strategy:
    lattice = lattice or space.lattice
    H = hedge_target(space, claim, result)
    strategy = replicate(lattice, H)
    strategy.meta.update(budget=result.budget, target=H)
    return strategy


def evaluate_strategy(space: ScenarioSpace, claim: Claim, strategy: Strategy) -> float:
    """Exact expected success ratio of a hedge under P."""
    if strategy.min_value() < -VALUE_TOL:
        raise DomainError("strategy value process goes negative; not admissible")
    phi = ratio_table(space, claim, np.maximum(strategy.terminal_values, 0.0))
    return clip_unit(math.fsum(space.p * phi))


def write_strategy_csv(strategy: Strategy, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "node_prefix", "position", "value"])
        for step, prefix, pos, value in strategy.nodes():
            w.writerow([step, prefix, "" if math.isnan(pos) else repr(pos), repr(value)])
