"""Independent checks: exhaustive search over targets and seeded Monte Carlo.

The search does not use slopes.  It evaluates the objective directly on every
assignment of ``{0} u payoff levels`` to market paths within budget, plus
every such assignment with one path pushed towards its next level by the
leftover budget.  An optimum of a separable concave piecewise-linear program
under one linear budget always has at most one path strictly between kinks,
so this family contains it.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .claims import Claim
from .errors import CapacityError, DomainError
from .lattice import Strategy
from .scenarios import ScenarioSpace

MAX_COMBINATIONS = 4096
RNG_ALGORITHM = "numpy.random.Philox (Philox-4x64-10), SeedSequence([seed, batch])"
MC_BATCH = 1 << 16


@dataclass(frozen=True)
class OracleConfig:
    grid_points: int = 11
    refine_rounds: int = 0
    max_combinations: int = MAX_COMBINATIONS

    def __post_init__(self):
        if self.grid_points < 2:
            raise DomainError("grid_points must be >= 2")
        if self.refine_rounds < 0:
            raise DomainError("refine_rounds must be >= 0")


@dataclass(frozen=True)
class McConfig:
    n_sims: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n_sims < 1:
            raise DomainError("n_sims must be >= 1")


@dataclass(frozen=True)
class OracleResult:
    value: float
    gamma: np.ndarray
    candidates: int
    max_cost: float  # largest budget use among evaluated candidates


class _PathObjective:
    """``h_x(g) = sum_s p(x,s) min(1, g / D(x,s))`` for every path at once."""

    def __init__(self, space: ScenarioSpace, claim: Claim):
        n_sig = len(space.signal_paths)
        self.D = np.zeros((space.n_market, n_sig))
        self.P = np.zeros((space.n_market, n_sig))
        self.D[space.market, space.signal] = claim.values
        self.P[space.market, space.signal] = space.p

    def __call__(self, g: np.ndarray) -> np.ndarray:
        # g: (..., n_market) -> (..., n_market)
        g = g[..., None]
        safe = np.where(self.D > 0, self.D, 1.0)
        phi = np.where(self.D > 0, np.minimum(1.0, g / safe), 1.0)
        return (phi * self.P).sum(axis=-1)


def brute_force_search(
    space: ScenarioSpace, claim: Claim, budget: float, cfg: OracleConfig = OracleConfig()
) -> OracleResult:
    if budget < 0:
        raise DomainError("budget must be nonnegative")
    r = space.lattice.r
    n = space.n_market
    cands = []
    for x in range(n):
        d = claim.values[space.market == x]
        cands.append(np.concatenate([[0.0], np.unique(d[d > 0])]))
    count = math.prod(len(c) for c in cands)
    if count > cfg.max_combinations:
        raise CapacityError(
            f"{count} target combinations exceed the oracle cap of {cfg.max_combinations}"
        )

    idx = np.array(list(itertools.product(*[range(len(c)) for c in cands])), dtype=int)
    idx = idx.reshape(count, n)
    levels = np.stack([cands[x][idx[:, x]] for x in range(n)], axis=1)
    cost = levels @ r
    feasible = cost <= budget + 1e-12
    idx, levels, cost = idx[feasible], levels[feasible], cost[feasible]

    h = _PathObjective(space, claim)
    base = h(levels)  # (C, n)
    value = base.sum(axis=1)
    best = int(np.argmax(value))
    best_val, best_gamma, max_cost = float(value[best]), levels[best].copy(), float(cost.max())
    evaluated = levels.shape[0]

    # one path pushed towards its next level with whatever budget is left
    left = np.maximum(budget - cost, 0.0)
    for x in range(n):
        top = len(cands[x]) - 1
        can = idx[:, x] < top
        if not np.any(can):
            continue
        cur = levels[can, x]
        nxt = cands[x][idx[can, x] + 1]
        new = np.minimum(nxt, cur + left[can] / r[x])
        trial = levels[can].copy()
        trial[:, x] = new
        val = value[can] - base[can, x] + h(trial)[:, x]
        evaluated += trial.shape[0]
        max_cost = max(max_cost, float((trial @ r).max()))
        j = int(np.argmax(val))
        if val[j] > best_val:
            best_val, best_gamma = float(val[j]), trial[j].copy()

    for rnd in range(cfg.refine_rounds):
        best_val, best_gamma, extra, mc = _refine(h, r, budget, best_val, best_gamma, cfg.grid_points, rnd)
        evaluated += extra
        max_cost = max(max_cost, mc)

    exact = math.fsum(h(best_gamma[None, :])[0])
    return OracleResult(value=exact, gamma=best_gamma, candidates=evaluated, max_cost=max_cost)


def _refine(h, r, budget, best_val, gamma, grid_points, rnd):
    """Pairwise budget transfers on a shrinking grid around the incumbent."""
    n = gamma.shape[0]
    span = budget * 0.5 ** (rnd + 1)
    steps = np.linspace(-span, span, grid_points)
    evaluated, max_cost = 0, 0.0
    for a, b in itertools.permutations(range(n), 2):
        trial = np.repeat(gamma[None, :], grid_points, axis=0)
        trial[:, a] += steps / r[a]
        trial[:, b] -= steps / r[b]
        ok = (trial >= 0).all(axis=1) & (trial @ r <= budget + 1e-12)
        if not ok.any():
            continue
        trial = trial[ok]
        evaluated += trial.shape[0]
        max_cost = max(max_cost, float((trial @ r).max()))
        val = h(trial).sum(axis=1)
        j = int(np.argmax(val))
        if val[j] > best_val:
            best_val, gamma = float(val[j]), trial[j].copy()
    return best_val, gamma, evaluated, max_cost


def brute_force_optimal(
    space: ScenarioSpace, claim: Claim, budget: float, cfg: OracleConfig = OracleConfig()
) -> float:
    return brute_force_search(space, claim, budget, cfg).value


def _phi(space: ScenarioSpace, claim: Claim, strategy: Strategy) -> np.ndarray:
    v = np.asarray(strategy.terminal_values, dtype=float)[space.market]
    D = claim.values
    return np.where(D > 0, np.minimum(1.0, v / np.where(D > 0, D, 1.0)), 1.0)


def monte_carlo_eval(
    space: ScenarioSpace, claim: Claim, strategy: Strategy, cfg: McConfig = McConfig()
) -> tuple[float, float]:
    """Sample scenarios under P; return ``(mean success ratio, standard error)``."""
    phi = _phi(space, claim, strategy)
    cdf = np.cumsum(space.p)
    cdf /= cdf[-1]
    chunks = []
    done = 0
    batch = 0
    while done < cfg.n_sims:
        size = min(MC_BATCH, cfg.n_sims - done)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, batch])))
        draws = np.searchsorted(cdf, rng.random(size), side="right")
        chunks.append(phi[np.minimum(draws, phi.size - 1)])
        done += size
        batch += 1
    sample = np.concatenate(chunks)
    n = sample.size
    mean = math.fsum(sample) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((sample - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)
